use std::collections::BTreeSet;
use std::fmt;

use crate::doctrine::{Report, Violation};
use crate::formula::Formula;
use crate::lang::{pool_name, PredicateFamily};
use crate::syntactic::{tuple_at, tuple_count, FiniteStructure};
use crate::theory::prefix_axiom;

use super::{PrefixAtom, PrefixError, FAMILY};

/// The sentence `∀x1..xn (R_n(x1..xn) ↔ ∃x_{n+1} R_{n+1}(x1..x_{n+1}))`.
pub fn axiom_alpha(n: usize) -> Formula {
    prefix_axiom(FAMILY, n)
}

/// A language of words over a finite alphabet, truncated at a fixed length.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WordLanguageModel {
    pub alphabet: Vec<String>,
    pub length: usize,
    pub words: BTreeSet<Vec<usize>>,
}

impl WordLanguageModel {
    pub fn new(alphabet: Vec<String>, length: usize) -> Self {
        Self {
            alphabet,
            length,
            words: BTreeSet::new(),
        }
    }

    /// The language of every word up to the truncation length.
    pub fn full(alphabet: Vec<String>, length: usize) -> Self {
        let size = alphabet.len();
        let mut m = Self::new(alphabet, length);
        for n in 0..=length {
            for i in 0..tuple_count(size, n).unwrap_or(0) {
                m.words.insert(tuple_at(size, n, i));
            }
        }
        m
    }

    pub fn contains(&self, w: &[usize]) -> bool {
        self.words.contains(w)
    }

    pub fn render(&self, w: &[usize]) -> String {
        if w.is_empty() {
            return "eps".into();
        }
        w.iter()
            .map(|&a| self.alphabet.get(a).cloned().unwrap_or_else(|| format!("?{a}")))
            .collect::<Vec<_>>()
            .join(".")
    }

    /// The structure on the alphabet where `R_n` holds of the words of length `n`, for
    /// `n` up to the truncation length.
    pub fn to_structure(&self) -> FiniteStructure {
        let mut m = FiniteStructure::new(self.alphabet.len());
        let family = PredicateFamily::new(FAMILY);
        for n in 0..=self.length {
            let tuples: Vec<Vec<usize>> = self.words.iter().filter(|w| w.len() == n).cloned().collect();
            m.set_relation(&family.symbol(n), n, &tuples)
                .expect("words lie over the alphabet");
        }
        m
    }
}

impl fmt::Display for WordLanguageModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(words (alphabet")?;
        for a in &self.alphabet {
            write!(f, " {a}")?;
        }
        write!(f, ") (length {}) (language", self.length)?;
        for w in &self.words {
            write!(f, " {}", self.render(w))?;
        }
        write!(f, "))")
    }
}

/// Checks prefix closure, extendability below the truncation length, and the truth of
/// `α_j` for `j ≤ up_to` with witnesses searched inside the truncation.
pub fn verify_t_axioms(m: &WordLanguageModel, up_to: usize) -> Result<Report, PrefixError> {
    if up_to + 1 > m.length {
        return Err(PrefixError::TruncationTooShort {
            requested: up_to,
            length: m.length,
        });
    }
    let mut report = Report::new();
    let size = m.alphabet.len();
    for w in &m.words {
        if w.len() > m.length || w.iter().any(|&a| a >= size) {
            report.push(Violation::new("word-out-of-range").with("word", m.render(w)));
            continue;
        }
        if let Some(p) = (0..w.len()).find(|&i| !m.contains(&w[..i])) {
            report.push(
                Violation::new("prefix-closure")
                    .with("word", m.render(w))
                    .with("missing", m.render(&w[..p])),
            );
        }
        if w.len() < m.length && !extends(m, w) {
            report.push(Violation::new("not-extendable").with("word", m.render(w)));
        }
    }
    for j in 0..=up_to {
        for i in 0..tuple_count(size, j).unwrap_or(0) {
            let t = tuple_at(size, j, i);
            if m.contains(&t) != extends(m, &t) {
                report.push(
                    Violation::new("axiom-alpha")
                        .with("n", j)
                        .with("tuple", m.render(&t)),
                );
            }
        }
    }
    Ok(report)
}

fn extends(m: &WordLanguageModel, w: &[usize]) -> bool {
    (0..m.alphabet.len()).any(|a| {
        let mut v = w.to_vec();
        v.push(a);
        m.contains(&v)
    })
}

/// The model refuting `⋀P ≤ ⋁N` over a context of length `k`: alphabet `x1..xk, c`, the
/// variables denoting their own letters, and the language of prefixes of the positive
/// tuples padded with `c`. The truncation length is one more than the largest arity.
pub fn word_countermodel(
    k: usize,
    pos: &[PrefixAtom],
    neg: &[PrefixAtom],
) -> Result<(WordLanguageModel, Vec<usize>), PrefixError> {
    let length = pos.iter().chain(neg).map(PrefixAtom::arity).max().unwrap_or(0) + 1;
    for a in pos.iter().chain(neg) {
        a.check(k)?;
    }
    if super::prefix_entails(pos, neg) {
        return Err(PrefixError::EntailmentHolds);
    }
    Ok((padded_model(k, pos, length), (0..k).collect()))
}

/// The language of prefixes of `p·c^(length-|p|)` for each positive tuple `p`.
pub fn padded_model(k: usize, pos: &[PrefixAtom], length: usize) -> WordLanguageModel {
    let mut alphabet: Vec<String> = (1..=k).map(pool_name).collect();
    alphabet.push("c".into());
    let mut m = WordLanguageModel::new(alphabet, length);
    for p in pos {
        let mut w = p.args.clone();
        w.resize(length.max(p.arity()), k);
        for i in 0..=w.len() {
            m.words.insert(w[..i].to_vec());
        }
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntactic::satisfies_all;

    #[test]
    fn alpha_is_a_sentence() {
        for n in 0..=5 {
            assert!(axiom_alpha(n).free_vars().is_empty());
        }
        assert_eq!(
            axiom_alpha(1).to_string(),
            "(forall x1 (and (imp (R1 x1) (exists x2 (R2 x1 x2))) (imp (exists x2 (R2 x1 x2)) (R1 x1))))"
        );
    }

    #[test]
    fn empty_and_full_languages_pass() {
        let empty = WordLanguageModel::new(vec!["a".into(), "b".into()], 4);
        assert!(verify_t_axioms(&empty, 3).unwrap().passed());
        let full = WordLanguageModel::full(vec!["a".into()], 4);
        assert!(verify_t_axioms(&full, 3).unwrap().passed());
        let axioms: Vec<Formula> = (0..4).map(axiom_alpha).collect();
        assert!(satisfies_all(&full.to_structure(), &axioms).unwrap());
    }

    #[test]
    fn missing_prefix_is_reported() {
        let mut m = WordLanguageModel::new(vec!["a".into(), "b".into()], 3);
        m.words.insert(vec![]);
        m.words.insert(vec![0, 1]);
        let r = verify_t_axioms(&m, 1).unwrap();
        assert!(r.has_kind("prefix-closure"));
        assert!(matches!(
            verify_t_axioms(&m, 3),
            Err(PrefixError::TruncationTooShort { .. })
        ));
    }

    #[test]
    fn countermodel_pads_with_c() {
        let (m, rho) = word_countermodel(1, &[PrefixAtom::new(vec![0])], &[PrefixAtom::new(vec![0, 0])]).unwrap();
        assert_eq!(rho, vec![0]);
        assert!(m.contains(&[0]) && m.contains(&[0, 1]) && !m.contains(&[0, 0]));
        assert!(verify_t_axioms(&m, m.length - 1).unwrap().passed());
        let (m, _) = word_countermodel(0, &[], &[PrefixAtom::new(vec![])]).unwrap();
        assert!(m.words.is_empty());
        let (m, _) = word_countermodel(0, &[PrefixAtom::new(vec![])], &[]).unwrap();
        assert!(m.contains(&[]) && m.contains(&[0]));
        assert!(word_countermodel(2, &[PrefixAtom::new(vec![0, 1])], &[PrefixAtom::new(vec![0])]).is_err());
    }
}
