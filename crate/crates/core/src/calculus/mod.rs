//! A sequent calculus with explicit contexts, a proof checker and a bounded prover.

mod prover;

use std::fmt;

use thiserror::Error;

use crate::formula::Formula;
use crate::lang::{Context, Term};
use crate::theory::Theory;

pub use prover::{prove_bounded, Budget, SearchFailure};

/// `Γ ⇒_ctx Δ`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Sequent {
    pub ctx: Context,
    pub ante: Vec<Formula>,
    pub succ: Vec<Formula>,
}

impl Sequent {
    pub fn new(ctx: Context, ante: Vec<Formula>, succ: Vec<Formula>) -> Self {
        Self { ctx, ante, succ }
    }

    pub fn formulas(&self) -> impl Iterator<Item = &Formula> {
        self.ante.iter().chain(self.succ.iter())
    }

    /// Same context and pointwise alpha-equivalent formula lists.
    pub fn alpha_eq(&self, other: &Sequent) -> bool {
        self.ctx == other.ctx
            && self.ante.len() == other.ante.len()
            && self.succ.len() == other.succ.len()
            && self.ante.iter().zip(&other.ante).all(|(a, b)| a.alpha_eq(b))
            && self.succ.iter().zip(&other.succ).all(|(a, b)| a.alpha_eq(b))
    }

    /// Every free variable lies in the context and every symbol fits the signature.
    pub fn well_formed(&self, theory: &Theory) -> Result<(), String> {
        for phi in self.formulas() {
            phi.check(theory.signature()).map_err(|e| e.to_string())?;
            for v in phi.free_vars() {
                if !self.ctx.contains(&v) {
                    return Err(format!("free variable `{v}` of {phi} not in {}", self.ctx));
                }
            }
        }
        Ok(())
    }
}

impl fmt::Display for Sequent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(seq {} (ants", self.ctx)?;
        for a in &self.ante {
            write!(f, " {a}")?;
        }
        write!(f, ") (sucs")?;
        for a in &self.succ {
            write!(f, " {a}")?;
        }
        write!(f, "))")
    }
}

/// Rule tags with the positional data that identifies principal formulas.
///
/// Left rules name an index into the antecedent, right rules an index into the succedent.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Rule {
    LW { index: usize },
    RW { index: usize },
    LC { index: usize },
    RC { index: usize },
    LE { index: usize },
    RE { index: usize },
    /// Conclusion `Γ1,Γ2 ⇒ Δ1,Δ2` with `|Γ1| = ante_split`, `|Δ1| = succ_split`.
    Cut { formula: Formula, ante_split: usize, succ_split: usize },
    Id,
    CtxEnlarge,
    RTop { index: usize },
    LBot { index: usize },
    LAnd { index: usize, side: usize },
    RAnd { index: usize },
    LOr { index: usize },
    ROr { index: usize, side: usize },
    LNeg { index: usize },
    RNeg { index: usize },
    LImp { index: usize },
    RImp { index: usize },
    LForall { index: usize, term: Term },
    RForall { index: usize },
    LExists { index: usize },
    RExists { index: usize, term: Term },
    EqRefl { term: Term },
    EqSubst { t: Term, u: Term, zeta: Formula, var: String },
    TheoryAxiom { formula: Formula },
    AlphaRename,
}

impl Rule {
    pub fn tag(&self) -> &'static str {
        match self {
            Rule::LW { .. } => "LW",
            Rule::RW { .. } => "RW",
            Rule::LC { .. } => "LC",
            Rule::RC { .. } => "RC",
            Rule::LE { .. } => "LE",
            Rule::RE { .. } => "RE",
            Rule::Cut { .. } => "Cut",
            Rule::Id => "Id",
            Rule::CtxEnlarge => "CtxEnlarge",
            Rule::RTop { .. } => "RTop",
            Rule::LBot { .. } => "LBot",
            Rule::LAnd { .. } => "LAnd",
            Rule::RAnd { .. } => "RAnd",
            Rule::LOr { .. } => "LOr",
            Rule::ROr { .. } => "ROr",
            Rule::LNeg { .. } => "LNeg",
            Rule::RNeg { .. } => "RNeg",
            Rule::LImp { .. } => "LImp",
            Rule::RImp { .. } => "RImp",
            Rule::LForall { .. } => "LForall",
            Rule::RForall { .. } => "RForall",
            Rule::LExists { .. } => "LExists",
            Rule::RExists { .. } => "RExists",
            Rule::EqRefl { .. } => "EqRefl",
            Rule::EqSubst { .. } => "EqSubst",
            Rule::TheoryAxiom { .. } => "TheoryAxiom",
            Rule::AlphaRename => "AlphaRename",
        }
    }

    /// True for rules that change formulas rather than just bookkeeping.
    pub fn is_logical(&self) -> bool {
        !matches!(
            self,
            Rule::LW { .. }
                | Rule::RW { .. }
                | Rule::LC { .. }
                | Rule::RC { .. }
                | Rule::LE { .. }
                | Rule::RE { .. }
                | Rule::CtxEnlarge
                | Rule::AlphaRename
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProofTree {
    pub conclusion: Sequent,
    pub rule: Rule,
    pub premises: Vec<ProofTree>,
}

impl ProofTree {
    pub fn new(conclusion: Sequent, rule: Rule, premises: Vec<ProofTree>) -> Self {
        Self {
            conclusion,
            rule,
            premises,
        }
    }

    pub fn size(&self) -> usize {
        1 + self.premises.iter().map(ProofTree::size).sum::<usize>()
    }

    pub fn height(&self) -> usize {
        1 + self.premises.iter().map(ProofTree::height).max().unwrap_or(0)
    }

    /// Pre-order walk over `(path, node)`.
    pub fn walk(&self, f: &mut impl FnMut(&[usize], &ProofTree)) {
        fn go(t: &ProofTree, path: &mut Vec<usize>, f: &mut impl FnMut(&[usize], &ProofTree)) {
            f(path, t);
            for (i, p) in t.premises.iter().enumerate() {
                path.push(i);
                go(p, path, f);
                path.pop();
            }
        }
        go(self, &mut Vec::new(), f);
    }

    pub fn uses_cut(&self) -> bool {
        let mut found = false;
        self.walk(&mut |_, n| found |= matches!(n.rule, Rule::Cut { .. }));
        found
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid proof at node {path:?}: {reason}")]
pub struct ProofError {
    pub path: Vec<usize>,
    pub reason: String,
}

fn get(list: &[Formula], i: usize, side: &str) -> Result<Formula, String> {
    list.get(i)
        .cloned()
        .ok_or_else(|| format!("{side} index {i} out of range"))
}

fn replaced(list: &[Formula], i: usize, f: Formula) -> Vec<Formula> {
    let mut v = list.to_vec();
    v[i] = f;
    v
}

fn removed(list: &[Formula], i: usize) -> Vec<Formula> {
    let mut v = list.to_vec();
    v.remove(i);
    v
}

fn term_over(t: &Term, ctx: &Context, theory: &Theory) -> Result<(), String> {
    theory.signature().check_term(t).map_err(|e| e.to_string())?;
    for v in t.vars() {
        if !ctx.contains(&v) {
            return Err(format!("term {t} uses `{v}` outside {}", ctx));
        }
    }
    Ok(())
}

/// The premises a rule demands of a conclusion. `AlphaRename` is handled by the checker.
pub fn premises_for(rule: &Rule, c: &Sequent, theory: &Theory) -> Result<Vec<Sequent>, String> {
    let with = |ante: Vec<Formula>, succ: Vec<Formula>| Sequent::new(c.ctx.clone(), ante, succ);
    match rule {
        Rule::LW { index } => {
            get(&c.ante, *index, "antecedent")?;
            Ok(vec![with(removed(&c.ante, *index), c.succ.clone())])
        }
        Rule::RW { index } => {
            get(&c.succ, *index, "succedent")?;
            Ok(vec![with(c.ante.clone(), removed(&c.succ, *index))])
        }
        Rule::LC { index } => {
            let a = get(&c.ante, *index, "antecedent")?;
            let mut ante = c.ante.clone();
            ante.insert(*index, a);
            Ok(vec![with(ante, c.succ.clone())])
        }
        Rule::RC { index } => {
            let a = get(&c.succ, *index, "succedent")?;
            let mut succ = c.succ.clone();
            succ.insert(*index, a);
            Ok(vec![with(c.ante.clone(), succ)])
        }
        Rule::LE { index } => {
            get(&c.ante, index + 1, "antecedent")?;
            let mut ante = c.ante.clone();
            ante.swap(*index, index + 1);
            Ok(vec![with(ante, c.succ.clone())])
        }
        Rule::RE { index } => {
            get(&c.succ, index + 1, "succedent")?;
            let mut succ = c.succ.clone();
            succ.swap(*index, index + 1);
            Ok(vec![with(c.ante.clone(), succ)])
        }
        Rule::Cut {
            formula,
            ante_split,
            succ_split,
        } => {
            if *ante_split > c.ante.len() || *succ_split > c.succ.len() {
                return Err("cut split out of range".into());
            }
            let probe = Sequent::new(c.ctx.clone(), vec![formula.clone()], vec![]);
            probe.well_formed(theory)?;
            let mut s1 = c.succ[..*succ_split].to_vec();
            s1.push(formula.clone());
            let mut a2 = vec![formula.clone()];
            a2.extend(c.ante[*ante_split..].iter().cloned());
            Ok(vec![
                with(c.ante[..*ante_split].to_vec(), s1),
                with(a2, c.succ[*succ_split..].to_vec()),
            ])
        }
        Rule::Id => {
            if c.ante.len() != 1 || c.succ.len() != 1 {
                return Err("identity needs exactly one formula on each side".into());
            }
            if !c.ante[0].alpha_eq(&c.succ[0]) {
                return Err(format!("identity sides differ: {} vs {}", c.ante[0], c.succ[0]));
            }
            Ok(vec![])
        }
        Rule::CtxEnlarge => {
            let (smaller, x) = c.ctx.pop().ok_or("context enlargement needs a nonempty context")?;
            if let Some(phi) = c.formulas().find(|f| f.free_vars().contains(&x)) {
                return Err(format!("enlarged variable `{x}` is free in {phi}"));
            }
            Ok(vec![Sequent::new(smaller, c.ante.clone(), c.succ.clone())])
        }
        Rule::RTop { index } => match get(&c.succ, *index, "succedent")? {
            Formula::True => Ok(vec![]),
            f => Err(format!("expected true, found {f}")),
        },
        Rule::LBot { index } => match get(&c.ante, *index, "antecedent")? {
            Formula::False => Ok(vec![]),
            f => Err(format!("expected false, found {f}")),
        },
        Rule::LAnd { index, side } => match get(&c.ante, *index, "antecedent")? {
            Formula::And(a, b) if *side < 2 => {
                let pick = if *side == 0 { *a } else { *b };
                Ok(vec![with(replaced(&c.ante, *index, pick), c.succ.clone())])
            }
            f => Err(format!("expected a conjunction, found {f}")),
        },
        Rule::RAnd { index } => match get(&c.succ, *index, "succedent")? {
            Formula::And(a, b) => Ok(vec![
                with(c.ante.clone(), replaced(&c.succ, *index, *a)),
                with(c.ante.clone(), replaced(&c.succ, *index, *b)),
            ]),
            f => Err(format!("expected a conjunction, found {f}")),
        },
        Rule::LOr { index } => match get(&c.ante, *index, "antecedent")? {
            Formula::Or(a, b) => Ok(vec![
                with(replaced(&c.ante, *index, *a), c.succ.clone()),
                with(replaced(&c.ante, *index, *b), c.succ.clone()),
            ]),
            f => Err(format!("expected a disjunction, found {f}")),
        },
        Rule::ROr { index, side } => match get(&c.succ, *index, "succedent")? {
            Formula::Or(a, b) if *side < 2 => {
                let pick = if *side == 0 { *a } else { *b };
                Ok(vec![with(c.ante.clone(), replaced(&c.succ, *index, pick))])
            }
            f => Err(format!("expected a disjunction, found {f}")),
        },
        Rule::LNeg { index } => match get(&c.ante, *index, "antecedent")? {
            Formula::Not(a) => {
                let mut succ = c.succ.clone();
                succ.push(*a);
                Ok(vec![with(removed(&c.ante, *index), succ)])
            }
            f => Err(format!("expected a negation, found {f}")),
        },
        Rule::RNeg { index } => match get(&c.succ, *index, "succedent")? {
            Formula::Not(a) => {
                let mut ante = vec![*a];
                ante.extend(c.ante.iter().cloned());
                Ok(vec![with(ante, removed(&c.succ, *index))])
            }
            f => Err(format!("expected a negation, found {f}")),
        },
        Rule::LImp { index } => match get(&c.ante, *index, "antecedent")? {
            Formula::Imp(a, b) => {
                let mut succ = c.succ.clone();
                succ.push(*a);
                Ok(vec![
                    with(removed(&c.ante, *index), succ),
                    with(replaced(&c.ante, *index, *b), c.succ.clone()),
                ])
            }
            f => Err(format!("expected an implication, found {f}")),
        },
        Rule::RImp { index } => match get(&c.succ, *index, "succedent")? {
            Formula::Imp(a, b) => {
                let mut ante = vec![*a];
                ante.extend(c.ante.iter().cloned());
                Ok(vec![with(ante, replaced(&c.succ, *index, *b))])
            }
            f => Err(format!("expected an implication, found {f}")),
        },
        Rule::LForall { index, term } => match get(&c.ante, *index, "antecedent")? {
            Formula::Forall(x, body) => {
                term_over(term, &c.ctx, theory)?;
                Ok(vec![with(replaced(&c.ante, *index, body.subst1(&x, term)), c.succ.clone())])
            }
            f => Err(format!("expected a universal formula, found {f}")),
        },
        Rule::RExists { index, term } => match get(&c.succ, *index, "succedent")? {
            Formula::Exists(x, body) => {
                term_over(term, &c.ctx, theory)?;
                Ok(vec![with(c.ante.clone(), replaced(&c.succ, *index, body.subst1(&x, term)))])
            }
            f => Err(format!("expected an existential formula, found {f}")),
        },
        Rule::RForall { index } => match get(&c.succ, *index, "succedent")? {
            Formula::Forall(x, body) => {
                let ctx = c
                    .ctx
                    .extend(&x)
                    .map_err(|_| format!("eigenvariable `{x}` already occurs in {}", c.ctx))?;
                Ok(vec![Sequent::new(ctx, c.ante.clone(), replaced(&c.succ, *index, *body))])
            }
            f => Err(format!("expected a universal formula, found {f}")),
        },
        Rule::LExists { index } => match get(&c.ante, *index, "antecedent")? {
            Formula::Exists(x, body) => {
                let ctx = c
                    .ctx
                    .extend(&x)
                    .map_err(|_| format!("eigenvariable `{x}` already occurs in {}", c.ctx))?;
                Ok(vec![Sequent::new(ctx, replaced(&c.ante, *index, *body), c.succ.clone())])
            }
            f => Err(format!("expected an existential formula, found {f}")),
        },
        Rule::EqRefl { term } => {
            if !theory.signature().has_equality() {
                return Err("signature has no equality".into());
            }
            term_over(term, &c.ctx, theory)?;
            let expected = Formula::Eq(term.clone(), term.clone());
            if !c.ante.is_empty() || c.succ.len() != 1 || c.succ[0] != expected {
                return Err(format!("reflexivity concludes exactly ⇒ {expected}"));
            }
            Ok(vec![])
        }
        Rule::EqSubst { t, u, zeta, var } => {
            if !theory.signature().has_equality() {
                return Err("signature has no equality".into());
            }
            term_over(t, &c.ctx, theory)?;
            term_over(u, &c.ctx, theory)?;
            let lhs = [Formula::Eq(t.clone(), u.clone()), zeta.subst1(var, t)];
            let rhs = zeta.subst1(var, u);
            let ok = c.ante.len() == 2
                && c.succ.len() == 1
                && c.ante.iter().zip(&lhs).all(|(a, b)| a.alpha_eq(b))
                && c.succ[0].alpha_eq(&rhs);
            if !ok {
                return Err("substitution conclusion does not match its data".into());
            }
            Ok(vec![])
        }
        Rule::TheoryAxiom { formula } => {
            if !c.ctx.is_empty() || !c.ante.is_empty() || c.succ.len() != 1 {
                return Err("axiom leaves have the form ⇒_() φ".into());
            }
            if !c.succ[0].alpha_eq(formula) || !theory.contains(formula) {
                return Err(format!("{formula} is not an axiom of the theory"));
            }
            Ok(vec![])
        }
        Rule::AlphaRename => Err("alpha renaming has no computed premise".into()),
    }
}

fn check_node(node: &ProofTree, theory: &Theory, path: &mut Vec<usize>) -> Result<(), ProofError> {
    let fail = |path: &Vec<usize>, reason: String| ProofError {
        path: path.clone(),
        reason,
    };
    node.conclusion
        .well_formed(theory)
        .map_err(|r| fail(path, format!("ill-formed conclusion: {r}")))?;
    if node.rule == Rule::AlphaRename {
        let [p] = node.premises.as_slice() else {
            return Err(fail(path, "alpha renaming takes one premise".into()));
        };
        if !p.conclusion.alpha_eq(&node.conclusion) {
            return Err(fail(path, "premise is not alpha-equivalent to the conclusion".into()));
        }
    } else {
        let expected = premises_for(&node.rule, &node.conclusion, theory).map_err(|r| fail(path, r))?;
        if expected.len() != node.premises.len() {
            return Err(fail(
                path,
                format!(
                    "{} expects {} premises, found {}",
                    node.rule.tag(),
                    expected.len(),
                    node.premises.len()
                ),
            ));
        }
        for (i, (e, p)) in expected.iter().zip(&node.premises).enumerate() {
            if !e.alpha_eq(&p.conclusion) {
                return Err(fail(
                    path,
                    format!("premise {i} should be {e}, found {}", p.conclusion),
                ));
            }
        }
    }
    for (i, p) in node.premises.iter().enumerate() {
        path.push(i);
        check_node(p, theory, path)?;
        path.pop();
    }
    Ok(())
}

/// Checks every node of a proof tree against the rules and the theory.
pub fn check_proof(proof: &ProofTree, theory: &Theory) -> Result<(), ProofError> {
    check_node(proof, theory, &mut Vec::new())
}

/// From a proof of `Γ ⇒_ctx Δ`, a proof of `Γ ⇒_(ctx,x) Δ`.
pub fn enlarge_context(proof: ProofTree, x: &str) -> Result<ProofTree, String> {
    let c = &proof.conclusion;
    let ctx = c.ctx.extend(x).map_err(|e| e.to_string())?;
    let conclusion = Sequent::new(ctx, c.ante.clone(), c.succ.clone());
    Ok(ProofTree::new(conclusion, Rule::CtxEnlarge, vec![proof]))
}

/// A proof of `⇒_ctx φ` for an axiom `φ`, by a leaf and context enlargements.
pub fn axiom_in_context(phi: &Formula, ctx: &Context) -> ProofTree {
    let mut tree = ProofTree::new(
        Sequent::new(Context::empty(), vec![], vec![phi.clone()]),
        Rule::TheoryAxiom { formula: phi.clone() },
        vec![],
    );
    for v in ctx.vars() {
        tree = enlarge_context(tree, v).expect("context variables are distinct");
    }
    tree
}

/// Closes `Γ ⇒ Δ` when `Γ[i]` and `Δ[j]` coincide, weakening everything else.
pub fn weaken_to_identity(seq: &Sequent, i: usize, j: usize) -> ProofTree {
    if seq.ante.len() > 1 {
        let k = if i == seq.ante.len() - 1 { 0 } else { seq.ante.len() - 1 };
        let ni = if k < i { i - 1 } else { i };
        let prem = Sequent::new(seq.ctx.clone(), removed(&seq.ante, k), seq.succ.clone());
        return ProofTree::new(seq.clone(), Rule::LW { index: k }, vec![weaken_to_identity(&prem, ni, j)]);
    }
    if seq.succ.len() > 1 {
        let k = if j == seq.succ.len() - 1 { 0 } else { seq.succ.len() - 1 };
        let nj = if k < j { j - 1 } else { j };
        let prem = Sequent::new(seq.ctx.clone(), seq.ante.clone(), removed(&seq.succ, k));
        return ProofTree::new(seq.clone(), Rule::RW { index: k }, vec![weaken_to_identity(&prem, i, nj)]);
    }
    ProofTree::new(seq.clone(), Rule::Id, vec![])
}

/// Closes `Γ ⇒ Δ` with `Δ[j]` of the form `t = t`.
pub fn weaken_to_reflexivity(seq: &Sequent, j: usize, term: &Term) -> ProofTree {
    if let Some(k) = (!seq.ante.is_empty()).then(|| seq.ante.len() - 1) {
        let prem = Sequent::new(seq.ctx.clone(), removed(&seq.ante, k), seq.succ.clone());
        return ProofTree::new(seq.clone(), Rule::LW { index: k }, vec![weaken_to_reflexivity(&prem, j, term)]);
    }
    if seq.succ.len() > 1 {
        let k = if j == seq.succ.len() - 1 { 0 } else { seq.succ.len() - 1 };
        let nj = if k < j { j - 1 } else { j };
        let prem = Sequent::new(seq.ctx.clone(), seq.ante.clone(), removed(&seq.succ, k));
        return ProofTree::new(seq.clone(), Rule::RW { index: k }, vec![weaken_to_reflexivity(&prem, nj, term)]);
    }
    ProofTree::new(seq.clone(), Rule::EqRefl { term: term.clone() }, vec![])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::Signature;

    fn p(x: &str) -> Formula {
        Formula::rel("P", &[x])
    }

    fn theory() -> Theory {
        Theory::new(Signature::new().predicate("P", 1).predicate("Q", 0))
    }

    #[test]
    fn identity_and_weakening() {
        let ctx = Context::new(["x"]).unwrap();
        let s = Sequent::new(ctx, vec![Formula::rel("Q", &[]), p("x")], vec![p("x"), Formula::False]);
        let t = weaken_to_identity(&s, 1, 0);
        check_proof(&t, &theory()).unwrap();
    }

    #[test]
    fn eigenvariable_clash_rejected() {
        let ctx = Context::new(["x"]).unwrap();
        let concl = Sequent::new(ctx.clone(), vec![], vec![Formula::forall("x", Formula::imp(p("x"), p("x")))]);
        let prem_ctx = Context::new(["x", "x"]);
        assert!(prem_ctx.is_err());
        let bogus = ProofTree::new(
            concl,
            Rule::RForall { index: 0 },
            vec![ProofTree::new(
                Sequent::new(ctx, vec![], vec![Formula::imp(p("x"), p("x"))]),
                Rule::AlphaRename,
                vec![],
            )],
        );
        let err = check_proof(&bogus, &theory()).unwrap_err();
        assert!(err.path.is_empty());
        assert!(err.reason.contains("eigenvariable"), "{}", err.reason);
    }

    #[test]
    fn axiom_leaf_needs_empty_context() {
        let phi = Formula::forall("x", p("x"));
        let t = theory().with_axiom(phi.clone());
        let leaf = ProofTree::new(
            Sequent::new(Context::new(["y"]).unwrap(), vec![], vec![phi.clone()]),
            Rule::TheoryAxiom { formula: phi.clone() },
            vec![],
        );
        assert!(check_proof(&leaf, &t).is_err());
        check_proof(&axiom_in_context(&phi, &Context::new(["y", "z"]).unwrap()), &t).unwrap();
    }

    #[test]
    fn error_path_points_at_bad_node() {
        let ctx = Context::empty();
        let q = Formula::rel("Q", &[]);
        let concl = Sequent::new(ctx.clone(), vec![], vec![Formula::imp(q.clone(), q.clone())]);
        let good_leaf = Sequent::new(ctx.clone(), vec![q.clone()], vec![q.clone()]);
        let ok = ProofTree::new(
            concl.clone(),
            Rule::RImp { index: 0 },
            vec![ProofTree::new(good_leaf.clone(), Rule::Id, vec![])],
        );
        check_proof(&ok, &theory()).unwrap();
        let bad = ProofTree::new(
            concl,
            Rule::RImp { index: 0 },
            vec![ProofTree::new(good_leaf, Rule::LBot { index: 0 }, vec![])],
        );
        assert_eq!(check_proof(&bad, &theory()).unwrap_err().path, vec![0]);
    }
}
