use crate::calculus::{premises_for, weaken_to_identity, ProofTree, Rule, Sequent};
use crate::formula::Formula;
use crate::theory::Theory;

fn is_connective(f: &Formula) -> bool {
    matches!(
        f,
        Formula::True | Formula::False | Formula::Not(_) | Formula::And(..) | Formula::Or(..) | Formula::Imp(..)
    )
}

fn step(seq: &Sequent, rule: Rule, theory: &Theory) -> (Rule, Vec<Sequent>) {
    let prem = premises_for(&rule, seq, theory).expect("rule chosen to match the sequent");
    (rule, prem)
}

/// Proves a sequent by decomposing every propositional connective with invertible rules;
/// `close` receives the leaves, whose formulas are atoms or quantified, and may fail.
pub fn propositional_proof(
    seq: &Sequent,
    theory: &Theory,
    close: &dyn Fn(&Sequent) -> Option<ProofTree>,
) -> Option<ProofTree> {
    if let Some(i) = seq.ante.iter().position(is_connective) {
        return match &seq.ante[i] {
            Formula::False => Some(ProofTree::new(seq.clone(), Rule::LBot { index: i }, vec![])),
            Formula::True => chain(seq, vec![Rule::LW { index: i }], theory, close),
            Formula::Not(_) => chain(seq, vec![Rule::LNeg { index: i }], theory, close),
            Formula::And(..) => chain(
                seq,
                vec![
                    Rule::LC { index: i },
                    Rule::LAnd { index: i, side: 0 },
                    Rule::LAnd { index: i + 1, side: 1 },
                ],
                theory,
                close,
            ),
            Formula::Or(..) => branch(seq, Rule::LOr { index: i }, theory, close),
            Formula::Imp(..) => branch(seq, Rule::LImp { index: i }, theory, close),
            _ => unreachable!(),
        };
    }
    if let Some(j) = seq.succ.iter().position(is_connective) {
        return match &seq.succ[j] {
            Formula::True => Some(ProofTree::new(seq.clone(), Rule::RTop { index: j }, vec![])),
            Formula::False => chain(seq, vec![Rule::RW { index: j }], theory, close),
            Formula::Not(_) => chain(seq, vec![Rule::RNeg { index: j }], theory, close),
            Formula::Imp(..) => chain(seq, vec![Rule::RImp { index: j }], theory, close),
            Formula::Or(..) => chain(
                seq,
                vec![
                    Rule::RC { index: j },
                    Rule::ROr { index: j, side: 0 },
                    Rule::ROr { index: j + 1, side: 1 },
                ],
                theory,
                close,
            ),
            Formula::And(..) => branch(seq, Rule::RAnd { index: j }, theory, close),
            _ => unreachable!(),
        };
    }
    close(seq)
}

fn chain(
    seq: &Sequent,
    rules: Vec<Rule>,
    theory: &Theory,
    close: &dyn Fn(&Sequent) -> Option<ProofTree>,
) -> Option<ProofTree> {
    let mut stack = Vec::new();
    let mut cur = seq.clone();
    for r in rules {
        let (rule, mut prem) = step(&cur, r, theory);
        stack.push((cur, rule));
        cur = prem.remove(0);
    }
    let mut tree = propositional_proof(&cur, theory, close)?;
    while let Some((s, rule)) = stack.pop() {
        tree = ProofTree::new(s, rule, vec![tree]);
    }
    Some(tree)
}

fn branch(
    seq: &Sequent,
    rule: Rule,
    theory: &Theory,
    close: &dyn Fn(&Sequent) -> Option<ProofTree>,
) -> Option<ProofTree> {
    let (rule, prem) = step(seq, rule, theory);
    let subs = prem
        .iter()
        .map(|p| propositional_proof(p, theory, close))
        .collect::<Option<Vec<_>>>()?;
    Some(ProofTree::new(seq.clone(), rule, subs))
}

/// Closes a leaf sharing a formula, up to alpha-equivalence, between its two sides.
pub fn close_by_identity(seq: &Sequent) -> Option<ProofTree> {
    for (i, a) in seq.ante.iter().enumerate() {
        if let Some(j) = seq.succ.iter().position(|b| b.alpha_eq(a)) {
            return Some(weaken_to_identity(seq, i, j));
        }
    }
    None
}
