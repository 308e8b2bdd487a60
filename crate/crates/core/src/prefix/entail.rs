use crate::calculus::{axiom_in_context, premises_for, weaken_to_identity, ProofTree, Rule, Sequent};
use crate::formula::{to_dnf, Formula};
use crate::lang::{Context, PredicateFamily, Term};
use crate::syntactic::{propositional_proof, Countermodel, EntailmentOracle, Verdict};
use crate::theory::{AxiomFamily, Theory};

use super::words::{axiom_alpha, padded_model};
use super::{atoms_of, PrefixAtom, PrefixError, FAMILY};

/// `⋀P ≤ ⋁N` modulo the theory: some tuple of `N` is a prefix of some tuple of `P`.
pub fn prefix_entails(pos: &[PrefixAtom], neg: &[PrefixAtom]) -> bool {
    pos.iter().any(|p| neg.iter().any(|n| n.is_prefix_of(p)))
}

/// A DNF clause of `φ ∧ ¬ψ` consistent with the theory, if there is one.
pub fn refuting_clause(
    ctx: &Context,
    phi: &Formula,
    psi: &Formula,
) -> Result<Option<(Vec<PrefixAtom>, Vec<PrefixAtom>)>, PrefixError> {
    atoms_of(phi, ctx)?;
    atoms_of(psi, ctx)?;
    let query = Formula::and(phi.clone(), Formula::not(psi.clone()));
    let clauses = to_dnf(&query).map_err(|e| PrefixError::NotQuantifierFree(e.to_string()))?;
    for c in clauses {
        let pos = c
            .pos
            .iter()
            .map(|a| PrefixAtom::from_formula(a, ctx))
            .collect::<Result<Vec<_>, _>>()?;
        let neg = c
            .neg
            .iter()
            .map(|a| PrefixAtom::from_formula(a, ctx))
            .collect::<Result<Vec<_>, _>>()?;
        if !prefix_entails(&pos, &neg) {
            return Ok(Some((pos, neg)));
        }
    }
    Ok(None)
}

/// Decides `φ ≤ ψ` modulo the theory for quantifier-free formulas over the context.
pub fn qf_entails_mod_t(ctx: &Context, phi: &Formula, psi: &Formula) -> Result<bool, PrefixError> {
    Ok(refuting_clause(ctx, phi, psi)?.is_none())
}

fn rel(args: &[Term]) -> Formula {
    Formula::Atom(PredicateFamily::new(FAMILY).symbol(args.len()), args.to_vec())
}

fn premises(rule: &Rule, seq: &Sequent, theory: &Theory) -> Vec<Sequent> {
    premises_for(rule, seq, theory).expect("rule built to match the sequent")
}

/// A proof of `R_m(t1..tm) ⇒ R_{m-1}(t1..t_{m-1})` from `α_{m-1}`.
fn step_down(ctx: &Context, args: &[Term], theory: &Theory) -> ProofTree {
    let m = args.len();
    let goal = Sequent::new(ctx.clone(), vec![rel(args)], vec![rel(&args[..m - 1])]);
    let alpha = axiom_alpha(m - 1);
    let cut = Rule::Cut {
        formula: alpha.clone(),
        ante_split: 0,
        succ_split: 0,
    };
    let mut prem = premises(&cut, &goal, theory);
    let left = axiom_in_context(&alpha, ctx);
    let mut rules: Vec<Rule> = args[..m - 1]
        .iter()
        .map(|t| Rule::LForall {
            index: 0,
            term: t.clone(),
        })
        .collect();
    rules.push(Rule::LAnd { index: 0, side: 1 });
    let mut stack = Vec::new();
    let mut cur = prem.remove(1);
    for r in rules {
        let next = premises(&r, &cur, theory).remove(0);
        stack.push((cur, r));
        cur = next;
    }
    let imp = Rule::LImp { index: 0 };
    let [wit, done]: [Sequent; 2] = premises(&imp, &cur, theory).try_into().expect("two premises");
    let rw = Rule::RW { index: 0 };
    let only_exists = premises(&rw, &wit, theory).remove(0);
    let rex = Rule::RExists {
        index: 0,
        term: args[m - 1].clone(),
    };
    let inst = premises(&rex, &only_exists, theory).remove(0);
    let wit_proof = ProofTree::new(
        wit,
        rw,
        vec![ProofTree::new(only_exists, rex, vec![ProofTree::new(inst, Rule::Id, vec![])])],
    );
    let done_proof = weaken_to_identity(&done, 0, 0);
    let mut tree = ProofTree::new(cur, imp, vec![wit_proof, done_proof]);
    while let Some((s, r)) = stack.pop() {
        tree = ProofTree::new(s, r, vec![tree]);
    }
    ProofTree::new(goal, cut, vec![left, tree])
}

/// A proof of `R_m(t1..tm) ⇒ R_j(t1..tj)` for `j ≤ m`.
pub fn descend_proof(ctx: &Context, args: &[Term], j: usize, theory: &Theory) -> ProofTree {
    let m = args.len();
    let goal = Sequent::new(ctx.clone(), vec![rel(args)], vec![rel(&args[..j])]);
    if j == m {
        return ProofTree::new(goal, Rule::Id, vec![]);
    }
    if j + 1 == m {
        return step_down(ctx, args, theory);
    }
    let cut = Rule::Cut {
        formula: rel(&args[..m - 1]),
        ante_split: 1,
        succ_split: 0,
    };
    let first = step_down(ctx, args, theory);
    let rest = descend_proof(ctx, &args[..m - 1], j, theory);
    ProofTree::new(goal, cut, vec![first, rest])
}

/// Reduces `Γ ⇒ Δ` to `Γ[i] ⇒ Δ[j]` by weakening and finishes with `core`.
fn weaken_onto(seq: &Sequent, i: usize, j: usize, core: ProofTree) -> ProofTree {
    if seq.ante.len() > 1 {
        let k = if i == seq.ante.len() - 1 { 0 } else { seq.ante.len() - 1 };
        let ni = if k < i { i - 1 } else { i };
        let mut ante = seq.ante.clone();
        ante.remove(k);
        let prem = Sequent::new(seq.ctx.clone(), ante, seq.succ.clone());
        return ProofTree::new(seq.clone(), Rule::LW { index: k }, vec![weaken_onto(&prem, ni, j, core)]);
    }
    if seq.succ.len() > 1 {
        let k = if j == seq.succ.len() - 1 { 0 } else { seq.succ.len() - 1 };
        let nj = if k < j { j - 1 } else { j };
        let mut succ = seq.succ.clone();
        succ.remove(k);
        let prem = Sequent::new(seq.ctx.clone(), seq.ante.clone(), succ);
        return ProofTree::new(seq.clone(), Rule::RW { index: k }, vec![weaken_onto(&prem, i, nj, core)]);
    }
    core
}

fn family_args(f: &Formula) -> Option<&[Term]> {
    match f {
        Formula::Atom(name, args) if PredicateFamily::new(FAMILY).index_of(name) == Some(args.len()) => Some(args),
        _ => None,
    }
}

fn close_by_prefix(seq: &Sequent, theory: &Theory) -> Option<ProofTree> {
    for (i, a) in seq.ante.iter().enumerate() {
        let Some(long) = family_args(a) else { continue };
        for (j, b) in seq.succ.iter().enumerate() {
            let Some(short) = family_args(b) else { continue };
            if long.starts_with(short) {
                let core = descend_proof(&seq.ctx, long, short.len(), theory);
                return Some(weaken_onto(seq, i, j, core));
            }
        }
    }
    None
}

/// Whether the theory is exactly the prefix-extension family over `R0, R1, ...`.
fn is_prefix_theory(theory: &Theory) -> bool {
    let sig = theory.signature();
    theory.axioms().is_empty()
        && theory.families()
            == [AxiomFamily::PrefixExtension {
                prefix: FAMILY.to_string(),
            }]
        && sig.predicates().is_empty()
        && sig.is_relational()
        && !sig.has_equality()
}

/// The prefix criterion as an oracle: proofs by propositional decomposition with leaves
/// closed by chains of theory axioms, refutations by padded word models.
#[derive(Debug, Clone, Copy, Default)]
pub struct PrefixOracle;

impl EntailmentOracle for PrefixOracle {
    fn method(&self) -> &'static str {
        "prefix"
    }

    fn decide(&self, s: &Sequent, theory: &Theory) -> Verdict {
        if !is_prefix_theory(theory) {
            return Verdict::Unknown("theory is not the prefix-extension theory".into());
        }
        let phi = Formula::conj(s.ante.iter().cloned());
        let psi = Formula::disj(s.succ.iter().cloned());
        let clause = match refuting_clause(&s.ctx, &phi, &psi) {
            Ok(c) => c,
            Err(e) => return Verdict::Unknown(e.to_string()),
        };
        if let Some((pos, _)) = clause {
            let top = s
                .formulas()
                .flat_map(|f| f.atoms())
                .filter_map(|a| family_args(&a).map(<[Term]>::len))
                .max()
                .unwrap_or(0);
            let model = padded_model(s.ctx.len(), &pos, top + 1);
            return Verdict::Refuted(Countermodel {
                structure: model.to_structure(),
                assignment: (0..s.ctx.len()).collect(),
            });
        }
        match propositional_proof(s, theory, &|leaf| close_by_prefix(leaf, theory)) {
            Some(t) => Verdict::Proved(t),
            None => Verdict::Unknown("a leaf could not be closed by a prefix chain".into()),
        }
    }

    fn complete_on_quantifier_free(&self, theory: &Theory) -> bool {
        is_prefix_theory(theory)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::check_proof;
    use crate::syntactic::check_certificate;

    fn atom(args: &[usize]) -> PrefixAtom {
        PrefixAtom::new(args.to_vec())
    }

    fn r(vars: &[&str]) -> Formula {
        Formula::rel(&format!("R{}", vars.len()), vars)
    }

    #[test]
    fn prefix_criterion_examples() {
        assert!(prefix_entails(&[atom(&[0, 1])], &[atom(&[0])]));
        assert!(!prefix_entails(&[atom(&[0, 1])], &[]));
        assert!(!prefix_entails(&[], &[atom(&[])]));
        assert!(!prefix_entails(&[atom(&[0, 1])], &[atom(&[1])]));
    }

    #[test]
    fn qf_entailment_examples() {
        let ctx = Context::canonical(2);
        let x1 = r(&["x1"]);
        assert!(qf_entails_mod_t(&ctx, &x1, &x1).unwrap());
        assert!(qf_entails_mod_t(&ctx, &Formula::and(x1.clone(), Formula::not(x1.clone())), &Formula::False).unwrap());
        assert!(qf_entails_mod_t(&ctx, &x1, &r(&[])).unwrap());
        assert!(!qf_entails_mod_t(&ctx, &r(&[]), &x1).unwrap());
        let q = Formula::exists("y", r(&["y"]));
        assert!(qf_entails_mod_t(&ctx, &q, &x1).is_err());
    }

    #[test]
    fn descent_proofs_check() {
        let t = Theory::prefix_theory();
        let ctx = Context::canonical(2);
        let args: Vec<Term> = ["x2", "x1", "x2"].iter().map(|v| Term::var(v)).collect();
        for j in 0..=3 {
            check_proof(&descend_proof(&ctx, &args, j, &t), &t).unwrap();
        }
    }

    #[test]
    fn oracle_certificates_check() {
        let t = Theory::prefix_theory();
        let ctx = Context::canonical(2);
        let cases = [
            (r(&["x1", "x2"]), r(&["x1"]), true),
            (r(&["x1", "x2"]), r(&["x2"]), false),
            (Formula::and(r(&["x1", "x1"]), Formula::not(r(&[]))), Formula::False, true),
            (r(&[]), Formula::or(r(&["x1"]), Formula::not(r(&["x2", "x1"]))), false),
            (Formula::True, Formula::or(r(&["x1"]), Formula::not(r(&["x1", "x2"]))), true),
        ];
        for (phi, psi, expected) in cases {
            let s = Sequent::new(ctx.clone(), vec![phi], vec![psi]);
            let v = PrefixOracle.decide(&s, &t);
            assert_eq!(v.as_bool(), Some(expected), "{s}");
            check_certificate(&v, &s, &t).unwrap();
        }
        assert!(PrefixOracle.complete_on_quantifier_free(&t));
    }
}
