use std::collections::BTreeSet;

use crate::calculus::{axiom_in_context, prove_bounded, Budget, ProofTree, Sequent};
use crate::formula::{Formula, FormulaInContext, Quantifier};
use crate::lang::{pool_name, Context};
use crate::theory::Theory;

use super::enumerate::{atoms_over, qf_formulas, truth_table};
use super::modulo::CANDIDATE_CAP;
use super::oracle::{lt_leq, BoundedOracle, EntailmentOracle, Verdict};
use super::structure::countermodel_search;
use super::SemanticsError;

/// A universal sentence derived from a theory, with its proof.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Consequence {
    pub sentence: Formula,
    pub proof: ProofTree,
}

/// Whether a sentence is `∀x⃗ β` with `β` quantifier-free.
pub fn is_universal(phi: &Formula) -> bool {
    phi.strip_block(Quantifier::Forall).0.is_quantifier_free()
}

#[derive(Debug, Clone, Copy)]
pub struct CompletionConfig {
    pub budget: Budget,
    /// Largest size of an enumerated quantifier-free body.
    pub body_size: usize,
    /// Largest number of universally bound variables.
    pub max_vars: usize,
    /// Size of the structures used to discard bodies before proof search.
    pub filter_size: usize,
    pub oracle: BoundedOracle,
}

impl Default for CompletionConfig {
    fn default() -> Self {
        Self {
            budget: Budget::default(),
            body_size: 3,
            max_vars: 2,
            filter_size: 2,
            oracle: BoundedOracle::default(),
        }
    }
}

/// Universal closures `∀x1..xk β` of quantifier-free bodies using exactly `x1..xk`, one per
/// Boolean function, that bounded proof search derives from the theory. The explicit
/// universal axioms are always included.
pub fn universal_consequences(theory: &Theory, cfg: &CompletionConfig) -> Vec<Consequence> {
    let mut out: Vec<Consequence> = theory
        .axioms()
        .iter()
        .filter(|a| is_universal(a))
        .map(|a| Consequence {
            sentence: a.clone(),
            proof: axiom_in_context(a, &Context::empty()),
        })
        .collect();
    let mut preds = theory.signature().predicates().clone();
    for fam in theory.signature().families() {
        for n in 0..=cfg.max_vars + 1 {
            preds.insert(fam.symbol(n), n);
        }
    }
    for k in 0..=cfg.max_vars {
        let vars: Vec<String> = (1..=k).map(pool_name).collect();
        let atoms = atoms_over(&preds, &vars, theory.signature().has_equality());
        if atoms.len() > 16 {
            continue;
        }
        let mut seen = BTreeSet::new();
        for body in qf_formulas(&atoms, cfg.body_size, CANDIDATE_CAP) {
            if body.free_vars().len() != k || !seen.insert(truth_table(&body, &atoms)) {
                continue;
            }
            let sentence = Formula::forall_many(&vars, body);
            if out.iter().any(|c| c.sentence.alpha_eq(&sentence)) {
                continue;
            }
            let seq = Sequent::new(Context::empty(), vec![], vec![sentence.clone()]);
            if countermodel_search(&seq, theory, cfg.filter_size, 0).model.is_some() {
                continue;
            }
            if let Ok(proof) = prove_bounded(&seq, theory, cfg.budget) {
                out.push(Consequence { sentence, proof });
            }
        }
    }
    out
}

/// The order of the quantifier completion, decided as consequence from the enumerated
/// universal theory. The consequences certify each axiom of that theory.
#[derive(Debug, Clone)]
pub struct CompletionVerdict {
    pub verdict: Verdict,
    pub universal_theory: Theory,
    pub consequences: Vec<Consequence>,
}

pub fn universal_theory(theory: &Theory, consequences: &[Consequence]) -> Theory {
    let mut u = Theory::new(theory.signature().clone());
    for c in consequences {
        u.add_axiom(c.sentence.clone()).expect("sentence over the signature");
    }
    u
}

pub fn completion_leq(
    theory: &Theory,
    phi: &FormulaInContext,
    psi: &FormulaInContext,
    cfg: &CompletionConfig,
) -> Result<CompletionVerdict, SemanticsError> {
    let consequences = universal_consequences(theory, cfg);
    completion_leq_with(theory, &consequences, phi, psi, &cfg.oracle)
}

/// As [`completion_leq`], reusing an already enumerated list of consequences.
pub fn completion_leq_with(
    theory: &Theory,
    consequences: &[Consequence],
    phi: &FormulaInContext,
    psi: &FormulaInContext,
    oracle: &dyn EntailmentOracle,
) -> Result<CompletionVerdict, SemanticsError> {
    let u = universal_theory(theory, consequences);
    let verdict = lt_leq(&u, oracle, phi, psi)?;
    Ok(CompletionVerdict {
        verdict,
        universal_theory: u,
        consequences: consequences.to_vec(),
    })
}
