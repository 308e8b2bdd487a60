use std::collections::BTreeMap;

use crate::formula::{Formula, FormulaInContext};
use crate::theory::Theory;

use super::enumerate::{atoms_over, distinct_qf, formulas_up_to};
use super::oracle::{lt_leq, EntailmentOracle, Verdict};

/// Cap on the number of enumerated candidates per search.
pub const CANDIDATE_CAP: usize = 20_000;

/// Predicates a candidate may use: the signature's own, those of `phi`, and family members
/// up to one past the largest index in `phi`.
pub fn candidate_predicates(theory: &Theory, phi: &Formula) -> BTreeMap<String, usize> {
    let mut preds = theory.signature().predicates().clone();
    let used = phi.predicates();
    for fam in theory.signature().families() {
        let top = used.keys().filter_map(|p| fam.index_of(p)).max().map_or(0, |m| m + 1);
        for n in 0..=top {
            preds.insert(fam.symbol(n), n);
        }
    }
    preds.extend(used);
    preds
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum QfMembership {
    /// A quantifier-free formula proved equivalent.
    Yes(Formula),
    /// Every quantifier-free formula in context is refuted as an equivalent.
    No,
    Unknown(String),
}

/// Equivalence by two oracle calls; `Some(false)` when either direction is refuted.
pub fn equivalent(
    theory: &Theory,
    oracle: &dyn EntailmentOracle,
    phi: &FormulaInContext,
    psi: &FormulaInContext,
) -> Option<bool> {
    let a = lt_leq(theory, oracle, phi, psi).ok()?;
    if a.is_refuted() {
        return Some(false);
    }
    let b = lt_leq(theory, oracle, psi, phi).ok()?;
    match (a, b) {
        (Verdict::Proved(_), Verdict::Proved(_)) => Some(true),
        (_, Verdict::Refuted(_)) => Some(false),
        _ => None,
    }
}

/// Searches quantifier-free formulas up to `max_size` for a theory-equivalent of `phi`.
/// `No` requires a finite relational signature whose Boolean functions over the context
/// atoms are all among the candidates and all refuted.
pub fn is_quantifier_free_modulo(
    theory: &Theory,
    oracle: &dyn EntailmentOracle,
    phi: &FormulaInContext,
    max_size: usize,
) -> QfMembership {
    if phi.formula().is_quantifier_free() {
        return QfMembership::Yes(phi.formula().clone());
    }
    let sig = theory.signature();
    let preds = candidate_predicates(theory, phi.formula());
    let atoms = atoms_over(&preds, phi.ctx().vars(), sig.has_equality());
    let candidates = if atoms.len() <= 16 {
        distinct_qf(&atoms, max_size, CANDIDATE_CAP)
    } else {
        super::enumerate::qf_formulas(&atoms, max_size, CANDIDATE_CAP)
    };
    let mut all_refuted = true;
    for psi in &candidates {
        let psi_c = FormulaInContext::new(phi.ctx().clone(), psi.clone()).expect("candidate over the context");
        match equivalent(theory, oracle, phi, &psi_c) {
            Some(true) => return QfMembership::Yes(psi.clone()),
            Some(false) => {}
            None => all_refuted = false,
        }
    }
    let complete_space = sig.families().is_empty()
        && sig.is_relational()
        && atoms.len() <= 16
        && candidates.len() as u128 == 1u128 << (1u128 << atoms.len());
    if all_refuted && complete_space {
        QfMembership::No
    } else {
        QfMembership::Unknown(format!(
            "{} candidates up to size {max_size} examined without an equivalent",
            candidates.len()
        ))
    }
}

/// Bounds on the quantifier-alternation depth modulo a theory.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DepthInterval {
    pub lower: usize,
    pub upper: usize,
    /// The equivalent formula realising `upper`, when smaller than the syntactic depth.
    pub witness: Option<Formula>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DepthBounds {
    pub max_size: usize,
    pub max_bound_vars: usize,
}

impl Default for DepthBounds {
    fn default() -> Self {
        Self {
            max_size: 4,
            max_bound_vars: 2,
        }
    }
}

/// `upper` is the least depth among candidates proved equivalent (or the syntactic
/// depth); `lower` is the largest `n` such that every candidate of depth `< n` is refuted
/// as an equivalent.
pub fn qa_depth_modulo(
    theory: &Theory,
    oracle: &dyn EntailmentOracle,
    phi: &FormulaInContext,
    bounds: DepthBounds,
) -> DepthInterval {
    let syntactic = phi.formula().qa_depth();
    let mut upper = syntactic;
    let mut witness = None;
    if syntactic == 0 {
        return DepthInterval {
            lower: 0,
            upper: 0,
            witness,
        };
    }
    let preds = candidate_predicates(theory, phi.formula());
    let mut candidates: Vec<Formula> = formulas_up_to(
        &preds,
        phi.ctx().vars(),
        theory.signature().has_equality(),
        bounds.max_size,
        bounds.max_bound_vars,
        CANDIDATE_CAP,
    )
    .into_iter()
    .filter(|f| f.qa_depth() < syntactic)
    .collect();
    candidates.sort_by_key(|f| f.qa_depth());
    let mut lower = syntactic;
    for psi in candidates {
        let d = psi.qa_depth();
        if d >= upper {
            break;
        }
        let psi_c = FormulaInContext::new(phi.ctx().clone(), psi.clone()).expect("candidate over the context");
        match equivalent(theory, oracle, phi, &psi_c) {
            Some(false) => {}
            Some(true) => {
                upper = d;
                witness = Some(psi);
                lower = lower.min(d);
            }
            None => lower = lower.min(d),
        }
    }
    DepthInterval {
        lower: lower.min(upper),
        upper,
        witness,
    }
}
