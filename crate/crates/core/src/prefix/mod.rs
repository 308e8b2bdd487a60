//! The theory of prefix-closed extendable word languages over the predicates `R0, R1, ...`:
//! word models, the prefix criterion for quantifier-free entailment, and the fragment
//! experiments built on it.

mod entail;
mod fragments;
mod words;

use std::fmt;

use thiserror::Error;

use crate::formula::Formula;
use crate::lang::{Context, PredicateFamily, Term};

pub use entail::{descend_proof, prefix_entails, qf_entails_mod_t, refuting_clause, PrefixOracle};
pub use fragments::{
    consistent_valuations, does_not_generate_demo, intersection_experiment, p0n_membership, Exclusion,
    IntersectionReport, P0nMembership, Separation, SeparationReport,
};
pub use words::{axiom_alpha, padded_model, verify_t_axioms, word_countermodel, WordLanguageModel};

/// Prefix of the predicate family `R0, R1, ...`.
pub const FAMILY: &str = "R";

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PrefixError {
    #[error("formula is not quantifier-free: {0}")]
    NotQuantifierFree(String),
    #[error("`{0}` is not an atom of the predicate family applied to context variables")]
    NotPrefixAtom(String),
    #[error("variable index {index} outside a context of length {len}")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("the entailment holds, so no countermodel exists")]
    EntailmentHolds,
    #[error("truncation length {length} cannot check axioms up to {requested}")]
    TruncationTooShort { requested: usize, length: usize },
    #[error("{0} atoms exceed the enumeration limit")]
    TooManyAtoms(usize),
}

/// The atom `R_m(x_{f(1)}, ..., x_{f(m)})`, with `args` the zero-based positions `f(i) - 1`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PrefixAtom {
    pub args: Vec<usize>,
}

impl PrefixAtom {
    pub fn new(args: Vec<usize>) -> Self {
        Self { args }
    }

    pub fn arity(&self) -> usize {
        self.args.len()
    }

    /// Whether this atom's tuple is a prefix of `other`'s.
    pub fn is_prefix_of(&self, other: &PrefixAtom) -> bool {
        other.args.starts_with(&self.args)
    }

    pub fn check(&self, k: usize) -> Result<(), PrefixError> {
        match self.args.iter().find(|&&i| i >= k) {
            Some(&index) => Err(PrefixError::IndexOutOfRange { index, len: k }),
            None => Ok(()),
        }
    }

    pub fn to_formula(&self, ctx: &Context) -> Result<Formula, PrefixError> {
        self.check(ctx.len())?;
        let args = self.args.iter().map(|&i| Term::Var(ctx.vars()[i].clone())).collect();
        Ok(Formula::Atom(PredicateFamily::new(FAMILY).symbol(self.arity()), args))
    }

    pub fn from_formula(phi: &Formula, ctx: &Context) -> Result<Self, PrefixError> {
        let bad = || PrefixError::NotPrefixAtom(phi.to_string());
        let Formula::Atom(name, args) = phi else {
            return Err(bad());
        };
        if PredicateFamily::new(FAMILY).index_of(name) != Some(args.len()) {
            return Err(bad());
        }
        let args = args
            .iter()
            .map(|t| match t {
                Term::Var(v) => ctx.position(v).ok_or_else(bad),
                Term::App(..) => Err(bad()),
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self { args })
    }

    /// Every atom over a context of length `k` with arity in `arities`.
    pub fn all(k: usize, arities: impl IntoIterator<Item = usize>) -> Vec<PrefixAtom> {
        let mut out = Vec::new();
        for m in arities {
            if k == 0 && m > 0 {
                continue;
            }
            let count = k.pow(m as u32);
            for mut code in 0..count {
                let mut args = vec![0; m];
                for slot in args.iter_mut().rev() {
                    *slot = code % k;
                    code /= k;
                }
                out.push(PrefixAtom { args });
            }
        }
        out
    }
}

impl fmt::Display for PrefixAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({FAMILY}{}", self.arity())?;
        for i in &self.args {
            write!(f, " x{}", i + 1)?;
        }
        write!(f, ")")
    }
}

/// The family atoms of a quantifier-free formula, in order of first occurrence.
pub fn atoms_of(phi: &Formula, ctx: &Context) -> Result<Vec<PrefixAtom>, PrefixError> {
    if !phi.is_quantifier_free() {
        return Err(PrefixError::NotQuantifierFree(phi.to_string()));
    }
    let mut out: Vec<PrefixAtom> = Vec::new();
    for a in phi.atoms() {
        let p = PrefixAtom::from_formula(&a, ctx)?;
        if !out.contains(&p) {
            out.push(p);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn atoms_round_trip_through_formulas() {
        let ctx = Context::canonical(2);
        for a in PrefixAtom::all(2, 0..=3) {
            let f = a.to_formula(&ctx).unwrap();
            assert_eq!(PrefixAtom::from_formula(&f, &ctx).unwrap(), a);
        }
        assert_eq!(PrefixAtom::all(2, 0..=3).len(), 1 + 2 + 4 + 8);
        assert_eq!(PrefixAtom::all(0, 0..=3).len(), 1);
    }

    #[test]
    fn foreign_atoms_are_rejected() {
        let ctx = Context::canonical(1);
        assert!(PrefixAtom::from_formula(&Formula::rel("R2", &["x1"]), &ctx).is_err());
        assert!(PrefixAtom::from_formula(&Formula::rel("P", &["x1"]), &ctx).is_err());
        assert!(PrefixAtom::from_formula(&Formula::rel("R1", &["y"]), &ctx).is_err());
    }
}
