use std::collections::BTreeMap;
use std::fmt;

use crate::doctrine::{Report, Violation};
use crate::formula::{Formula, FormulaInContext};
use crate::lang::Context;
use crate::syntactic::eval_in_structure;

use super::words::{verify_t_axioms, WordLanguageModel};
use super::{atoms_of, PrefixAtom, PrefixError};

/// Largest atom set whose consistent valuations are enumerated.
const MAX_ATOMS: usize = 40;
/// Largest number of consistent valuations kept.
const MAX_VALUATIONS: usize = 1 << 20;

/// The valuations of `atoms` realised by some model of the theory: those making no atom
/// false whose tuple is a prefix of a true atom's tuple. Values follow the input order.
pub fn consistent_valuations(atoms: &[PrefixAtom]) -> Result<Vec<Vec<bool>>, PrefixError> {
    if atoms.len() > MAX_ATOMS {
        return Err(PrefixError::TooManyAtoms(atoms.len()));
    }
    let mut order: Vec<usize> = (0..atoms.len()).collect();
    order.sort_by_key(|&i| atoms[i].arity());
    let below: Vec<Vec<usize>> = atoms
        .iter()
        .map(|a| {
            (0..atoms.len())
                .filter(|&j| atoms[j] != *a && atoms[j].is_prefix_of(a))
                .collect()
        })
        .collect();
    let mut out = Vec::new();
    let mut val = vec![false; atoms.len()];
    fill(&order, &below, 0, &mut val, &mut out)?;
    out.sort();
    Ok(out)
}

fn fill(
    order: &[usize],
    below: &[Vec<usize>],
    pos: usize,
    val: &mut Vec<bool>,
    out: &mut Vec<Vec<bool>>,
) -> Result<(), PrefixError> {
    if pos == order.len() {
        if out.len() >= MAX_VALUATIONS {
            return Err(PrefixError::TooManyAtoms(order.len()));
        }
        out.push(val.clone());
        return Ok(());
    }
    let i = order[pos];
    val[i] = false;
    fill(order, below, pos + 1, val, out)?;
    if below[i].iter().all(|&j| val[j]) {
        val[i] = true;
        fill(order, below, pos + 1, val, out)?;
        val[i] = false;
    }
    Ok(())
}

fn literal_conj(atoms: &[Formula], val: &[bool]) -> Formula {
    Formula::conj(
        atoms
            .iter()
            .zip(val)
            .map(|(a, &b)| if b { a.clone() } else { Formula::not(a.clone()) }),
    )
}

fn eval(phi: &Formula, atoms: &[Formula], val: &[bool]) -> bool {
    phi.eval_prop(&|a| atoms.iter().position(|b| b == a).is_some_and(|i| val[i]))
        .expect("quantifier-free")
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum P0nMembership {
    /// An equivalent Boolean combination of atoms of arity at least `n`.
    Yes(Formula),
    No,
}

/// Whether `φ` is equivalent modulo the theory to a Boolean combination of atoms `R_m` over
/// the context with `n ≤ m ≤ arity_bound`. Exact for that candidate space.
pub fn p0n_membership(
    ctx: &Context,
    phi: &Formula,
    n: usize,
    arity_bound: usize,
) -> Result<P0nMembership, PrefixError> {
    let own = atoms_of(phi, ctx)?;
    if own.iter().all(|a| a.arity() >= n) {
        return Ok(P0nMembership::Yes(phi.clone()));
    }
    let candidates = PrefixAtom::all(ctx.len(), n..=arity_bound);
    let mut all = candidates.clone();
    for a in own {
        if !all.contains(&a) {
            all.push(a);
        }
    }
    let formulas = all
        .iter()
        .map(|a| a.to_formula(ctx))
        .collect::<Result<Vec<_>, _>>()?;
    let mut table: BTreeMap<Vec<bool>, bool> = BTreeMap::new();
    for val in consistent_valuations(&all)? {
        let value = eval(phi, &formulas, &val);
        let key = val[..candidates.len()].to_vec();
        if *table.entry(key).or_insert(value) != value {
            return Ok(P0nMembership::No);
        }
    }
    let cand = &formulas[..candidates.len()];
    let witness = if table.values().all(|&v| v) {
        Formula::True
    } else {
        Formula::disj(table.iter().filter(|(_, &v)| v).map(|(k, _)| literal_conj(cand, k)))
    };
    Ok(P0nMembership::Yes(witness))
}

/// One Boolean function of the experiment and the first fragment excluding it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Exclusion {
    pub formula: Formula,
    pub trivial: bool,
    pub excluded_at: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct IntersectionReport {
    pub k: usize,
    pub arity_bound: usize,
    pub n_max: usize,
    /// Largest arity of the candidate atoms used for every membership query.
    pub candidate_bound: usize,
    pub exclusions: Vec<Exclusion>,
    pub report: Report,
}

impl IntersectionReport {
    pub fn lines(&self) -> Vec<String> {
        let mut out: Vec<String> = self
            .exclusions
            .iter()
            .map(|e| match e.excluded_at {
                Some(n) => format!("EXCLUDED n={n} formula={}", e.formula),
                None => format!("SURVIVES formula={}", e.formula),
            })
            .collect();
        out.extend(self.report.lines());
        out
    }
}

impl fmt::Display for IntersectionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for l in self.lines() {
            writeln!(f, "{l}")?;
        }
        Ok(())
    }
}

/// Enumerates the Boolean functions, modulo the theory, of atoms of arity at most
/// `arity_bound` over `x1..xk`, and finds for each the least `n ≤ n_max` whose fragment
/// excludes it. Only the functions `⊤` and `⊥` may survive.
pub fn intersection_experiment(k: usize, arity_bound: usize, n_max: usize) -> Result<IntersectionReport, PrefixError> {
    let ctx = Context::canonical(k);
    let base = PrefixAtom::all(k, 0..=arity_bound);
    let formulas = base
        .iter()
        .map(|a| a.to_formula(&ctx))
        .collect::<Result<Vec<_>, _>>()?;
    let vals = consistent_valuations(&base)?;
    if vals.len() > 16 {
        return Err(PrefixError::TooManyAtoms(base.len()));
    }
    let candidate_bound = arity_bound.max(n_max) + 1;
    let full = (1u64 << vals.len()) - 1;
    let mut exclusions = Vec::new();
    let mut report = Report::new();
    for mask in 0..=full {
        let formula = if mask == full {
            Formula::True
        } else {
            Formula::disj(
                vals.iter()
                    .enumerate()
                    .filter(|(i, _)| mask >> i & 1 == 1)
                    .map(|(_, v)| literal_conj(&formulas, v)),
            )
        };
        let trivial = mask == 0 || mask == full;
        let mut excluded_at = None;
        for n in 0..=n_max {
            if p0n_membership(&ctx, &formula, n, candidate_bound)? == P0nMembership::No {
                excluded_at = Some(n);
                break;
            }
        }
        match (trivial, excluded_at) {
            (false, None) => report.push(Violation::new("not-excluded").with("formula", &formula)),
            (true, Some(n)) => report.push(Violation::new("trivial-excluded").with("n", n).with("formula", &formula)),
            _ => {}
        }
        exclusions.push(Exclusion {
            formula,
            trivial,
            excluded_at,
        });
    }
    Ok(IntersectionReport {
        k,
        arity_bound,
        n_max,
        candidate_bound,
        exclusions,
        report,
    })
}

/// A model and assignment on which `R0` and a target formula take different values.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Separation {
    pub k: usize,
    pub target: Formula,
    pub model: String,
    pub r0: bool,
    pub value: bool,
    /// Whether the model is among those named for this context length by the argument
    /// being replayed, rather than a supplementary one.
    pub from_argument: bool,
}

#[derive(Debug, Clone)]
pub struct SeparationReport {
    pub separations: Vec<Separation>,
    pub report: Report,
}

impl SeparationReport {
    pub fn lines(&self) -> Vec<String> {
        let mut out: Vec<String> = self
            .separations
            .iter()
            .map(|s| {
                format!(
                    "SEPARATION k={} target={} model={} r0={} value={} source={}",
                    s.k,
                    s.target,
                    s.model,
                    s.r0,
                    s.value,
                    if s.from_argument { "argument" } else { "supplementary" }
                )
            })
            .collect();
        out.extend(self.report.lines());
        out
    }
}

impl fmt::Display for SeparationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for l in self.lines() {
            writeln!(f, "{l}")?;
        }
        Ok(())
    }
}

fn demo_models() -> Vec<(&'static str, WordLanguageModel)> {
    vec![
        ("empty", WordLanguageModel::new(vec![], 2)),
        ("one-element-full", WordLanguageModel::full(vec!["a".into()], 2)),
        ("one-element-empty", WordLanguageModel::new(vec!["a".into()], 2)),
    ]
}

/// Separates `R0` from each of `⊤, ⊥, ∃x⊤, ¬∃x⊤` in the contexts of length 0 and 1 by
/// evaluation in small word models, preferring the models of the replayed argument.
pub fn does_not_generate_demo() -> SeparationReport {
    let mut report = Report::new();
    let models = demo_models();
    for (name, m) in &models {
        let r = verify_t_axioms(m, m.length - 1).expect("length covers the check");
        if !r.passed() {
            report.push(Violation::new("model-not-a-model").with("model", name));
        }
    }
    let ex = Formula::exists("x", Formula::True);
    let targets = [Formula::True, Formula::False, ex.clone(), Formula::not(ex)];
    let r0 = Formula::rel("R0", &[]);
    let mut separations = Vec::new();
    for k in 0..=1 {
        let ctx = Context::canonical(k);
        let argument: &[&str] = if k == 0 {
            &["empty", "one-element-full"]
        } else {
            &["one-element-full", "one-element-empty"]
        };
        for target in &targets {
            let mut found = None;
            let ordered = models
                .iter()
                .filter(|(n, _)| argument.contains(n))
                .chain(models.iter().filter(|(n, _)| !argument.contains(n)));
            for (name, m) in ordered {
                let s = m.to_structure();
                if k > 0 && s.size() == 0 {
                    continue;
                }
                let rho = vec![0; k];
                let at = |f: &Formula| {
                    let fic = FormulaInContext::new(ctx.clone(), f.clone()).expect("formula over the context");
                    eval_in_structure(&fic, &s, &rho).expect("structure interprets the formula")
                };
                let (a, b) = (at(&r0), at(target));
                if a != b {
                    found = Some(Separation {
                        k,
                        target: target.clone(),
                        model: name.to_string(),
                        r0: a,
                        value: b,
                        from_argument: argument.contains(name),
                    });
                    break;
                }
            }
            match found {
                Some(s) => separations.push(s),
                None => report.push(Violation::new("not-separated").with("k", k).with("target", target)),
            }
        }
    }
    SeparationReport { separations, report }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prefix::qf_entails_mod_t;

    fn r(vars: &[&str]) -> Formula {
        Formula::rel(&format!("R{}", vars.len()), vars)
    }

    #[test]
    fn consistent_valuations_respect_prefixes() {
        let atoms = PrefixAtom::all(1, 0..=2);
        let vals = consistent_valuations(&atoms).unwrap();
        assert_eq!(vals.len(), 4);
    }

    #[test]
    fn membership_examples() {
        let ctx = Context::canonical(1);
        let phi = Formula::and(r(&["x1", "x1", "x1"]), Formula::not(r(&["x1", "x1", "x1", "x1"])));
        assert_eq!(p0n_membership(&ctx, &phi, 3, 4).unwrap(), P0nMembership::Yes(phi.clone()));
        assert_eq!(p0n_membership(&ctx, &r(&["x1"]), 3, 4).unwrap(), P0nMembership::No);
        assert_eq!(p0n_membership(&ctx, &Formula::True, 2, 3).unwrap(), P0nMembership::Yes(Formula::True));
        let tauto = Formula::or(r(&["x1"]), Formula::not(r(&["x1"])));
        let P0nMembership::Yes(w) = p0n_membership(&ctx, &tauto, 2, 3).unwrap() else {
            panic!("tautology is in every fragment");
        };
        assert!(qf_entails_mod_t(&ctx, &w, &tauto).unwrap() && qf_entails_mod_t(&ctx, &tauto, &w).unwrap());
    }

    #[test]
    fn small_intersection_leaves_only_constants() {
        let rep = intersection_experiment(1, 2, 3).unwrap();
        assert_eq!(rep.exclusions.len(), 16);
        assert!(rep.report.passed(), "{rep}");
        let rep0 = intersection_experiment(0, 0, 1).unwrap();
        let r0 = rep0.exclusions.iter().find(|e| !e.trivial && e.formula == r(&[])).unwrap();
        assert_eq!(r0.excluded_at, Some(1));
    }

    #[test]
    fn all_separations_found() {
        let rep = does_not_generate_demo();
        assert!(rep.report.passed(), "{rep}");
        assert_eq!(rep.separations.len(), 8);
        let odd: Vec<_> = rep.separations.iter().filter(|s| !s.from_argument).collect();
        assert_eq!(odd.len(), 1);
        assert_eq!((odd[0].k, odd[0].model.as_str()), (0, "one-element-empty"));
    }
}
