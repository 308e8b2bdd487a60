use std::collections::BTreeMap;

use itertools::Itertools;

use crate::calculus::Sequent;
use crate::doctrine::{Report, Violation};
use crate::formula::Formula;
use crate::lang::{Context, Term};
use crate::theory::Theory;

use super::enumerate::{atoms_over, bound_names, distinct_qf};
use super::modulo::CANDIDATE_CAP;
use super::oracle::{EntailmentOracle, Verdict};
use super::SemanticsError;

#[derive(Debug, Clone)]
pub struct LayerBounds {
    pub predicates: BTreeMap<String, usize>,
    pub body_size: usize,
    pub max_quantified: usize,
}

/// A generator `∀y⃗ α` of the one-step layer.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Generator {
    pub bound: Vec<String>,
    pub body: Formula,
}

impl Generator {
    pub fn formula(&self) -> Formula {
        Formula::forall_many(&self.bound, self.body.clone())
    }
}

/// A bounded presentation of the fiber of the one-step layer over a context.
#[derive(Debug, Clone)]
pub struct OneStepLayer {
    pub ctx: Context,
    /// Quantifier-free elements, one per class modulo the theory.
    pub elements: Vec<Formula>,
    pub generators: Vec<Generator>,
    /// `(element, generator, holds)` for `element ≤ generator`, decided exactly.
    pub adjunction: Vec<(usize, usize, bool)>,
    /// Order among generators where resolved.
    pub generator_order: BTreeMap<(usize, usize), bool>,
    /// Ordered generator pairs left undecided.
    pub unresolved: Vec<(usize, usize)>,
    pub report: Report,
}

fn seq(ctx: &Context, a: &Formula, b: &Formula) -> Sequent {
    Sequent::new(ctx.clone(), vec![a.clone()], vec![b.clone()])
}

fn exact(v: Verdict) -> Option<bool> {
    v.as_bool()
}

/// Presents the one-step layer over `ctx`: bounded quantifier-free elements, generators
/// `∀y⃗ α`, the adjunction `β ≤ ∀y⃗ α ⟺ β ≤ α` decided with the complete quantifier-free
/// oracle, and the order among generators decided by the bounded oracle where possible.
pub fn one_step_layer(
    theory: &Theory,
    qf_oracle: &dyn EntailmentOracle,
    bounded: &dyn EntailmentOracle,
    ctx: &Context,
    bounds: &LayerBounds,
) -> Result<OneStepLayer, SemanticsError> {
    if !qf_oracle.complete_on_quantifier_free(theory) {
        return Err(SemanticsError::IncompleteOracle(qf_oracle.method().to_string()));
    }
    let mut report = Report::new();
    let eq = theory.signature().has_equality();
    let atoms = atoms_over(&bounds.predicates, ctx.vars(), eq);
    let mut elements: Vec<Formula> = Vec::new();
    for beta in distinct_qf(&atoms, bounds.body_size, CANDIDATE_CAP) {
        let mut dup = false;
        for e in &elements {
            let there = exact(qf_oracle.decide(&seq(ctx, &beta, e), theory));
            let back = exact(qf_oracle.decide(&seq(ctx, e, &beta), theory));
            if there.is_none() || back.is_none() {
                report.push(Violation::new("incomplete-answer").with("lhs", &beta).with("rhs", e));
            }
            if there == Some(true) && back == Some(true) {
                dup = true;
                break;
            }
        }
        if !dup {
            elements.push(beta);
        }
    }
    let mut generators = Vec::new();
    for m in 1..=bounds.max_quantified {
        let ys = bound_names(ctx.vars(), m);
        let scope: Vec<String> = ctx.vars().iter().chain(&ys).cloned().collect();
        let inner = atoms_over(&bounds.predicates, &scope, eq);
        if inner.len() > 16 {
            continue;
        }
        for body in distinct_qf(&inner, bounds.body_size, CANDIDATE_CAP) {
            let fv = body.free_vars();
            if ys.iter().all(|y| fv.contains(y)) {
                generators.push(Generator {
                    bound: ys.clone(),
                    body,
                });
            }
        }
    }
    let mut adjunction = Vec::new();
    for (i, beta) in elements.iter().enumerate() {
        for (j, g) in generators.iter().enumerate() {
            let ext = Context::new(ctx.vars().iter().chain(&g.bound).cloned()).expect("fresh bound names");
            let Some(holds) = exact(qf_oracle.decide(&seq(&ext, beta, &g.body), theory)) else {
                report.push(Violation::new("incomplete-answer").with("lhs", beta).with("rhs", &g.body));
                continue;
            };
            adjunction.push((i, j, holds));
            if let Some(direct) = exact(bounded.decide(&seq(ctx, beta, &g.formula()), theory)) {
                if direct != holds {
                    report.push(Violation::new("one-step-universal").with("elem", beta).with("gen", g.formula()));
                }
            }
        }
    }
    for (i, a) in elements.iter().enumerate() {
        for (j, b) in elements.iter().enumerate() {
            let q = exact(qf_oracle.decide(&seq(ctx, a, b), theory));
            let p = exact(bounded.decide(&seq(ctx, a, b), theory));
            if let (Some(q), Some(p)) = (q, p) {
                if p != q {
                    report.push(Violation::new("reflection").with("lhs", i).with("rhs", j));
                }
            }
        }
    }
    check_substitution_instances(theory, qf_oracle, ctx, &elements, &generators, &adjunction, &mut report);
    let mut generator_order = BTreeMap::new();
    let mut unresolved = Vec::new();
    for (i, a) in generators.iter().enumerate() {
        for (j, b) in generators.iter().enumerate() {
            if i == j {
                continue;
            }
            match exact(bounded.decide(&seq(ctx, &a.formula(), &b.formula()), theory)) {
                Some(v) => {
                    generator_order.insert((i, j), v);
                }
                None => unresolved.push((i, j)),
            }
        }
    }
    Ok(OneStepLayer {
        ctx: ctx.clone(),
        elements,
        generators,
        adjunction,
        generator_order,
        unresolved,
        report,
    })
}

/// For every variable map `σ` of the context into itself and every adjunction inequality
/// `β ≤ ∀y⃗ α` that holds, `β[σ] ≤ ∀y⃗ α[σ]` must hold, and substitution must commute with
/// the quantifier block.
fn check_substitution_instances(
    theory: &Theory,
    qf_oracle: &dyn EntailmentOracle,
    ctx: &Context,
    elements: &[Formula],
    generators: &[Generator],
    adjunction: &[(usize, usize, bool)],
    report: &mut Report,
) {
    let vars = ctx.vars();
    for image in (0..vars.len()).map(|_| vars.iter()).multi_cartesian_product() {
        let sigma: BTreeMap<String, Term> = vars
            .iter()
            .cloned()
            .zip(image.into_iter().map(|v| Term::Var(v.clone())))
            .collect();
        for &(i, j, holds) in adjunction {
            let g = &generators[j];
            let moved = g.formula().subst(&sigma);
            let expected = Formula::forall_many(&g.bound, g.body.subst(&sigma));
            if !moved.alpha_eq(&expected) {
                report.push(Violation::new("one-step-beck-chevalley").with("gen", g.formula()));
            }
            if !holds {
                continue;
            }
            let ext = Context::new(vars.iter().chain(&g.bound).cloned()).expect("fresh bound names");
            let s = seq(&ext, &elements[i].subst(&sigma), &g.body.subst(&sigma));
            if qf_oracle.decide(&s, theory).as_bool() == Some(false) {
                report.push(
                    Violation::new("one-step-beck-chevalley")
                        .with("elem", &elements[i])
                        .with("gen", g.formula()),
                );
            }
        }
    }
}
