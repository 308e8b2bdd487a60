use crate::doctrine::{Elem, FiniteDoctrine, Report, Violation};
use crate::formula::{Formula, FormulaInContext};
use crate::lang::Context;
use crate::theory::Theory;

use super::oracle::{lt_leq, EntailmentOracle};
use super::semantics::{interpret, interpret_formula, ContextObjects, InterpretationFamily};
use super::SemanticsError;

/// The outcome of checking that a family of predicate interpretations induces a morphism
/// out of the syntactic doctrine.
#[derive(Debug, Clone)]
pub struct FamilyCheck {
    pub report: Report,
    /// The value of each sampled formula, in sample order, both sides of each pair.
    pub values: Vec<(Elem, Elem)>,
}

/// Checks `I(α) = ⊤` for the explicit axioms and the family instances up to `axiom_bound`;
/// if they hold, checks on each sampled pair that a proved `φ ≤ ψ` gives `I(φ) ≤ I(ψ)`.
pub fn morphism_from_family(
    theory: &Theory,
    d: &FiniteDoctrine,
    objects: &ContextObjects,
    family: &InterpretationFamily,
    axiom_bound: usize,
    samples: &[(FormulaInContext, FormulaInContext)],
    oracle: &dyn EntailmentOracle,
) -> Result<FamilyCheck, SemanticsError> {
    let mut report = Report::new();
    let top = d.fiber(objects.object(0)?).top();
    let axioms: Vec<Formula> = theory
        .axioms()
        .iter()
        .cloned()
        .chain(theory.family_instances(axiom_bound))
        .collect();
    for a in &axioms {
        if interpret_formula(a, &[], d, objects, family)? != top {
            report.push(Violation::new("axiom-violated").with("axiom", a));
        }
    }
    let mut values = Vec::new();
    if report.passed() {
        for (phi, psi) in samples {
            let (a, b) = (interpret(phi, d, objects, family)?, interpret(psi, d, objects, family)?);
            values.push((a, b));
            if lt_leq(theory, oracle, phi, psi)?.is_proved() && !d.fiber(objects.object(phi.ctx().len())?).leq(a, b) {
                report.push(
                    Violation::new("not-well-defined")
                        .with("lhs", phi.formula())
                        .with("rhs", psi.formula()),
                );
            }
        }
    }
    Ok(FamilyCheck { report, values })
}

/// A sentence as a formula in the empty context.
pub fn sentence(phi: Formula) -> Result<FormulaInContext, SemanticsError> {
    FormulaInContext::new(Context::empty(), phi).map_err(|e| SemanticsError::Substitution(e.to_string()))
}
