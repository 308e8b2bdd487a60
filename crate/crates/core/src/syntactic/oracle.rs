use std::collections::BTreeMap;
use std::fmt;

use crate::calculus::{check_proof, prove_bounded, Budget, ProofTree, Sequent};
use crate::formula::{Formula, FormulaInContext};
use crate::theory::Theory;

use super::certify::{close_by_identity, propositional_proof};
use super::structure::{
    bounded_axioms, countermodel_search_with, satisfies_all, symbols_of, Countermodel,
    FiniteStructure, DEFAULT_STRUCTURE_CAP,
};
use super::SemanticsError;

/// A certified three-valued answer to an entailment query.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Proved(ProofTree),
    Refuted(Countermodel),
    Unknown(String),
}

impl Verdict {
    pub fn is_proved(&self) -> bool {
        matches!(self, Verdict::Proved(_))
    }

    pub fn is_refuted(&self) -> bool {
        matches!(self, Verdict::Refuted(_))
    }

    pub fn is_decided(&self) -> bool {
        !matches!(self, Verdict::Unknown(_))
    }

    /// `Some(true)` for proved, `Some(false)` for refuted.
    pub fn as_bool(&self) -> Option<bool> {
        match self {
            Verdict::Proved(_) => Some(true),
            Verdict::Refuted(_) => Some(false),
            Verdict::Unknown(_) => None,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Verdict::Proved(_) => "proved",
            Verdict::Refuted(_) => "refuted",
            Verdict::Unknown(_) => "unknown",
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Proved(t) => write!(f, "proved ({} nodes)", t.size()),
            Verdict::Refuted(c) => write!(f, "refuted {c}"),
            Verdict::Unknown(why) => write!(f, "unknown: {why}"),
        }
    }
}

/// A decision procedure for `Γ ⇒_ctx Δ` modulo a theory.
pub trait EntailmentOracle {
    /// Tag naming the decision method.
    fn method(&self) -> &'static str;

    fn decide(&self, s: &Sequent, theory: &Theory) -> Verdict;

    /// Whether every quantifier-free query over the theory receives a decisive answer.
    fn complete_on_quantifier_free(&self, _theory: &Theory) -> bool {
        false
    }
}

/// Checks a verdict's certificate: the proof concludes the sequent and passes the checker,
/// or the countermodel satisfies the bounded axioms and falsifies the sequent.
pub fn check_certificate(v: &Verdict, s: &Sequent, theory: &Theory) -> Result<(), String> {
    match v {
        Verdict::Proved(t) => {
            if !t.conclusion.alpha_eq(s) {
                return Err(format!("proof concludes {} instead of {s}", t.conclusion));
            }
            check_proof(t, theory).map_err(|e| e.to_string())
        }
        Verdict::Refuted(c) => {
            let axioms = bounded_axioms(s, theory, 0);
            if !satisfies_all(&c.structure, &axioms).map_err(|e| e.to_string())? {
                return Err("countermodel violates an axiom".into());
            }
            if super::structure::sequent_holds_at(s, &c.structure, &c.assignment).map_err(|e| e.to_string())? {
                return Err("countermodel satisfies the sequent".into());
            }
            Ok(())
        }
        Verdict::Unknown(_) => Ok(()),
    }
}

/// Propositional truth tables for quantifier-free, equality-free relational queries over
/// the empty theory.
#[derive(Debug, Clone, Copy, Default)]
pub struct TruthTableOracle;

/// Largest number of distinct atoms the truth-table oracle enumerates.
pub const MAX_TRUTH_TABLE_ATOMS: usize = 20;

fn in_truth_table_fragment(s: &Sequent, theory: &Theory) -> bool {
    theory.axioms().is_empty()
        && theory.families().is_empty()
        && s
            .formulas()
            .all(|f| f.is_quantifier_free() && !f.uses_equality() && f.functions().is_empty())
}

impl EntailmentOracle for TruthTableOracle {
    fn method(&self) -> &'static str {
        "truth-table"
    }

    fn decide(&self, s: &Sequent, theory: &Theory) -> Verdict {
        if !in_truth_table_fragment(s, theory) {
            return Verdict::Unknown("outside the quantifier-free relational fragment of the empty theory".into());
        }
        let mut atoms: Vec<Formula> = Vec::new();
        for f in s.formulas() {
            for a in f.atoms() {
                if !atoms.contains(&a) {
                    atoms.push(a);
                }
            }
        }
        if atoms.len() > MAX_TRUTH_TABLE_ATOMS {
            return Verdict::Unknown(format!("{} atoms exceed the truth-table limit", atoms.len()));
        }
        for code in 0u64..1 << atoms.len() {
            let val = |a: &Formula| atoms.iter().position(|b| b == a).is_some_and(|i| code >> i & 1 == 1);
            let holds = !s.ante.iter().all(|f| f.eval_prop(&val).expect("quantifier-free"))
                || s.succ.iter().any(|f| f.eval_prop(&val).expect("quantifier-free"));
            if !holds {
                return Verdict::Refuted(valuation_model(s, &atoms, code));
            }
        }
        match propositional_proof(s, theory, &close_by_identity) {
            Some(t) => Verdict::Proved(t),
            None => Verdict::Unknown("tautology without a propositional certificate".into()),
        }
    }

    fn complete_on_quantifier_free(&self, theory: &Theory) -> bool {
        theory.axioms().is_empty() && theory.families().is_empty() && theory.signature().is_relational()
    }
}

/// The structure whose carrier is the context, each variable denoting itself, in which
/// exactly the atoms true under the valuation hold.
fn valuation_model(s: &Sequent, atoms: &[Formula], code: u64) -> Countermodel {
    let vars = s.ctx.vars();
    let mut m = FiniteStructure::new(vars.len());
    let (preds, _) = symbols_of(s.formulas());
    let mut tuples: BTreeMap<&str, Vec<Vec<usize>>> = preds.keys().map(|p| (p.as_str(), Vec::new())).collect();
    for (i, a) in atoms.iter().enumerate() {
        if code >> i & 1 == 1 {
            if let Formula::Atom(p, args) = a {
                let t = args
                    .iter()
                    .map(|t| match t {
                        crate::lang::Term::Var(v) => vars.iter().position(|w| w == v).expect("in context"),
                        crate::lang::Term::App(..) => unreachable!("relational"),
                    })
                    .collect();
                tuples.get_mut(p.as_str()).expect("collected").push(t);
            }
        }
    }
    for (p, ts) in tuples {
        m.set_relation(p, preds[p], &ts).expect("tuples over the carrier");
    }
    Countermodel {
        structure: m,
        assignment: (0..vars.len()).collect(),
    }
}

/// Counts of the existential fragment of the relational `∃*∀*` class: the number of free
/// plus existential variables, or `None` outside the class.
pub fn small_model_bound(s: &Sequent, axioms: &[Formula]) -> Option<usize> {
    let all: Vec<&Formula> = s.formulas().chain(axioms).collect();
    if all.iter().any(|f| !f.functions().is_empty()) {
        return None;
    }
    let body = Formula::conj(
        axioms
            .iter()
            .cloned()
            .chain(s.ante.iter().cloned())
            .chain(s.succ.iter().cloned().map(Formula::not)),
    )
    .nnf();
    fn count(f: &Formula, under_forall: bool) -> Option<usize> {
        match f {
            Formula::True | Formula::False | Formula::Atom(..) | Formula::Eq(..) | Formula::Not(_) => Some(0),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Imp(a, b) => Some(count(a, under_forall)? + count(b, under_forall)?),
            Formula::Forall(_, a) => count(a, true),
            Formula::Exists(_, a) => {
                if under_forall {
                    None
                } else {
                    Some(1 + count(a, false)?)
                }
            }
        }
    }
    let e = count(&body, false)?;
    Some((s.ctx.len() + e).max(1))
}

/// Countermodel enumeration, then bounded proof search, with the small-model bound
/// upgrading exhausted searches in the relational `∃*∀*` class to decisions.
#[derive(Debug, Clone, Copy)]
pub struct BoundedOracle {
    pub budget: Budget,
    pub max_size: usize,
    /// Budget for a second proof attempt once the small-model bound shows validity.
    pub escalation: Budget,
    pub structure_cap: u128,
}

impl Default for BoundedOracle {
    fn default() -> Self {
        Self {
            budget: Budget::default(),
            max_size: 3,
            escalation: Budget {
                max_depth: 10,
                max_term_depth: 1,
                max_nodes: 200_000,
            },
            structure_cap: DEFAULT_STRUCTURE_CAP,
        }
    }
}

impl BoundedOracle {
    pub fn with_budget(budget: Budget) -> Self {
        Self {
            budget,
            ..Self::default()
        }
    }
}

impl EntailmentOracle for BoundedOracle {
    fn method(&self) -> &'static str {
        "bounded"
    }

    fn decide(&self, s: &Sequent, theory: &Theory) -> Verdict {
        let axioms = bounded_axioms(s, theory, 0);
        let bound = small_model_bound(s, &axioms);
        let size = self.max_size.max(bound.unwrap_or(0));
        let out = countermodel_search_with(s, &axioms, size, self.structure_cap);
        if let Some(c) = out.model {
            return Verdict::Refuted(c);
        }
        if let Ok(t) = prove_bounded(s, theory, self.budget) {
            return Verdict::Proved(t);
        }
        match (bound, out.exhaustive_through) {
            (Some(b), Some(e)) if e >= b && theory.is_finite() => match prove_bounded(s, theory, self.escalation) {
                Ok(t) => Verdict::Proved(t),
                Err(_) => Verdict::Unknown(format!(
                    "valid by the small-model bound {b}, but no proof was found within the escalated budget"
                )),
            },
            _ => Verdict::Unknown(format!(
                "no proof within depth {} and no countermodel up to size {}",
                self.budget.max_depth, size
            )),
        }
    }
}

/// The first decisive answer among several oracles.
pub struct FirstDecisive(pub Vec<Box<dyn EntailmentOracle>>);

impl EntailmentOracle for FirstDecisive {
    fn method(&self) -> &'static str {
        "first-decisive"
    }

    fn decide(&self, s: &Sequent, theory: &Theory) -> Verdict {
        let mut notes = Vec::new();
        for o in &self.0 {
            match o.decide(s, theory) {
                Verdict::Unknown(why) => notes.push(format!("{}: {why}", o.method())),
                v => return v,
            }
        }
        Verdict::Unknown(notes.join("; "))
    }

    fn complete_on_quantifier_free(&self, theory: &Theory) -> bool {
        self.0.iter().any(|o| o.complete_on_quantifier_free(theory))
    }
}

/// The order of the syntactic doctrine: the oracle's verdict on `φ ⇒_ctx ψ`.
pub fn lt_leq(
    theory: &Theory,
    oracle: &dyn EntailmentOracle,
    phi: &FormulaInContext,
    psi: &FormulaInContext,
) -> Result<Verdict, SemanticsError> {
    if phi.ctx() != psi.ctx() {
        return Err(SemanticsError::ContextMismatch);
    }
    let s = Sequent::new(phi.ctx().clone(), vec![phi.formula().clone()], vec![psi.formula().clone()]);
    Ok(oracle.decide(&s, theory))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::{Context, Signature};

    fn p(x: &str) -> Formula {
        Formula::rel("P", &[x])
    }

    #[test]
    fn truth_table_certificates() {
        let t = Theory::new(Signature::new().predicate("P", 1).predicate("Q", 2));
        let ctx = Context::new(["x", "y"]).unwrap();
        let valid = Sequent::new(ctx.clone(), vec![Formula::and(p("x"), p("y"))], vec![p("y")]);
        let v = TruthTableOracle.decide(&valid, &t);
        assert!(v.is_proved());
        check_certificate(&v, &valid, &t).unwrap();
        let invalid = Sequent::new(ctx, vec![p("x")], vec![p("y")]);
        let v = TruthTableOracle.decide(&invalid, &t);
        assert!(v.is_refuted());
        check_certificate(&v, &invalid, &t).unwrap();
    }

    #[test]
    fn bound_covers_bernays_schoenfinkel() {
        let s = Sequent::new(
            Context::new(["x"]).unwrap(),
            vec![Formula::forall("y", Formula::rel("R", &["x", "y"]))],
            vec![Formula::exists("y", Formula::rel("R", &["y", "x"]))],
        );
        assert_eq!(small_model_bound(&s, &[]), Some(1));
        let alt = Sequent::new(
            Context::empty(),
            vec![],
            vec![Formula::exists("x", Formula::forall("y", Formula::rel("R", &["x", "y"])))],
        );
        assert_eq!(small_model_bound(&alt, &[]), None);
    }

    #[test]
    fn bounded_oracle_decides_small_queries() {
        let t = Theory::new(Signature::new().predicate("P", 1));
        let ctx = Context::empty();
        let ex = Sequent::new(ctx.clone(), vec![], vec![Formula::exists("x", Formula::True)]);
        let v = BoundedOracle::default().decide(&ex, &t);
        assert!(matches!(&v, Verdict::Refuted(c) if c.structure.size() == 0));
        let s = Sequent::new(ctx, vec![Formula::forall("x", p("x"))], vec![Formula::forall("y", p("y"))]);
        let v = BoundedOracle::default().decide(&s, &t);
        assert!(v.is_proved());
        check_certificate(&v, &s, &t).unwrap();
    }
}
