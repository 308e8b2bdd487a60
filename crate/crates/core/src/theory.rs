//! Theories: finite axiom lists plus generated axiom families.

use std::collections::BTreeSet;

use crate::formula::{Formula, FormulaError};
use crate::lang::{pool_name, Signature, Term};

/// An infinite family of axioms described by a rule.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AxiomFamily {
    /// `∀x1..xn (P_n(x1..xn) ↔ ∃x_{n+1} P_{n+1}(x1..x_{n+1}))` for every `n`, where
    /// `P_n` is the member of the predicate family with the given prefix.
    PrefixExtension { prefix: String },
}

impl AxiomFamily {
    pub fn instance(&self, n: usize) -> Formula {
        match self {
            AxiomFamily::PrefixExtension { prefix } => prefix_axiom(prefix, n),
        }
    }

    fn prefix(&self) -> &str {
        match self {
            AxiomFamily::PrefixExtension { prefix } => prefix,
        }
    }
}

/// The `n`-th axiom of the prefix-extension family.
pub fn prefix_axiom(prefix: &str, n: usize) -> Formula {
    let xs: Vec<String> = (1..=n).map(pool_name).collect();
    let args = |k: usize| (1..=k).map(|i| Term::Var(pool_name(i))).collect::<Vec<_>>();
    let lhs = Formula::Atom(format!("{prefix}{n}"), args(n));
    let rhs = Formula::Exists(
        pool_name(n + 1),
        Box::new(Formula::Atom(format!("{prefix}{}", n + 1), args(n + 1))),
    );
    Formula::forall_many(&xs, Formula::iff(lhs, rhs))
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Theory {
    signature: Signature,
    axioms: Vec<Formula>,
    families: Vec<AxiomFamily>,
}

impl Theory {
    pub fn new(signature: Signature) -> Self {
        Self {
            signature,
            axioms: Vec::new(),
            families: Vec::new(),
        }
    }

    /// Adds a sentence after checking it against the signature.
    pub fn add_axiom(&mut self, phi: Formula) -> Result<(), FormulaError> {
        phi.check(&self.signature)?;
        if let Some(v) = phi.free_vars().into_iter().next() {
            return Err(FormulaError::NotInContext {
                var: v,
                ctx: crate::lang::Context::empty(),
            });
        }
        self.axioms.push(phi);
        Ok(())
    }

    pub fn with_axiom(mut self, phi: Formula) -> Self {
        self.add_axiom(phi).expect("well-formed sentence");
        self
    }

    pub fn add_family(&mut self, family: AxiomFamily) {
        let AxiomFamily::PrefixExtension { prefix } = &family;
        self.signature.add_family(crate::lang::PredicateFamily::new(prefix.clone()));
        self.families.push(family);
    }

    /// The theory whose axioms are the prefix-extension family over `R0, R1, ...`.
    pub fn prefix_theory() -> Self {
        let mut t = Theory::new(Signature::new().family("R"));
        t.add_family(AxiomFamily::PrefixExtension { prefix: "R".into() });
        t
    }

    pub fn signature(&self) -> &Signature {
        &self.signature
    }

    pub fn axioms(&self) -> &[Formula] {
        &self.axioms
    }

    pub fn families(&self) -> &[AxiomFamily] {
        &self.families
    }

    pub fn is_finite(&self) -> bool {
        self.families.is_empty()
    }

    /// Membership up to alpha-equivalence, including generated axioms.
    pub fn contains(&self, phi: &Formula) -> bool {
        if self.axioms.iter().any(|a| a.alpha_eq(phi)) {
            return true;
        }
        let leading = {
            let mut n = 0;
            let mut cur = phi;
            while let Formula::Forall(_, a) = cur {
                n += 1;
                cur = a;
            }
            n
        };
        self.families.iter().any(|fam| fam.instance(leading).alpha_eq(phi))
    }

    /// A finite axiom subset sufficient for queries over the given formulas: the explicit
    /// axioms together with family instances `0..=M`, `M` the largest family arity present.
    pub fn axioms_for<'a>(&self, formulas: impl IntoIterator<Item = &'a Formula>) -> Vec<Formula> {
        let mut out = self.axioms.clone();
        let preds: BTreeSet<(String, usize)> = formulas
            .into_iter()
            .flat_map(|f| f.predicates().into_iter())
            .collect();
        for fam in &self.families {
            let max = preds
                .iter()
                .filter_map(|(p, _)| crate::lang::PredicateFamily::new(fam.prefix()).index_of(p))
                .max();
            if let Some(m) = max {
                for n in 0..=m {
                    out.push(fam.instance(n));
                }
            }
        }
        out
    }

    /// Family instances `0..=m`.
    pub fn family_instances(&self, m: usize) -> Vec<Formula> {
        self.families
            .iter()
            .flat_map(|fam| (0..=m).map(move |n| fam.instance(n)))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prefix_axioms_shape() {
        let a0 = prefix_axiom("R", 0);
        assert_eq!(a0.to_string(), "(and (imp R0 (exists x1 (R1 x1))) (imp (exists x1 (R1 x1)) R0))");
        let a1 = prefix_axiom("R", 1);
        assert!(a1.free_vars().is_empty());
        let t = Theory::prefix_theory();
        assert!(t.contains(&a1));
        assert!(t.contains(&a1.rectify(&["x1".to_string()].into())));
        assert!(t.contains(&a0));
        assert!(!t.contains(&Formula::rel("R0", &[])));
        a1.check(t.signature()).unwrap();
    }

    #[test]
    fn sufficient_axiom_subset() {
        let t = Theory::prefix_theory();
        let q = Formula::rel("R2", &["x1", "x2"]);
        assert_eq!(t.axioms_for([&q]).len(), 3);
    }
}
