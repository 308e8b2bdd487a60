use std::collections::BTreeMap;
use std::sync::Arc;

use crate::calculus::Sequent;
use crate::doctrine::{BAHom, Elem, FiniteDoctrine, FiniteProductCategory, MorId, ObjId};
use crate::formula::{substitute_formula, Formula, FormulaInContext};
use crate::lang::{CtxMorphism, Term};

use super::structure::{tuple_at, tuple_count, tuple_index, FiniteStructure};
use super::SemanticsError;

/// Per predicate symbol, an element of the fiber over the object of its arity.
pub type InterpretationFamily = BTreeMap<String, Elem>;

/// The objects `1, X, X², ...` of a base category interpreting contexts of a single sort
/// `X`, with `Xⁿ⁺¹` the chosen product `Xⁿ × X`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContextObjects {
    sort: ObjId,
    objects: Vec<ObjId>,
}

impl ContextObjects {
    /// Powers of `sort` up to `max_len`, stopping early where a product is not chosen.
    pub fn new(d: &FiniteDoctrine, sort: ObjId, max_len: usize) -> Self {
        let c = d.base();
        let mut objects = vec![c.terminal()];
        while objects.len() <= max_len {
            match c.product(*objects.last().expect("nonempty"), sort) {
                Some(p) => objects.push(p.object),
                None => break,
            }
        }
        Self { sort, objects }
    }

    pub fn sort(&self) -> ObjId {
        self.sort
    }

    /// The largest context length with an object.
    pub fn max_len(&self) -> usize {
        self.objects.len() - 1
    }

    pub fn object(&self, n: usize) -> Result<ObjId, SemanticsError> {
        self.objects
            .get(n)
            .copied()
            .ok_or(SemanticsError::MissingContext(n))
    }

    /// The projection `Xⁿ -> X` onto the `i`-th variable.
    pub fn projection(&self, d: &FiniteDoctrine, n: usize, i: usize) -> Result<MorId, SemanticsError> {
        let c = d.base();
        if i >= n {
            return Err(SemanticsError::MissingContext(n));
        }
        let p = c
            .product(self.object(n - 1)?, self.sort)
            .ok_or(SemanticsError::MissingContext(n))?;
        if i == n - 1 {
            Ok(p.pr2)
        } else {
            Ok(c.comp(self.projection(d, n - 1, i)?, p.pr1))
        }
    }

    /// The morphism `Xⁿ -> X^m` selecting the listed variables.
    pub fn tuple(&self, d: &FiniteDoctrine, n: usize, vars: &[usize]) -> Result<MorId, SemanticsError> {
        let c = d.base();
        let src = self.object(n)?;
        match vars.split_last() {
            None => Ok(c.to_terminal(src)),
            Some((&last, init)) => {
                let f = self.tuple(d, n, init)?;
                let g = self.projection(d, n, last)?;
                let h = c.pair(f, g).ok_or(SemanticsError::MissingContext(vars.len()))?;
                if c.morphism(h).cod != self.object(vars.len())? {
                    return Err(SemanticsError::MissingContext(vars.len()));
                }
                Ok(h)
            }
        }
    }
}

struct Interpreter<'a> {
    d: &'a FiniteDoctrine,
    objects: &'a ContextObjects,
    family: &'a InterpretationFamily,
}

impl Interpreter<'_> {
    fn var_index(&self, scope: &[String], t: &Term) -> Result<usize, SemanticsError> {
        match t {
            Term::Var(v) => scope
                .iter()
                .rposition(|s| s == v)
                .ok_or_else(|| SemanticsError::Unassigned(v.clone())),
            Term::App(..) => Err(SemanticsError::NotRelational),
        }
    }

    fn eval(&self, phi: &Formula, scope: &mut Vec<String>) -> Result<Elem, SemanticsError> {
        let n = scope.len();
        let fiber = self.d.fiber(self.objects.object(n)?);
        Ok(match phi {
            Formula::True => fiber.top(),
            Formula::False => fiber.bot(),
            Formula::Atom(p, args) => {
                let &value = self
                    .family
                    .get(p)
                    .ok_or_else(|| SemanticsError::Uninterpreted(p.clone()))?;
                if !self.d.fiber(self.objects.object(args.len())?).contains(value) {
                    return Err(SemanticsError::FamilyRange(p.clone()));
                }
                let idx = args.iter().map(|t| self.var_index(scope, t)).collect::<Result<Vec<_>, _>>()?;
                self.d.apply(self.objects.tuple(self.d, n, &idx)?, value)
            }
            Formula::Eq(a, b) => {
                let sort = self.objects.sort();
                let &delta = self.d.delta().get(&sort).ok_or(SemanticsError::MissingEquality)?;
                let (i, j) = (self.var_index(scope, a)?, self.var_index(scope, b)?);
                let c = self.d.base();
                let f = c
                    .pair(self.objects.projection(self.d, n, i)?, self.objects.projection(self.d, n, j)?)
                    .ok_or(SemanticsError::MissingContext(2))?;
                self.d.apply(f, delta)
            }
            Formula::Not(a) => fiber.neg(self.eval(a, scope)?),
            Formula::And(a, b) => self.eval(a, scope)? & self.eval(b, scope)?,
            Formula::Or(a, b) => self.eval(a, scope)? | self.eval(b, scope)?,
            Formula::Imp(a, b) => fiber.join(fiber.neg(self.eval(a, scope)?), self.eval(b, scope)?),
            Formula::Forall(x, a) | Formula::Exists(x, a) => {
                let x_obj = self.objects.object(n)?;
                let diag = self
                    .d
                    .base()
                    .product(x_obj, self.objects.sort())
                    .ok_or(SemanticsError::MissingContext(n + 1))?;
                scope.push(x.clone());
                let body = self.eval(a, scope);
                scope.pop();
                let body = body?;
                let forall = matches!(phi, Formula::Forall(..));
                let stored = if forall {
                    self.d.forall_table(x_obj, self.objects.sort())
                } else {
                    self.d.exists_table(x_obj, self.objects.sort())
                };
                match stored {
                    Some(t) => t[body as usize],
                    None => {
                        let h = self.d.reindexing(diag.pr1);
                        if forall {
                            h.right_adjoint(body)
                        } else {
                            h.left_adjoint(body)
                        }
                    }
                }
            }
        })
    }
}

/// The interpretation of a formula in context as an element of the fiber over the
/// object of its context length.
pub fn interpret(
    phi: &FormulaInContext,
    d: &FiniteDoctrine,
    objects: &ContextObjects,
    family: &InterpretationFamily,
) -> Result<Elem, SemanticsError> {
    interpret_formula(phi.formula(), phi.ctx().vars(), d, objects, family)
}

pub fn interpret_formula(
    phi: &Formula,
    ctx: &[String],
    d: &FiniteDoctrine,
    objects: &ContextObjects,
    family: &InterpretationFamily,
) -> Result<Elem, SemanticsError> {
    let it = Interpreter { d, objects, family };
    it.eval(phi, &mut ctx.to_vec())
}

/// `I(φ[f]) = P(f)(I(φ))` for a substitution of variables.
pub fn naturality_of_interpretation(
    phi: &FormulaInContext,
    f: &CtxMorphism,
    d: &FiniteDoctrine,
    objects: &ContextObjects,
    family: &InterpretationFamily,
) -> Result<bool, SemanticsError> {
    let moved = substitute_formula(phi, f).map_err(|e| SemanticsError::Substitution(e.to_string()))?;
    let lhs = interpret(&moved, d, objects, family)?;
    let src = f.source().vars();
    let idx = f
        .components()
        .iter()
        .map(|t| match t {
            Term::Var(v) => src.iter().position(|s| s == v).ok_or_else(|| SemanticsError::Unassigned(v.clone())),
            Term::App(..) => Err(SemanticsError::NotRelational),
        })
        .collect::<Result<Vec<_>, _>>()?;
    let m = objects.tuple(d, src.len(), &idx)?;
    Ok(lhs == d.apply(m, interpret(phi, d, objects, family)?))
}

/// `I(⋀Γ) ≤ I(⋁Δ)` in the fiber over the sequent's context.
pub fn sequent_valid(
    s: &Sequent,
    d: &FiniteDoctrine,
    objects: &ContextObjects,
    family: &InterpretationFamily,
) -> Result<bool, SemanticsError> {
    let lhs = interpret_formula(&Formula::conj(s.ante.iter().cloned()), s.ctx.vars(), d, objects, family)?;
    let rhs = interpret_formula(&Formula::disj(s.succ.iter().cloned()), s.ctx.vars(), d, objects, family)?;
    Ok(d.fiber(objects.object(s.ctx.len())?).leq(lhs, rhs))
}

/// The subset doctrine of a relational structure over the variable contexts of length at
/// most `max_len`: the fiber over `n` is the powerset of `Mⁿ`, reindexing is inverse image
/// and equality is the diagonal. Returns the doctrine, its context objects and the family
/// given by the structure's relations.
pub fn structure_doctrine(
    m: &FiniteStructure,
    max_len: usize,
) -> Result<(FiniteDoctrine, ContextObjects, InterpretationFamily), SemanticsError> {
    if !m.is_relational() {
        return Err(SemanticsError::NotRelational);
    }
    let s = m.size();
    let max_len = max_len.max(1);
    let card = |n: usize| tuple_count(s, n).filter(|&c| c <= 64).ok_or(SemanticsError::TooLarge(n));
    let cards = (0..=max_len).map(card).collect::<Result<Vec<_>, _>>()?;
    let (cat, maps) = FiniteProductCategory::variable_contexts(max_len).map_err(SemanticsError::from)?;
    let cat = Arc::new(cat);
    let reindex = (0..cat.num_morphisms())
        .map(|f| {
            let mf = cat.morphism(f);
            let (a, b) = (mf.dom, mf.cod);
            let atom_map = (0..cards[a])
                .map(|i| {
                    let t = tuple_at(s, a, i);
                    let u: Vec<usize> = maps[f].iter().map(|&v| t[v]).collect();
                    tuple_index(s, &u)
                })
                .collect();
            BAHom::new(cards[b], atom_map)
        })
        .collect();
    let mut d = FiniteDoctrine::new(cat.clone(), cards.clone(), reindex)?;
    if max_len >= 2 {
        d.set_delta(1, (0..s).fold(0, |acc, i| acc | 1 << (i * s + i)));
    }
    let objects = ContextObjects::new(&d, 1, max_len);
    let mut family = InterpretationFamily::new();
    for (p, (arity, table)) in m.predicates() {
        if *arity > max_len {
            continue;
        }
        let e = table.iter().enumerate().filter(|(_, &b)| b).fold(0, |acc, (i, _)| acc | 1 << i);
        family.insert(p.clone(), e);
    }
    Ok((d, objects, family))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::Context;

    #[test]
    fn forall_is_the_set_computation() {
        let m = FiniteStructure::new(3).with_relation("R", 2, &[vec![0, 0], vec![0, 1], vec![0, 2], vec![1, 1]]);
        let (d, objs, fam) = structure_doctrine(&m, 2).unwrap();
        let phi = FormulaInContext::new(Context::new(["x"]).unwrap(), Formula::forall("y", Formula::rel("R", &["x", "y"]))).unwrap();
        assert_eq!(interpret(&phi, &d, &objs, &fam).unwrap(), 0b001);
        let psi = FormulaInContext::new(Context::new(["x"]).unwrap(), Formula::exists("y", Formula::rel("R", &["x", "y"]))).unwrap();
        assert_eq!(interpret(&psi, &d, &objs, &fam).unwrap(), 0b011);
    }

    #[test]
    fn atom_in_canonical_context_is_the_family_value() {
        let m = FiniteStructure::new(2).with_relation("R", 2, &[vec![1, 0]]);
        let (d, objs, fam) = structure_doctrine(&m, 2).unwrap();
        let phi = FormulaInContext::new(Context::canonical(2), Formula::rel("R", &["x1", "x2"])).unwrap();
        assert_eq!(interpret(&phi, &d, &objs, &fam).unwrap(), fam["R"]);
        let swapped = FormulaInContext::new(Context::canonical(2), Formula::rel("R", &["x2", "x1"])).unwrap();
        assert_eq!(interpret(&swapped, &d, &objs, &fam).unwrap(), 1 << 1);
    }

    #[test]
    fn empty_structure_invalidates_existence() {
        let m = FiniteStructure::new(0);
        let (d, objs, fam) = structure_doctrine(&m, 1).unwrap();
        let s = Sequent::new(Context::empty(), vec![], vec![Formula::exists("x", Formula::True)]);
        assert!(!sequent_valid(&s, &d, &objs, &fam).unwrap());
    }
}
