//! First-order formulas, formulas in context, substitution and normal forms.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::lang::{fresh_pool_name, Context, CtxMorphism, LangError, Signature, Term};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FormulaError {
    #[error(transparent)]
    Lang(#[from] LangError),
    #[error("free variable `{var}` not in context {ctx}")]
    NotInContext { var: String, ctx: Context },
    #[error("equality used but the signature has no equality")]
    NoEquality,
    #[error("formula is not quantifier-free: {0}")]
    NotQuantifierFree(Formula),
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Formula {
    True,
    False,
    Atom(String, Vec<Term>),
    Eq(Term, Term),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Imp(Box<Formula>, Box<Formula>),
    Forall(String, Box<Formula>),
    Exists(String, Box<Formula>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quantifier {
    Forall,
    Exists,
}

impl Formula {
    pub fn atom(p: &str, args: Vec<Term>) -> Self {
        Formula::Atom(p.to_string(), args)
    }

    /// Atom whose arguments are all variables.
    pub fn rel(p: &str, vars: &[&str]) -> Self {
        Formula::Atom(p.to_string(), vars.iter().map(|v| Term::var(v)).collect())
    }

    pub fn not(a: Formula) -> Self {
        Formula::Not(Box::new(a))
    }

    pub fn and(a: Formula, b: Formula) -> Self {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Self {
        Formula::Or(Box::new(a), Box::new(b))
    }

    pub fn imp(a: Formula, b: Formula) -> Self {
        Formula::Imp(Box::new(a), Box::new(b))
    }

    /// `a ↔ b` encoded as `(a → b) ∧ (b → a)`.
    pub fn iff(a: Formula, b: Formula) -> Self {
        Formula::and(Formula::imp(a.clone(), b.clone()), Formula::imp(b, a))
    }

    pub fn forall(x: &str, a: Formula) -> Self {
        Formula::Forall(x.to_string(), Box::new(a))
    }

    pub fn exists(x: &str, a: Formula) -> Self {
        Formula::Exists(x.to_string(), Box::new(a))
    }

    pub fn forall_many(xs: &[String], a: Formula) -> Self {
        xs.iter().rev().fold(a, |acc, x| Formula::Forall(x.clone(), Box::new(acc)))
    }

    pub fn exists_many(xs: &[String], a: Formula) -> Self {
        xs.iter().rev().fold(a, |acc, x| Formula::Exists(x.clone(), Box::new(acc)))
    }

    pub fn conj(items: impl IntoIterator<Item = Formula>) -> Self {
        let mut it = items.into_iter();
        match it.next() {
            None => Formula::True,
            Some(first) => it.fold(first, Formula::and),
        }
    }

    pub fn disj(items: impl IntoIterator<Item = Formula>) -> Self {
        let mut it = items.into_iter();
        match it.next() {
            None => Formula::False,
            Some(first) => it.fold(first, Formula::or),
        }
    }

    pub fn is_literal_atom(&self) -> bool {
        matches!(self, Formula::Atom(..) | Formula::Eq(..))
    }

    /// Number of nodes, counting atoms, constants, connectives and binders.
    pub fn size(&self) -> usize {
        match self {
            Formula::True | Formula::False | Formula::Atom(..) | Formula::Eq(..) => 1,
            Formula::Not(a) | Formula::Forall(_, a) | Formula::Exists(_, a) => 1 + a.size(),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Imp(a, b) => 1 + a.size() + b.size(),
        }
    }

    pub fn is_quantifier_free(&self) -> bool {
        match self {
            Formula::True | Formula::False | Formula::Atom(..) | Formula::Eq(..) => true,
            Formula::Not(a) => a.is_quantifier_free(),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Imp(a, b) => {
                a.is_quantifier_free() && b.is_quantifier_free()
            }
            Formula::Forall(..) | Formula::Exists(..) => false,
        }
    }

    pub fn uses_equality(&self) -> bool {
        match self {
            Formula::Eq(..) => true,
            Formula::True | Formula::False | Formula::Atom(..) => false,
            Formula::Not(a) | Formula::Forall(_, a) | Formula::Exists(_, a) => a.uses_equality(),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Imp(a, b) => {
                a.uses_equality() || b.uses_equality()
            }
        }
    }

    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.free_vars_into(&mut Vec::new(), &mut out);
        out
    }

    fn free_vars_into(&self, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
        let add_term = |t: &Term, bound: &Vec<String>, out: &mut BTreeSet<String>| {
            for v in t.vars() {
                if !bound.contains(&v) {
                    out.insert(v);
                }
            }
        };
        match self {
            Formula::True | Formula::False => {}
            Formula::Atom(_, args) => args.iter().for_each(|t| add_term(t, bound, out)),
            Formula::Eq(a, b) => {
                add_term(a, bound, out);
                add_term(b, bound, out);
            }
            Formula::Not(a) => a.free_vars_into(bound, out),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Imp(a, b) => {
                a.free_vars_into(bound, out);
                b.free_vars_into(bound, out);
            }
            Formula::Forall(x, a) | Formula::Exists(x, a) => {
                bound.push(x.clone());
                a.free_vars_into(bound, out);
                bound.pop();
            }
        }
    }

    /// Every variable name occurring anywhere, bound or free.
    pub fn all_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.all_vars_into(&mut out);
        out
    }

    fn all_vars_into(&self, out: &mut BTreeSet<String>) {
        match self {
            Formula::True | Formula::False => {}
            Formula::Atom(_, args) => args.iter().for_each(|t| t.vars_into(out)),
            Formula::Eq(a, b) => {
                a.vars_into(out);
                b.vars_into(out);
            }
            Formula::Not(a) => a.all_vars_into(out),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Imp(a, b) => {
                a.all_vars_into(out);
                b.all_vars_into(out);
            }
            Formula::Forall(x, a) | Formula::Exists(x, a) => {
                out.insert(x.clone());
                a.all_vars_into(out);
            }
        }
    }

    /// Predicate symbols with their arities.
    pub fn predicates(&self) -> BTreeMap<String, usize> {
        let mut out = BTreeMap::new();
        self.visit(&mut |f| {
            if let Formula::Atom(p, args) = f {
                out.insert(p.clone(), args.len());
            }
        });
        out
    }

    /// Function symbols with their arities.
    pub fn functions(&self) -> BTreeMap<String, usize> {
        fn walk(t: &Term, out: &mut BTreeMap<String, usize>) {
            if let Term::App(f, args) = t {
                out.insert(f.clone(), args.len());
                args.iter().for_each(|a| walk(a, out));
            }
        }
        let mut out = BTreeMap::new();
        self.visit(&mut |f| match f {
            Formula::Atom(_, args) => args.iter().for_each(|t| walk(t, &mut out)),
            Formula::Eq(a, b) => {
                walk(a, &mut out);
                walk(b, &mut out);
            }
            _ => {}
        });
        out
    }

    /// Pre-order traversal.
    pub fn visit(&self, f: &mut impl FnMut(&Formula)) {
        f(self);
        match self {
            Formula::Not(a) | Formula::Forall(_, a) | Formula::Exists(_, a) => a.visit(f),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Imp(a, b) => {
                a.visit(f);
                b.visit(f);
            }
            _ => {}
        }
    }

    /// Distinct atomic subformulas in order of first occurrence.
    pub fn atoms(&self) -> Vec<Formula> {
        let mut out: Vec<Formula> = Vec::new();
        self.visit(&mut |f| {
            if f.is_literal_atom() && !out.contains(f) {
                out.push(f.clone());
            }
        });
        out
    }

    pub fn check(&self, sig: &Signature) -> Result<(), FormulaError> {
        match self {
            Formula::True | Formula::False => Ok(()),
            Formula::Atom(p, args) => {
                let expected = sig
                    .predicate_arity(p)
                    .ok_or_else(|| LangError::UnknownPredicate(p.clone()))?;
                if expected != args.len() {
                    return Err(LangError::ArityMismatch {
                        name: p.clone(),
                        expected,
                        got: args.len(),
                    }
                    .into());
                }
                for t in args {
                    sig.check_term(t)?;
                }
                Ok(())
            }
            Formula::Eq(a, b) => {
                if !sig.has_equality() {
                    return Err(FormulaError::NoEquality);
                }
                sig.check_term(a)?;
                sig.check_term(b)?;
                Ok(())
            }
            Formula::Not(a) | Formula::Forall(_, a) | Formula::Exists(_, a) => a.check(sig),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Imp(a, b) => {
                a.check(sig)?;
                b.check(sig)
            }
        }
    }

    /// Capture-avoiding simultaneous substitution of the free variables in `map`.
    pub fn subst(&self, map: &BTreeMap<String, Term>) -> Formula {
        match self {
            Formula::True | Formula::False => self.clone(),
            Formula::Atom(p, args) => Formula::Atom(p.clone(), args.iter().map(|t| t.rename(map)).collect()),
            Formula::Eq(a, b) => Formula::Eq(a.rename(map), b.rename(map)),
            Formula::Not(a) => Formula::not(a.subst(map)),
            Formula::And(a, b) => Formula::and(a.subst(map), b.subst(map)),
            Formula::Or(a, b) => Formula::or(a.subst(map), b.subst(map)),
            Formula::Imp(a, b) => Formula::imp(a.subst(map), b.subst(map)),
            Formula::Forall(x, a) | Formula::Exists(x, a) => {
                let free = a.free_vars();
                let inner: BTreeMap<String, Term> = map
                    .iter()
                    .filter(|(k, _)| *k != x && free.contains(*k))
                    .map(|(k, v)| (k.clone(), v.clone()))
                    .collect();
                let captures = inner.values().any(|t| t.contains_var(x));
                let (name, body) = if captures {
                    let mut avoid = a.all_vars();
                    for t in inner.values() {
                        t.vars_into(&mut avoid);
                    }
                    avoid.extend(inner.keys().cloned());
                    let fresh = fresh_pool_name(&avoid);
                    let mut ren = BTreeMap::new();
                    ren.insert(x.clone(), Term::Var(fresh.clone()));
                    (fresh, a.subst(&ren).subst(&inner))
                } else {
                    (x.clone(), a.subst(&inner))
                };
                match self {
                    Formula::Forall(..) => Formula::Forall(name, Box::new(body)),
                    _ => Formula::Exists(name, Box::new(body)),
                }
            }
        }
    }

    /// `self[t/x]`.
    pub fn subst1(&self, x: &str, t: &Term) -> Formula {
        let mut map = BTreeMap::new();
        map.insert(x.to_string(), t.clone());
        self.subst(&map)
    }

    /// Renames bound variables so that binders are pairwise distinct and disjoint from
    /// the free variables and from `avoid`. Binders that already satisfy this keep their names.
    pub fn rectify(&self, avoid: &BTreeSet<String>) -> Formula {
        let mut used: BTreeSet<String> = avoid.clone();
        used.extend(self.free_vars());
        let mut all = self.all_vars();
        all.extend(used.iter().cloned());
        self.rectify_inner(&mut used, &mut all)
    }

    fn rectify_inner(&self, used: &mut BTreeSet<String>, all: &mut BTreeSet<String>) -> Formula {
        match self {
            Formula::True | Formula::False | Formula::Atom(..) | Formula::Eq(..) => self.clone(),
            Formula::Not(a) => Formula::not(a.rectify_inner(used, all)),
            Formula::And(a, b) => {
                let a = a.rectify_inner(used, all);
                Formula::and(a, b.rectify_inner(used, all))
            }
            Formula::Or(a, b) => {
                let a = a.rectify_inner(used, all);
                Formula::or(a, b.rectify_inner(used, all))
            }
            Formula::Imp(a, b) => {
                let a = a.rectify_inner(used, all);
                Formula::imp(a, b.rectify_inner(used, all))
            }
            Formula::Forall(x, a) | Formula::Exists(x, a) => {
                let (name, body) = if used.contains(x) {
                    let fresh = fresh_pool_name(all);
                    all.insert(fresh.clone());
                    (fresh.clone(), a.subst1(x, &Term::Var(fresh)))
                } else {
                    (x.clone(), (**a).clone())
                };
                used.insert(name.clone());
                let body = body.rectify_inner(used, all);
                match self {
                    Formula::Forall(..) => Formula::Forall(name, Box::new(body)),
                    _ => Formula::Exists(name, Box::new(body)),
                }
            }
        }
    }

    /// Alpha-equivalence.
    pub fn alpha_eq(&self, other: &Formula) -> bool {
        fn term_eq(a: &Term, b: &Term, env: &[(String, String)]) -> bool {
            match (a, b) {
                (Term::Var(x), Term::Var(y)) => {
                    let bx = env.iter().rposition(|(l, _)| l == x);
                    let by = env.iter().rposition(|(_, r)| r == y);
                    match (bx, by) {
                        (Some(i), Some(j)) => i == j,
                        (None, None) => x == y,
                        _ => false,
                    }
                }
                (Term::App(f, xs), Term::App(g, ys)) => {
                    f == g && xs.len() == ys.len() && xs.iter().zip(ys).all(|(s, t)| term_eq(s, t, env))
                }
                _ => false,
            }
        }
        fn go(a: &Formula, b: &Formula, env: &mut Vec<(String, String)>) -> bool {
            match (a, b) {
                (Formula::True, Formula::True) | (Formula::False, Formula::False) => true,
                (Formula::Atom(p, xs), Formula::Atom(q, ys)) => {
                    p == q && xs.len() == ys.len() && xs.iter().zip(ys).all(|(s, t)| term_eq(s, t, env))
                }
                (Formula::Eq(a1, a2), Formula::Eq(b1, b2)) => term_eq(a1, b1, env) && term_eq(a2, b2, env),
                (Formula::Not(x), Formula::Not(y)) => go(x, y, env),
                (Formula::And(a1, a2), Formula::And(b1, b2))
                | (Formula::Or(a1, a2), Formula::Or(b1, b2))
                | (Formula::Imp(a1, a2), Formula::Imp(b1, b2)) => go(a1, b1, env) && go(a2, b2, env),
                (Formula::Forall(x, p), Formula::Forall(y, q)) | (Formula::Exists(x, p), Formula::Exists(y, q)) => {
                    env.push((x.clone(), y.clone()));
                    let r = go(p, q, env);
                    env.pop();
                    r
                }
                _ => false,
            }
        }
        go(self, other, &mut Vec::new())
    }

    /// Representative of the alpha-equivalence class: binders renamed `#0, #1, ...` by depth.
    pub fn canonical(&self) -> Formula {
        fn go(f: &Formula, depth: usize, map: &BTreeMap<String, Term>) -> Formula {
            match f {
                Formula::True | Formula::False => f.clone(),
                Formula::Atom(p, args) => Formula::Atom(p.clone(), args.iter().map(|t| t.rename(map)).collect()),
                Formula::Eq(a, b) => Formula::Eq(a.rename(map), b.rename(map)),
                Formula::Not(a) => Formula::not(go(a, depth, map)),
                Formula::And(a, b) => Formula::and(go(a, depth, map), go(b, depth, map)),
                Formula::Or(a, b) => Formula::or(go(a, depth, map), go(b, depth, map)),
                Formula::Imp(a, b) => Formula::imp(go(a, depth, map), go(b, depth, map)),
                Formula::Forall(x, a) | Formula::Exists(x, a) => {
                    let name = format!("#{depth}");
                    let mut m = map.clone();
                    m.insert(x.clone(), Term::Var(name.clone()));
                    let body = Box::new(go(a, depth + 1, &m));
                    match f {
                        Formula::Forall(..) => Formula::Forall(name, body),
                        _ => Formula::Exists(name, body),
                    }
                }
            }
        }
        go(self, 0, &BTreeMap::new())
    }

    /// Quantifier-alternation depth: a maximal block of one quantifier counts once.
    pub fn qa_depth(&self) -> usize {
        match self {
            Formula::True | Formula::False | Formula::Atom(..) | Formula::Eq(..) => 0,
            Formula::Not(a) => a.qa_depth(),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Imp(a, b) => a.qa_depth().max(b.qa_depth()),
            Formula::Forall(..) => self.strip_block(Quantifier::Forall).0.qa_depth() + 1,
            Formula::Exists(..) => self.strip_block(Quantifier::Exists).0.qa_depth() + 1,
        }
    }

    /// Strips the maximal leading block of quantifier `q`; returns the core and the bound variables.
    pub fn strip_block(&self, q: Quantifier) -> (&Formula, Vec<String>) {
        let mut cur = self;
        let mut vars = Vec::new();
        loop {
            match (cur, q) {
                (Formula::Forall(x, a), Quantifier::Forall) | (Formula::Exists(x, a), Quantifier::Exists) => {
                    vars.push(x.clone());
                    cur = a;
                }
                _ => return (cur, vars),
            }
        }
    }

    /// Negation normal form, with implications expanded.
    pub fn nnf(&self) -> Formula {
        self.nnf_pol(true)
    }

    fn nnf_pol(&self, pos: bool) -> Formula {
        match (self, pos) {
            (Formula::True, true) | (Formula::False, false) => Formula::True,
            (Formula::True, false) | (Formula::False, true) => Formula::False,
            (Formula::Atom(..) | Formula::Eq(..), true) => self.clone(),
            (Formula::Atom(..) | Formula::Eq(..), false) => Formula::not(self.clone()),
            (Formula::Not(a), p) => a.nnf_pol(!p),
            (Formula::And(a, b), true) | (Formula::Or(a, b), false) => {
                Formula::and(a.nnf_pol(pos), b.nnf_pol(pos))
            }
            (Formula::Or(a, b), true) | (Formula::And(a, b), false) => Formula::or(a.nnf_pol(pos), b.nnf_pol(pos)),
            (Formula::Imp(a, b), true) => Formula::or(a.nnf_pol(false), b.nnf_pol(true)),
            (Formula::Imp(a, b), false) => Formula::and(a.nnf_pol(true), b.nnf_pol(false)),
            (Formula::Forall(x, a), true) | (Formula::Exists(x, a), false) => {
                Formula::Forall(x.clone(), Box::new(a.nnf_pol(pos)))
            }
            (Formula::Exists(x, a), true) | (Formula::Forall(x, a), false) => {
                Formula::Exists(x.clone(), Box::new(a.nnf_pol(pos)))
            }
        }
    }

    /// Truth value under an assignment of the atoms; `None` if quantified.
    pub fn eval_prop(&self, val: &dyn Fn(&Formula) -> bool) -> Option<bool> {
        Some(match self {
            Formula::True => true,
            Formula::False => false,
            Formula::Atom(..) | Formula::Eq(..) => val(self),
            Formula::Not(a) => !a.eval_prop(val)?,
            Formula::And(a, b) => a.eval_prop(val)? && b.eval_prop(val)?,
            Formula::Or(a, b) => a.eval_prop(val)? || b.eval_prop(val)?,
            Formula::Imp(a, b) => !a.eval_prop(val)? || b.eval_prop(val)?,
            Formula::Forall(..) | Formula::Exists(..) => return None,
        })
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::True => write!(f, "true"),
            Formula::False => write!(f, "false"),
            Formula::Atom(p, args) if args.is_empty() => write!(f, "{p}"),
            Formula::Atom(p, args) => {
                write!(f, "({p}")?;
                for a in args {
                    write!(f, " {a}")?;
                }
                write!(f, ")")
            }
            Formula::Eq(a, b) => write!(f, "(= {a} {b})"),
            Formula::Not(a) => write!(f, "(not {a})"),
            Formula::And(a, b) => write!(f, "(and {a} {b})"),
            Formula::Or(a, b) => write!(f, "(or {a} {b})"),
            Formula::Imp(a, b) => write!(f, "(imp {a} {b})"),
            Formula::Forall(x, a) => write!(f, "(forall {x} {a})"),
            Formula::Exists(x, a) => write!(f, "(exists {x} {a})"),
        }
    }
}

/// A rectified formula together with a context containing its free variables.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FormulaInContext {
    ctx: Context,
    formula: Formula,
}

impl FormulaInContext {
    pub fn new(ctx: Context, formula: Formula) -> Result<Self, FormulaError> {
        for v in formula.free_vars() {
            if !ctx.contains(&v) {
                return Err(FormulaError::NotInContext { var: v, ctx });
            }
        }
        let formula = formula.rectify(&ctx.var_set());
        Ok(Self { ctx, formula })
    }

    pub fn ctx(&self) -> &Context {
        &self.ctx
    }

    pub fn formula(&self) -> &Formula {
        &self.formula
    }

    pub fn alpha_eq(&self, other: &FormulaInContext) -> bool {
        self.ctx == other.ctx && self.formula.alpha_eq(&other.formula)
    }
}

impl fmt::Display for FormulaInContext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(fic {} {})", self.ctx, self.formula)
    }
}

/// The free variables of a formula.
pub fn free_vars(phi: &Formula) -> BTreeSet<String> {
    phi.free_vars()
}

/// Quantifier-alternation depth.
pub fn qa_depth(phi: &Formula) -> usize {
    phi.qa_depth()
}

/// Membership in the syntactic layer `F_n`.
pub fn in_syntactic_layer(phi: &Formula, n: usize) -> bool {
    phi.qa_depth() <= n
}

/// `φ[f]` for `φ` over `f.target()`, landing over `f.source()`.
pub fn substitute_formula(phi: &FormulaInContext, f: &CtxMorphism) -> Result<FormulaInContext, FormulaError> {
    if phi.ctx() != f.target() {
        return Err(LangError::ContextMismatch {
            expected: f.target().clone(),
            got: phi.ctx().clone(),
        }
        .into());
    }
    FormulaInContext::new(f.source().clone(), phi.formula().subst(&f.as_map()))
}

/// A conjunction of positive and negative literals.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Clause {
    pub pos: BTreeSet<Formula>,
    pub neg: BTreeSet<Formula>,
}

impl Clause {
    fn is_contradictory(&self) -> bool {
        self.pos.intersection(&self.neg).next().is_some()
    }

    fn absorbs(&self, other: &Clause) -> bool {
        self.pos.is_subset(&other.pos) && self.neg.is_subset(&other.neg)
    }

    pub fn to_formula(&self) -> Formula {
        Formula::conj(
            self.pos
                .iter()
                .cloned()
                .chain(self.neg.iter().cloned().map(Formula::not)),
        )
    }
}

fn dnf_raw(phi: &Formula, pos: bool) -> Result<Vec<Clause>, FormulaError> {
    let unit = || Clause {
        pos: BTreeSet::new(),
        neg: BTreeSet::new(),
    };
    let product = |a: Vec<Clause>, b: Vec<Clause>| {
        let mut out = Vec::new();
        for x in &a {
            for y in &b {
                let c = Clause {
                    pos: x.pos.union(&y.pos).cloned().collect(),
                    neg: x.neg.union(&y.neg).cloned().collect(),
                };
                if !c.is_contradictory() {
                    out.push(c);
                }
            }
        }
        out
    };
    Ok(match (phi, pos) {
        (Formula::True, true) | (Formula::False, false) => vec![unit()],
        (Formula::True, false) | (Formula::False, true) => vec![],
        (Formula::Atom(..) | Formula::Eq(..), p) => {
            let mut c = unit();
            if p {
                c.pos.insert(phi.clone());
            } else {
                c.neg.insert(phi.clone());
            }
            vec![c]
        }
        (Formula::Not(a), p) => dnf_raw(a, !p)?,
        (Formula::And(a, b), true) => product(dnf_raw(a, true)?, dnf_raw(b, true)?),
        (Formula::Or(a, b), false) => product(dnf_raw(a, false)?, dnf_raw(b, false)?),
        (Formula::Imp(a, b), false) => product(dnf_raw(a, true)?, dnf_raw(b, false)?),
        (Formula::Or(a, b), true) => {
            let mut v = dnf_raw(a, true)?;
            v.extend(dnf_raw(b, true)?);
            v
        }
        (Formula::And(a, b), false) => {
            let mut v = dnf_raw(a, false)?;
            v.extend(dnf_raw(b, false)?);
            v
        }
        (Formula::Imp(a, b), true) => {
            let mut v = dnf_raw(a, false)?;
            v.extend(dnf_raw(b, true)?);
            v
        }
        (Formula::Forall(..) | Formula::Exists(..), _) => {
            return Err(FormulaError::NotQuantifierFree(phi.clone()))
        }
    })
}

fn insert_clause(set: &mut Vec<Clause>, c: Clause) -> bool {
    if set.iter().any(|d| d.absorbs(&c)) {
        return false;
    }
    set.retain(|d| !c.absorbs(d));
    set.push(c);
    true
}

/// The disjunction of all prime implicants of a quantifier-free formula, clauses sorted.
pub fn to_dnf(phi: &Formula) -> Result<Vec<Clause>, FormulaError> {
    let mut set: Vec<Clause> = Vec::new();
    for c in dnf_raw(phi, true)? {
        insert_clause(&mut set, c);
    }
    loop {
        let mut added = false;
        let snapshot = set.clone();
        'outer: for (i, a) in snapshot.iter().enumerate() {
            for b in &snapshot[i + 1..] {
                let opp: Vec<&Formula> = a
                    .pos
                    .intersection(&b.neg)
                    .chain(a.neg.intersection(&b.pos))
                    .collect();
                if opp.len() != 1 {
                    continue;
                }
                let x = opp[0];
                let mut c = Clause {
                    pos: a.pos.union(&b.pos).cloned().collect(),
                    neg: a.neg.union(&b.neg).cloned().collect(),
                };
                c.pos.remove(x);
                c.neg.remove(x);
                if insert_clause(&mut set, c) {
                    added = true;
                    break 'outer;
                }
            }
        }
        if !added {
            break;
        }
    }
    set.sort();
    Ok(set)
}
