//! Signatures, contexts, terms and the category of contexts.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LangError {
    #[error("duplicate variable `{0}` in context")]
    DuplicateVariable(String),
    #[error("unbound variable `{0}`")]
    UnboundVariable(String),
    #[error("unknown function symbol `{0}`")]
    UnknownFunction(String),
    #[error("unknown predicate symbol `{0}`")]
    UnknownPredicate(String),
    #[error("symbol `{name}` expects {expected} arguments, got {got}")]
    ArityMismatch {
        name: String,
        expected: usize,
        got: usize,
    },
    #[error("symbol `{0}` declared twice")]
    DuplicateSymbol(String),
    #[error("context mismatch: expected {expected}, got {got}")]
    ContextMismatch { expected: Context, got: Context },
    #[error("morphism into {target} needs {expected} components, got {got}")]
    ComponentCount {
        target: Context,
        expected: usize,
        got: usize,
    },
}

/// The reserved variable pool `x1, x2, ...` used for canonical renaming.
pub fn pool_name(i: usize) -> String {
    format!("x{i}")
}

/// First pool name not contained in `avoid`.
pub fn fresh_pool_name(avoid: &BTreeSet<String>) -> String {
    (1..)
        .map(pool_name)
        .find(|n| !avoid.contains(n))
        .expect("pool is infinite")
}

/// A family `prefix0, prefix1, ...` of predicate symbols where `prefix{n}` has arity `n`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PredicateFamily {
    pub prefix: String,
}

impl PredicateFamily {
    pub fn new(prefix: impl Into<String>) -> Self {
        Self {
            prefix: prefix.into(),
        }
    }

    pub fn symbol(&self, n: usize) -> String {
        format!("{}{}", self.prefix, n)
    }

    /// The index `n` if `name` is `prefix{n}`.
    pub fn index_of(&self, name: &str) -> Option<usize> {
        let rest = name.strip_prefix(self.prefix.as_str())?;
        if rest.is_empty() || !rest.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        if rest.len() > 1 && rest.starts_with('0') {
            return None;
        }
        rest.parse().ok()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Signature {
    functions: BTreeMap<String, usize>,
    predicates: BTreeMap<String, usize>,
    families: Vec<PredicateFamily>,
    has_equality: bool,
}

impl Signature {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_equality(mut self, eq: bool) -> Self {
        self.has_equality = eq;
        self
    }

    pub fn add_function(&mut self, name: impl Into<String>, arity: usize) -> Result<(), LangError> {
        let name = name.into();
        if self.functions.contains_key(&name) || self.predicate_arity(&name).is_some() {
            return Err(LangError::DuplicateSymbol(name));
        }
        self.functions.insert(name, arity);
        Ok(())
    }

    pub fn add_predicate(&mut self, name: impl Into<String>, arity: usize) -> Result<(), LangError> {
        let name = name.into();
        if self.predicate_arity(&name).is_some() || self.functions.contains_key(&name) {
            return Err(LangError::DuplicateSymbol(name));
        }
        self.predicates.insert(name, arity);
        Ok(())
    }

    pub fn add_family(&mut self, family: PredicateFamily) {
        if !self.families.contains(&family) {
            self.families.push(family);
        }
    }

    pub fn function(mut self, name: &str, arity: usize) -> Self {
        self.add_function(name, arity).expect("fresh function symbol");
        self
    }

    pub fn predicate(mut self, name: &str, arity: usize) -> Self {
        self.add_predicate(name, arity).expect("fresh predicate symbol");
        self
    }

    pub fn family(mut self, prefix: &str) -> Self {
        self.add_family(PredicateFamily::new(prefix));
        self
    }

    pub fn has_equality(&self) -> bool {
        self.has_equality
    }

    pub fn functions(&self) -> &BTreeMap<String, usize> {
        &self.functions
    }

    pub fn predicates(&self) -> &BTreeMap<String, usize> {
        &self.predicates
    }

    pub fn families(&self) -> &[PredicateFamily] {
        &self.families
    }

    pub fn is_relational(&self) -> bool {
        self.functions.is_empty()
    }

    pub fn function_arity(&self, name: &str) -> Option<usize> {
        self.functions.get(name).copied()
    }

    pub fn predicate_arity(&self, name: &str) -> Option<usize> {
        if let Some(a) = self.predicates.get(name) {
            return Some(*a);
        }
        self.families.iter().find_map(|f| f.index_of(name))
    }

    pub fn check_term(&self, t: &Term) -> Result<(), LangError> {
        match t {
            Term::Var(_) => Ok(()),
            Term::App(f, args) => {
                let expected = self
                    .function_arity(f)
                    .ok_or_else(|| LangError::UnknownFunction(f.clone()))?;
                if expected != args.len() {
                    return Err(LangError::ArityMismatch {
                        name: f.clone(),
                        expected,
                        got: args.len(),
                    });
                }
                args.iter().try_for_each(|a| self.check_term(a))
            }
        }
    }
}

/// An ordered list of distinct variables.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Context(Vec<String>);

impl Context {
    pub fn new<S: Into<String>>(vars: impl IntoIterator<Item = S>) -> Result<Self, LangError> {
        let vars: Vec<String> = vars.into_iter().map(Into::into).collect();
        let mut seen = BTreeSet::new();
        for v in &vars {
            if !seen.insert(v.as_str()) {
                return Err(LangError::DuplicateVariable(v.clone()));
            }
        }
        Ok(Self(vars))
    }

    pub fn empty() -> Self {
        Self(Vec::new())
    }

    /// The canonical context `x1, ..., xn`.
    pub fn canonical(n: usize) -> Self {
        Self((1..=n).map(pool_name).collect())
    }

    pub fn vars(&self) -> &[String] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, v: &str) -> bool {
        self.0.iter().any(|x| x == v)
    }

    pub fn position(&self, v: &str) -> Option<usize> {
        self.0.iter().position(|x| x == v)
    }

    pub fn var_set(&self) -> BTreeSet<String> {
        self.0.iter().cloned().collect()
    }

    /// Appends a variable, failing if it is already present.
    pub fn extend(&self, v: &str) -> Result<Self, LangError> {
        if self.contains(v) {
            return Err(LangError::DuplicateVariable(v.to_string()));
        }
        let mut vars = self.0.clone();
        vars.push(v.to_string());
        Ok(Self(vars))
    }

    /// Drops the last variable.
    pub fn pop(&self) -> Option<(Self, String)> {
        let mut vars = self.0.clone();
        let last = vars.pop()?;
        Some((Self(vars), last))
    }

    pub fn covers(&self, vars: &BTreeSet<String>) -> bool {
        vars.iter().all(|v| self.contains(v))
    }
}

impl fmt::Display for Context {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(ctx")?;
        for v in &self.0 {
            write!(f, " {v}")?;
        }
        write!(f, ")")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Var(String),
    App(String, Vec<Term>),
}

impl Term {
    pub fn var(name: &str) -> Self {
        Term::Var(name.to_string())
    }

    pub fn app(f: &str, args: Vec<Term>) -> Self {
        Term::App(f.to_string(), args)
    }

    pub fn vars_into(&self, out: &mut BTreeSet<String>) {
        match self {
            Term::Var(v) => {
                out.insert(v.clone());
            }
            Term::App(_, args) => args.iter().for_each(|a| a.vars_into(out)),
        }
    }

    pub fn vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.vars_into(&mut out);
        out
    }

    pub fn contains_var(&self, v: &str) -> bool {
        match self {
            Term::Var(x) => x == v,
            Term::App(_, args) => args.iter().any(|a| a.contains_var(v)),
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Term::Var(_) => 0,
            Term::App(_, args) => 1 + args.iter().map(Term::depth).max().unwrap_or(0),
        }
    }

    /// Simultaneous replacement of variables; unmapped variables stay.
    pub fn rename(&self, map: &BTreeMap<String, Term>) -> Term {
        match self {
            Term::Var(v) => map.get(v).cloned().unwrap_or_else(|| self.clone()),
            Term::App(f, args) => Term::App(f.clone(), args.iter().map(|a| a.rename(map)).collect()),
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) => write!(f, "{v}"),
            Term::App(g, args) => {
                write!(f, "({g}")?;
                for a in args {
                    write!(f, " {a}")?;
                }
                write!(f, ")")
            }
        }
    }
}

/// All terms over `vars` of depth at most `max_depth`, in a fixed order.
pub fn terms_up_to(sig: &Signature, vars: &[String], max_depth: usize) -> Vec<Term> {
    let mut by_depth: Vec<Vec<Term>> = vec![vars.iter().map(|v| Term::Var(v.clone())).collect()];
    let mut all: Vec<Term> = by_depth[0].clone();
    // constants have depth 1
    for d in 1..=max_depth {
        let mut layer = Vec::new();
        for (f, &arity) in sig.functions() {
            if arity == 0 {
                if d == 1 {
                    layer.push(Term::App(f.clone(), vec![]));
                }
                continue;
            }
            // argument tuples from all terms of depth < d with at least one of depth d-1
            let prev: Vec<Term> = all.clone();
            let last: &Vec<Term> = &by_depth[d - 1];
            for args in itertools::Itertools::multi_cartesian_product((0..arity).map(|_| prev.iter())) {
                if args.iter().any(|a| last.contains(a)) {
                    layer.push(Term::App(f.clone(), args.into_iter().cloned().collect()));
                }
            }
        }
        all.extend(layer.iter().cloned());
        by_depth.push(layer);
    }
    all
}

/// A morphism `source -> target` of the category of contexts: one term over `source`
/// for each variable of `target`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CtxMorphism {
    source: Context,
    target: Context,
    components: Vec<Term>,
}

impl CtxMorphism {
    pub fn new(source: Context, target: Context, components: Vec<Term>) -> Result<Self, LangError> {
        if components.len() != target.len() {
            return Err(LangError::ComponentCount {
                expected: target.len(),
                got: components.len(),
                target,
            });
        }
        for t in &components {
            for v in t.vars() {
                if !source.contains(&v) {
                    return Err(LangError::UnboundVariable(v));
                }
            }
        }
        Ok(Self {
            source,
            target,
            components,
        })
    }

    pub fn identity(ctx: &Context) -> Self {
        Self {
            source: ctx.clone(),
            target: ctx.clone(),
            components: ctx.vars().iter().map(|v| Term::Var(v.clone())).collect(),
        }
    }

    /// The unique morphism into the empty context.
    pub fn to_terminal(ctx: &Context) -> Self {
        Self {
            source: ctx.clone(),
            target: Context::empty(),
            components: vec![],
        }
    }

    pub fn source(&self) -> &Context {
        &self.source
    }

    pub fn target(&self) -> &Context {
        &self.target
    }

    pub fn components(&self) -> &[Term] {
        &self.components
    }

    /// Target variable to component term.
    pub fn as_map(&self) -> BTreeMap<String, Term> {
        self.target
            .vars()
            .iter()
            .cloned()
            .zip(self.components.iter().cloned())
            .collect()
    }

    pub fn check(&self, sig: &Signature) -> Result<(), LangError> {
        self.components.iter().try_for_each(|t| sig.check_term(t))
    }
}

impl fmt::Display for CtxMorphism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(mor {} {}", self.source, self.target)?;
        for t in &self.components {
            write!(f, " {t}")?;
        }
        write!(f, ")")
    }
}

/// `t[f]`: replaces each variable of `f.target()` by its component.
pub fn substitute_term(t: &Term, f: &CtxMorphism) -> Result<Term, LangError> {
    for v in t.vars() {
        if !f.target.contains(&v) {
            return Err(LangError::UnboundVariable(v));
        }
    }
    Ok(t.rename(&f.as_map()))
}

/// `g ∘ f` for `f: A -> B`, `g: B -> C`.
pub fn compose_ctx(g: &CtxMorphism, f: &CtxMorphism) -> Result<CtxMorphism, LangError> {
    if g.source != f.target {
        return Err(LangError::ContextMismatch {
            expected: g.source.clone(),
            got: f.target.clone(),
        });
    }
    let map = f.as_map();
    Ok(CtxMorphism {
        source: f.source.clone(),
        target: g.target.clone(),
        components: g.components.iter().map(|t| t.rename(&map)).collect(),
    })
}

/// The chosen product `a × b`: `a` followed by a copy of `b` renamed into the pool.
pub fn product_ctx(a: &Context, b: &Context) -> (Context, CtxMorphism, CtxMorphism) {
    let mut used = a.var_set();
    let mut vars = a.vars().to_vec();
    let mut renamed = Vec::with_capacity(b.len());
    for _ in b.vars() {
        let n = fresh_pool_name(&used);
        used.insert(n.clone());
        vars.push(n.clone());
        renamed.push(Term::Var(n));
    }
    let prod = Context(vars);
    let pr1 = CtxMorphism {
        source: prod.clone(),
        target: a.clone(),
        components: a.vars().iter().map(|v| Term::Var(v.clone())).collect(),
    };
    let pr2 = CtxMorphism {
        source: prod.clone(),
        target: b.clone(),
        components: renamed,
    };
    (prod, pr1, pr2)
}

/// `⟨f, g⟩ : C -> A × B`.
pub fn pairing(f: &CtxMorphism, g: &CtxMorphism) -> Result<CtxMorphism, LangError> {
    if f.source != g.source {
        return Err(LangError::ContextMismatch {
            expected: f.source.clone(),
            got: g.source.clone(),
        });
    }
    let (prod, _, _) = product_ctx(&f.target, &g.target);
    let mut components = f.components.clone();
    components.extend(g.components.iter().cloned());
    Ok(CtxMorphism {
        source: f.source.clone(),
        target: prod,
        components,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx(v: &[&str]) -> Context {
        Context::new(v.iter().copied()).unwrap()
    }

    #[test]
    fn product_of_equal_contexts_renames() {
        let (p, pr1, pr2) = product_ctx(&ctx(&["x1"]), &ctx(&["x1"]));
        assert_eq!(p, ctx(&["x1", "x2"]));
        assert_eq!(pr1.components(), &[Term::var("x1")]);
        assert_eq!(pr2.components(), &[Term::var("x2")]);
        let (p, _, _) = product_ctx(&ctx(&["x1"]), &Context::empty());
        assert_eq!(p, ctx(&["x1"]));
    }

    #[test]
    fn composition_substitutes() {
        let sig = Signature::new().function("f", 1);
        sig.check_term(&Term::app("f", vec![Term::var("x")])).unwrap();
        let f = CtxMorphism::new(ctx(&["x"]), ctx(&["y"]), vec![Term::app("f", vec![Term::var("x")])]).unwrap();
        let g = CtxMorphism::new(ctx(&["y"]), ctx(&["z"]), vec![Term::app("f", vec![Term::var("y")])]).unwrap();
        let gf = compose_ctx(&g, &f).unwrap();
        assert_eq!(
            gf.components(),
            &[Term::app("f", vec![Term::app("f", vec![Term::var("x")])])]
        );
        assert!(matches!(compose_ctx(&f, &f), Err(LangError::ContextMismatch { .. })));
    }

    #[test]
    fn unbound_variable_rejected() {
        let f = CtxMorphism::identity(&ctx(&["x"]));
        assert_eq!(
            substitute_term(&Term::var("y"), &f),
            Err(LangError::UnboundVariable("y".into()))
        );
        assert!(Context::new(["x", "x"]).is_err());
    }

    #[test]
    fn diagonal_pairing() {
        let id = CtxMorphism::identity(&ctx(&["x"]));
        let d = pairing(&id, &id).unwrap();
        assert_eq!(d.target(), &ctx(&["x", "x1"]));
        assert_eq!(d.components(), &[Term::var("x"), Term::var("x")]);
    }

    #[test]
    fn family_symbols() {
        let sig = Signature::new().family("R");
        assert_eq!(sig.predicate_arity("R0"), Some(0));
        assert_eq!(sig.predicate_arity("R12"), Some(12));
        assert_eq!(sig.predicate_arity("R"), None);
        assert_eq!(sig.predicate_arity("R01"), None);
    }

    #[test]
    fn terms_enumerated_by_depth() {
        let sig = Signature::new().function("f", 1).function("c", 0);
        let ts = terms_up_to(&sig, &["x".to_string()], 2);
        assert_eq!(ts.len(), 1 + 2 + 2);
        assert!(ts.iter().all(|t| t.depth() <= 2));
    }
}
