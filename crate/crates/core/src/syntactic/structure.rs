use std::collections::BTreeMap;
use std::fmt;

use crate::calculus::Sequent;
use crate::formula::{Formula, FormulaInContext};
use crate::lang::Term;
use crate::theory::Theory;

use super::SemanticsError;

/// A finite first-order structure on the carrier `{0, ..., size-1}`.
///
/// Tables are indexed by argument tuples read as base-`size` numerals, most significant
/// argument first.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FiniteStructure {
    size: usize,
    functions: BTreeMap<String, (usize, Vec<usize>)>,
    predicates: BTreeMap<String, (usize, Vec<bool>)>,
}

/// Number of tuples of length `arity` over a carrier of `size` elements.
pub fn tuple_count(size: usize, arity: usize) -> Option<usize> {
    size.checked_pow(arity as u32)
}

/// Index of a tuple in table order.
pub fn tuple_index(size: usize, args: &[usize]) -> usize {
    args.iter().fold(0, |acc, &a| acc * size + a)
}

/// The tuple with the given table index.
pub fn tuple_at(size: usize, arity: usize, mut index: usize) -> Vec<usize> {
    let mut out = vec![0; arity];
    for slot in out.iter_mut().rev() {
        *slot = index % size.max(1);
        index /= size.max(1);
    }
    out
}

impl FiniteStructure {
    pub fn new(size: usize) -> Self {
        Self {
            size,
            functions: BTreeMap::new(),
            predicates: BTreeMap::new(),
        }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn predicates(&self) -> &BTreeMap<String, (usize, Vec<bool>)> {
        &self.predicates
    }

    pub fn functions(&self) -> &BTreeMap<String, (usize, Vec<usize>)> {
        &self.functions
    }

    pub fn set_predicate(&mut self, name: &str, arity: usize, table: Vec<bool>) -> Result<(), SemanticsError> {
        if Some(table.len()) != tuple_count(self.size, arity) {
            return Err(SemanticsError::TableShape(name.to_string()));
        }
        self.predicates.insert(name.to_string(), (arity, table));
        Ok(())
    }

    pub fn set_function(&mut self, name: &str, arity: usize, table: Vec<usize>) -> Result<(), SemanticsError> {
        if Some(table.len()) != tuple_count(self.size, arity) {
            return Err(SemanticsError::TableShape(name.to_string()));
        }
        if let Some(&v) = table.iter().find(|&&v| v >= self.size) {
            return Err(SemanticsError::OutOfCarrier { value: v, size: self.size });
        }
        self.functions.insert(name.to_string(), (arity, table));
        Ok(())
    }

    /// Interprets `name` as the relation holding exactly on the listed tuples.
    pub fn set_relation(&mut self, name: &str, arity: usize, tuples: &[Vec<usize>]) -> Result<(), SemanticsError> {
        let n = tuple_count(self.size, arity).ok_or_else(|| SemanticsError::TableShape(name.to_string()))?;
        let mut table = vec![false; n];
        for t in tuples {
            if t.len() != arity {
                return Err(SemanticsError::Arity {
                    name: name.to_string(),
                    expected: arity,
                    got: t.len(),
                });
            }
            if let Some(&v) = t.iter().find(|&&v| v >= self.size) {
                return Err(SemanticsError::OutOfCarrier { value: v, size: self.size });
            }
            table[tuple_index(self.size, t)] = true;
        }
        self.set_predicate(name, arity, table)
    }

    pub fn with_relation(mut self, name: &str, arity: usize, tuples: &[Vec<usize>]) -> Self {
        self.set_relation(name, arity, tuples).expect("well-shaped relation");
        self
    }

    pub fn holds(&self, name: &str, args: &[usize]) -> Result<bool, SemanticsError> {
        let (arity, table) = self
            .predicates
            .get(name)
            .ok_or_else(|| SemanticsError::Uninterpreted(name.to_string()))?;
        if *arity != args.len() {
            return Err(SemanticsError::Arity {
                name: name.to_string(),
                expected: *arity,
                got: args.len(),
            });
        }
        Ok(table[tuple_index(self.size, args)])
    }

    pub fn apply(&self, name: &str, args: &[usize]) -> Result<usize, SemanticsError> {
        let (arity, table) = self
            .functions
            .get(name)
            .ok_or_else(|| SemanticsError::Uninterpreted(name.to_string()))?;
        if *arity != args.len() {
            return Err(SemanticsError::Arity {
                name: name.to_string(),
                expected: *arity,
                got: args.len(),
            });
        }
        Ok(table[tuple_index(self.size, args)])
    }

    pub fn is_relational(&self) -> bool {
        self.functions.is_empty()
    }
}

impl fmt::Display for FiniteStructure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(structure (size {})", self.size)?;
        for (name, (arity, table)) in &self.predicates {
            write!(f, " (pred {name} {arity}")?;
            for (i, _) in table.iter().enumerate().filter(|(_, &b)| b) {
                let t = tuple_at(self.size, *arity, i);
                write!(f, " ({})", t.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(" "))?;
            }
            write!(f, ")")?;
        }
        for (name, (arity, table)) in &self.functions {
            write!(f, " (fun {name} {arity}")?;
            for (i, v) in table.iter().enumerate() {
                let t = tuple_at(self.size, *arity, i);
                let args = t.iter().map(|v| v.to_string()).chain([v.to_string()]).collect::<Vec<_>>();
                write!(f, " ({})", args.join(" "))?;
            }
            write!(f, ")")?;
        }
        write!(f, ")")
    }
}

pub fn eval_term(t: &Term, m: &FiniteStructure, env: &BTreeMap<String, usize>) -> Result<usize, SemanticsError> {
    match t {
        Term::Var(v) => env.get(v).copied().ok_or_else(|| SemanticsError::Unassigned(v.clone())),
        Term::App(f, args) => {
            let vals = args.iter().map(|a| eval_term(a, m, env)).collect::<Result<Vec<_>, _>>()?;
            m.apply(f, &vals)
        }
    }
}

/// Tarski semantics under an environment naming every free variable.
pub fn eval_formula(phi: &Formula, m: &FiniteStructure, env: &mut BTreeMap<String, usize>) -> Result<bool, SemanticsError> {
    Ok(match phi {
        Formula::True => true,
        Formula::False => false,
        Formula::Atom(p, args) => {
            let vals = args.iter().map(|a| eval_term(a, m, env)).collect::<Result<Vec<_>, _>>()?;
            m.holds(p, &vals)?
        }
        Formula::Eq(a, b) => eval_term(a, m, env)? == eval_term(b, m, env)?,
        Formula::Not(a) => !eval_formula(a, m, env)?,
        Formula::And(a, b) => eval_formula(a, m, env)? && eval_formula(b, m, env)?,
        Formula::Or(a, b) => eval_formula(a, m, env)? || eval_formula(b, m, env)?,
        Formula::Imp(a, b) => !eval_formula(a, m, env)? || eval_formula(b, m, env)?,
        Formula::Forall(x, a) | Formula::Exists(x, a) => {
            let universal = matches!(phi, Formula::Forall(..));
            let saved = env.get(x).copied();
            let mut result = universal;
            for v in 0..m.size() {
                env.insert(x.clone(), v);
                let r = eval_formula(a, m, env);
                let r = match r {
                    Ok(r) => r,
                    Err(e) => {
                        restore(env, x, saved);
                        return Err(e);
                    }
                };
                if r != universal {
                    result = r;
                    break;
                }
            }
            restore(env, x, saved);
            result
        }
    })
}

fn restore(env: &mut BTreeMap<String, usize>, x: &str, saved: Option<usize>) {
    match saved {
        Some(v) => env.insert(x.to_string(), v),
        None => env.remove(x),
    };
}

fn env_for(vars: &[String], m: &FiniteStructure, assignment: &[usize]) -> Result<BTreeMap<String, usize>, SemanticsError> {
    if vars.len() != assignment.len() {
        return Err(SemanticsError::AssignmentLength {
            expected: vars.len(),
            got: assignment.len(),
        });
    }
    if let Some(&v) = assignment.iter().find(|&&v| v >= m.size()) {
        return Err(SemanticsError::OutOfCarrier { value: v, size: m.size() });
    }
    Ok(vars.iter().cloned().zip(assignment.iter().copied()).collect())
}

/// Truth of a formula in context under an assignment of the context variables, in order.
pub fn eval_in_structure(phi: &FormulaInContext, m: &FiniteStructure, assignment: &[usize]) -> Result<bool, SemanticsError> {
    let mut env = env_for(phi.ctx().vars(), m, assignment)?;
    eval_formula(phi.formula(), m, &mut env)
}

/// Whether `⋀Γ → ⋁Δ` holds under the assignment.
pub fn sequent_holds_at(s: &Sequent, m: &FiniteStructure, assignment: &[usize]) -> Result<bool, SemanticsError> {
    let mut env = env_for(s.ctx.vars(), m, assignment)?;
    for a in &s.ante {
        if !eval_formula(a, m, &mut env)? {
            return Ok(true);
        }
    }
    for b in &s.succ {
        if eval_formula(b, m, &mut env)? {
            return Ok(true);
        }
    }
    Ok(false)
}

/// The first assignment, in lexicographic order, falsifying the sequent.
pub fn falsifying_assignment(s: &Sequent, m: &FiniteStructure) -> Result<Option<Vec<usize>>, SemanticsError> {
    let n = s.ctx.len();
    let Some(count) = tuple_count(m.size(), n) else {
        return Ok(None);
    };
    for i in 0..count {
        let a = tuple_at(m.size(), n, i);
        if !sequent_holds_at(s, m, &a)? {
            return Ok(Some(a));
        }
    }
    Ok(None)
}

/// Whether the sequent holds under every assignment.
pub fn sequent_holds_in(s: &Sequent, m: &FiniteStructure) -> Result<bool, SemanticsError> {
    Ok(falsifying_assignment(s, m)?.is_none())
}

/// Whether every sentence holds.
pub fn satisfies_all(m: &FiniteStructure, sentences: &[Formula]) -> Result<bool, SemanticsError> {
    let mut env = BTreeMap::new();
    for a in sentences {
        if !eval_formula(a, m, &mut env)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// A structure together with an assignment of the sequent's context falsifying it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Countermodel {
    pub structure: FiniteStructure,
    pub assignment: Vec<usize>,
}

impl fmt::Display for Countermodel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "(countermodel {} (assign {}))",
            self.structure,
            self.assignment.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(" ")
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchOutcome {
    pub model: Option<Countermodel>,
    /// The largest size `s` such that every size `≤ s` was enumerated in full.
    pub exhaustive_through: Option<usize>,
}

/// Per-size cap on the number of candidate structures.
pub const DEFAULT_STRUCTURE_CAP: u128 = 1 << 20;

/// The axioms a countermodel must satisfy: those the theory names for the query, plus
/// family instances up to `axiom_bound`.
pub fn bounded_axioms(s: &Sequent, theory: &Theory, axiom_bound: usize) -> Vec<Formula> {
    let mut out: Vec<Formula> = Vec::new();
    for a in theory.axioms_for(s.formulas()).into_iter().chain(theory.family_instances(axiom_bound)) {
        if !out.iter().any(|b| b.alpha_eq(&a)) {
            out.push(a);
        }
    }
    out
}

#[derive(Debug, Clone)]
enum Slot {
    Pred(String, usize),
    Fun(String, usize),
}

/// Every structure of the given size interpreting exactly the listed symbols, in canonical
/// order: symbols sorted, predicates before functions, the first symbol varying slowest.
/// `None` when more than `cap` structures exist.
pub fn structures_of_size(
    size: usize,
    predicates: &BTreeMap<String, usize>,
    functions: &BTreeMap<String, usize>,
    cap: u128,
) -> Option<impl Iterator<Item = FiniteStructure>> {
    let mut slots = Vec::new();
    let mut radices = Vec::new();
    for (p, &a) in predicates {
        let n = tuple_count(size, a)?;
        if n >= 64 {
            return None;
        }
        slots.push(Slot::Pred(p.clone(), a));
        radices.push(1u128 << n);
    }
    for (fname, &a) in functions {
        let n = tuple_count(size, a)?;
        let r = (size as u128).checked_pow(n as u32)?;
        slots.push(Slot::Fun(fname.clone(), a));
        radices.push(r);
    }
    let mut total: u128 = 1;
    for &r in &radices {
        total = total.checked_mul(r)?;
    }
    if total > cap {
        return None;
    }
    Some((0..total).map(move |mut code| {
        let mut digits = vec![0u128; radices.len()];
        for i in (0..radices.len()).rev() {
            digits[i] = code % radices[i];
            code /= radices[i];
        }
        let mut m = FiniteStructure::new(size);
        for (slot, &d) in slots.iter().zip(&digits) {
            match slot {
                Slot::Pred(p, a) => {
                    let n = tuple_count(size, *a).expect("checked");
                    let table = (0..n).map(|i| d >> i & 1 == 1).collect();
                    m.set_predicate(p, *a, table).expect("shape");
                }
                Slot::Fun(f, a) => {
                    let n = tuple_count(size, *a).expect("checked");
                    let mut c = d;
                    let table = (0..n)
                        .map(|_| {
                            let v = (c % size as u128) as usize;
                            c /= size as u128;
                            v
                        })
                        .collect();
                    m.set_function(f, *a, table).expect("shape");
                }
            }
        }
        m
    }))
}

/// Symbols occurring in the given formulas.
pub fn symbols_of<'a>(formulas: impl IntoIterator<Item = &'a Formula>) -> (BTreeMap<String, usize>, BTreeMap<String, usize>) {
    let (mut preds, mut funs) = (BTreeMap::new(), BTreeMap::new());
    for f in formulas {
        preds.extend(f.predicates());
        funs.extend(f.functions());
    }
    (preds, funs)
}

/// Enumerates structures of size `0..=max_size` satisfying the axioms and returns the
/// first one (canonical order) with an assignment falsifying the sequent.
pub fn countermodel_search_with(s: &Sequent, axioms: &[Formula], max_size: usize, cap: u128) -> SearchOutcome {
    let (preds, funs) = symbols_of(s.formulas().chain(axioms));
    let mut exhaustive_through: Option<usize> = None;
    let mut contiguous = true;
    for size in 0..=max_size {
        let Some(iter) = structures_of_size(size, &preds, &funs, cap) else {
            contiguous = false;
            continue;
        };
        for m in iter {
            if !satisfies_all(&m, axioms).expect("all symbols interpreted") {
                continue;
            }
            if let Some(assignment) = falsifying_assignment(s, &m).expect("all symbols interpreted") {
                return SearchOutcome {
                    model: Some(Countermodel { structure: m, assignment }),
                    exhaustive_through,
                };
            }
        }
        if contiguous {
            exhaustive_through = Some(size);
        }
    }
    SearchOutcome {
        model: None,
        exhaustive_through,
    }
}

/// Countermodel search against the axioms the theory names for the query, plus family
/// instances up to `axiom_bound`.
pub fn countermodel_search(s: &Sequent, theory: &Theory, max_size: usize, axiom_bound: usize) -> SearchOutcome {
    let axioms = bounded_axioms(s, theory, axiom_bound);
    countermodel_search_with(s, &axioms, max_size, DEFAULT_STRUCTURE_CAP)
}
