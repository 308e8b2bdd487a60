use std::collections::{BTreeMap, BTreeSet, HashMap};

use itertools::Itertools;

use crate::formula::Formula;
use crate::lang::Term;

/// Every atom `P(v⃗)` with `v⃗` drawn from `vars`, plus `u = v` for `u < v` when requested.
pub fn atoms_over(preds: &BTreeMap<String, usize>, vars: &[String], equality: bool) -> Vec<Formula> {
    let mut out = Vec::new();
    for (p, &a) in preds {
        if a == 0 {
            out.push(Formula::Atom(p.clone(), vec![]));
            continue;
        }
        for args in (0..a).map(|_| vars.iter()).multi_cartesian_product() {
            out.push(Formula::Atom(p.clone(), args.into_iter().map(|v| Term::Var(v.clone())).collect()));
        }
    }
    if equality {
        for (i, u) in vars.iter().enumerate() {
            for v in &vars[i + 1..] {
                out.push(Formula::Eq(Term::Var(u.clone()), Term::Var(v.clone())));
            }
        }
    }
    out
}

fn combine(by_size: &[Vec<Formula>], n: usize, out: &mut Vec<Formula>) {
    for a in &by_size[n - 1] {
        out.push(Formula::not(a.clone()));
    }
    for i in 1..n - 1 {
        let j = n - 1 - i;
        for a in &by_size[i] {
            for b in &by_size[j] {
                out.push(Formula::and(a.clone(), b.clone()));
                out.push(Formula::or(a.clone(), b.clone()));
                out.push(Formula::imp(a.clone(), b.clone()));
            }
        }
    }
}

/// Quantifier-free formulas over the atoms, by increasing size, at most `cap` of them.
pub fn qf_formulas(atoms: &[Formula], max_size: usize, cap: usize) -> Vec<Formula> {
    let mut by_size: Vec<Vec<Formula>> = vec![Vec::new()];
    let mut total = 0;
    for n in 1..=max_size {
        let mut layer = Vec::new();
        if n == 1 {
            layer.push(Formula::True);
            layer.push(Formula::False);
            layer.extend(atoms.iter().cloned());
        } else {
            combine(&by_size, n, &mut layer);
        }
        total += layer.len();
        by_size.push(layer);
        if total >= cap {
            break;
        }
    }
    by_size.into_iter().flatten().take(cap).collect()
}

/// The truth table of a quantifier-free formula over the listed atoms.
pub fn truth_table(phi: &Formula, atoms: &[Formula]) -> Vec<bool> {
    (0u64..1 << atoms.len())
        .map(|code| {
            phi.eval_prop(&|a| atoms.iter().position(|b| b == a).is_some_and(|i| code >> i & 1 == 1))
                .expect("quantifier-free")
        })
        .collect()
}

/// One smallest representative per Boolean function over the atoms.
pub fn distinct_qf(atoms: &[Formula], max_size: usize, cap: usize) -> Vec<Formula> {
    let mut seen = BTreeSet::new();
    qf_formulas(atoms, max_size, cap)
        .into_iter()
        .filter(|f| seen.insert(truth_table(f, atoms)))
        .collect()
}

/// The canonical disjunctive form of the Boolean function with the given truth table.
pub fn formula_of_table(table: &[bool], atoms: &[Formula]) -> Formula {
    if table.iter().all(|&b| b) {
        return Formula::True;
    }
    Formula::disj(table.iter().enumerate().filter(|(_, &b)| b).map(|(code, _)| {
        Formula::conj(atoms.iter().enumerate().map(|(i, a)| {
            if code >> i & 1 == 1 {
                a.clone()
            } else {
                Formula::not(a.clone())
            }
        }))
    }))
}

/// Names for bound variables disjoint from the context.
pub fn bound_names(ctx: &[String], count: usize) -> Vec<String> {
    for prefix in ["y", "z", "w", "u", "v"] {
        let names: Vec<String> = (1..=count).map(|i| format!("{prefix}{i}")).collect();
        if names.iter().all(|n| !ctx.contains(n)) {
            return names;
        }
    }
    (1..=count).map(|i| format!("bound{i}")).collect()
}

struct Generator<'a> {
    preds: &'a BTreeMap<String, usize>,
    ctx: &'a [String],
    names: Vec<String>,
    equality: bool,
    max_bound: usize,
    cap: usize,
    memo: HashMap<(usize, usize), Vec<Formula>>,
}

impl Generator<'_> {
    fn gen(&mut self, n: usize, k: usize) -> Vec<Formula> {
        if let Some(v) = self.memo.get(&(n, k)) {
            return v.clone();
        }
        let cap = self.cap;
        let mut out = Vec::new();
        if n == 1 {
            let scope: Vec<String> = self.ctx.iter().chain(&self.names[..k]).cloned().collect();
            out.push(Formula::True);
            out.push(Formula::False);
            out.extend(atoms_over(self.preds, &scope, self.equality));
        } else {
            out.extend(self.gen(n - 1, k).into_iter().map(Formula::not).take(cap));
            'outer: for i in 1..n - 1 {
                let left = self.gen(i, k);
                let right = self.gen(n - 1 - i, k);
                for a in &left {
                    for b in &right {
                        out.push(Formula::and(a.clone(), b.clone()));
                        out.push(Formula::or(a.clone(), b.clone()));
                        out.push(Formula::imp(a.clone(), b.clone()));
                        if out.len() >= cap {
                            break 'outer;
                        }
                    }
                }
            }
            if k < self.max_bound && out.len() < cap {
                let y = self.names[k].clone();
                for body in self.gen(n - 1, k + 1) {
                    if body.free_vars().contains(&y) {
                        out.push(Formula::forall(&y, body.clone()));
                        out.push(Formula::exists(&y, body));
                    }
                    if out.len() >= cap {
                        break;
                    }
                }
            }
        }
        out.truncate(cap);
        self.memo.insert((n, k), out.clone());
        out
    }
}

/// Formulas over the context with up to `max_bound` nested quantifiers, by increasing size,
/// skipping quantifiers whose variable does not occur in the body; at most `cap` of them.
pub fn formulas_up_to(
    preds: &BTreeMap<String, usize>,
    ctx: &[String],
    equality: bool,
    max_size: usize,
    max_bound: usize,
    cap: usize,
) -> Vec<Formula> {
    let mut g = Generator {
        preds,
        ctx,
        names: bound_names(ctx, max_bound),
        equality,
        max_bound,
        cap,
        memo: HashMap::new(),
    };
    let mut all = Vec::new();
    for n in 1..=max_size {
        all.extend(g.gen(n, 0));
        if all.len() >= cap {
            break;
        }
    }
    all.truncate(cap);
    all
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_counts() {
        let preds: BTreeMap<String, usize> = [("P".to_string(), 1)].into();
        let vars = vec!["x".to_string()];
        let atoms = atoms_over(&preds, &vars, false);
        assert_eq!(atoms.len(), 1);
        assert_eq!(distinct_qf(&atoms, 5, 100_000).len(), 4);
        let qs = formulas_up_to(&preds, &[], false, 3, 1, 100_000);
        assert!(qs.contains(&Formula::forall("y1", Formula::rel("P", &["y1"]))));
        assert!(qs.iter().all(|f| f.free_vars().is_empty()));
    }

    #[test]
    fn table_formula_round_trip() {
        let preds: BTreeMap<String, usize> = [("P".to_string(), 1), ("Q".to_string(), 0)].into();
        let atoms = atoms_over(&preds, &["x".to_string()], false);
        for code in 0..16u32 {
            let table: Vec<bool> = (0..4).map(|i| code >> i & 1 == 1).collect();
            assert_eq!(truth_table(&formula_of_table(&table, &atoms), &atoms), table);
        }
    }
}
