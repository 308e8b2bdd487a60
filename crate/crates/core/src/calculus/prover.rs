use std::collections::BTreeSet;

use crate::formula::Formula;
use crate::lang::{fresh_pool_name, terms_up_to, Term};
use crate::theory::Theory;

use super::{axiom_in_context, weaken_to_identity, weaken_to_reflexivity, ProofTree, Rule, Sequent};

/// Search limits. `max_depth` bounds the number of quantifier instantiations along a
/// branch; invertible steps are not counted.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Budget {
    pub max_depth: usize,
    pub max_term_depth: usize,
    pub max_nodes: usize,
}

impl Default for Budget {
    fn default() -> Self {
        Self {
            max_depth: 6,
            max_term_depth: 1,
            max_nodes: 20_000,
        }
    }
}

impl Budget {
    pub fn depth(max_depth: usize) -> Self {
        Self {
            max_depth,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SearchFailure {
    /// Every branch ran out of rules before the depth bound.
    Saturated,
    /// The depth or node bound was hit.
    BudgetExhausted,
}

struct Searcher<'a> {
    theory: &'a Theory,
    budget: Budget,
    nodes: usize,
    aborted: bool,
    depth_limited: bool,
}

fn node(seq: Sequent, rule: Rule, premises: Vec<ProofTree>) -> ProofTree {
    ProofTree::new(seq, rule, premises)
}

fn contains_alpha(list: &[Formula], f: &Formula) -> bool {
    list.iter().any(|g| g.alpha_eq(f))
}

impl<'a> Searcher<'a> {
    fn tick(&mut self) -> bool {
        self.nodes += 1;
        if self.nodes > self.budget.max_nodes {
            self.aborted = true;
        }
        !self.aborted
    }

    /// Applies one rule whose premises are computed from the conclusion.
    fn step(&self, seq: &Sequent, rule: &Rule) -> Vec<Sequent> {
        super::premises_for(rule, seq, self.theory).expect("prover applies rules only where they fit")
    }

    fn close(&self, seq: &Sequent) -> Option<ProofTree> {
        if let Some(i) = seq.ante.iter().position(|f| *f == Formula::False) {
            return Some(node(seq.clone(), Rule::LBot { index: i }, vec![]));
        }
        if let Some(j) = seq.succ.iter().position(|f| *f == Formula::True) {
            return Some(node(seq.clone(), Rule::RTop { index: j }, vec![]));
        }
        for (i, a) in seq.ante.iter().enumerate() {
            if let Some(j) = seq.succ.iter().position(|b| a.alpha_eq(b)) {
                return Some(weaken_to_identity(seq, i, j));
            }
        }
        if self.theory.signature().has_equality() {
            for (j, f) in seq.succ.iter().enumerate() {
                if let Formula::Eq(t, u) = f {
                    if t == u {
                        return Some(weaken_to_reflexivity(seq, j, t));
                    }
                }
            }
        }
        None
    }

    /// Renames the bound variable of a quantified formula if it clashes with the context.
    fn unclash(&self, seq: &Sequent, left: bool, i: usize) -> Option<(Sequent, Rule)> {
        let f = if left { &seq.ante[i] } else { &seq.succ[i] };
        let (x, body, is_forall) = match f {
            Formula::Forall(x, b) => (x, b, true),
            Formula::Exists(x, b) => (x, b, false),
            _ => return None,
        };
        if !seq.ctx.contains(x) {
            return None;
        }
        let mut avoid = seq.ctx.var_set();
        avoid.extend(body.all_vars());
        let fresh = fresh_pool_name(&avoid);
        let body = body.subst1(x, &Term::Var(fresh.clone()));
        let renamed = if is_forall {
            Formula::Forall(fresh, Box::new(body))
        } else {
            Formula::Exists(fresh, Box::new(body))
        };
        let mut prem = seq.clone();
        if left {
            prem.ante[i] = renamed;
        } else {
            prem.succ[i] = renamed;
        }
        Some((prem, Rule::AlphaRename))
    }

    fn invertible(&mut self, seq: &Sequent, inst: usize) -> Option<Option<ProofTree>> {
        for (i, f) in seq.ante.iter().enumerate() {
            let tree = match f {
                Formula::Not(_) => self.unary(seq, Rule::LNeg { index: i }, inst),
                Formula::And(..) => {
                    let s1 = self.step(seq, &Rule::LC { index: i })[0].clone();
                    let s2 = self.step(&s1, &Rule::LAnd { index: i, side: 0 })[0].clone();
                    let s3 = self.step(&s2, &Rule::LAnd { index: i + 1, side: 1 })[0].clone();
                    self.search(s3.clone(), inst).map(|t| {
                        let t = node(s2.clone(), Rule::LAnd { index: i + 1, side: 1 }, vec![t]);
                        let t = node(s1.clone(), Rule::LAnd { index: i, side: 0 }, vec![t]);
                        node(seq.clone(), Rule::LC { index: i }, vec![t])
                    })
                }
                Formula::Or(..) => self.binary(seq, Rule::LOr { index: i }, inst),
                Formula::Imp(..) => self.binary(seq, Rule::LImp { index: i }, inst),
                Formula::Exists(..) => {
                    if let Some((prem, rule)) = self.unclash(seq, true, i) {
                        self.search(prem, inst).map(|t| node(seq.clone(), rule, vec![t]))
                    } else {
                        self.unary(seq, Rule::LExists { index: i }, inst)
                    }
                }
                _ => continue,
            };
            return Some(tree);
        }
        for (j, f) in seq.succ.iter().enumerate() {
            let tree = match f {
                Formula::Not(_) => self.unary(seq, Rule::RNeg { index: j }, inst),
                Formula::And(..) => self.binary(seq, Rule::RAnd { index: j }, inst),
                Formula::Or(..) => {
                    let s1 = self.step(seq, &Rule::RC { index: j })[0].clone();
                    let s2 = self.step(&s1, &Rule::ROr { index: j, side: 0 })[0].clone();
                    let s3 = self.step(&s2, &Rule::ROr { index: j + 1, side: 1 })[0].clone();
                    self.search(s3, inst).map(|t| {
                        let t = node(s2.clone(), Rule::ROr { index: j + 1, side: 1 }, vec![t]);
                        let t = node(s1.clone(), Rule::ROr { index: j, side: 0 }, vec![t]);
                        node(seq.clone(), Rule::RC { index: j }, vec![t])
                    })
                }
                Formula::Imp(..) => self.unary(seq, Rule::RImp { index: j }, inst),
                Formula::Forall(..) => {
                    if let Some((prem, rule)) = self.unclash(seq, false, j) {
                        self.search(prem, inst).map(|t| node(seq.clone(), rule, vec![t]))
                    } else {
                        self.unary(seq, Rule::RForall { index: j }, inst)
                    }
                }
                _ => continue,
            };
            return Some(tree);
        }
        None
    }

    fn unary(&mut self, seq: &Sequent, rule: Rule, inst: usize) -> Option<ProofTree> {
        let prem = self.step(seq, &rule).remove(0);
        self.search(prem, inst).map(|t| node(seq.clone(), rule, vec![t]))
    }

    fn binary(&mut self, seq: &Sequent, rule: Rule, inst: usize) -> Option<ProofTree> {
        let prems = self.step(seq, &rule);
        let mut trees = Vec::with_capacity(2);
        for p in prems {
            trees.push(self.search(p, inst)?);
        }
        Some(node(seq.clone(), rule, trees))
    }

    fn instantiations(&self, seq: &Sequent) -> Vec<(bool, usize, Term)> {
        let terms = terms_up_to(self.theory.signature(), seq.ctx.vars(), self.budget.max_term_depth);
        let mut out = Vec::new();
        for (i, f) in seq.ante.iter().enumerate() {
            if let Formula::Forall(x, body) = f {
                for t in &terms {
                    if !contains_alpha(&seq.ante, &body.subst1(x, t)) {
                        out.push((true, i, t.clone()));
                    }
                }
            }
        }
        for (j, f) in seq.succ.iter().enumerate() {
            if let Formula::Exists(x, body) = f {
                for t in &terms {
                    if !contains_alpha(&seq.succ, &body.subst1(x, t)) {
                        out.push((false, j, t.clone()));
                    }
                }
            }
        }
        out
    }

    fn search(&mut self, seq: Sequent, inst: usize) -> Option<ProofTree> {
        if !self.tick() {
            return None;
        }
        if let Some(t) = self.close(&seq) {
            return Some(t);
        }
        if let Some(result) = self.invertible(&seq, inst) {
            return result;
        }
        let candidates = self.instantiations(&seq);
        if candidates.is_empty() {
            return None;
        }
        if inst == 0 {
            self.depth_limited = true;
            return None;
        }
        for (left, i, t) in candidates {
            let (dup, inst_rule) = if left {
                (Rule::LC { index: i }, Rule::LForall { index: i, term: t })
            } else {
                (Rule::RC { index: i }, Rule::RExists { index: i, term: t })
            };
            let s1 = self.step(&seq, &dup).remove(0);
            let s2 = self.step(&s1, &inst_rule).remove(0);
            if let Some(tree) = self.search(s2, inst - 1) {
                let tree = node(s1, inst_rule, vec![tree]);
                return Some(node(seq, dup, vec![tree]));
            }
            if self.aborted {
                return None;
            }
        }
        None
    }
}

/// Cut-free bounded proof search. Axioms of the theory relevant to the sequent are placed
/// in the antecedent and discharged at the root by cuts against axiom leaves.
pub fn prove_bounded(seq: &Sequent, theory: &Theory, budget: Budget) -> Result<ProofTree, SearchFailure> {
    let axioms = dedup(theory.axioms_for(seq.formulas()));
    let mut ante = axioms.clone();
    ante.extend(seq.ante.iter().cloned());
    let extended = Sequent::new(seq.ctx.clone(), ante, seq.succ.clone());
    let mut searcher = Searcher {
        theory,
        budget,
        nodes: 0,
        aborted: false,
        depth_limited: false,
    };
    for inst in 0..=budget.max_depth {
        searcher.depth_limited = false;
        if let Some(tree) = searcher.search(extended.clone(), inst) {
            return Ok(discharge(tree, &axioms, seq));
        }
        if searcher.aborted {
            return Err(SearchFailure::BudgetExhausted);
        }
        if !searcher.depth_limited {
            return Err(SearchFailure::Saturated);
        }
    }
    Err(SearchFailure::BudgetExhausted)
}

fn dedup(list: Vec<Formula>) -> Vec<Formula> {
    let mut seen = BTreeSet::new();
    list.into_iter().filter(|f| seen.insert(f.canonical())).collect()
}

fn discharge(mut tree: ProofTree, axioms: &[Formula], seq: &Sequent) -> ProofTree {
    for (k, a) in axioms.iter().enumerate() {
        let mut ante: Vec<Formula> = axioms[k + 1..].to_vec();
        ante.extend(seq.ante.iter().cloned());
        let conclusion = Sequent::new(seq.ctx.clone(), ante, seq.succ.clone());
        tree = ProofTree::new(
            conclusion,
            Rule::Cut {
                formula: a.clone(),
                ante_split: 0,
                succ_split: 0,
            },
            vec![axiom_in_context(a, &seq.ctx), tree],
        );
    }
    tree
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::check_proof;
    use crate::lang::{Context, Signature};

    fn sig() -> Signature {
        Signature::new().predicate("P", 1).predicate("R", 2)
    }

    #[test]
    fn exists_top_in_empty_context_is_not_proved() {
        let t = Theory::new(sig());
        let s = Sequent::new(Context::empty(), vec![], vec![Formula::exists("x", Formula::True)]);
        for d in 0..=12 {
            assert!(prove_bounded(&s, &t, Budget::depth(d)).is_err());
        }
        let s1 = Sequent::new(Context::new(["y"]).unwrap(), vec![], vec![Formula::exists("x", Formula::True)]);
        let proof = prove_bounded(&s1, &t, Budget::depth(1)).unwrap();
        check_proof(&proof, &t).unwrap();
    }

    #[test]
    fn quantifier_shift() {
        let t = Theory::new(sig());
        let r = Formula::rel("R", &["x", "y"]);
        let s = Sequent::new(
            Context::empty(),
            vec![Formula::exists("y", Formula::forall("x", r.clone()))],
            vec![Formula::forall("x", Formula::exists("y", r))],
        );
        let proof = prove_bounded(&s, &t, Budget::depth(4)).unwrap();
        check_proof(&proof, &t).unwrap();
        assert!(!proof.uses_cut());
    }

    #[test]
    fn uses_theory_axioms() {
        let t = Theory::new(sig()).with_axiom(Formula::forall("x", Formula::rel("P", &["x"])));
        let s = Sequent::new(Context::new(["z"]).unwrap(), vec![], vec![Formula::rel("P", &["z"])]);
        let proof = prove_bounded(&s, &t, Budget::depth(2)).unwrap();
        check_proof(&proof, &t).unwrap();
        let empty = Sequent::new(Context::empty(), vec![], vec![Formula::exists("x", Formula::rel("P", &["x"]))]);
        assert!(prove_bounded(&empty, &t, Budget::depth(6)).is_err());
    }

    #[test]
    fn prefix_axiom_unfolds() {
        let t = Theory::prefix_theory();
        let s = Sequent::new(
            Context::new(["x1"]).unwrap(),
            vec![Formula::exists("x2", Formula::rel("R2", &["x1", "x2"]))],
            vec![Formula::rel("R1", &["x1"])],
        );
        let proof = prove_bounded(&s, &t, Budget::depth(4)).unwrap();
        check_proof(&proof, &t).unwrap();
    }
}
