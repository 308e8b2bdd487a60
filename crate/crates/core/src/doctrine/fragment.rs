//! Quantifier-free fragments and their quantifier-alternation stratifications.

use std::collections::{BTreeMap, BTreeSet};

use super::algebra::{Elem, SubAlgebra};
use super::category::ObjId;
use super::finite::FiniteDoctrine;
use super::report::{Report, Violation};
use super::DoctrineError;

/// A set of marked elements per fiber.
pub type Marking = Vec<BTreeSet<Elem>>;

/// One-step quantifier tables for each chosen product `(X, Y)`, defined on the elements of
/// the lower level over `X × Y`.
pub type OneStepTables = BTreeMap<(ObjId, ObjId), BTreeMap<Elem, Elem>>;

pub fn full_marking(d: &FiniteDoctrine) -> Marking {
    (0..d.base().num_objects()).map(|x| d.fiber(x).elements().collect()).collect()
}

pub fn marking_of(levels: &[SubAlgebra]) -> Marking {
    levels.iter().map(|s| s.elements().collect()).collect()
}

fn generated(d: &FiniteDoctrine, x: ObjId, gens: impl IntoIterator<Item = Elem>) -> SubAlgebra {
    SubAlgebra::generated(d.fiber(x).atoms(), gens)
}

/// The next level: over each `X`, the subalgebra generated by the universal images of the
/// current level over every chosen `X × Y`.
fn next_level(d: &FiniteDoctrine, level: &[SubAlgebra]) -> Vec<SubAlgebra> {
    let c = d.base();
    let mut gens: Vec<Vec<Elem>> = vec![Vec::new(); c.num_objects()];
    for (&(x, y), p) in c.products() {
        let q = d.universal(x, y).expect("product present");
        gens[x].extend(level[p.object].elements().map(|b| q[b as usize]));
    }
    gens.into_iter().enumerate().map(|(x, g)| generated(d, x, g)).collect()
}

/// The quantifier-alternation levels starting at `level0`, up to and including the first
/// level equal to its successor.
fn levels_from(d: &FiniteDoctrine, level0: Vec<SubAlgebra>, r: &mut Report) -> Vec<Vec<SubAlgebra>> {
    let mut levels = vec![level0];
    loop {
        let cur = levels.last().expect("nonempty");
        let next = next_level(d, cur);
        for (x, (a, b)) in cur.iter().zip(&next).enumerate() {
            if !a.is_subalgebra_of(b) {
                r.push(
                    Violation::new("monotonicity")
                        .with("obj", d.obj_name(x))
                        .with("level", levels.len() - 1),
                );
            }
        }
        if &next == cur {
            return levels;
        }
        levels.push(next);
    }
}

/// Checks that the marking is a Boolean subfunctor and that it generates every fiber.
pub fn verify_qff(d: &FiniteDoctrine, marking: &Marking) -> Report {
    let c = d.base();
    let mut r = Report::new();
    if marking.len() != c.num_objects() {
        r.push(Violation::new("marking-shape"));
        return r;
    }
    for (x, m) in marking.iter().enumerate() {
        let fx = d.fiber(x);
        let obj = d.obj_name(x);
        let mut missing = BTreeSet::new();
        for &e in m {
            if !fx.contains(e) {
                r.push(Violation::new("marking-range").with("obj", obj).with("elem", e));
            }
        }
        if !m.contains(&fx.top()) {
            missing.insert(fx.top());
        }
        for &a in m {
            if !m.contains(&fx.neg(a)) {
                missing.insert(fx.neg(a));
            }
            for &b in m.range(a..) {
                if !m.contains(&(a & b)) {
                    missing.insert(a & b);
                }
            }
        }
        for e in missing {
            r.push(Violation::new("subfunctor-boolean").with("obj", obj).with("elem", e));
        }
    }
    for f in 0..c.num_morphisms() {
        let mf = c.morphism(f);
        for &e in &marking[mf.cod] {
            if !marking[mf.dom].contains(&d.apply(f, e)) {
                r.push(Violation::new("subfunctor-reindex").with("f", &mf.name).with("elem", e));
            }
        }
    }
    let level0: Vec<SubAlgebra> = marking
        .iter()
        .enumerate()
        .map(|(x, m)| generated(d, x, m.iter().copied()))
        .collect();
    let levels = levels_from(d, level0, &mut r);
    let last = levels.last().expect("nonempty");
    for (x, s) in last.iter().enumerate() {
        if !s.is_full() {
            r.push(
                Violation::new("generation")
                    .with("obj", d.obj_name(x))
                    .with("reached", s.len())
                    .with("size", d.fiber(x).size()),
            );
        }
    }
    r
}

/// A quantifier-alternation stratification inside an ambient doctrine. Level `n` for
/// `n` beyond the stabilization index equals the last stored level.
#[derive(Debug, Clone)]
pub struct StratifiedSequence {
    pub ambient: FiniteDoctrine,
    pub levels: Vec<Vec<SubAlgebra>>,
    pub one_step: Vec<OneStepTables>,
}

impl StratifiedSequence {
    pub fn stabilization_index(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn level(&self, n: usize) -> &[SubAlgebra] {
        &self.levels[n.min(self.levels.len() - 1)]
    }

    pub fn quantifiers(&self, n: usize) -> &OneStepTables {
        &self.one_step[n.min(self.one_step.len() - 1)]
    }
}

fn one_step_tables(d: &FiniteDoctrine, lower: &[SubAlgebra]) -> OneStepTables {
    let mut out = BTreeMap::new();
    for (&(x, y), p) in d.base().products() {
        let q = d.universal(x, y).expect("product present");
        out.insert((x, y), lower[p.object].elements().map(|b| (b, q[b as usize])).collect());
    }
    out
}

/// The stratification induced by a quantifier-free fragment, with the one-step
/// quantifiers restricted from the ambient ones.
pub fn stratify(d: &FiniteDoctrine, marking: &Marking) -> Result<StratifiedSequence, DoctrineError> {
    let report = verify_qff(d, marking);
    if !report.passed() {
        return Err(DoctrineError::NotWellDefined(format!(
            "marking is not a quantifier-free fragment: {}",
            report.violations()[0]
        )));
    }
    let level0 = marking
        .iter()
        .enumerate()
        .map(|(x, m)| generated(d, x, m.iter().copied()))
        .collect();
    let mut scratch = Report::new();
    let levels = levels_from(d, level0, &mut scratch);
    let one_step = levels.iter().map(|l| one_step_tables(d, l)).collect();
    Ok(StratifiedSequence {
        ambient: d.clone(),
        levels,
        one_step,
    })
}

/// The fiberwise union of the levels, with quantifiers the union of the one-step ones, and
/// the bottom level as marking. Only the Boolean part of the ambient doctrine is used.
pub fn colimit(s: &StratifiedSequence) -> Result<(FiniteDoctrine, Marking), DoctrineError> {
    let d = &s.ambient;
    let c = d.base();
    let last = s.levels.last().ok_or_else(|| DoctrineError::NotWellDefined("empty sequence".into()))?;
    if s.one_step.len() != s.levels.len() {
        return Err(DoctrineError::NotWellDefined("one-step quantifiers missing for some level".into()));
    }
    if let Some(x) = last.iter().position(|l| !l.is_full()) {
        return Err(DoctrineError::NotWellDefined(format!(
            "union of levels is not the whole fiber over {}",
            d.obj_name(x)
        )));
    }
    let mut out = FiniteDoctrine::new(c.clone(), d.fiber_atoms(), d.reindexings().to_vec())?;
    for (&(x, y), p) in c.products() {
        let mut table: BTreeMap<Elem, Elem> = BTreeMap::new();
        for step in &s.one_step {
            if let Some(t) = step.get(&(x, y)) {
                for (&b, &v) in t {
                    if let Some(&old) = table.get(&b) {
                        if old != v {
                            return Err(DoctrineError::NotWellDefined(format!(
                                "one-step quantifiers disagree over {} x {}",
                                d.obj_name(x),
                                d.obj_name(y)
                            )));
                        }
                    }
                    table.insert(b, v);
                }
            }
        }
        let fp = d.fiber(p.object);
        let dense: Option<Vec<Elem>> = fp.elements().map(|b| table.get(&b).copied()).collect();
        let dense = dense.ok_or_else(|| DoctrineError::NotWellDefined("quantifier undefined on some element".into()))?;
        out.set_forall(x, y, dense)?;
    }
    Ok((out, marking_of(&s.levels[0])))
}

/// The three one-step conditions for consecutive levels `p0 ⊆ p1` with one-step
/// quantifiers `q`, plus the subfunctor and inclusion conditions on the levels.
pub fn verify_one_step(d: &FiniteDoctrine, p0: &[SubAlgebra], p1: &[SubAlgebra], q: &OneStepTables) -> Report {
    let c = d.base();
    let mut r = Report::new();
    for (x, (a, b)) in p0.iter().zip(p1).enumerate() {
        if !a.is_subalgebra_of(b) {
            r.push(Violation::new("inclusion").with("obj", d.obj_name(x)));
        }
    }
    for (name, level) in [("lower", p0), ("upper", p1)] {
        for f in 0..c.num_morphisms() {
            let mf = c.morphism(f);
            for &blk in level[mf.cod].blocks() {
                if !level[mf.dom].contains(d.apply(f, blk)) {
                    r.push(
                        Violation::new("level-subfunctor")
                            .with("level", name)
                            .with("f", &mf.name)
                            .with("elem", blk),
                    );
                }
            }
        }
    }
    let mut gens: Vec<Vec<Elem>> = vec![Vec::new(); c.num_objects()];
    for (&(x, y), p) in c.products() {
        let Some(t) = q.get(&(x, y)) else {
            r.push(
                Violation::new("one-step-universal")
                    .with("X", d.obj_name(x))
                    .with("Y", d.obj_name(y))
                    .with("reason", "missing"),
            );
            continue;
        };
        let pr1 = d.reindexing(p.pr1);
        for b in p0[p.object].elements() {
            let violation = || {
                Violation::new("one-step-universal")
                    .with("X", d.obj_name(x))
                    .with("Y", d.obj_name(y))
                    .with("elem", b)
            };
            let Some(&v) = t.get(&b) else {
                r.push(violation());
                continue;
            };
            let best = p1[x]
                .blocks()
                .iter()
                .filter(|&&blk| pr1.apply(blk) & !b == 0)
                .fold(0, |acc, blk| acc | blk);
            if !p1[x].contains(v) || v != best {
                r.push(violation());
            }
            gens[x].push(v);
        }
    }
    for (&(x, y), p) in c.products() {
        let Some(t) = q.get(&(x, y)) else { continue };
        for x2 in 0..c.num_objects() {
            let Some(t2) = q.get(&(x2, y)) else { continue };
            for &f in c.hom(x2, x) {
                let Some(fy) = c.product_map(f, c.identity(y)) else { continue };
                for b in p0[p.object].elements() {
                    let (Some(&lhs), Some(&top)) = (t2.get(&d.apply(fy, b)), t.get(&b)) else {
                        continue;
                    };
                    if lhs != d.apply(f, top) {
                        r.push(
                            Violation::new("one-step-beck-chevalley")
                                .with("f", &c.morphism(f).name)
                                .with("Y", d.obj_name(y))
                                .with("elem", b),
                        );
                    }
                }
            }
        }
    }
    for (x, g) in gens.into_iter().enumerate() {
        if generated(d, x, g) != p1[x] {
            r.push(Violation::new("one-step-generation").with("obj", d.obj_name(x)));
        }
    }
    r
}

/// Every adjacent pair is a one-step doctrine, and consecutive one-step quantifiers agree.
pub fn verify_qa_stratified(s: &StratifiedSequence) -> Report {
    let d = &s.ambient;
    let mut r = Report::new();
    let top = s.stabilization_index();
    for n in 0..=top {
        let step = verify_one_step(d, s.level(n), s.level(n + 1), s.quantifiers(n));
        for v in step.violations() {
            r.push(v.with("n", n));
        }
        let (lo, hi) = (s.quantifiers(n), s.quantifiers(n + 1));
        for (&(x, y), t) in lo {
            for (&b, &v) in t {
                if hi.get(&(x, y)).and_then(|h| h.get(&b)) != Some(&v) {
                    r.push(
                        Violation::new("stratified-square")
                            .with("n", n)
                            .with("X", d.obj_name(x))
                            .with("Y", d.obj_name(y))
                            .with("elem", b),
                    );
                }
            }
        }
    }
    r
}

/// The Boolean doctrine presented by a subfunctor given as one subalgebra per fiber, with
/// the blocks of each subalgebra as atoms.
pub fn subdoctrine(d: &FiniteDoctrine, levels: &[SubAlgebra]) -> Result<FiniteDoctrine, DoctrineError> {
    let c = d.base();
    let mut reindex = Vec::with_capacity(c.num_morphisms());
    for f in 0..c.num_morphisms() {
        let m = c.morphism(f);
        let h = d.reindexing(f);
        let (lo, hi) = (&levels[m.dom], &levels[m.cod]);
        let mut map = Vec::with_capacity(lo.blocks().len());
        for &t in lo.blocks() {
            let a = t.trailing_zeros() as usize;
            let s = hi
                .blocks()
                .iter()
                .position(|&b| b >> h.atom_map[a] & 1 == 1)
                .expect("blocks partition the atoms");
            if d.apply(f, hi.blocks()[s]) & t != t {
                return Err(DoctrineError::NotWellDefined(format!("reindexing along {} leaves the subfunctor", m.name)));
            }
            map.push(s);
        }
        reindex.push(super::algebra::BAHom::new(hi.blocks().len(), map));
    }
    FiniteDoctrine::new(c.clone(), levels.iter().map(|l| l.blocks().len()).collect(), reindex)
}

/// An element of a subalgebra in the coordinates of [`subdoctrine`].
pub fn to_sub(level: &SubAlgebra, e: Elem) -> Elem {
    level.to_block_mask(e)
}
