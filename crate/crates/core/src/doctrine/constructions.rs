use std::collections::BTreeSet;
use std::sync::Arc;

use super::algebra::{BAHom, Elem, FiniteBooleanAlgebra, MAX_TABULATED_ATOMS};
use super::category::{FiniteProductCategory, ObjId};
use super::finite::FiniteDoctrine;
use super::morphism::{BaseFunctor, DoctrineMorphism};
use super::DoctrineError;

fn bit(e: Elem, i: usize) -> bool {
    e >> i & 1 == 1
}

/// The subset doctrine over finite sets of the given cardinalities: fibers are powersets,
/// reindexing is inverse image, quantifiers range over the second factor and equality
/// is the diagonal.
pub fn subset_doctrine(cards: &[usize]) -> Result<FiniteDoctrine, DoctrineError> {
    let (cat, tables) = FiniteProductCategory::finite_sets(cards)?;
    let cat = Arc::new(cat);
    let reindex = (0..cat.num_morphisms())
        .map(|f| BAHom::new(cards[cat.morphism(f).cod], tables[f].clone()))
        .collect();
    let mut d = FiniteDoctrine::new(cat.clone(), cards.to_vec(), reindex)?;
    for (&(x, y), diag) in cat.products() {
        let (cx, cy) = (cards[x], cards[y]);
        if cards[diag.object] > MAX_TABULATED_ATOMS {
            continue;
        }
        let p = FiniteBooleanAlgebra::new(cards[diag.object]);
        let mut all = Vec::new();
        let mut some = Vec::new();
        for b in p.elements() {
            let (mut a, mut e) = (0, 0);
            for i in 0..cx {
                if (0..cy).all(|j| bit(b, i * cy + j)) {
                    a |= 1 << i;
                }
                if (0..cy).any(|j| bit(b, i * cy + j)) {
                    e |= 1 << i;
                }
            }
            all.push(a);
            some.push(e);
        }
        d.set_forall(x, y, all)?;
        d.set_exists(x, y, some)?;
    }
    for x in 0..cards.len() {
        if cat.product(x, x).is_some() {
            let c = cards[x];
            d.set_delta(x, (0..c).fold(0, |acc, i| acc | 1 << (i * c + i)));
        }
    }
    Ok(d)
}

/// The doctrine `Y ↦ B^{Hom(X, Y)}` for the powerset algebra `B` on `b_atoms` atoms.
/// The atom `(h, b)` of the fiber over `Y` has index `i·b_atoms + b`, `h` the `i`-th
/// morphism of `Hom(X, Y)`.
pub fn hbx_doctrine(base: Arc<FiniteProductCategory>, x: ObjId, b_atoms: usize) -> Result<FiniteDoctrine, DoctrineError> {
    let c = &base;
    let n = c.num_objects();
    let atoms: Vec<usize> = (0..n).map(|y| c.hom(x, y).len() * b_atoms).collect();
    let index_in = |y: ObjId, h| c.hom(x, y).iter().position(|&k| k == h).expect("hom member");
    let mut reindex = Vec::with_capacity(c.num_morphisms());
    for f in 0..c.num_morphisms() {
        let m = c.morphism(f);
        let mut map = Vec::with_capacity(atoms[m.dom]);
        for &k in c.hom(x, m.dom) {
            let i = index_in(m.cod, c.comp(f, k));
            for b in 0..b_atoms {
                map.push(i * b_atoms + b);
            }
        }
        reindex.push(BAHom::new(atoms[m.cod], map));
    }
    let mut d = FiniteDoctrine::new(base.clone(), atoms.clone(), reindex)?;
    for (&(y, z), diag) in c.products() {
        if atoms[diag.object] > MAX_TABULATED_ATOMS {
            continue;
        }
        let w = diag.object;
        let p = FiniteBooleanAlgebra::new(atoms[w]);
        let mut all = Vec::new();
        let mut some = Vec::new();
        for g in p.elements() {
            let (mut a, mut e) = (0, 0);
            for (i, &f) in c.hom(x, y).iter().enumerate() {
                for b in 0..b_atoms {
                    let vals: Vec<bool> = c
                        .hom(x, z)
                        .iter()
                        .map(|&h| {
                            let fh = c.pair(f, h).expect("pairing into a chosen product");
                            bit(g, index_in(w, fh) * b_atoms + b)
                        })
                        .collect();
                    if vals.iter().all(|&v| v) {
                        a |= 1 << (i * b_atoms + b);
                    }
                    if vals.iter().any(|&v| v) {
                        e |= 1 << (i * b_atoms + b);
                    }
                }
            }
            all.push(a);
            some.push(e);
        }
        d.set_forall(y, z, all)?;
        d.set_exists(y, z, some)?;
    }
    Ok(d)
}

/// The fiberwise product of doctrines over one base.
pub fn product_doctrine(parts: &[FiniteDoctrine]) -> Result<FiniteDoctrine, DoctrineError> {
    let base = parts
        .first()
        .ok_or_else(|| DoctrineError::Malformed("empty product".into()))?
        .base()
        .clone();
    if parts.iter().any(|p| !Arc::ptr_eq(p.base(), &base)) {
        return Err(DoctrineError::Malformed("factors over different bases".into()));
    }
    let n = base.num_objects();
    let offsets: Vec<Vec<usize>> = (0..n)
        .map(|x| {
            let mut acc = 0;
            parts
                .iter()
                .map(|p| {
                    let o = acc;
                    acc += p.fiber(x).atoms();
                    o
                })
                .collect()
        })
        .collect();
    let atoms: Vec<usize> = (0..n).map(|x| parts.iter().map(|p| p.fiber(x).atoms()).sum()).collect();
    let mut reindex = Vec::new();
    for f in 0..base.num_morphisms() {
        let m = base.morphism(f);
        let mut map = Vec::new();
        for (k, p) in parts.iter().enumerate() {
            map.extend(p.reindexing(f).atom_map.iter().map(|&a| a + offsets[m.cod][k]));
        }
        reindex.push(BAHom::new(atoms[m.cod], map));
    }
    let mut d = FiniteDoctrine::new(base.clone(), atoms.clone(), reindex)?;
    let split = |e: Elem, x: ObjId, k: usize| -> Elem {
        let w = parts[k].fiber(x).atoms();
        let mask = if w == 64 { u64::MAX } else { (1u64 << w) - 1 };
        e >> offsets[x][k] & mask
    };
    for (&(x, y), diag) in base.products() {
        if atoms[diag.object] > MAX_TABULATED_ATOMS {
            continue;
        }
        let qs: Vec<Vec<Elem>> = parts.iter().map(|p| p.universal(x, y).expect("product")).collect();
        let es: Vec<Vec<Elem>> = parts.iter().map(|p| p.existential(x, y).expect("product")).collect();
        let (mut all, mut some) = (Vec::new(), Vec::new());
        for g in FiniteBooleanAlgebra::new(atoms[diag.object]).elements() {
            let (mut a, mut e) = (0, 0);
            for k in 0..parts.len() {
                let gk = split(g, diag.object, k) as usize;
                a |= qs[k][gk] << offsets[x][k];
                e |= es[k][gk] << offsets[x][k];
            }
            all.push(a);
            some.push(e);
        }
        d.set_forall(x, y, all)?;
        d.set_exists(x, y, some)?;
    }
    Ok(d)
}

/// The canonical morphism into `∏_X H^{P(X)}_X`, sending `γ` over `Y` to the family
/// `f ↦ P(f)(γ)` over all `f : X -> Y`.
pub fn embedding_morphism(d: &FiniteDoctrine) -> Result<(FiniteDoctrine, DoctrineMorphism), DoctrineError> {
    let base = d.base().clone();
    let n = base.num_objects();
    let parts: Vec<FiniteDoctrine> = (0..n)
        .map(|x| hbx_doctrine(base.clone(), x, d.fiber(x).atoms()))
        .collect::<Result<_, _>>()?;
    let target = product_doctrine(&parts)?;
    let mut homs = Vec::with_capacity(n);
    for y in 0..n {
        let mut map = Vec::new();
        for x in 0..n {
            for &f in base.hom(x, y) {
                map.extend(d.reindexing(f).atom_map.iter().copied());
            }
        }
        homs.push(BAHom::new(d.fiber(y).atoms(), map));
    }
    Ok((target, DoctrineMorphism::from_homs(BaseFunctor::identity(&base), &homs)))
}

/// Injectivity of every component, read off at the identity coordinate: the `(Y, id_Y)`
/// block of the image of `γ` over `Y` is `γ` itself.
pub fn injective_by_identity(d: &FiniteDoctrine, m: &DoctrineMorphism) -> Vec<ObjId> {
    let base = d.base();
    let n = base.num_objects();
    let mut failures = Vec::new();
    for y in 0..n {
        let mut offset = 0;
        for x in 0..y {
            offset += base.hom(x, y).len() * d.fiber(x).atoms();
        }
        let pos = base.hom(y, y).iter().position(|&h| h == base.identity(y)).expect("identity");
        offset += pos * d.fiber(y).atoms();
        let w = d.fiber(y).atoms();
        let mask = if w == 64 { u64::MAX } else { (1u64 << w) - 1 };
        if d.fiber(y).elements().any(|g| m.apply(y, g) >> offset & mask != g) {
            failures.push(y);
        }
    }
    failures
}

/// Pulls a doctrine over `D` back along a product-preserving functor `C -> D`.
pub fn change_of_base(
    r: &FiniteDoctrine,
    c: Arc<FiniteProductCategory>,
    m: &BaseFunctor,
) -> Result<FiniteDoctrine, DoctrineError> {
    let report = m.verify(&c, r.base());
    if !report.passed() {
        return Err(DoctrineError::Malformed(format!(
            "functor is not a product-preserving functor: {}",
            report.violations()[0]
        )));
    }
    let atoms: Vec<usize> = (0..c.num_objects()).map(|x| r.fiber(m.obj[x]).atoms()).collect();
    let reindex = (0..c.num_morphisms()).map(|f| r.reindexing(m.mor[f]).clone()).collect();
    let mut d = FiniteDoctrine::new(c.clone(), atoms, reindex)?;
    for &(x, y) in c.products().keys() {
        if let Some(t) = r.forall_table(m.obj[x], m.obj[y]) {
            d.set_forall(x, y, t.clone())?;
        }
        if let Some(t) = r.exists_table(m.obj[x], m.obj[y]) {
            d.set_exists(x, y, t.clone())?;
        }
    }
    for x in 0..c.num_objects() {
        if c.product(x, x).is_some() {
            if let Some(&e) = r.delta().get(&m.obj[x]) {
                d.set_delta(x, e);
            }
        }
    }
    Ok(d)
}

/// Checks that `f` is a filter of the fiber over the terminal object.
pub fn check_filter(d: &FiniteDoctrine, f: &BTreeSet<Elem>) -> Result<(), DoctrineError> {
    let t = d.fiber(d.base().terminal());
    let bad = |m: &str| Err(DoctrineError::NotAFilter(m.into()));
    if f.iter().any(|&e| !t.contains(e)) {
        return bad("element outside the terminal fiber");
    }
    if !f.contains(&t.top()) {
        return bad("missing top");
    }
    for &a in f {
        for b in t.elements() {
            if t.leq(a, b) && !f.contains(&b) {
                return bad("not upward closed");
            }
        }
        for &b in f {
            if !f.contains(&(a & b)) {
                return bad("not closed under meets");
            }
        }
    }
    Ok(())
}

/// The universal closure of `γ` over `X`: reindex along `pr2 : 1 × X -> X`, then
/// quantify along `pr1 : 1 × X -> 1`.
pub fn universal_closure(d: &FiniteDoctrine, x: ObjId, g: Elem) -> Result<Elem, DoctrineError> {
    let one = d.base().terminal();
    let diag = d.base().product(one, x).ok_or(DoctrineError::MissingProduct)?;
    let q = d.universal(one, x).ok_or(DoctrineError::MissingProduct)?;
    Ok(q[d.apply(diag.pr2, g) as usize])
}

/// The quotient by a filter `F` of the terminal fiber: `α ~ β` iff the universal closure
/// of `α ↔ β` lies in `F`. Each congruence class has a least generator `g_X` of the
/// kernel filter; the quotient fiber over `X` is the powerset of the atoms of `g_X`.
/// Returns the quotient and the generators.
pub fn quotient_by_filter(d: &FiniteDoctrine, f: &BTreeSet<Elem>) -> Result<(FiniteDoctrine, Vec<Elem>), DoctrineError> {
    check_filter(d, f)?;
    let base = d.base().clone();
    let n = base.num_objects();
    let mut gens = Vec::with_capacity(n);
    for x in 0..n {
        let fx = d.fiber(x);
        let mut kernel = Vec::new();
        for e in fx.elements() {
            if f.contains(&universal_closure(d, x, e)?) {
                kernel.push(e);
            }
        }
        let g = kernel.iter().fold(fx.top(), |acc, &e| acc & e);
        if kernel.len() as u128 != 1u128 << (fx.atoms() - g.count_ones() as usize) || !kernel.contains(&g) {
            return Err(DoctrineError::NotWellDefined(format!(
                "kernel over {} is not a principal filter",
                base.object_name(x)
            )));
        }
        gens.push(g);
    }
    let kept: Vec<Vec<usize>> = gens
        .iter()
        .map(|&g| (0..64).filter(|&a| g >> a & 1 == 1).collect())
        .collect();
    let compress = |x: ObjId, e: Elem| -> Elem {
        kept[x]
            .iter()
            .enumerate()
            .filter(|(_, &a)| e >> a & 1 == 1)
            .fold(0, |acc, (i, _)| acc | 1 << i)
    };
    let expand = |x: ObjId, e: Elem| -> Elem {
        kept[x]
            .iter()
            .enumerate()
            .filter(|(i, _)| e >> i & 1 == 1)
            .fold(0, |acc, (_, &a)| acc | 1 << a)
    };
    let mut reindex = Vec::new();
    for fm in 0..base.num_morphisms() {
        let m = base.morphism(fm);
        let h = d.reindexing(fm);
        let mut map = Vec::new();
        for &a in &kept[m.dom] {
            let s = h.atom_map[a];
            let i = kept[m.cod].iter().position(|&k| k == s).ok_or_else(|| {
                DoctrineError::NotWellDefined(format!("reindexing along {} does not respect the congruence", m.name))
            })?;
            map.push(i);
        }
        reindex.push(BAHom::new(kept[m.cod].len(), map));
    }
    let atoms: Vec<usize> = kept.iter().map(Vec::len).collect();
    let mut q = FiniteDoctrine::new(base.clone(), atoms.clone(), reindex)?;
    for (&(x, y), diag) in base.products() {
        let p = diag.object;
        let Some(all) = d.universal(x, y) else { continue };
        let some = d.existential(x, y).expect("product");
        let elems = FiniteBooleanAlgebra::new(atoms[p]);
        let fa = elems.elements().map(|b| compress(x, all[expand(p, b) as usize])).collect();
        let fe = elems.elements().map(|b| compress(x, some[expand(p, b) as usize])).collect();
        q.set_forall(x, y, fa)?;
        q.set_exists(x, y, fe)?;
    }
    for (&x, &e) in d.delta() {
        if let Some(diag) = base.product(x, x) {
            q.set_delta(x, compress(diag.object, e));
        }
    }
    Ok((q, gens))
}

/// A Boolean doctrine over the chain `c0 < ... < c(n-1)` with `atoms[i]` atoms over `c_i`.
/// `covers[i]` maps the atoms over `c_i` to atoms over `c_(i+1)` and presents reindexing
/// along `c_i < c_(i+1)`; the other reindexings are composites.
pub fn chain_doctrine(atoms: &[usize], covers: &[Vec<usize>]) -> Result<FiniteDoctrine, DoctrineError> {
    let n = atoms.len();
    if n == 0 || covers.len() + 1 != n {
        return Err(DoctrineError::Malformed("one cover map per consecutive pair required".into()));
    }
    let base = Arc::new(FiniteProductCategory::chain(n));
    let mut reindex = vec![BAHom::identity(0); base.num_morphisms()];
    for i in 0..n {
        for j in i..n {
            let f = base.hom(i, j)[0];
            let mut map: Vec<usize> = (0..atoms[i]).collect();
            for cover in &covers[i..j] {
                map = map.iter().map(|&a| cover.get(a).copied().unwrap_or(usize::MAX)).collect();
            }
            reindex[f] = BAHom::new(atoms[j], map);
        }
    }
    FiniteDoctrine::new(base, atoms.to_vec(), reindex)
}
