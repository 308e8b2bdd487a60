use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use super::algebra::{nearest_homs, BAHom, Elem, FiniteBooleanAlgebra, MAX_TABULATED_ATOMS};

/// Largest source fiber for which reindexing may be given as an element table.
pub const MAX_TABLE_ATOMS: usize = 16;
use super::category::{FiniteProductCategory, MorId, ObjId};
use super::report::{Report, Violation};
use super::DoctrineError;

/// A Boolean doctrine over a finite base: one powerset fiber per object, one reindexing
/// homomorphism per morphism, and optional quantifier and equality data.
///
/// Quantifier tables are indexed by the chosen product `(X, Y)` and map each element of
/// the fiber over `X × Y` to an element of the fiber over `X`.
#[derive(Debug, Clone)]
pub struct FiniteDoctrine {
    base: Arc<FiniteProductCategory>,
    fibers: Vec<FiniteBooleanAlgebra>,
    reindex: Vec<BAHom>,
    exceptions: Vec<BTreeMap<Elem, Elem>>,
    suspects: Vec<BTreeSet<Elem>>,
    forall: BTreeMap<(ObjId, ObjId), Vec<Elem>>,
    exists: BTreeMap<(ObjId, ObjId), Vec<Elem>>,
    delta: BTreeMap<ObjId, Elem>,
}

impl FiniteDoctrine {
    pub fn new(base: Arc<FiniteProductCategory>, atoms: Vec<usize>, reindex: Vec<BAHom>) -> Result<Self, DoctrineError> {
        if atoms.len() != base.num_objects() {
            return Err(DoctrineError::Malformed("one fiber per object required".into()));
        }
        if reindex.len() != base.num_morphisms() {
            return Err(DoctrineError::Malformed("one reindexing map per morphism required".into()));
        }
        if let Some(&a) = atoms.iter().find(|&&a| a > 64) {
            return Err(DoctrineError::Malformed(format!("fiber with {a} atoms exceeds 64")));
        }
        for (f, h) in reindex.iter().enumerate() {
            let m = base.morphism(f);
            if h.source_atoms != atoms[m.cod] || h.atom_map.len() != atoms[m.dom] || !h.is_valid() {
                return Err(DoctrineError::Malformed(format!("reindexing along {} has the wrong shape", m.name)));
            }
        }
        Ok(Self {
            fibers: atoms.into_iter().map(FiniteBooleanAlgebra::new).collect(),
            exceptions: vec![BTreeMap::new(); reindex.len()],
            suspects: vec![BTreeSet::new(); reindex.len()],
            base,
            reindex,
            forall: BTreeMap::new(),
            exists: BTreeMap::new(),
            delta: BTreeMap::new(),
        })
    }

    pub fn base(&self) -> &Arc<FiniteProductCategory> {
        &self.base
    }

    pub fn fiber(&self, x: ObjId) -> FiniteBooleanAlgebra {
        self.fibers[x]
    }

    pub fn fiber_atoms(&self) -> Vec<usize> {
        self.fibers.iter().map(|f| f.atoms()).collect()
    }

    pub fn reindexing(&self, f: MorId) -> &BAHom {
        &self.reindex[f]
    }

    pub fn reindexings(&self) -> &[BAHom] {
        &self.reindex
    }

    /// Replaces one atom-map entry of a reindexing; used to build perturbed instances.
    pub fn set_reindex_entry(&mut self, f: MorId, atom: usize, value: usize) {
        self.reindex[f].atom_map[atom] = value;
        self.exceptions[f].clear();
        self.suspects[f].clear();
    }

    /// `P(f)(e)`.
    pub fn apply(&self, f: MorId, e: Elem) -> Elem {
        match self.exceptions[f].get(&e) {
            Some(&v) => v,
            None => self.reindex[f].apply(e),
        }
    }

    /// The full element table of `P(f)`.
    pub fn reindex_table(&self, f: MorId) -> Vec<Elem> {
        let src = self.fibers[self.base.morphism(f).cod];
        src.elements().map(|e| self.apply(f, e)).collect()
    }

    /// Installs `P(f)` from an element table. The table is stored as its nearest
    /// homomorphism plus the entries where it deviates; elements where some nearest
    /// homomorphism deviates are recorded for the verifier.
    pub fn set_reindex_table(&mut self, f: MorId, table: Vec<Elem>) -> Result<(), DoctrineError> {
        let m = self.base.morphism(f).clone();
        let (src, tgt) = (self.fibers[m.cod], self.fibers[m.dom]);
        if src.atoms() > MAX_TABLE_ATOMS || table.len() as u128 != src.size() {
            return Err(DoctrineError::Malformed(format!("reindexing table along {} has the wrong length", m.name)));
        }
        let (homs, _) = nearest_homs(src.atoms(), tgt.atoms(), &table)
            .ok_or_else(|| DoctrineError::Malformed(format!("no homomorphism fits the table along {}", m.name)))?;
        let mut suspects = BTreeSet::new();
        for h in &homs {
            suspects.extend(src.elements().filter(|&e| h.apply(e) != table[e as usize]));
        }
        let h = homs.into_iter().next().expect("at least one candidate");
        self.exceptions[f] = src
            .elements()
            .filter(|&e| h.apply(e) != table[e as usize])
            .map(|e| (e, table[e as usize]))
            .collect();
        self.reindex[f] = h;
        self.suspects[f] = suspects;
        Ok(())
    }

    /// Overwrites one entry of the element table of `P(f)`.
    pub fn set_reindex_value(&mut self, f: MorId, e: Elem, value: Elem) -> Result<(), DoctrineError> {
        let mut table = self.reindex_table(f);
        table[e as usize] = value;
        self.set_reindex_table(f, table)
    }

    pub fn set_forall(&mut self, x: ObjId, y: ObjId, table: Vec<Elem>) -> Result<(), DoctrineError> {
        self.check_table(x, y, &table)?;
        self.forall.insert((x, y), table);
        Ok(())
    }

    pub fn set_exists(&mut self, x: ObjId, y: ObjId, table: Vec<Elem>) -> Result<(), DoctrineError> {
        self.check_table(x, y, &table)?;
        self.exists.insert((x, y), table);
        Ok(())
    }

    fn check_table(&self, x: ObjId, y: ObjId, table: &[Elem]) -> Result<(), DoctrineError> {
        let d = self
            .base
            .product(x, y)
            .ok_or_else(|| DoctrineError::Malformed("quantifier for a product that is not chosen".into()))?;
        let p = self.fibers[d.object];
        if p.atoms() > MAX_TABULATED_ATOMS || table.len() as u128 != p.size() {
            return Err(DoctrineError::Malformed("quantifier table has the wrong length".into()));
        }
        Ok(())
    }

    pub fn forall_table(&self, x: ObjId, y: ObjId) -> Option<&Vec<Elem>> {
        self.forall.get(&(x, y))
    }

    pub fn exists_table(&self, x: ObjId, y: ObjId) -> Option<&Vec<Elem>> {
        self.exists.get(&(x, y))
    }

    pub fn forall_tables(&self) -> &BTreeMap<(ObjId, ObjId), Vec<Elem>> {
        &self.forall
    }

    pub fn exists_tables(&self) -> &BTreeMap<(ObjId, ObjId), Vec<Elem>> {
        &self.exists
    }

    pub fn forall_tables_mut(&mut self) -> &mut BTreeMap<(ObjId, ObjId), Vec<Elem>> {
        &mut self.forall
    }

    pub fn exists_tables_mut(&mut self) -> &mut BTreeMap<(ObjId, ObjId), Vec<Elem>> {
        &mut self.exists
    }

    pub fn set_delta(&mut self, x: ObjId, e: Elem) {
        self.delta.insert(x, e);
    }

    pub fn delta(&self) -> &BTreeMap<ObjId, Elem> {
        &self.delta
    }

    pub fn clear_delta(&mut self) {
        self.delta.clear();
    }

    /// The universal quantifier along `pr1 : X × Y -> X`: the stored table or the forced adjoint.
    pub fn universal(&self, x: ObjId, y: ObjId) -> Option<Vec<Elem>> {
        match self.forall.get(&(x, y)) {
            Some(t) => Some(t.clone()),
            None => forced_universal(self, x, y),
        }
    }

    /// The existential quantifier along `pr1 : X × Y -> X`: stored, or forced as a left adjoint.
    pub fn existential(&self, x: ObjId, y: ObjId) -> Option<Vec<Elem>> {
        if let Some(t) = self.exists.get(&(x, y)) {
            return Some(t.clone());
        }
        let d = self.base.product(x, y)?;
        let h = &self.reindex[d.pr1];
        Some(self.fibers[d.object].elements().map(|b| h.left_adjoint(b)).collect())
    }

    /// Element label used in reports.
    pub fn obj_name(&self, x: ObjId) -> &str {
        self.base.object_name(x)
    }

    pub fn mor_name(&self, f: MorId) -> &str {
        &self.base.morphism(f).name
    }
}

/// `∀β = ⋁{α : P(pr1)(α) ≤ β}` for the chosen product `X × Y`.
pub fn forced_universal(d: &FiniteDoctrine, x: ObjId, y: ObjId) -> Option<Vec<Elem>> {
    let diag = d.base.product(x, y)?;
    let h = &d.reindex[diag.pr1];
    Some(d.fibers[diag.object].elements().map(|b| h.right_adjoint(b)).collect())
}

/// Functoriality of the reindexing maps.
pub fn verify_boolean_doctrine(d: &FiniteDoctrine) -> Report {
    let mut r = Report::new();
    let c = &d.base;
    for (f, h) in d.reindex.iter().enumerate() {
        if !h.is_valid() {
            r.push(Violation::new("not-homomorphism").with("f", d.mor_name(f)));
        }
        let tgt = d.fibers[c.morphism(f).dom];
        for &e in &d.suspects[f] {
            let kind = if tgt.contains(d.apply(f, e)) { "not-homomorphism" } else { "reindex-range" };
            r.push(Violation::new(kind).with("f", d.mor_name(f)).with("elem", e));
        }
    }
    for x in 0..c.num_objects() {
        let id = &d.reindex[c.identity(x)];
        for (a, &v) in id.atom_map.iter().enumerate() {
            if v != a {
                r.push(Violation::new("functoriality-identity").with("obj", d.obj_name(x)).with("atom", a));
            }
        }
    }
    for (&(g, f), &gf) in c.compose_table() {
        let expected = d.reindex[f].after(&d.reindex[g]);
        for (a, (&u, &v)) in expected.atom_map.iter().zip(&d.reindex[gf].atom_map).enumerate() {
            if u != v {
                r.push(
                    Violation::new("functoriality")
                        .with("f", d.mor_name(f))
                        .with("g", d.mor_name(g))
                        .with("atom", a),
                );
            }
        }
    }
    r
}

fn check_quantifier(d: &FiniteDoctrine, x: ObjId, y: ObjId, q: &[Elem], universal: bool, r: &mut Report) {
    let c = &d.base;
    let diag = c.product(x, y).expect("diagram present");
    let (fx, fp) = (d.fibers[x], d.fibers[diag.object]);
    let pr1 = &d.reindex[diag.pr1];
    let tag = |k: &str| if universal { k.to_string() } else { format!("exists-{k}") };
    let base = |k: &str| {
        Violation::new(&tag(k))
            .with("X", d.obj_name(x))
            .with("Y", d.obj_name(y))
    };
    for b in fp.elements() {
        if !fx.contains(q[b as usize]) {
            r.push(base("quantifier-range").with("elem", b));
        }
    }
    for b in fp.elements() {
        for a in 0..fp.atoms() {
            let b2 = b | 1 << a;
            if b2 != b && !fx.leq(q[b as usize] & fx.top(), q[b2 as usize] & fx.top()) {
                r.push(base("order-preservation").with("elem", b).with("atom", a));
            }
        }
    }
    if universal {
        for a in fx.elements() {
            if !fx.leq(a, q[pr1.apply(a) as usize] & fx.top()) {
                r.push(base("unit").with("elem", a));
            }
        }
        for b in fp.elements() {
            if !fp.leq(pr1.apply(q[b as usize] & fx.top()), b) {
                r.push(base("counit").with("elem", b));
            }
        }
    } else {
        for b in fp.elements() {
            if !fp.leq(b, pr1.apply(q[b as usize] & fx.top())) {
                r.push(base("unit").with("elem", b));
            }
        }
        for a in fx.elements() {
            if !fx.leq(q[pr1.apply(a) as usize] & fx.top(), a) {
                r.push(base("counit").with("elem", a));
            }
        }
    }
}

fn check_beck_chevalley(
    d: &FiniteDoctrine,
    quant: &BTreeMap<(ObjId, ObjId), Vec<Elem>>,
    kind: &str,
    r: &mut Report,
) {
    let c = &d.base;
    for (&(x, y), q) in quant {
        let diag = c.product(x, y).expect("diagram present");
        for x2 in 0..c.num_objects() {
            let Some(q2) = quant.get(&(x2, y)) else { continue };
            for &f in c.hom(x2, x) {
                let Some(fxid) = c.product_map(f, c.identity(y)) else { continue };
                for b in d.fibers[diag.object].elements() {
                    let lhs = q2[d.reindex[fxid].apply(b) as usize];
                    let rhs = d.reindex[f].apply(q[b as usize]);
                    if lhs != rhs {
                        r.push(
                            Violation::new(kind)
                                .with("f", d.mor_name(f))
                                .with("Y", d.obj_name(y))
                                .with("elem", b),
                        );
                    }
                }
            }
        }
    }
}

/// All universal quantifier tables, stored or forced, for every chosen product.
pub fn universal_tables(d: &FiniteDoctrine) -> BTreeMap<(ObjId, ObjId), Vec<Elem>> {
    d.base
        .products()
        .keys()
        .map(|&(x, y)| ((x, y), d.universal(x, y).expect("product present")))
        .collect()
}

/// Boolean structure plus, for every chosen product, the adjunction laws for the
/// quantifiers and the Beck–Chevalley condition.
pub fn verify_first_order(d: &FiniteDoctrine) -> Report {
    let mut r = verify_boolean_doctrine(d);
    for (&(x, y), t) in &d.forall {
        let forced = forced_universal(d, x, y).expect("product present");
        report_mismatch(d, x, y, t, &forced, "quantifier-mismatch", &mut r);
    }
    for (&(x, y), t) in &d.exists {
        let diag = d.base.product(x, y).expect("product present");
        let h = &d.reindex[diag.pr1];
        let forced: Vec<Elem> = d.fibers[diag.object].elements().map(|b| h.left_adjoint(b)).collect();
        report_mismatch(d, x, y, t, &forced, "exists-quantifier-mismatch", &mut r);
    }
    let forall = universal_tables(d);
    for (&(x, y), q) in &forall {
        check_quantifier(d, x, y, q, true, &mut r);
    }
    check_beck_chevalley(d, &forall, "beck-chevalley", &mut r);
    if !d.exists.is_empty() {
        let exists: BTreeMap<(ObjId, ObjId), Vec<Elem>> = d
            .base
            .products()
            .keys()
            .map(|&(x, y)| ((x, y), d.existential(x, y).expect("product present")))
            .collect();
        for (&(x, y), q) in &exists {
            check_quantifier(d, x, y, q, false, &mut r);
        }
        check_beck_chevalley(d, &exists, "exists-beck-chevalley", &mut r);
    }
    r
}

fn report_mismatch(d: &FiniteDoctrine, x: ObjId, y: ObjId, stored: &[Elem], forced: &[Elem], kind: &str, r: &mut Report) {
    for (b, (u, v)) in stored.iter().zip(forced).enumerate() {
        if u != v {
            r.push(
                Violation::new(kind)
                    .with("X", d.obj_name(x))
                    .with("Y", d.obj_name(y))
                    .with("elem", b),
            );
        }
    }
}

/// Adds existential tables `∃ = ¬∀¬` for every chosen product.
pub fn derive_exists(d: &FiniteDoctrine) -> FiniteDoctrine {
    let mut out = d.clone();
    for (&(x, y), q) in &universal_tables(d) {
        let p = d.fibers[d.base.product(x, y).expect("product present").object];
        let fx = d.fibers[x];
        let table = p.elements().map(|b| fx.neg(q[p.neg(b) as usize])).collect();
        out.exists.insert((x, y), table);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn forced_matches_join_formula() {
        let base = Arc::new(FiniteProductCategory::chain(2));
        // fibers: c0 has 2 atoms, c1 has 1; c0<c1 sends both atoms to the single atom
        let c = &base;
        let mut reindex = vec![BAHom::identity(0); c.num_morphisms()];
        let atoms = [2, 1];
        for f in 0..c.num_morphisms() {
            let m = c.morphism(f);
            reindex[f] = if m.dom == m.cod {
                BAHom::identity(atoms[m.dom])
            } else {
                BAHom::new(1, vec![0, 0])
            };
        }
        let d = FiniteDoctrine::new(base.clone(), atoms.to_vec(), reindex).unwrap();
        for (&(x, y), diag) in c.products() {
            let q = forced_universal(&d, x, y).unwrap();
            let pr1 = d.reindexing(diag.pr1);
            for b in d.fiber(diag.object).elements() {
                let join = d
                    .fiber(x)
                    .elements()
                    .filter(|&a| d.fiber(diag.object).leq(pr1.apply(a), b))
                    .fold(0, |acc, a| acc | a);
                assert_eq!(q[b as usize], join);
            }
        }
        assert!(verify_boolean_doctrine(&d).passed());
    }
}
