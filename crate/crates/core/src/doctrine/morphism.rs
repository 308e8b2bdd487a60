use super::algebra::{BAHom, Elem};
use super::category::{FiniteProductCategory, MorId, ObjId};
use super::finite::FiniteDoctrine;
use super::report::{Report, Violation};

/// A functor between finite base categories, given on objects and morphisms.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BaseFunctor {
    pub obj: Vec<ObjId>,
    pub mor: Vec<MorId>,
}

impl BaseFunctor {
    pub fn identity(c: &FiniteProductCategory) -> Self {
        Self {
            obj: (0..c.num_objects()).collect(),
            mor: (0..c.num_morphisms()).collect(),
        }
    }

    /// Functor laws and strict preservation of the terminal object and chosen products.
    pub fn verify(&self, c: &FiniteProductCategory, d: &FiniteProductCategory) -> Report {
        let mut r = Report::new();
        if self.obj.len() != c.num_objects() || self.mor.len() != c.num_morphisms() {
            r.push(Violation::new("functor-shape"));
            return r;
        }
        if self.obj.iter().any(|&o| o >= d.num_objects()) || self.mor.iter().any(|&m| m >= d.num_morphisms()) {
            r.push(Violation::new("functor-range"));
            return r;
        }
        for (f, &mf) in self.mor.iter().enumerate() {
            let (a, b) = (c.morphism(f), d.morphism(mf));
            if b.dom != self.obj[a.dom] || b.cod != self.obj[a.cod] {
                r.push(Violation::new("functor-typing").with("f", &a.name));
            }
        }
        if !r.passed() {
            return r;
        }
        for x in 0..c.num_objects() {
            if self.mor[c.identity(x)] != d.identity(self.obj[x]) {
                r.push(Violation::new("functor-identity").with("obj", c.object_name(x)));
            }
        }
        for (&(g, f), &gf) in c.compose_table() {
            if d.try_comp(self.mor[g], self.mor[f]) != Some(self.mor[gf]) {
                r.push(
                    Violation::new("functor-composition")
                        .with("f", &c.morphism(f).name)
                        .with("g", &c.morphism(g).name),
                );
            }
        }
        if self.obj[c.terminal()] != d.terminal() {
            r.push(Violation::new("terminal-preservation"));
        }
        for (&(x, y), diag) in c.products() {
            let ok = d.product(self.obj[x], self.obj[y]).is_some_and(|e| {
                e.object == self.obj[diag.object] && e.pr1 == self.mor[diag.pr1] && e.pr2 == self.mor[diag.pr2]
            });
            if !ok {
                r.push(
                    Violation::new("product-preservation")
                        .with("X", c.object_name(x))
                        .with("Y", c.object_name(y)),
                );
            }
        }
        r
    }
}

/// A morphism of doctrines: a base functor and one fiber map per source object,
/// each given as a table over all elements of the source fiber.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DoctrineMorphism {
    pub functor: BaseFunctor,
    pub components: Vec<Vec<Elem>>,
}

impl DoctrineMorphism {
    pub fn from_homs(functor: BaseFunctor, homs: &[BAHom]) -> Self {
        let components = homs
            .iter()
            .map(|h| (0..1u64 << h.source_atoms).map(|e| h.apply(e)).collect())
            .collect();
        Self { functor, components }
    }

    pub fn apply(&self, x: ObjId, e: Elem) -> Elem {
        self.components[x][e as usize]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Level {
    Boolean,
    FirstOrder,
    Elementary,
}

/// Checks a doctrine morphism at the requested level.
pub fn verify_morphism(src: &FiniteDoctrine, tgt: &FiniteDoctrine, m: &DoctrineMorphism, level: Level) -> Report {
    let (c, d) = (src.base(), tgt.base());
    let mut r = m.functor.verify(c, d);
    if r.has_kind("functor-shape") || r.has_kind("functor-range") || r.has_kind("functor-typing") {
        return r;
    }
    if m.components.len() != c.num_objects() {
        r.push(Violation::new("component-count"));
        return r;
    }
    for x in 0..c.num_objects() {
        let (fs, ft) = (src.fiber(x), tgt.fiber(m.functor.obj[x]));
        let comp = &m.components[x];
        if comp.len() as u128 != fs.size() || comp.iter().any(|&e| !ft.contains(e)) {
            r.push(Violation::new("component-shape").with("obj", src.obj_name(x)));
            continue;
        }
        let singles: Vec<Elem> = (0..fs.atoms()).map(|a| comp[1 << a]).collect();
        let mut bad = None;
        if singles.iter().fold(0, |acc, s| acc | s) != ft.top() {
            bad = Some(fs.top());
        }
        for i in 0..singles.len() {
            for j in i + 1..singles.len() {
                if singles[i] & singles[j] != 0 && bad.is_none() {
                    bad = Some(1 << i | 1 << j);
                }
            }
        }
        if bad.is_none() {
            bad = fs.elements().find(|&e| {
                let join = (0..fs.atoms()).filter(|a| e >> a & 1 == 1).fold(0, |acc, a| acc | singles[a]);
                comp[e as usize] != join
            });
        }
        if let Some(e) = bad {
            r.push(Violation::new("not-homomorphism").with("obj", src.obj_name(x)).with("elem", e));
        }
    }
    for f in 0..c.num_morphisms() {
        let mf = c.morphism(f);
        for g in src.fiber(mf.cod).elements() {
            let lhs = m.apply(mf.dom, src.apply(f, g));
            let rhs = tgt.apply(m.functor.mor[f], m.apply(mf.cod, g));
            if lhs != rhs {
                r.push(Violation::new("naturality").with("f", &mf.name).with("elem", g));
            }
        }
    }
    if level >= Level::FirstOrder {
        for (&(x, y), diag) in c.products() {
            let (Some(qs), Some(qt)) = (src.universal(x, y), tgt.universal(m.functor.obj[x], m.functor.obj[y])) else {
                continue;
            };
            for b in src.fiber(diag.object).elements() {
                if m.apply(x, qs[b as usize]) != qt[m.apply(diag.object, b) as usize] {
                    r.push(
                        Violation::new("quantifier-preservation")
                            .with("X", src.obj_name(x))
                            .with("Y", src.obj_name(y))
                            .with("elem", b),
                    );
                }
            }
        }
    }
    if level >= Level::Elementary {
        for (&x, &dx) in src.delta() {
            let Some(diag) = c.product(x, x) else { continue };
            match tgt.delta().get(&m.functor.obj[x]) {
                Some(&dt) if m.apply(diag.object, dx) == dt => {}
                _ => r.push(Violation::new("equality-preservation").with("obj", src.obj_name(x))),
            }
        }
    }
    r
}
