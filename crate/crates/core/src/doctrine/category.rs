//! Finite categories presented by tables, with a terminal object and chosen products.

use std::collections::{BTreeMap, HashMap};

use super::DoctrineError;

pub type ObjId = usize;
pub type MorId = usize;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Morphism {
    pub name: String,
    pub dom: ObjId,
    pub cod: ObjId,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ProductDiagram {
    pub object: ObjId,
    pub pr1: MorId,
    pub pr2: MorId,
}

/// A finite category with a terminal object and chosen binary products for the listed pairs.
///
/// Products may be missing for some pairs: every verifier quantifies over the diagrams that
/// are present.
#[derive(Debug, Clone)]
pub struct FiniteProductCategory {
    objects: Vec<String>,
    morphisms: Vec<Morphism>,
    identities: Vec<MorId>,
    compose: HashMap<(MorId, MorId), MorId>,
    terminal: ObjId,
    products: BTreeMap<(ObjId, ObjId), ProductDiagram>,
    homs: Vec<Vec<Vec<MorId>>>,
    pairing: HashMap<(MorId, MorId), MorId>,
}

fn malformed(msg: impl Into<String>) -> DoctrineError {
    DoctrineError::MalformedCategory(msg.into())
}

impl FiniteProductCategory {
    /// Builds the category and checks identities, terminality and the product property.
    /// Associativity is checked separately by [`FiniteProductCategory::verify_associativity`].
    pub fn new(
        objects: Vec<String>,
        morphisms: Vec<Morphism>,
        identities: Vec<MorId>,
        compose: HashMap<(MorId, MorId), MorId>,
        terminal: ObjId,
        products: BTreeMap<(ObjId, ObjId), ProductDiagram>,
    ) -> Result<Self, DoctrineError> {
        let n = objects.len();
        if identities.len() != n {
            return Err(malformed("one identity per object required"));
        }
        if terminal >= n {
            return Err(malformed("terminal object out of range"));
        }
        let mut homs = vec![vec![Vec::new(); n]; n];
        for (i, m) in morphisms.iter().enumerate() {
            if m.dom >= n || m.cod >= n {
                return Err(malformed(format!("morphism {} has an unknown endpoint", m.name)));
            }
            homs[m.dom][m.cod].push(i);
        }
        let mut cat = Self {
            objects,
            morphisms,
            identities,
            compose,
            terminal,
            products,
            homs,
            pairing: HashMap::new(),
        };
        for (x, &id) in cat.identities.iter().enumerate() {
            let m = cat.morphisms.get(id).ok_or_else(|| malformed("identity out of range"))?;
            if m.dom != x || m.cod != x {
                return Err(malformed(format!("identity of {} has wrong type", cat.objects[x])));
            }
        }
        for g in 0..cat.morphisms.len() {
            for &f in &cat.homs_into(cat.morphisms[g].dom) {
                let h = cat
                    .compose
                    .get(&(g, f))
                    .copied()
                    .ok_or_else(|| malformed(format!("missing composite {} ∘ {}", cat.morphisms[g].name, cat.morphisms[f].name)))?;
                let hm = &cat.morphisms[h];
                if hm.dom != cat.morphisms[f].dom || hm.cod != cat.morphisms[g].cod {
                    return Err(malformed("composite has wrong type"));
                }
            }
            let (d, c) = (cat.morphisms[g].dom, cat.morphisms[g].cod);
            if cat.comp(g, cat.identities[d]) != g || cat.comp(cat.identities[c], g) != g {
                return Err(malformed(format!("identity law fails at {}", cat.morphisms[g].name)));
            }
        }
        for x in 0..n {
            if cat.homs[x][terminal].len() != 1 {
                return Err(malformed(format!("{} has no unique map to the terminal", cat.objects[x])));
            }
        }
        let diagrams: Vec<((ObjId, ObjId), ProductDiagram)> = cat.products.iter().map(|(k, v)| (*k, *v)).collect();
        for ((x, y), d) in diagrams {
            let (p1, p2) = (&cat.morphisms[d.pr1], &cat.morphisms[d.pr2]);
            if p1.dom != d.object || p2.dom != d.object || p1.cod != x || p2.cod != y {
                return Err(malformed(format!("projections of {} × {} have wrong type", cat.objects[x], cat.objects[y])));
            }
            for z in 0..n {
                let mut seen = HashMap::new();
                for &h in &cat.homs[z][d.object] {
                    let key = (cat.comp(d.pr1, h), cat.comp(d.pr2, h));
                    if seen.insert(key, h).is_some() {
                        return Err(malformed(format!("pairing into {} × {} is not unique", cat.objects[x], cat.objects[y])));
                    }
                }
                if seen.len() != cat.homs[z][x].len() * cat.homs[z][y].len() {
                    return Err(malformed(format!("pairing into {} × {} does not exist for all pairs", cat.objects[x], cat.objects[y])));
                }
                cat.pairing.extend(seen);
            }
        }
        Ok(cat)
    }

    /// A finite meet-semilattice with top, as a thin category. `leq` lists generating
    /// inequalities; the order is their reflexive-transitive closure.
    pub fn semilattice(names: &[&str], leq: &[(usize, usize)]) -> Result<Self, DoctrineError> {
        let n = names.len();
        let mut le = vec![vec![false; n]; n];
        for (i, row) in le.iter_mut().enumerate() {
            row[i] = true;
        }
        for &(a, b) in leq {
            le[a][b] = true;
        }
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    if le[i][k] && le[k][j] {
                        le[i][j] = true;
                    }
                }
            }
        }
        for i in 0..n {
            for j in 0..n {
                if i != j && le[i][j] && le[j][i] {
                    return Err(malformed("order is not antisymmetric"));
                }
            }
        }
        let top = (0..n)
            .find(|&t| (0..n).all(|x| le[x][t]))
            .ok_or_else(|| malformed("no top element"))?;
        let mut morphisms = Vec::new();
        let mut id_of = HashMap::new();
        for i in 0..n {
            for j in 0..n {
                if le[i][j] {
                    id_of.insert((i, j), morphisms.len());
                    morphisms.push(Morphism {
                        name: if i == j {
                            format!("id_{}", names[i])
                        } else {
                            format!("{}<{}", names[i], names[j])
                        },
                        dom: i,
                        cod: j,
                    });
                }
            }
        }
        let mut compose = HashMap::new();
        for (&(a, b), &f) in &id_of {
            for c in 0..n {
                if let Some(&g) = id_of.get(&(b, c)) {
                    compose.insert((g, f), id_of[&(a, c)]);
                }
            }
        }
        let mut products = BTreeMap::new();
        for x in 0..n {
            for y in 0..n {
                let lower: Vec<usize> = (0..n).filter(|&z| le[z][x] && le[z][y]).collect();
                let meet = lower
                    .iter()
                    .copied()
                    .find(|&m| lower.iter().all(|&z| le[z][m]))
                    .ok_or_else(|| malformed(format!("no meet of {} and {}", names[x], names[y])))?;
                products.insert(
                    (x, y),
                    ProductDiagram {
                        object: meet,
                        pr1: id_of[&(meet, x)],
                        pr2: id_of[&(meet, y)],
                    },
                );
            }
        }
        let identities = (0..n).map(|i| id_of[&(i, i)]).collect();
        Self::new(
            names.iter().map(|s| s.to_string()).collect(),
            morphisms,
            identities,
            compose,
            top,
            products,
        )
    }

    /// The chain `c0 < c1 < ... < c(n-1)`, top `c(n-1)`.
    pub fn chain(n: usize) -> Self {
        let names: Vec<String> = (0..n).map(|i| format!("c{i}")).collect();
        let refs: Vec<&str> = names.iter().map(String::as_str).collect();
        let leq: Vec<(usize, usize)> = (1..n).map(|i| (i - 1, i)).collect();
        Self::semilattice(&refs, &leq).expect("chains are semilattices")
    }

    /// Finite sets of the given distinct cardinalities with all functions between them.
    /// A product is chosen for `(A, B)` whenever a set of cardinality `|A|·|B|` is listed,
    /// with `(a, b)` encoded as `a·|B| + b`. Returns the category and each morphism's
    /// function table.
    pub fn finite_sets(cards: &[usize]) -> Result<(Self, Vec<Vec<usize>>), DoctrineError> {
        let n = cards.len();
        for i in 0..n {
            if cards[..i].contains(&cards[i]) {
                return Err(malformed("cardinalities must be distinct"));
            }
        }
        let terminal = cards
            .iter()
            .position(|&c| c == 1)
            .ok_or_else(|| malformed("a one-element set is required"))?;
        let mut morphisms = Vec::new();
        let mut tables: Vec<Vec<usize>> = Vec::new();
        let mut index: HashMap<(usize, usize, Vec<usize>), MorId> = HashMap::new();
        for (a, &ca) in cards.iter().enumerate() {
            for (b, &cb) in cards.iter().enumerate() {
                let count = (cb as u128).checked_pow(ca as u32).unwrap_or(u128::MAX);
                if count > 100_000 {
                    return Err(malformed("hom-set too large"));
                }
                for code in 0..count as usize {
                    let mut f = Vec::with_capacity(ca);
                    let mut c = code;
                    for _ in 0..ca {
                        f.push(c % cb.max(1));
                        c /= cb.max(1);
                    }
                    let id = morphisms.len();
                    morphisms.push(Morphism {
                        name: format!("{ca}>{cb}:{}", f.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",")),
                        dom: a,
                        cod: b,
                    });
                    index.insert((a, b, f.clone()), id);
                    tables.push(f);
                }
            }
        }
        let mut compose = HashMap::new();
        for (f, mf) in morphisms.iter().enumerate() {
            for (g, mg) in morphisms.iter().enumerate() {
                if mg.dom == mf.cod {
                    let h: Vec<usize> = tables[f].iter().map(|&v| tables[g][v]).collect();
                    compose.insert((g, f), index[&(mf.dom, mg.cod, h)]);
                }
            }
        }
        let mut products = BTreeMap::new();
        for (a, &ca) in cards.iter().enumerate() {
            for (b, &cb) in cards.iter().enumerate() {
                if let Some(p) = cards.iter().position(|&c| c == ca * cb) {
                    let pr1: Vec<usize> = (0..ca * cb).map(|v| v / cb).collect();
                    let pr2: Vec<usize> = (0..ca * cb).map(|v| v % cb).collect();
                    products.insert(
                        (a, b),
                        ProductDiagram {
                            object: p,
                            pr1: index[&(p, a, pr1)],
                            pr2: index[&(p, b, pr2)],
                        },
                    );
                }
            }
        }
        let identities = (0..n)
            .map(|a| index[&(a, a, (0..cards[a]).collect::<Vec<_>>())])
            .collect();
        let names = cards.iter().map(|c| c.to_string()).collect();
        let cat = Self::new(names, morphisms, identities, compose, terminal, products)?;
        Ok((cat, tables))
    }

    /// Variable contexts `0, 1, ..., n`: a morphism `a -> b` is a map `{0..b} -> {0..a}`
    /// choosing, for each target variable, a source variable. The product of `a` and `b` is
    /// `a + b` when at most `n`, with the first factor's variables first. Returns the
    /// category and each morphism's variable map.
    pub fn variable_contexts(n: usize) -> Result<(Self, Vec<Vec<usize>>), DoctrineError> {
        let mut morphisms = Vec::new();
        let mut maps: Vec<Vec<usize>> = Vec::new();
        let mut index: HashMap<(usize, usize, Vec<usize>), MorId> = HashMap::new();
        for a in 0..=n {
            for b in 0..=n {
                let count = (a as u128).checked_pow(b as u32).unwrap_or(u128::MAX);
                if count > 100_000 {
                    return Err(malformed("hom-set too large"));
                }
                for code in 0..count as usize {
                    let mut m = Vec::with_capacity(b);
                    let mut c = code;
                    for _ in 0..b {
                        m.push(c % a);
                        c /= a;
                    }
                    m.reverse();
                    let id = morphisms.len();
                    morphisms.push(Morphism {
                        name: format!("{a}>{b}:{}", m.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",")),
                        dom: a,
                        cod: b,
                    });
                    index.insert((a, b, m.clone()), id);
                    maps.push(m);
                }
            }
        }
        let mut compose = HashMap::new();
        for (f, mf) in morphisms.iter().enumerate() {
            for (g, mg) in morphisms.iter().enumerate() {
                if mg.dom == mf.cod {
                    let h: Vec<usize> = maps[g].iter().map(|&v| maps[f][v]).collect();
                    compose.insert((g, f), index[&(mf.dom, mg.cod, h)]);
                }
            }
        }
        let mut products = BTreeMap::new();
        for a in 0..=n {
            for b in 0..=n - a {
                let p = a + b;
                products.insert(
                    (a, b),
                    ProductDiagram {
                        object: p,
                        pr1: index[&(p, a, (0..a).collect())],
                        pr2: index[&(p, b, (a..p).collect())],
                    },
                );
            }
        }
        let identities = (0..=n).map(|a| index[&(a, a, (0..a).collect::<Vec<_>>())]).collect();
        let names = (0..=n).map(|a| a.to_string()).collect();
        let cat = Self::new(names, morphisms, identities, compose, 0, products)?;
        Ok((cat, maps))
    }

    pub fn num_objects(&self) -> usize {
        self.objects.len()
    }

    pub fn num_morphisms(&self) -> usize {
        self.morphisms.len()
    }

    pub fn object_name(&self, x: ObjId) -> &str {
        &self.objects[x]
    }

    pub fn object_by_name(&self, name: &str) -> Option<ObjId> {
        self.objects.iter().position(|o| o == name)
    }

    pub fn morphism(&self, f: MorId) -> &Morphism {
        &self.morphisms[f]
    }

    pub fn morphism_by_name(&self, name: &str) -> Option<MorId> {
        self.morphisms.iter().position(|m| m.name == name)
    }

    pub fn morphisms(&self) -> &[Morphism] {
        &self.morphisms
    }

    pub fn object_names(&self) -> &[String] {
        &self.objects
    }

    pub fn identity(&self, x: ObjId) -> MorId {
        self.identities[x]
    }

    pub fn terminal(&self) -> ObjId {
        self.terminal
    }

    pub fn to_terminal(&self, x: ObjId) -> MorId {
        self.homs[x][self.terminal][0]
    }

    pub fn hom(&self, x: ObjId, y: ObjId) -> &[MorId] {
        &self.homs[x][y]
    }

    fn homs_into(&self, y: ObjId) -> Vec<MorId> {
        (0..self.objects.len()).flat_map(|x| self.homs[x][y].iter().copied()).collect()
    }

    /// `g ∘ f`.
    pub fn comp(&self, g: MorId, f: MorId) -> MorId {
        self.compose[&(g, f)]
    }

    pub fn try_comp(&self, g: MorId, f: MorId) -> Option<MorId> {
        self.compose.get(&(g, f)).copied()
    }

    pub fn compose_table(&self) -> &HashMap<(MorId, MorId), MorId> {
        &self.compose
    }

    pub fn product(&self, x: ObjId, y: ObjId) -> Option<ProductDiagram> {
        self.products.get(&(x, y)).copied()
    }

    pub fn products(&self) -> &BTreeMap<(ObjId, ObjId), ProductDiagram> {
        &self.products
    }

    /// `⟨f, g⟩` into the chosen product of the codomains.
    pub fn pair(&self, f: MorId, g: MorId) -> Option<MorId> {
        self.pairing.get(&(f, g)).copied()
    }

    /// `f × g : A × B -> C × D` for chosen products.
    pub fn product_map(&self, f: MorId, g: MorId) -> Option<MorId> {
        let (mf, mg) = (&self.morphisms[f], &self.morphisms[g]);
        let src = self.product(mf.dom, mg.dom)?;
        self.product(mf.cod, mg.cod)?;
        self.pair(self.comp(f, src.pr1), self.comp(g, src.pr2))
    }

    /// The diagonal `⟨id, id⟩ : X -> X × X`.
    pub fn diagonal(&self, x: ObjId) -> Option<MorId> {
        self.pair(self.identities[x], self.identities[x])
    }

    pub fn is_thin(&self) -> bool {
        self.homs.iter().all(|row| row.iter().all(|h| h.len() <= 1))
    }

    /// Exhaustive associativity check; returns the first failing triple.
    pub fn verify_associativity(&self) -> Result<(), (MorId, MorId, MorId)> {
        for f in 0..self.morphisms.len() {
            let b = self.morphisms[f].cod;
            for c in 0..self.objects.len() {
                for &g in &self.homs[b][c] {
                    let gf = self.comp(g, f);
                    for d in 0..self.objects.len() {
                        for &h in &self.homs[c][d] {
                            if self.comp(h, gf) != self.comp(self.comp(h, g), f) {
                                return Err((h, g, f));
                            }
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chain_products_are_meets() {
        let c = FiniteProductCategory::chain(3);
        assert_eq!(c.terminal(), 2);
        assert_eq!(c.product(0, 2).unwrap().object, 0);
        assert_eq!(c.product(1, 1).unwrap().object, 1);
        assert!(c.is_thin());
        c.verify_associativity().unwrap();
    }

    #[test]
    fn finite_sets_partial_products() {
        let (c, tables) = FiniteProductCategory::finite_sets(&[0, 1, 2, 4]).unwrap();
        assert_eq!(c.hom(3, 3).len(), 256);
        assert_eq!(c.hom(0, 2).len(), 1);
        assert_eq!(c.hom(2, 0).len(), 0);
        assert_eq!(c.product(2, 2).unwrap().object, 3);
        assert!(c.product(2, 3).is_none());
        let d = c.diagonal(2).unwrap();
        assert_eq!(tables[d], vec![0, 3]);
        let (small, _) = FiniteProductCategory::finite_sets(&[0, 1]).unwrap();
        small.verify_associativity().unwrap();
        assert!(FiniteProductCategory::finite_sets(&[0, 2]).is_err());
    }

    #[test]
    fn semilattice_without_meet_rejected() {
        // two incomparable elements below a top with no common lower bound
        assert!(FiniteProductCategory::semilattice(&["a", "b", "t"], &[(0, 2), (1, 2)]).is_err());
    }
}
