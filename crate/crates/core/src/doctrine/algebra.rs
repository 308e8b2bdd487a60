//! Finite powerset Boolean algebras as bitsets, homomorphisms between them given by
//! atom maps, and Boolean subalgebras given by atom partitions.

use std::collections::BTreeSet;

use itertools::Itertools;

/// An element of a finite powerset algebra: a set of atoms as a bitmask.
pub type Elem = u64;

/// Largest atom count whose elements are enumerated or tabulated.
pub const MAX_TABULATED_ATOMS: usize = 24;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FiniteBooleanAlgebra {
    atoms: usize,
}

impl FiniteBooleanAlgebra {
    pub fn new(atoms: usize) -> Self {
        assert!(atoms <= 64, "at most 64 atoms");
        Self { atoms }
    }

    /// The algebra with `size` elements, if `size` is a power of two.
    pub fn with_size(size: usize) -> Option<Self> {
        (size.is_power_of_two()).then(|| Self::new(size.trailing_zeros() as usize))
    }

    pub fn atoms(&self) -> usize {
        self.atoms
    }

    pub fn size(&self) -> u128 {
        1u128 << self.atoms
    }

    pub fn top(&self) -> Elem {
        if self.atoms == 64 {
            u64::MAX
        } else {
            (1u64 << self.atoms) - 1
        }
    }

    pub fn bot(&self) -> Elem {
        0
    }

    pub fn meet(&self, a: Elem, b: Elem) -> Elem {
        a & b
    }

    pub fn join(&self, a: Elem, b: Elem) -> Elem {
        a | b
    }

    pub fn neg(&self, a: Elem) -> Elem {
        !a & self.top()
    }

    pub fn leq(&self, a: Elem, b: Elem) -> bool {
        a & !b == 0
    }

    pub fn contains(&self, a: Elem) -> bool {
        a & !self.top() == 0
    }

    /// All elements in increasing numeric order.
    pub fn elements(&self) -> impl Iterator<Item = Elem> {
        assert!(self.atoms <= MAX_TABULATED_ATOMS, "fiber too large to enumerate");
        0..(1u64 << self.atoms)
    }
}

/// The homomorphism `P(source) -> P(target)` induced by a map `atoms(target) -> atoms(source)`:
/// an element is sent to the preimage of its atoms.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BAHom {
    pub source_atoms: usize,
    pub atom_map: Vec<usize>,
}

impl BAHom {
    pub fn new(source_atoms: usize, atom_map: Vec<usize>) -> Self {
        Self {
            source_atoms,
            atom_map,
        }
    }

    pub fn identity(atoms: usize) -> Self {
        Self::new(atoms, (0..atoms).collect())
    }

    pub fn target_atoms(&self) -> usize {
        self.atom_map.len()
    }

    pub fn is_valid(&self) -> bool {
        self.atom_map.iter().all(|&a| a < self.source_atoms)
    }

    pub fn apply(&self, e: Elem) -> Elem {
        let mut out = 0;
        for (t, &s) in self.atom_map.iter().enumerate() {
            if e >> s & 1 == 1 {
                out |= 1 << t;
            }
        }
        out
    }

    /// `self ∘ first`.
    pub fn after(&self, first: &BAHom) -> BAHom {
        BAHom::new(
            first.source_atoms,
            self.atom_map.iter().map(|&a| first.atom_map[a]).collect(),
        )
    }

    pub fn is_injective(&self) -> bool {
        let hit: BTreeSet<usize> = self.atom_map.iter().copied().collect();
        hit.len() == self.source_atoms
    }

    pub fn is_surjective(&self) -> bool {
        let hit: BTreeSet<usize> = self.atom_map.iter().copied().collect();
        hit.len() == self.atom_map.len()
    }

    /// The right adjoint: `∀(b) = {s : every target atom over s lies in b}`.
    pub fn right_adjoint(&self, b: Elem) -> Elem {
        let mut out = (1u64 << self.source_atoms).wrapping_sub(1);
        if self.source_atoms == 64 {
            out = u64::MAX;
        }
        for (t, &s) in self.atom_map.iter().enumerate() {
            if b >> t & 1 == 0 {
                out &= !(1 << s);
            }
        }
        out
    }

    /// The left adjoint: `∃(b) = {s : some target atom over s lies in b}`.
    pub fn left_adjoint(&self, b: Elem) -> Elem {
        let mut out = 0;
        for (t, &s) in self.atom_map.iter().enumerate() {
            if b >> t & 1 == 1 {
                out |= 1 << s;
            }
        }
        out
    }
}

/// The homomorphisms `P(source) -> P(target)` closest to an arbitrary element table, measured
/// by the number of elements on which they disagree with it. Returns the closest
/// homomorphisms (ties included, at most a few thousand) and their distance.
pub fn nearest_homs(source_atoms: usize, target_atoms: usize, table: &[Elem]) -> Option<(Vec<BAHom>, usize)> {
    if source_atoms == 0 && target_atoms > 0 {
        return None;
    }
    let per_atom: Vec<Vec<usize>> = (0..target_atoms)
        .map(|t| {
            let agree: Vec<usize> = (0..source_atoms)
                .map(|s| {
                    table
                        .iter()
                        .enumerate()
                        .filter(|&(e, &v)| (e >> s & 1) as u64 == v >> t & 1)
                        .count()
                })
                .collect();
            let best = agree.iter().copied().max().unwrap_or(0);
            (0..source_atoms).filter(|&s| agree[s] == best).collect()
        })
        .collect();
    let mut best: Option<(Vec<BAHom>, usize)> = None;
    let mut combos = 0usize;
    for choice in choices(per_atom) {
        combos += 1;
        if combos > 4096 {
            break;
        }
        let h = BAHom::new(source_atoms, choice);
        let dist = table.iter().enumerate().filter(|&(e, &v)| h.apply(e as Elem) != v).count();
        match &mut best {
            Some((hs, d)) if dist == *d => hs.push(h),
            Some((_, d)) if dist > *d => {}
            _ => best = Some((vec![h], dist)),
        }
    }
    best
}

fn choices(per_atom: Vec<Vec<usize>>) -> Box<dyn Iterator<Item = Vec<usize>>> {
    if per_atom.is_empty() {
        Box::new(std::iter::once(Vec::new()))
    } else {
        Box::new(per_atom.into_iter().map(Vec::into_iter).multi_cartesian_product())
    }
}

/// A Boolean subalgebra of a powerset algebra, presented by the partition of atoms into blocks.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SubAlgebra {
    atoms: usize,
    blocks: Vec<Elem>,
}

impl SubAlgebra {
    /// The subalgebra generated by `gens`.
    pub fn generated(atoms: usize, gens: impl IntoIterator<Item = Elem>) -> Self {
        let full = FiniteBooleanAlgebra::new(atoms).top();
        let mut blocks: Vec<Elem> = if atoms == 0 { vec![] } else { vec![full] };
        for g in gens {
            blocks = blocks
                .into_iter()
                .flat_map(|b| [b & g, b & !g])
                .filter(|&b| b != 0)
                .collect();
        }
        blocks.sort_by_key(|b| b.trailing_zeros());
        Self { atoms, blocks }
    }

    pub fn full(atoms: usize) -> Self {
        Self {
            atoms,
            blocks: (0..atoms).map(|a| 1u64 << a).collect(),
        }
    }

    pub fn trivial(atoms: usize) -> Self {
        Self::generated(atoms, [])
    }

    pub fn atoms(&self) -> usize {
        self.atoms
    }

    /// Blocks sorted by least atom.
    pub fn blocks(&self) -> &[Elem] {
        &self.blocks
    }

    pub fn len(&self) -> u128 {
        1u128 << self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn is_full(&self) -> bool {
        self.blocks.len() == self.atoms
    }

    pub fn contains(&self, e: Elem) -> bool {
        self.blocks.iter().all(|&b| b & e == 0 || b & e == b)
    }

    pub fn is_subalgebra_of(&self, other: &SubAlgebra) -> bool {
        self.blocks.iter().all(|&b| other.contains(b))
    }

    /// Elements in increasing order of their block index set.
    pub fn elements(&self) -> impl Iterator<Item = Elem> + '_ {
        assert!(self.blocks.len() <= MAX_TABULATED_ATOMS, "subalgebra too large to enumerate");
        (0..(1u64 << self.blocks.len())).map(move |mask| self.from_block_mask(mask))
    }

    pub fn from_block_mask(&self, mask: u64) -> Elem {
        let mut e = 0;
        for (i, b) in self.blocks.iter().enumerate() {
            if mask >> i & 1 == 1 {
                e |= b;
            }
        }
        e
    }

    /// Block mask of an element of the subalgebra.
    pub fn to_block_mask(&self, e: Elem) -> u64 {
        let mut m = 0;
        for (i, b) in self.blocks.iter().enumerate() {
            if b & e != 0 {
                m |= 1 << i;
            }
        }
        m
    }

    /// Join of those blocks lying below `e`.
    pub fn interior(&self, e: Elem) -> Elem {
        self.blocks.iter().filter(|&&b| b & !e == 0).fold(0, |acc, b| acc | b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hom_and_adjoints() {
        // atoms of the target {0,1,2} sent to source atoms {0,0,1}
        let h = BAHom::new(2, vec![0, 0, 1]);
        assert_eq!(h.apply(0b01), 0b011);
        assert_eq!(h.apply(0b10), 0b100);
        assert_eq!(h.right_adjoint(0b011), 0b01);
        assert_eq!(h.right_adjoint(0b001), 0b00);
        assert_eq!(h.left_adjoint(0b001), 0b01);
        let ba = FiniteBooleanAlgebra::new(2);
        let tb = FiniteBooleanAlgebra::new(3);
        for a in ba.elements() {
            for b in tb.elements() {
                assert_eq!(tb.leq(h.apply(a), b), ba.leq(a, h.right_adjoint(b)));
                assert_eq!(ba.leq(h.left_adjoint(b), a), tb.leq(b, h.apply(a)));
            }
        }
    }

    #[test]
    fn generated_subalgebra() {
        let s = SubAlgebra::generated(4, [0b0011]);
        assert_eq!(s.blocks(), &[0b0011, 0b1100]);
        assert!(s.contains(0b1100));
        assert!(!s.contains(0b0001));
        assert_eq!(s.elements().collect::<Vec<_>>(), vec![0, 0b0011, 0b1100, 0b1111]);
        assert_eq!(SubAlgebra::trivial(0).len(), 1);
        assert!(SubAlgebra::full(3).is_full());
    }
}
