//! Fibered equalities.

use std::collections::BTreeMap;

use super::algebra::Elem;
use super::category::ObjId;
use super::finite::FiniteDoctrine;
use super::report::{Report, Violation};

/// A fibered-equality family: one element of `P(X × X)` per object whose square is chosen.
pub type EqualityFamily = BTreeMap<ObjId, Elem>;

fn squares(d: &FiniteDoctrine) -> Vec<ObjId> {
    (0..d.base().num_objects()).filter(|&x| d.base().product(x, x).is_some()).collect()
}

/// Reflexivity, substitutivity and the pairing condition, the adjoint form
/// `Æ ⊣ P(id × Δ)` and symmetry, each checked exhaustively. Conditions whose
/// products are not chosen in the base are skipped.
pub fn verify_elementary(d: &FiniteDoctrine, delta: &EqualityFamily) -> Report {
    let c = d.base();
    let mut r = Report::new();
    for x in squares(d) {
        let Some(&dx) = delta.get(&x) else {
            r.push(Violation::new("missing-equality").with("obj", d.obj_name(x)));
            continue;
        };
        let sq = c.product(x, x).expect("square");
        let (fx, fsq) = (d.fiber(x), d.fiber(sq.object));
        if !fsq.contains(dx) {
            r.push(Violation::new("equality-range").with("obj", d.obj_name(x)));
            continue;
        }
        let diag = c.diagonal(x).expect("square");
        if d.apply(diag, dx) != fx.top() {
            r.push(Violation::new("reflexivity").with("obj", d.obj_name(x)));
        }
        for a in fx.elements() {
            if !fsq.leq(d.apply(sq.pr1, a) & dx, d.apply(sq.pr2, a)) {
                r.push(Violation::new("substitutivity").with("obj", d.obj_name(x)).with("elem", a));
            }
        }
        let swap = c.pair(sq.pr2, sq.pr1).expect("pairing");
        if !fsq.leq(dx, d.apply(swap, dx)) {
            r.push(Violation::new("symmetry").with("obj", d.obj_name(x)));
        }
    }
    for (&(x, y), p) in c.products() {
        let (Some(sx), Some(sy), Some(q)) = (c.product(x, x), c.product(y, y), c.product(p.object, p.object)) else {
            continue;
        };
        let (Some(&dx), Some(&dy), Some(&dp)) = (delta.get(&x), delta.get(&y), delta.get(&p.object)) else {
            continue;
        };
        let pr1 = c.comp(p.pr1, q.pr1);
        let pr2 = c.comp(p.pr2, q.pr1);
        let pr3 = c.comp(p.pr1, q.pr2);
        let pr4 = c.comp(p.pr2, q.pr2);
        let (Some(f13), Some(f24)) = (pair_into(d, pr1, pr3, sx.object), pair_into(d, pr2, pr4, sy.object)) else {
            continue;
        };
        let lhs = d.apply(f13, dx) & d.apply(f24, dy);
        if !d.fiber(q.object).leq(lhs, dp) {
            r.push(
                Violation::new("pairing")
                    .with("X", d.obj_name(x))
                    .with("Y", d.obj_name(y)),
            );
        }
    }
    for (&(y, x), w) in c.products() {
        let (Some(v), Some(sq)) = (c.product(w.object, x), c.product(x, x)) else {
            continue;
        };
        let Some(&dx) = delta.get(&x) else { continue };
        let Some(to_sq) = c.pair(c.comp(w.pr2, v.pr1), v.pr2) else { continue };
        let Some(id_delta) = c.pair(c.identity(w.object), w.pr2) else { continue };
        debug_assert_eq!(c.morphism(to_sq).cod, sq.object);
        let right = d.reindexing(id_delta);
        let marked = d.apply(to_sq, dx);
        for a in d.fiber(w.object).elements() {
            let ae = d.apply(v.pr1, a) & marked;
            if ae != right.left_adjoint(a) {
                r.push(
                    Violation::new("ae-adjoint")
                        .with("Y", d.obj_name(y))
                        .with("X", d.obj_name(x))
                        .with("elem", a),
                );
            }
        }
    }
    r
}

fn pair_into(d: &FiniteDoctrine, f: usize, g: usize, expected: ObjId) -> Option<usize> {
    d.base().pair(f, g).filter(|&h| d.base().morphism(h).cod == expected)
}

/// The outcome of the search for fibered equalities.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EqualitySearch {
    /// For each object with a chosen square, the elements whose principal upset is
    /// `{β : ⊤ ≤ P(Δ)(β)}`.
    pub candidates: BTreeMap<ObjId, Vec<Elem>>,
    /// The candidate family, present iff every object has exactly one candidate and the
    /// family passes [`verify_elementary`].
    pub family: Option<EqualityFamily>,
}

/// Finds the unique family describing the principal upsets `{β : ⊤ ≤ P(Δ_X)(β)}`.
pub fn find_fibered_equalities(d: &FiniteDoctrine) -> EqualitySearch {
    let c = d.base();
    let mut candidates = BTreeMap::new();
    for x in squares(d) {
        let sq = c.product(x, x).expect("square");
        let diag = c.diagonal(x).expect("square");
        let top = d.fiber(x).top();
        let fsq = d.fiber(sq.object);
        let upset: Vec<Elem> = fsq.elements().filter(|&b| d.apply(diag, b) == top).collect();
        let meet = upset.iter().fold(fsq.top(), |acc, &b| acc & b);
        let found: Vec<Elem> = if upset.contains(&meet) && upset.len() as u128 == 1u128 << (fsq.atoms() - meet.count_ones() as usize) {
            vec![meet]
        } else {
            Vec::new()
        };
        candidates.insert(x, found);
    }
    let family: Option<EqualityFamily> = candidates
        .iter()
        .map(|(&x, v)| (v.len() == 1).then(|| (x, v[0])))
        .collect();
    let family = family.filter(|f| verify_elementary(d, f).passed());
    EqualitySearch { candidates, family }
}
