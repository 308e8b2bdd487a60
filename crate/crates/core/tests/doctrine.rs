use std::collections::BTreeSet;
use std::sync::Arc;

use doctrina::doctrine::constructions::{
    chain_doctrine, change_of_base, embedding_morphism, hbx_doctrine, injective_by_identity, product_doctrine,
    quotient_by_filter, subset_doctrine,
};
use doctrina::doctrine::finite::{derive_exists, forced_universal};
use doctrina::doctrine::fragment::{full_marking, marking_of, subdoctrine, to_sub};
use doctrina::doctrine::*;
use itertools::Itertools;
use proptest::prelude::*;

fn obj(d: &FiniteDoctrine, name: &str) -> ObjId {
    d.base().object_by_name(name).unwrap()
}

fn mor(d: &FiniteDoctrine, name: &str) -> MorId {
    d.base().morphism_by_name(name).unwrap()
}

/// Brute force: all quantifier-free subalgebra markings of a doctrine.
fn all_subalgebra_markings(d: &FiniteDoctrine) -> Vec<Vec<SubAlgebra>> {
    let per_obj: Vec<Vec<SubAlgebra>> = (0..d.base().num_objects())
        .map(|x| {
            let f = d.fiber(x);
            let mut seen = BTreeSet::new();
            for gens in f.elements().powerset() {
                seen.insert(SubAlgebra::generated(f.atoms(), gens));
            }
            seen.into_iter().collect()
        })
        .collect();
    per_obj.into_iter().multi_cartesian_product().collect()
}

#[test]
fn subset_over_empty_and_point() {
    let d = subset_doctrine(&[0, 1]).unwrap();
    let (e, one) = (obj(&d, "0"), obj(&d, "1"));
    assert_eq!(d.fiber(e).size(), 1);
    assert_eq!(d.fiber(one).size(), 2);
    let f = mor(&d, "0>1:");
    assert_eq!(d.apply(f, 0), 0);
    assert_eq!(d.apply(f, 1), 0);
    assert!(verify_boolean_doctrine(&d).passed());
    assert!(verify_first_order(&d).passed());
    assert!(verify_first_order(&derive_exists(&d)).passed());
}

#[test]
fn forced_universal_on_subsets() {
    let d = subset_doctrine(&[0, 1, 2, 4]).unwrap();
    let (e, one, two) = (obj(&d, "0"), obj(&d, "1"), obj(&d, "2"));
    for x in [e, one, two] {
        for y in [one, two] {
            let Some(q) = forced_universal(&d, x, y) else { continue };
            let p = d.base().product(x, y).unwrap().object;
            assert_eq!(q[0], 0);
            assert_eq!(q[d.fiber(p).top() as usize], d.fiber(x).top());
        }
        let q = forced_universal(&d, x, e).unwrap();
        assert_eq!(q[0], d.fiber(x).top());
    }
}

#[test]
fn exists_is_direct_image() {
    let d = subset_doctrine(&[0, 1, 2, 4]).unwrap();
    for (&(x, y), p) in d.base().products() {
        let ex = derive_exists(&d).existential(x, y).unwrap();
        let cy = d.fiber(y).atoms();
        for b in d.fiber(p.object).elements() {
            let image = (0..d.fiber(p.object).atoms())
                .filter(|&i| b >> i & 1 == 1)
                .fold(0u64, |acc, i| acc | 1 << (i / cy.max(1)));
            assert_eq!(ex[b as usize], image);
        }
    }
    let d = derive_exists(&subset_doctrine(&[0, 1]).unwrap());
    for (&(x, y), p) in d.base().products() {
        let ex = d.existential(x, y).unwrap();
        for a in d.fiber(p.object).elements() {
            for g in d.fiber(x).elements() {
                let lhs = d.fiber(p.object).leq(a, d.apply(p.pr1, g));
                assert_eq!(lhs, d.fiber(x).leq(ex[a as usize], g));
            }
        }
    }
}

#[test]
fn corrupted_reindexing_reported_exactly() {
    let mut d = subset_doctrine(&[0, 1, 2, 4]).unwrap();
    let f = mor(&d, "4>4:1,0,3,3");
    let good = d.apply(f, 0b0101);
    d.set_reindex_value(f, 0b0101, good ^ 0b1000).unwrap();
    let r = verify_boolean_doctrine(&d);
    let lines: Vec<String> = r.violations().iter().map(|v| v.to_string()).collect();
    assert_eq!(lines, vec!["VIOLATION not-homomorphism f=4>4:1,0,3,3 elem=5"]);
}

#[test]
fn identity_quantifier_breaks_adjunction() {
    let mut d = subset_doctrine(&[0, 1, 2, 4]).unwrap();
    let two = obj(&d, "2");
    let q: Vec<Elem> = d.fiber(obj(&d, "4")).elements().map(|b| b & 0b11).collect();
    let p = d.base().product(two, two).unwrap().object;
    assert_eq!(q.len() as u128, d.fiber(p).size());
    d.set_forall(two, two, q).unwrap();
    let r = verify_first_order(&d);
    assert!(r.has_kind("unit") || r.has_kind("counit"));
}

#[test]
fn hbx_instances() {
    let base = Arc::new(FiniteProductCategory::chain(1));
    let d = hbx_doctrine(base, 0, 2).unwrap();
    assert_eq!(d.fiber(0).size(), 4);
    let q = d.universal(0, 0).unwrap();
    assert!(d.fiber(0).elements().all(|b| q[b as usize] == b));

    let base = Arc::new(FiniteProductCategory::chain(2));
    for x in 0..2 {
        let d = hbx_doctrine(base.clone(), x, 1).unwrap();
        assert!(verify_first_order(&d).passed());
        for (&(y, z), p) in base.products() {
            let q = d.universal(y, z).unwrap();
            assert_eq!(q[d.fiber(p.object).top() as usize], d.fiber(y).top());
        }
    }
    let (sets, _) = FiniteProductCategory::finite_sets(&[0, 1, 2]).unwrap();
    let sets = Arc::new(sets);
    for x in 0..3 {
        let d = hbx_doctrine(sets.clone(), x, 1).unwrap();
        assert!(verify_first_order(&d).passed(), "{}", verify_first_order(&d));
    }
}

#[test]
fn embedding_of_small_doctrines() {
    let base = Arc::new(FiniteProductCategory::chain(1));
    let d = FiniteDoctrine::new(base, vec![2], vec![BAHom::identity(2)]).unwrap();
    let (h, m) = embedding_morphism(&d).unwrap();
    assert_eq!(h.fiber(0).size(), 4);
    assert!(injective_by_identity(&d, &m).is_empty());
    for s in [vec![0, 1], vec![0, 1, 2]] {
        let d = subset_doctrine(&s).unwrap();
        let (h, m) = embedding_morphism(&d).unwrap();
        assert!(injective_by_identity(&d, &m).is_empty());
        assert!(verify_morphism(&d, &h, &m, Level::Boolean).passed());
        assert!(verify_first_order(&h).passed());
    }
}

#[test]
fn subset_equality_is_diagonal() {
    let d = subset_doctrine(&[0, 1, 2, 4]).unwrap();
    let search = find_fibered_equalities(&d);
    let fam = search.family.clone().expect("elementary");
    assert!(search.candidates.values().all(|c| c.len() == 1));
    assert_eq!(&fam, d.delta());
    assert!(verify_elementary(&d, &fam).passed());
    let two = obj(&d, "2");
    let mut bad = fam.clone();
    bad.insert(two, 0b1111);
    assert!(verify_elementary(&d, &bad).has_kind("substitutivity"));
}

#[test]
fn trivial_fibers_have_top_equality() {
    let d = chain_doctrine(&[0, 0], &[vec![]]).unwrap();
    let fam = find_fibered_equalities(&d).family.unwrap();
    assert!(fam.values().all(|&e| e == 0));
    let d = chain_doctrine(&[1, 1], &[vec![0]]).unwrap();
    let fam = find_fibered_equalities(&d).family.unwrap();
    assert!(fam.iter().all(|(&x, &e)| e == d.fiber(x).top()));
}

#[test]
fn fragment_checks_on_subsets() {
    let d = subset_doctrine(&[0, 1, 2, 4]).unwrap();
    assert!(verify_qff(&d, &full_marking(&d)).passed());
    let trivial: Marking = (0..4).map(|x| [0, d.fiber(x).top()].into_iter().collect()).collect();
    assert!(verify_qff(&d, &trivial).has_kind("generation"));
    let mut holey = full_marking(&d);
    holey[obj(&d, "2")].remove(&0b01);
    let r = verify_qff(&d, &holey);
    assert!(r.has_kind("subfunctor-boolean"));
}

#[test]
fn only_the_full_marking_is_a_fragment_of_subsets() {
    let d = subset_doctrine(&[0, 1, 2, 4]).unwrap();
    let passing: Vec<Vec<SubAlgebra>> = all_subalgebra_markings(&d)
        .into_iter()
        .filter(|m| verify_qff(&d, &marking_of(m)).passed())
        .collect();
    assert_eq!(passing.len(), 1);
    assert!(passing[0].iter().all(SubAlgebra::is_full));
}

fn first_order_test_doctrines() -> Vec<FiniteDoctrine> {
    let mut out = vec![subset_doctrine(&[0, 1]).unwrap(), subset_doctrine(&[0, 1, 2]).unwrap()];
    for n in 1..=3 {
        let base = Arc::new(FiniteProductCategory::chain(n));
        for x in 0..n {
            for b in 1..=2 {
                out.push(hbx_doctrine(base.clone(), x, b).unwrap());
            }
        }
    }
    let base = Arc::new(FiniteProductCategory::chain(2));
    let parts = [hbx_doctrine(base.clone(), 0, 1).unwrap(), hbx_doctrine(base, 1, 1).unwrap()];
    out.push(product_doctrine(&parts).unwrap());
    out
}

#[test]
fn stratification_round_trips() {
    for d in first_order_test_doctrines() {
        for m in all_subalgebra_markings(&d) {
            let marking = marking_of(&m);
            if !verify_qff(&d, &marking).passed() {
                continue;
            }
            let s = stratify(&d, &marking).unwrap();
            assert!(verify_qa_stratified(&s).passed(), "{}", verify_qa_stratified(&s));
            for n in 0..s.stabilization_index() {
                assert!(s.level(n).iter().zip(s.level(n + 1)).all(|(a, b)| a.is_subalgebra_of(b)));
            }
            let (back, p0) = colimit(&s).unwrap();
            assert_eq!(p0, marking);
            for f in 0..d.base().num_morphisms() {
                assert_eq!(back.reindex_table(f), d.reindex_table(f));
            }
            for &(x, y) in d.base().products().keys() {
                assert_eq!(back.universal(x, y), d.universal(x, y));
            }
            let again = stratify(&back, &p0).unwrap();
            assert_eq!(again.levels, s.levels);
            assert_eq!(again.one_step, s.one_step);
        }
    }
    let d = subset_doctrine(&[0, 1, 2]).unwrap();
    let s = stratify(&d, &full_marking(&d)).unwrap();
    assert_eq!(s.stabilization_index(), 0);
}

#[test]
fn shrinking_the_upper_level_breaks_generation() {
    let base = Arc::new(FiniteProductCategory::chain(2));
    let d = hbx_doctrine(base, 0, 2).unwrap();
    let s = stratify(&d, &full_marking(&d)).unwrap();
    let mut upper = s.level(1).to_vec();
    upper[0] = SubAlgebra::trivial(d.fiber(0).atoms());
    let lower: Vec<SubAlgebra> = (0..2).map(|x| SubAlgebra::trivial(d.fiber(x).atoms())).collect();
    let r = verify_one_step(&d, &lower, &upper, s.quantifiers(0));
    assert!(r.has_kind("one-step-generation") || r.has_kind("one-step-universal"));
    assert!(verify_one_step(&d, s.level(0), s.level(1), s.quantifiers(0)).passed());
}

#[test]
fn equality_lives_in_the_fragment() {
    for d in first_order_test_doctrines() {
        let ambient = find_fibered_equalities(&d).family;
        for m in all_subalgebra_markings(&d) {
            if !verify_qff(&d, &marking_of(&m)).passed() {
                continue;
            }
            let sub = subdoctrine(&d, &m).unwrap();
            let sub_family = find_fibered_equalities(&sub).family;
            let left = match &ambient {
                Some(fam) => fam.iter().all(|(&x, &e)| {
                    let sq = d.base().product(x, x).unwrap().object;
                    m[sq].contains(e)
                }),
                None => false,
            };
            assert_eq!(left, sub_family.is_some());
            if let (true, Some(fam), Some(sf)) = (left, &ambient, &sub_family) {
                for (&x, &e) in fam {
                    let sq = d.base().product(x, x).unwrap().object;
                    assert_eq!(sf[&x], to_sub(&m[sq], e));
                }
            }
        }
    }
}

#[test]
fn quotients_by_filters() {
    let d = subset_doctrine(&[0, 1, 2]).unwrap();
    let one = d.base().terminal();
    let top: BTreeSet<Elem> = [d.fiber(one).top()].into();
    let (q, _) = quotient_by_filter(&d, &top).unwrap();
    assert_eq!(q.fiber_atoms(), d.fiber_atoms());
    let all: BTreeSet<Elem> = d.fiber(one).elements().collect();
    let (q, _) = quotient_by_filter(&d, &all).unwrap();
    assert!((0..3).all(|x| q.fiber(x).size() == 1));

    let base = Arc::new(FiniteProductCategory::chain(2));
    let parts = [hbx_doctrine(base.clone(), 1, 1).unwrap(), hbx_doctrine(base, 0, 1).unwrap()];
    let p = product_doctrine(&parts).unwrap();
    let t = p.base().terminal();
    assert_eq!(p.fiber(t).size(), 4);
    let filters: Vec<BTreeSet<Elem>> = p
        .fiber(t)
        .elements()
        .powerset()
        .map(|s| s.into_iter().collect::<BTreeSet<Elem>>())
        .filter(|s| doctrina::doctrine::constructions::check_filter(&p, s).is_ok())
        .collect();
    assert_eq!(filters.len(), 4);
    let quotients: Vec<(FiniteDoctrine, Vec<Elem>)> =
        filters.iter().map(|f| quotient_by_filter(&p, f).unwrap()).collect();
    for (q, _) in &quotients {
        assert!(verify_first_order(q).passed());
    }
    for (i, f) in filters.iter().enumerate() {
        for (j, g) in filters.iter().enumerate() {
            let gi = &quotients[i].1;
            let gj = &quotients[j].1;
            let finer = gi.iter().zip(gj).all(|(a, b)| a & b == *b);
            assert_eq!(f.is_subset(g), finer);
        }
    }
    let sizes: BTreeSet<usize> = quotients.iter().map(|(q, _)| q.fiber(t).atoms()).collect();
    assert_eq!(sizes, [0, 1, 2].into());
    assert!(quotient_by_filter(&p, &BTreeSet::new()).is_err());
}

#[test]
fn change_of_base_examples() {
    let base = Arc::new(FiniteProductCategory::chain(3));
    let r = hbx_doctrine(base.clone(), 0, 2).unwrap();
    let same = change_of_base(&r, base.clone(), &BaseFunctor::identity(&base)).unwrap();
    for f in 0..base.num_morphisms() {
        assert_eq!(same.reindex_table(f), r.reindex_table(f));
    }
    let c2 = Arc::new(FiniteProductCategory::chain(2));
    let top = base.terminal();
    let constant = BaseFunctor {
        obj: vec![top; 2],
        mor: vec![base.identity(top); c2.num_morphisms()],
    };
    let k = change_of_base(&r, c2.clone(), &constant).unwrap();
    assert!((0..2).all(|x| k.fiber(x) == r.fiber(top)));
    let lift = BaseFunctor {
        obj: vec![1, 2],
        mor: (0..c2.num_morphisms())
            .map(|f| {
                let m = c2.morphism(f);
                base.hom(m.dom + 1, m.cod + 1)[0]
            })
            .collect(),
    };
    let pulled = change_of_base(&r, c2, &lift).unwrap();
    assert!(verify_first_order(&pulled).passed());
}

#[test]
fn morphism_verification() {
    let d = subset_doctrine(&[0, 1, 2]).unwrap();
    let homs: Vec<BAHom> = d.fiber_atoms().into_iter().map(BAHom::identity).collect();
    let id = DoctrineMorphism::from_homs(BaseFunctor::identity(d.base()), &homs);
    for level in [Level::Boolean, Level::FirstOrder, Level::Elementary] {
        assert!(verify_morphism(&d, &d, &id, level).passed());
    }
    let mut broken = id.clone();
    broken.components[obj(&d, "2")][1] = 0;
    let r = verify_morphism(&d, &d, &broken, Level::Boolean);
    assert!(r.has_kind("not-homomorphism"));
}

#[test]
fn forced_universal_is_the_unique_adjoint() {
    let base = Arc::new(FiniteProductCategory::chain(2));
    let mut cases = vec![subset_doctrine(&[0, 1, 2]).unwrap()];
    cases.push(hbx_doctrine(base.clone(), 0, 2).unwrap());
    cases.push(chain_doctrine(&[2, 1], &[vec![0, 0]]).unwrap());
    for d in cases {
        for (&(x, y), p) in d.base().products() {
            let (fx, fp) = (d.fiber(x), d.fiber(p.object));
            if fp.size() > 8 {
                continue;
            }
            let forced = forced_universal(&d, x, y).unwrap();
            let domain: Vec<Elem> = fp.elements().collect();
            let codomain: Vec<Elem> = fx.elements().collect();
            let mut adjoints = 0;
            for choice in std::iter::repeat(codomain.iter().copied()).take(domain.len()).multi_cartesian_product() {
                let monotone = domain
                    .iter()
                    .all(|&a| domain.iter().all(|&b| !fp.leq(a, b) || fx.leq(choice[a as usize], choice[b as usize])));
                if !monotone {
                    continue;
                }
                let adjoint = codomain.iter().all(|&a| {
                    domain
                        .iter()
                        .all(|&b| fx.leq(a, choice[b as usize]) == fp.leq(d.apply(p.pr1, a), b))
                });
                if adjoint {
                    adjoints += 1;
                    assert_eq!(choice, forced);
                }
            }
            assert_eq!(adjoints, 1);
        }
    }
}

fn random_chain_doctrine() -> impl Strategy<Value = FiniteDoctrine> {
    (1usize..=3)
        .prop_flat_map(|n| proptest::collection::vec(1usize..=3, n))
        .prop_flat_map(|atoms| {
            let covers: Vec<_> = atoms
                .windows(2)
                .map(|w| proptest::collection::vec(0..w[1], w[0]))
                .collect();
            (Just(atoms), covers)
        })
        .prop_map(|(atoms, covers)| chain_doctrine(&atoms, &covers).unwrap())
}

proptest! {
    #[test]
    fn embedding_is_injective_and_natural(d in random_chain_doctrine()) {
        prop_assert!(verify_boolean_doctrine(&d).passed());
        let (h, m) = embedding_morphism(&d).unwrap();
        prop_assert!(injective_by_identity(&d, &m).is_empty());
        prop_assert!(verify_morphism(&d, &h, &m, Level::Boolean).passed());
    }

    #[test]
    fn derived_exists_is_left_adjoint(d in random_chain_doctrine()) {
        let e = derive_exists(&d);
        for (&(x, y), p) in d.base().products() {
            let ex = e.existential(x, y).unwrap();
            for a in d.fiber(p.object).elements() {
                for g in d.fiber(x).elements() {
                    prop_assert_eq!(
                        d.fiber(p.object).leq(a, d.apply(p.pr1, g)),
                        d.fiber(x).leq(ex[a as usize], g)
                    );
                }
            }
        }
    }

    #[test]
    fn reindexing_tables_round_trip(d in random_chain_doctrine()) {
        let mut e = d.clone();
        for f in 0..d.base().num_morphisms() {
            e.set_reindex_table(f, d.reindex_table(f)).unwrap();
            prop_assert_eq!(e.reindexing(f), d.reindexing(f));
        }
        prop_assert!(verify_boolean_doctrine(&e).passed());
    }
}

#[test]
fn filter_check_rejects_non_filters() {
    let d = subset_doctrine(&[0, 1]).unwrap();
    let bad: BTreeSet<Elem> = [0].into();
    assert!(quotient_by_filter(&d, &bad).is_err());
}
