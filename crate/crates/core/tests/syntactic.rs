use std::collections::BTreeMap;

use doctrina::calculus::{Budget, Sequent};
use doctrina::formula::{Formula, FormulaInContext};
use doctrina::lang::{Context, CtxMorphism, Signature, Term};
use doctrina::syntactic::*;
use doctrina::theory::Theory;
use proptest::prelude::*;

fn sig() -> Signature {
    Signature::new().predicate("P", 1).predicate("Q", 2)
}

fn preds() -> BTreeMap<String, usize> {
    sig().predicates().clone()
}

fn structure_strategy() -> impl Strategy<Value = FiniteStructure> {
    (1usize..=2).prop_flat_map(|s| {
        (
            proptest::collection::vec(any::<bool>(), s),
            proptest::collection::vec(any::<bool>(), s * s),
        )
            .prop_map(move |(p, q)| {
                let mut m = FiniteStructure::new(s);
                m.set_predicate("P", 1, p).unwrap();
                m.set_predicate("Q", 2, q).unwrap();
                m
            })
    })
}

/// Formulas over `x1, x2` with at most one quantifier nesting over `y`.
fn formula_strategy() -> impl Strategy<Value = Formula> {
    let vars = ["x1", "x2"];
    let atom = |vs: Vec<&'static str>| {
        let vs2 = vs.clone();
        prop_oneof![
            proptest::sample::select(vs.clone()).prop_map(|v| Formula::rel("P", &[v])),
            (proptest::sample::select(vs), proptest::sample::select(vs2)).prop_map(|(a, b)| Formula::rel("Q", &[a, b])),
        ]
    };
    let qf = |vs: Vec<&'static str>| {
        atom(vs).prop_recursive(2, 6, 2, |inner| {
            prop_oneof![
                inner.clone().prop_map(Formula::not),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::and(a, b)),
                (inner.clone(), inner).prop_map(|(a, b)| Formula::or(a, b)),
            ]
        })
    };
    let quantified = prop_oneof![
        qf(vec!["x1", "x2", "y"]).prop_map(|b| Formula::forall("y", b)),
        qf(vec!["x1", "x2", "y"]).prop_map(|b| Formula::exists("y", b)),
    ];
    prop_oneof![qf(vars.to_vec()), quantified.clone(), (quantified, qf(vars.to_vec())).prop_map(|(a, b)| Formula::imp(a, b))]
}

fn morphism_strategy() -> impl Strategy<Value = CtxMorphism> {
    proptest::collection::vec(proptest::sample::select(vec!["x1", "x2"]), 2).prop_map(|img| {
        let ctx = Context::canonical(2);
        CtxMorphism::new(ctx.clone(), ctx, img.iter().map(|v| Term::var(v)).collect()).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn doctrine_interpretation_matches_tarski_semantics(m in structure_strategy(), phi in formula_strategy()) {
        let (d, objs, fam) = structure_doctrine(&m, 3).unwrap();
        let ctx = Context::canonical(2);
        let fic = FormulaInContext::new(ctx, phi).unwrap();
        let e = interpret(&fic, &d, &objs, &fam).unwrap();
        for i in 0..tuple_count(m.size(), 2).unwrap() {
            let t = tuple_at(m.size(), 2, i);
            prop_assert_eq!(e >> i & 1 == 1, eval_in_structure(&fic, &m, &t).unwrap());
        }
    }

    #[test]
    fn sequent_validity_agrees(m in structure_strategy(), a in formula_strategy(), b in formula_strategy()) {
        let (d, objs, fam) = structure_doctrine(&m, 3).unwrap();
        let s = Sequent::new(Context::canonical(2), vec![a], vec![b]);
        prop_assert_eq!(sequent_valid(&s, &d, &objs, &fam).unwrap(), sequent_holds_in(&s, &m).unwrap());
    }

    #[test]
    fn interpretation_is_natural(m in structure_strategy(), phi in formula_strategy(), f in morphism_strategy()) {
        let (d, objs, fam) = structure_doctrine(&m, 3).unwrap();
        let fic = FormulaInContext::new(Context::canonical(2), phi).unwrap();
        prop_assert!(naturality_of_interpretation(&fic, &f, &d, &objs, &fam).unwrap());
    }

    #[test]
    fn oracle_certificates_are_sound(a in formula_strategy(), b in formula_strategy()) {
        let t = Theory::new(sig());
        let s = Sequent::new(Context::canonical(2), vec![a], vec![b]);
        let oracle = BoundedOracle::with_budget(Budget::depth(4));
        let v = oracle.decide(&s, &t);
        prop_assert!(check_certificate(&v, &s, &t).is_ok());
        if v.is_proved() {
            for size in 1..=2 {
                for m in structures_of_size(size, &preds(), &BTreeMap::new(), 1 << 12).unwrap() {
                    prop_assert!(sequent_holds_in(&s, &m).unwrap());
                }
            }
        }
        if s.formulas().all(Formula::is_quantifier_free) {
            let tt = TruthTableOracle.decide(&s, &t);
            prop_assert!(tt.is_decided());
            prop_assert!(check_certificate(&tt, &s, &t).is_ok());
            if v.is_decided() {
                prop_assert_eq!(tt.as_bool(), v.as_bool());
            }
        }
    }
}

fn fic(ctx: &Context, f: Formula) -> FormulaInContext {
    FormulaInContext::new(ctx.clone(), f).unwrap()
}

#[test]
fn vacuous_quantifier_is_quantifier_free_modulo() {
    let t = Theory::new(sig());
    let ctx = Context::canonical(1);
    let phi = fic(&ctx, Formula::exists("y", Formula::rel("P", &["x1"])));
    let oracle = BoundedOracle::default();
    match is_quantifier_free_modulo(&t, &oracle, &phi, 3) {
        QfMembership::Yes(w) => assert!(w.is_quantifier_free()),
        other => panic!("{other:?}"),
    }
}

#[test]
fn axioms_collapse_depth() {
    let all_p = Formula::forall("x", Formula::rel("P", &["x"]));
    let t = Theory::new(sig()).with_axiom(all_p.clone());
    let phi = fic(&Context::empty(), Formula::forall("y", Formula::rel("P", &["y"])));
    let d = qa_depth_modulo(&t, &BoundedOracle::default(), &phi, DepthBounds::default());
    assert_eq!(d.upper, 0);
    assert!(d.witness.is_some());
    let free = Theory::new(sig());
    let d = qa_depth_modulo(&free, &BoundedOracle::default(), &phi, DepthBounds::default());
    assert_eq!(d.upper, 1);
}

#[test]
fn model_family_induces_a_morphism_and_a_non_model_does_not() {
    let axiom = Formula::forall("x", Formula::rel("P", &["x"]));
    let t = Theory::new(sig()).with_axiom(axiom);
    let ctx = Context::canonical(1);
    let samples = vec![
        (fic(&ctx, Formula::rel("Q", &["x1", "x1"])), fic(&ctx, Formula::rel("P", &["x1"]))),
        (fic(&ctx, Formula::rel("P", &["x1"])), fic(&ctx, Formula::rel("Q", &["x1", "x1"]))),
    ];
    let oracle = BoundedOracle::default();
    let good = FiniteStructure::new(2)
        .with_relation("P", 1, &[vec![0], vec![1]])
        .with_relation("Q", 2, &[vec![0, 1]]);
    let (d, objs, fam) = structure_doctrine(&good, 2).unwrap();
    let r = morphism_from_family(&t, &d, &objs, &fam, 0, &samples, &oracle).unwrap();
    assert!(r.report.passed(), "{}", r.report);
    assert_eq!(r.values.len(), 2);
    let bad = FiniteStructure::new(2).with_relation("P", 1, &[vec![0]]).with_relation("Q", 2, &[]);
    let (d, objs, fam) = structure_doctrine(&bad, 2).unwrap();
    let r = morphism_from_family(&t, &d, &objs, &fam, 0, &samples, &oracle).unwrap();
    assert!(r.report.has_kind("axiom-violated"));
}

#[test]
fn one_step_layer_over_the_empty_theory_is_clean() {
    let t = Theory::new(Signature::new().predicate("P", 1));
    let bounds = LayerBounds {
        predicates: t.signature().predicates().clone(),
        body_size: 3,
        max_quantified: 1,
    };
    let layer = one_step_layer(&t, &TruthTableOracle, &BoundedOracle::default(), &Context::canonical(1), &bounds).unwrap();
    assert!(layer.report.passed(), "{}", layer.report);
    assert_eq!(layer.elements.len(), 4);
    assert!(!layer.generators.is_empty());
    assert!(one_step_layer(&t, &BoundedOracle::default(), &BoundedOracle::default(), &Context::empty(), &bounds).is_err());
}

#[test]
fn empty_structure_refutes_existence() {
    let t = Theory::new(Signature::new());
    let s = Sequent::new(Context::empty(), vec![], vec![Formula::exists("x", Formula::True)]);
    let out = countermodel_search(&s, &t, 0, 0);
    let c = out.model.unwrap();
    assert_eq!(c.structure.size(), 0);
}

#[test]
fn completion_agrees_with_the_theory_on_quantifier_free_pairs() {
    let t = Theory::new(sig())
        .with_axiom(Formula::forall("x", Formula::rel("P", &["x"])))
        .with_axiom(Formula::forall(
            "x",
            Formula::forall("y", Formula::imp(Formula::rel("Q", &["x", "y"]), Formula::rel("Q", &["y", "x"]))),
        ));
    let cfg = CompletionConfig::default();
    let cs = universal_consequences(&t, &cfg);
    let ctx = Context::canonical(2);
    let pairs = [
        (Formula::True, Formula::rel("P", &["x1"])),
        (Formula::rel("Q", &["x1", "x2"]), Formula::rel("Q", &["x2", "x1"])),
        (Formula::rel("Q", &["x1", "x1"]), Formula::rel("Q", &["x1", "x2"])),
    ];
    for (a, b) in pairs {
        let (a, b) = (fic(&ctx, a), fic(&ctx, b));
        let c = completion_leq_with(&t, &cs, &a, &b, &cfg.oracle).unwrap();
        let direct = lt_leq(&t, &cfg.oracle, &a, &b).unwrap();
        if c.verdict.is_decided() && direct.is_decided() {
            assert_eq!(c.verdict.as_bool(), direct.as_bool());
        }
    }
}
