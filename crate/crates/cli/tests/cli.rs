use std::sync::Arc;

use doctrina::calculus::{prove_bounded, Budget, Sequent};
use doctrina::doctrine::constructions::{chain_doctrine, hbx_doctrine, subset_doctrine};
use doctrina::doctrine::fragment::full_marking;
use doctrina::doctrine::{FiniteDoctrine, FiniteProductCategory};
use doctrina::formula::{Formula, FormulaInContext};
use doctrina::lang::{Context, Signature, Term};
use doctrina::syntactic::{countermodel_search, FiniteStructure};
use doctrina::theory::Theory;
use doctrina_cli::document::print_proof;
use doctrina_cli::{parse, run, Document, MarkingDoc, Outcome};
use proptest::prelude::*;

fn doctrina(args: &[&str]) -> Outcome {
    run(std::iter::once("doctrina").chain(args.iter().copied()))
}

fn assert_round_trip(doc: &Document) {
    let text = doc.print();
    let back = parse(&text).unwrap_or_else(|e| panic!("{e}: {text}"));
    assert_eq!(&back, doc, "{text}");
    assert_eq!(back.print(), text);
}

fn term_strategy() -> impl Strategy<Value = Term> {
    let leaf = prop_oneof![
        proptest::sample::select(vec!["x", "y", "z"]).prop_map(Term::var),
        Just(Term::app("c", vec![])),
    ];
    leaf.prop_recursive(2, 4, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(|t| Term::app("f", vec![t])),
            (inner.clone(), inner).prop_map(|(a, b)| Term::app("g", vec![a, b])),
        ]
    })
}

fn formula_strategy() -> impl Strategy<Value = Formula> {
    let leaf = prop_oneof![
        Just(Formula::True),
        Just(Formula::False),
        Just(Formula::atom("R0", vec![])),
        term_strategy().prop_map(|t| Formula::atom("P", vec![t])),
        (term_strategy(), term_strategy()).prop_map(|(a, b)| Formula::Eq(a, b)),
    ];
    leaf.prop_recursive(3, 16, 2, |inner| {
        let var = proptest::sample::select(vec!["x", "y", "w"]);
        prop_oneof![
            inner.clone().prop_map(Formula::not),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::and(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::or(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::imp(a, b)),
            (var.clone(), inner.clone()).prop_map(|(x, a)| Formula::forall(x, a)),
            (var, inner).prop_map(|(x, a)| Formula::exists(x, a)),
        ]
    })
}

fn full_context() -> Context {
    Context::new(["x", "y", "z"]).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn formulas_round_trip(phi in formula_strategy()) {
        let fic = FormulaInContext::new(full_context(), phi).unwrap();
        assert_round_trip(&Document::Formula(fic));
    }

    #[test]
    fn sequents_round_trip(a in proptest::collection::vec(formula_strategy(), 0..3), s in proptest::collection::vec(formula_strategy(), 0..3)) {
        assert_round_trip(&Document::Sequent(Sequent::new(full_context(), a, s)));
    }

    #[test]
    fn structures_round_trip(size in 0usize..3, p in proptest::collection::vec(any::<bool>(), 9), f in proptest::collection::vec(0usize..3, 9)) {
        let mut m = FiniteStructure::new(size);
        m.set_predicate("Q", 2, p[..size * size].to_vec()).unwrap();
        m.set_predicate("R0", 0, vec![p[0]]).unwrap();
        m.set_function("f", 1, f[..size].iter().map(|&v| v % size.max(1)).collect()).unwrap();
        assert_round_trip(&Document::Structure(m));
    }
}

fn sig() -> Signature {
    Signature::new().predicate("P", 1).predicate("Q", 2)
}

#[test]
fn proofs_found_by_the_prover_round_trip() {
    let t = Theory::new(sig()).with_axiom(Formula::forall("x", Formula::rel("P", &["x"])));
    let goals = [
        Sequent::new(Context::canonical(1), vec![], vec![Formula::rel("P", &["x1"])]),
        Sequent::new(
            Context::empty(),
            vec![Formula::exists("x", Formula::forall("y", Formula::rel("Q", &["x", "y"])))],
            vec![Formula::forall("y", Formula::exists("x", Formula::rel("Q", &["x", "y"])))],
        ),
        Sequent::new(
            Context::canonical(2),
            vec![Formula::or(Formula::rel("Q", &["x1", "x2"]), Formula::not(Formula::rel("P", &["x1"])))],
            vec![Formula::imp(Formula::rel("P", &["x1"]), Formula::rel("Q", &["x1", "x2"]))],
        ),
    ];
    for s in goals {
        let p = prove_bounded(&s, &t, Budget::default()).unwrap();
        assert_round_trip(&Document::Proof(p.clone()));
        let thy = Document::Theory(t.clone()).print();
        let out = doctrina(&["check-proof", &print_proof(&p), "--theory", &thy]);
        assert_eq!(out.code, 0, "{}", out.stdout);
        assert_eq!(out.lines()[0], "VERDICT pass");
    }
}

#[test]
fn countermodels_round_trip_as_structures() {
    let s = Sequent::new(
        Context::canonical(1),
        vec![Formula::rel("P", &["x1"])],
        vec![Formula::exists("y", Formula::rel("Q", &["x1", "y"]))],
    );
    let c = countermodel_search(&s, &Theory::new(sig()), 2, 0).model.unwrap();
    assert_round_trip(&Document::Structure(c.structure));
}

fn test_doctrines() -> Vec<FiniteDoctrine> {
    let mut out = vec![subset_doctrine(&[0, 1]).unwrap(), subset_doctrine(&[0, 1, 2]).unwrap()];
    let chain = Arc::new(FiniteProductCategory::chain(2));
    out.push(hbx_doctrine(chain, 0, 2).unwrap());
    out.push(chain_doctrine(&[1, 2], &[vec![0, 0]]).unwrap());
    let mut broken = subset_doctrine(&[0, 1, 2]).unwrap();
    let f = broken.base().morphism_by_name("2>2:1,0").unwrap();
    broken.set_reindex_value(f, 1, 3).unwrap();
    out.push(broken);
    out
}

#[test]
fn doctrines_and_markings_round_trip() {
    for d in test_doctrines() {
        let m = MarkingDoc::from_marking(&d, &full_marking(&d));
        assert_eq!(m.resolve(&d).unwrap(), full_marking(&d));
        assert_round_trip(&Document::Marking(m));
        assert_round_trip(&Document::Doctrine(d));
    }
}

#[test]
fn signatures_and_theories_round_trip() {
    let sig = sig().function("f", 1).with_equality(true).family("R");
    assert_round_trip(&Document::Signature(sig.clone()));
    let t = Theory::new(sig).with_axiom(Formula::forall("x", Formula::rel("P", &["x"])));
    assert_round_trip(&Document::Theory(t));
    assert_round_trip(&Document::Theory(Theory::prefix_theory()));
}

#[test]
fn documented_examples() {
    let out = doctrina(&["qa-depth", "(exists y (forall x (R x y)))"]);
    assert_eq!((out.code, out.stdout.as_str()), (0, "2\n"));

    let out = doctrina(&["prove", "(seq (ctx) (ants) (sucs (exists x true)))", "--budget", "6"]);
    assert_eq!(out.code, 2);
    assert!(out.lines().iter().any(|l| l.starts_with("NOTE countermodel size=0 empty structure")));

    let out = doctrina(&["entail", "(R2 x1 x2)", "(R1 x1)", "--oracle", "prefix"]);
    assert_eq!(out.code, 0);
    assert_eq!(out.lines()[0], "VERDICT proved");
    let cert = out.lines()[1].strip_prefix("CERTIFICATE ").unwrap().to_string();
    let checked = doctrina(&["check-proof", &cert, "--theory", "(theory prefix)"]);
    assert_eq!(checked.code, 0, "{}", checked.stdout);
}

#[test]
fn exit_codes_follow_the_verdict() {
    assert_eq!(doctrina(&["entail", "(R1 x1)", "(R2 x1 x2)", "--oracle", "prefix"]).code, 1);
    assert_eq!(doctrina(&["entail", "(and (P x) (Q x))", "(P x)", "--oracle", "truthtable"]).code, 0);
    assert_eq!(doctrina(&["entail", "(P x)", "(and (P x) (Q x))", "--oracle", "truthtable"]).code, 1);
    let undecided = doctrina(&["entail", "(forall x (P x))", "(P y)", "--oracle", "truthtable"]);
    assert_eq!(undecided.code, 2);
    assert_eq!(undecided.lines()[0], "VERDICT unknown");
    let models = doctrina(&["models", "(seq (ctx) (ants) (sucs (exists x true)))", "--size", "0"]);
    assert_eq!(models.code, 1);
    assert_eq!(models.lines()[1], "CERTIFICATE (countermodel (structure (size 0)) (assign ))");
    let none = doctrina(&["models", "(seq (ctx x) (ants (P x)) (sucs (P x)))", "--size", "2"]);
    assert_eq!(none.code, 2);
}

#[test]
fn input_errors_exit_with_three_and_a_position() {
    let out = doctrina(&["prove", "(seq (ctx x x) (ants) (sucs))"]);
    assert_eq!(out.code, 3);
    assert!(out.stderr.contains("1:6"), "{}", out.stderr);
    let out = doctrina(&["qa-depth", "(and true"]);
    assert_eq!(out.code, 3);
    assert!(out.stderr.contains("1:1"));
    assert_eq!(doctrina(&["entail", "(P x)", "(P x y)"]).code, 3);
    assert_eq!(doctrina(&["no-such-command"]).code, 3);
    assert_eq!(doctrina(&["prove", "(seq (ctx) (ants) (sucs (P x)))"]).code, 3);
}

#[test]
fn doctrine_verification_reports() {
    let good = Document::Doctrine(subset_doctrine(&[0, 1, 2]).unwrap()).print();
    for level in ["boolean", "first-order", "elementary", "qff", "one-step", "stratified"] {
        let out = doctrina(&["verify-doctrine", &good, "--level", level]);
        assert_eq!(out.code, 0, "{level}: {}", out.stdout);
        assert_eq!(out.lines().last(), Some(&"VERDICT pass"));
    }
    assert_eq!(doctrina(&["verify-doctrine", &good]).stdout, "VERDICT pass\n");

    let mut d = subset_doctrine(&[0, 1, 2, 4]).unwrap();
    let two = d.base().object_by_name("2").unwrap();
    let mut q = d.universal(two, two).unwrap();
    q[1] ^= 1;
    d.set_forall(two, two, q).unwrap();
    let out = doctrina(&["verify-doctrine", &Document::Doctrine(d).print(), "--level", "first-order"]);
    assert_eq!(out.code, 1);
    assert!(out.lines().contains(&"VIOLATION quantifier-mismatch X=2 Y=2 elem=1"), "{}", out.stdout);

    let broken = test_doctrines().pop().unwrap();
    let out = doctrina(&["verify-doctrine", &Document::Doctrine(broken).print(), "--level", "boolean"]);
    assert_eq!(out.code, 1);
    assert!(out.lines().iter().any(|l| l.starts_with("VIOLATION not-homomorphism f=2>2:1,0")));
}

#[test]
fn stratify_round_trips_on_the_full_marking() {
    for d in test_doctrines().into_iter().take(4) {
        let marking = MarkingDoc::from_marking(&d, &full_marking(&d));
        let doc = Document::Doctrine(d).print();
        let out = doctrina(&["stratify", &doc, &Document::Marking(marking).print()]);
        assert_eq!(out.code, 0, "{}", out.stdout);
        assert!(out.lines().contains(&"STABILIZES n=0"));
    }
    let d = subset_doctrine(&[0, 1, 2]).unwrap();
    let doc = Document::Doctrine(d).print();
    let out = doctrina(&["stratify", &doc, "(marking (2 1))"]);
    assert_eq!(out.code, 1);
    assert!(out.lines().iter().any(|l| l.starts_with("VIOLATION")));
}

#[test]
fn prefix_demos_are_deterministic() {
    for demo in ["intersection", "separations", "no-least"] {
        let a = doctrina(&["prefix-demo", demo]);
        let b = doctrina(&["prefix-demo", demo]);
        assert_eq!(a, b);
        assert_eq!(a.code, 0);
        assert_eq!(a.lines().last(), Some(&"VERDICT pass"));
    }
    let out = doctrina(&["prefix-demo", "intersection", "--k", "1", "--arity", "2", "--nmax", "3"]);
    assert!(out.lines().iter().filter(|l| l.starts_with("EXCLUDED")).count() >= 14);
}

#[test]
fn completion_queries() {
    let thy = "(theory (axioms (forall x (P x)) (forall x (forall y (imp (Q x y) (Q y x))))))";
    let out = doctrina(&["complete", thy, "--lhs", "(Q x1 x2)", "--rhs", "(Q x2 x1)"]);
    assert_eq!(out.code, 0, "{}", out.stdout);
    assert!(out.lines().contains(&"CONSEQUENCE (forall x (P x))"));
    let out = doctrina(&["complete", thy, "--lhs", "(P x1)", "--rhs", "(Q x1 x1)"]);
    assert_eq!(out.code, 1);
}

#[test]
fn budget_comes_from_the_environment() {
    std::env::set_var("DOCTRINA_BUDGET", "0");
    let out = doctrina(&["prove", "(seq (ctx y) (ants (forall x (P x))) (sucs (P y)))"]);
    std::env::remove_var("DOCTRINA_BUDGET");
    assert_eq!(out.code, 2, "{}", out.stdout);
    assert!(out.lines().contains(&"NOTE search=budget-exhausted depth=0"));
    let out = doctrina(&["prove", "(seq (ctx y) (ants (forall x (P x))) (sucs (P y)))"]);
    assert_eq!(out.code, 0);
}
