use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::Arc;

use doctrina::calculus::{ProofTree, Rule, Sequent};
use doctrina::doctrine::{BAHom, Elem, FiniteDoctrine, FiniteProductCategory, Marking, Morphism, ProductDiagram};
use doctrina::formula::{Formula, FormulaInContext};
use doctrina::lang::{Context, PredicateFamily, Signature, Term};
use doctrina::syntactic::{tuple_count, tuple_index, FiniteStructure};
use doctrina::theory::{AxiomFamily, Theory};

use crate::sexp::{read, ParseError, Sexp};

/// A parsed input file.
#[derive(Debug, Clone)]
pub enum Document {
    Signature(Signature),
    Theory(Theory),
    Formula(FormulaInContext),
    Sequent(Sequent),
    Proof(ProofTree),
    Structure(FiniteStructure),
    Doctrine(FiniteDoctrine),
    Marking(MarkingDoc),
}

/// Marked elements per object name; resolved against a doctrine with [`MarkingDoc::resolve`].
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct MarkingDoc(pub BTreeMap<String, BTreeSet<Elem>>);

impl MarkingDoc {
    pub fn resolve(&self, d: &FiniteDoctrine) -> Result<Marking, String> {
        let c = d.base();
        let mut out = vec![BTreeSet::new(); c.num_objects()];
        for (name, elems) in &self.0 {
            let x = c.object_by_name(name).ok_or_else(|| format!("marking names unknown object `{name}`"))?;
            let fiber = d.fiber(x);
            if let Some(e) = elems.iter().find(|&&e| !fiber.contains(e)) {
                return Err(format!("element {e} is not in the fiber over `{name}`"));
            }
            out[x] = elems.clone();
        }
        Ok(out)
    }

    pub fn from_marking(d: &FiniteDoctrine, m: &Marking) -> Self {
        Self(
            m.iter()
                .enumerate()
                .map(|(x, s)| (d.obj_name(x).to_string(), s.clone()))
                .collect(),
        )
    }
}

impl PartialEq for Document {
    fn eq(&self, other: &Self) -> bool {
        use Document::*;
        match (self, other) {
            (Signature(a), Signature(b)) => a == b,
            (Theory(a), Theory(b)) => a == b,
            (Formula(a), Formula(b)) => a == b,
            (Sequent(a), Sequent(b)) => a == b,
            (Proof(a), Proof(b)) => a == b,
            (Structure(a), Structure(b)) => a == b,
            (Doctrine(_), Doctrine(_)) => self.print() == other.print(),
            (Marking(a), Marking(b)) => a == b,
            _ => false,
        }
    }
}

impl Document {
    pub fn kind(&self) -> &'static str {
        match self {
            Document::Signature(_) => "signature",
            Document::Theory(_) => "theory",
            Document::Formula(_) => "formula",
            Document::Sequent(_) => "sequent",
            Document::Proof(_) => "proof",
            Document::Structure(_) => "structure",
            Document::Doctrine(_) => "doctrine",
            Document::Marking(_) => "marking",
        }
    }

    /// The canonical text form.
    pub fn print(&self) -> String {
        match self {
            Document::Signature(s) => print_signature(s),
            Document::Theory(t) => print_theory(t),
            Document::Formula(f) => f.to_string(),
            Document::Sequent(s) => s.to_string(),
            Document::Proof(p) => print_proof(p),
            Document::Structure(m) => m.to_string(),
            Document::Doctrine(d) => print_doctrine(d),
            Document::Marking(m) => print_marking(m),
        }
    }
}

/// Parses any document, dispatching on the head symbol. Anything else is read as a formula
/// in the context of its free variables.
pub fn parse(text: &str) -> Result<Document, ParseError> {
    let e = read(text)?;
    Ok(match e.head() {
        Some("signature") => Document::Signature(signature_from(&e)?),
        Some("theory") => Document::Theory(theory_from(&e, &[])?),
        Some("fic") => Document::Formula(fic_from(&e)?),
        Some("seq") => Document::Sequent(sequent_from(&e)?),
        Some("proof") => Document::Proof(proof_from(&e)?),
        Some("structure") => Document::Structure(structure_from(&e)?),
        Some("doctrine") => Document::Doctrine(doctrine_from(&e)?),
        Some("marking") => Document::Marking(marking_from(&e)?),
        _ => Document::Formula(fic_from(&e)?),
    })
}

fn err(e: &Sexp, msg: impl Into<String>) -> ParseError {
    ParseError::new(e.pos(), msg)
}

fn arity(items: &[Sexp], n: usize, e: &Sexp, what: &str) -> Result<(), ParseError> {
    if items.len() != n {
        return Err(err(e, format!("{what} takes {n} argument(s), found {}", items.len())));
    }
    Ok(())
}

const RESERVED: [&str; 9] = ["true", "false", "not", "and", "or", "imp", "forall", "exists", "="];

fn symbol(e: &Sexp, what: &str) -> Result<String, ParseError> {
    let s = e.expect_atom(what)?;
    if RESERVED.contains(&s) {
        return Err(err(e, format!("`{s}` is reserved and cannot name a {what}")));
    }
    Ok(s.to_string())
}

pub fn term_from(e: &Sexp) -> Result<Term, ParseError> {
    match e {
        Sexp::Atom(..) => Ok(Term::Var(symbol(e, "variable")?)),
        Sexp::List(items, _) => {
            let (f, args) = items.split_first().ok_or_else(|| err(e, "empty term"))?;
            let f = symbol(f, "function symbol")?;
            Ok(Term::App(f, args.iter().map(term_from).collect::<Result<_, _>>()?))
        }
    }
}

pub fn formula_from(e: &Sexp) -> Result<Formula, ParseError> {
    let items = match e {
        Sexp::Atom(s, _) => {
            return Ok(match s.as_str() {
                "true" => Formula::True,
                "false" => Formula::False,
                _ => Formula::Atom(symbol(e, "predicate")?, vec![]),
            })
        }
        Sexp::List(items, _) => items,
    };
    let (head, args) = items.split_first().ok_or_else(|| err(e, "empty formula"))?;
    let h = head.expect_atom("formula head")?;
    let sub = |i: usize| formula_from(&args[i]);
    Ok(match h {
        "true" | "false" => return Err(err(e, format!("`{h}` takes no arguments"))),
        "not" => {
            arity(args, 1, e, "not")?;
            Formula::not(sub(0)?)
        }
        "and" => Formula::conj(args.iter().map(formula_from).collect::<Result<Vec<_>, _>>()?),
        "or" => Formula::disj(args.iter().map(formula_from).collect::<Result<Vec<_>, _>>()?),
        "imp" => {
            arity(args, 2, e, "imp")?;
            Formula::imp(sub(0)?, sub(1)?)
        }
        "=" => {
            arity(args, 2, e, "=")?;
            Formula::Eq(term_from(&args[0])?, term_from(&args[1])?)
        }
        "forall" | "exists" => {
            arity(args, 2, e, h)?;
            let vars: Vec<String> = match &args[0] {
                Sexp::List(vs, _) => vs.iter().map(|v| symbol(v, "bound variable")).collect::<Result<_, _>>()?,
                v => vec![symbol(v, "bound variable")?],
            };
            let body = sub(1)?;
            if h == "forall" {
                Formula::forall_many(&vars, body)
            } else {
                Formula::exists_many(&vars, body)
            }
        }
        _ => Formula::Atom(symbol(head, "predicate")?, args.iter().map(term_from).collect::<Result<_, _>>()?),
    })
}

pub fn context_from(e: &Sexp) -> Result<Context, ParseError> {
    let vars = e.expect_form("ctx")?;
    let names: Vec<String> = vars.iter().map(|v| symbol(v, "variable")).collect::<Result<_, _>>()?;
    Context::new(names).map_err(|x| err(e, x.to_string()))
}

/// A formula in context: `(fic (ctx ..) φ)`, or a bare formula over its sorted free variables.
pub fn fic_from(e: &Sexp) -> Result<FormulaInContext, ParseError> {
    let (ctx, phi) = if e.head() == Some("fic") {
        let args = e.expect_form("fic")?;
        arity(args, 2, e, "fic")?;
        (context_from(&args[0])?, formula_from(&args[1])?)
    } else {
        let phi = formula_from(e)?;
        let ctx = Context::new(phi.free_vars()).map_err(|x| err(e, x.to_string()))?;
        (ctx, phi)
    };
    FormulaInContext::new(ctx, phi).map_err(|x| err(e, x.to_string()))
}

fn section<'a>(args: &'a [Sexp], name: &str) -> Option<&'a Sexp> {
    args.iter().find(|a| a.head() == Some(name))
}

fn check_sections(args: &[Sexp], allowed: &[&str]) -> Result<(), ParseError> {
    let mut seen = BTreeSet::new();
    for a in args {
        let h = a.head().ok_or_else(|| err(a, "expected a section"))?;
        if !allowed.contains(&h) {
            return Err(err(a, format!("unknown section `{h}`; expected one of {}", allowed.join(", "))));
        }
        if !seen.insert(h) {
            return Err(err(a, format!("duplicate section `{h}`")));
        }
    }
    Ok(())
}

pub fn sequent_from(e: &Sexp) -> Result<Sequent, ParseError> {
    let args = e.expect_form("seq")?;
    check_sections(args, &["ctx", "ants", "sucs"])?;
    let ctx = match section(args, "ctx") {
        Some(c) => context_from(c)?,
        None => return Err(err(e, "sequent needs a (ctx ..) section")),
    };
    let list = |name: &str| -> Result<Vec<Formula>, ParseError> {
        match section(args, name) {
            Some(s) => s.expect_form(name)?.iter().map(formula_from).collect(),
            None => Ok(vec![]),
        }
    };
    let s = Sequent::new(ctx, list("ants")?, list("sucs")?);
    for phi in s.formulas() {
        if let Some(v) = phi.free_vars().into_iter().find(|v| !s.ctx.contains(v)) {
            return Err(err(e, format!("free variable `{v}` of {phi} is not in {}", s.ctx)));
        }
    }
    Ok(s)
}

pub fn signature_from(e: &Sexp) -> Result<Signature, ParseError> {
    let args = e.expect_form("signature")?;
    let mut sig = Signature::new();
    for a in args {
        let items = a.expect_list("signature entry")?;
        match a.head() {
            Some("equality") => {
                arity(&items[1..], 0, a, "equality")?;
                sig = sig.with_equality(true);
            }
            Some(h @ ("pred" | "fun")) => {
                arity(&items[1..], 2, a, h)?;
                let name = symbol(&items[1], "symbol")?;
                let n = items[2].expect_usize("arity")?;
                let r = if h == "pred" {
                    sig.add_predicate(name, n)
                } else {
                    sig.add_function(name, n)
                };
                r.map_err(|x| err(a, x.to_string()))?;
            }
            Some("family") => {
                arity(&items[1..], 1, a, "family")?;
                sig.add_family(PredicateFamily::new(symbol(&items[1], "family prefix")?));
            }
            _ => return Err(err(a, "expected (equality), (pred P n), (fun f n) or (family R)")),
        }
    }
    Ok(sig)
}

pub fn print_signature(sig: &Signature) -> String {
    let mut s = String::from("(signature");
    if sig.has_equality() {
        s.push_str(" (equality)");
    }
    for (p, n) in sig.predicates() {
        s.push_str(&format!(" (pred {p} {n})"));
    }
    for (f, n) in sig.functions() {
        s.push_str(&format!(" (fun {f} {n})"));
    }
    for fam in sig.families() {
        s.push_str(&format!(" (family {})", fam.prefix));
    }
    s.push(')');
    s
}

/// The smallest signature covering the formulas' symbols, widened by `base`.
pub fn infer_signature<'a>(base: &Signature, formulas: impl IntoIterator<Item = &'a Formula>) -> Result<Signature, String> {
    let mut sig = base.clone();
    for phi in formulas {
        for (p, n) in phi.predicates() {
            match sig.predicate_arity(&p) {
                Some(m) if m == n => {}
                Some(m) => return Err(format!("predicate `{p}` used with arities {m} and {n}")),
                None => sig.add_predicate(p, n).map_err(|e| e.to_string())?,
            }
        }
        for (f, n) in phi.functions() {
            match sig.function_arity(&f) {
                Some(m) if m == n => {}
                Some(m) => return Err(format!("function `{f}` used with arities {m} and {n}")),
                None => sig.add_function(f, n).map_err(|e| e.to_string())?,
            }
        }
        if phi.uses_equality() {
            sig = sig.with_equality(true);
        }
    }
    Ok(sig)
}

/// `(theory (signature ..) (axioms φ ..) (families (prefix-extension R) ..))`. Without a
/// signature section the signature is inferred from the axioms, the families and `extra`.
/// `(theory prefix)` is the prefix-extension theory over the family `R`.
pub fn theory_from(e: &Sexp, extra: &[Formula]) -> Result<Theory, ParseError> {
    let args = e.expect_form("theory")?;
    if args.len() == 1 && args[0].atom() == Some("prefix") {
        return Ok(Theory::prefix_theory());
    }
    check_sections(args, &["signature", "axioms", "families"])?;
    let sources: &[Sexp] = match section(args, "axioms") {
        Some(a) => a.expect_form("axioms")?,
        None => &[],
    };
    let axioms: Vec<Formula> = sources.iter().map(formula_from).collect::<Result<_, _>>()?;
    let mut families = Vec::new();
    if let Some(fs) = section(args, "families") {
        for f in fs.expect_form("families")? {
            let items = f.expect_form("prefix-extension")?;
            arity(items, 1, f, "prefix-extension")?;
            families.push(symbol(&items[0], "family prefix")?);
        }
    }
    let sig = match section(args, "signature") {
        Some(s) => signature_from(s)?,
        None => {
            let mut base = Signature::new();
            for p in &families {
                base.add_family(PredicateFamily::new(p.clone()));
            }
            infer_signature(&base, axioms.iter().chain(extra)).map_err(|m| err(e, m))?
        }
    };
    let mut t = Theory::new(sig);
    for (phi, src) in axioms.into_iter().zip(sources) {
        if !phi.free_vars().is_empty() {
            return Err(err(src, format!("axiom {phi} is not a sentence")));
        }
        t.add_axiom(phi).map_err(|x| err(src, x.to_string()))?;
    }
    for p in families {
        t.add_family(AxiomFamily::PrefixExtension { prefix: p });
    }
    Ok(t)
}

pub fn print_theory(t: &Theory) -> String {
    let mut s = format!("(theory {}", print_signature(t.signature()));
    if !t.axioms().is_empty() {
        s.push_str(" (axioms");
        for a in t.axioms() {
            s.push_str(&format!(" {a}"));
        }
        s.push(')');
    }
    if !t.families().is_empty() {
        s.push_str(" (families");
        for f in t.families() {
            match f {
                AxiomFamily::PrefixExtension { prefix } => s.push_str(&format!(" (prefix-extension {prefix})")),
            }
        }
        s.push(')');
    }
    s.push(')');
    s
}

pub fn print_rule(r: &Rule) -> String {
    let tag = r.tag();
    match r {
        Rule::LW { index }
        | Rule::RW { index }
        | Rule::LC { index }
        | Rule::RC { index }
        | Rule::LE { index }
        | Rule::RE { index }
        | Rule::RTop { index }
        | Rule::LBot { index }
        | Rule::RAnd { index }
        | Rule::LOr { index }
        | Rule::LNeg { index }
        | Rule::RNeg { index }
        | Rule::LImp { index }
        | Rule::RImp { index }
        | Rule::RForall { index }
        | Rule::LExists { index } => format!("({tag} {index})"),
        Rule::LAnd { index, side } | Rule::ROr { index, side } => format!("({tag} {index} {side})"),
        Rule::LForall { index, term } | Rule::RExists { index, term } => format!("({tag} {index} {term})"),
        Rule::Cut {
            formula,
            ante_split,
            succ_split,
        } => format!("({tag} {formula} {ante_split} {succ_split})"),
        Rule::Id | Rule::CtxEnlarge | Rule::AlphaRename => format!("({tag})"),
        Rule::EqRefl { term } => format!("({tag} {term})"),
        Rule::EqSubst { t, u, zeta, var } => format!("({tag} {t} {u} {zeta} {var})"),
        Rule::TheoryAxiom { formula } => format!("({tag} {formula})"),
    }
}

pub fn rule_from(e: &Sexp) -> Result<Rule, ParseError> {
    let items = e.expect_list("rule")?;
    let (head, args) = items.split_first().ok_or_else(|| err(e, "empty rule"))?;
    let tag = head.expect_atom("rule tag")?;
    let n = |i: usize| args[i].expect_usize("index");
    let want = |k: usize| arity(args, k, e, tag);
    Ok(match tag {
        "LW" | "RW" | "LC" | "RC" | "LE" | "RE" | "RTop" | "LBot" | "RAnd" | "LOr" | "LNeg" | "RNeg" | "LImp"
        | "RImp" | "RForall" | "LExists" => {
            want(1)?;
            let index = n(0)?;
            match tag {
                "LW" => Rule::LW { index },
                "RW" => Rule::RW { index },
                "LC" => Rule::LC { index },
                "RC" => Rule::RC { index },
                "LE" => Rule::LE { index },
                "RE" => Rule::RE { index },
                "RTop" => Rule::RTop { index },
                "LBot" => Rule::LBot { index },
                "RAnd" => Rule::RAnd { index },
                "LOr" => Rule::LOr { index },
                "LNeg" => Rule::LNeg { index },
                "RNeg" => Rule::RNeg { index },
                "LImp" => Rule::LImp { index },
                "RImp" => Rule::RImp { index },
                "RForall" => Rule::RForall { index },
                _ => Rule::LExists { index },
            }
        }
        "LAnd" | "ROr" => {
            want(2)?;
            let (index, side) = (n(0)?, n(1)?);
            if tag == "LAnd" {
                Rule::LAnd { index, side }
            } else {
                Rule::ROr { index, side }
            }
        }
        "LForall" | "RExists" => {
            want(2)?;
            let (index, term) = (n(0)?, term_from(&args[1])?);
            if tag == "LForall" {
                Rule::LForall { index, term }
            } else {
                Rule::RExists { index, term }
            }
        }
        "Cut" => {
            want(3)?;
            Rule::Cut {
                formula: formula_from(&args[0])?,
                ante_split: n(1)?,
                succ_split: n(2)?,
            }
        }
        "Id" => {
            want(0)?;
            Rule::Id
        }
        "CtxEnlarge" => {
            want(0)?;
            Rule::CtxEnlarge
        }
        "AlphaRename" => {
            want(0)?;
            Rule::AlphaRename
        }
        "EqRefl" => {
            want(1)?;
            Rule::EqRefl { term: term_from(&args[0])? }
        }
        "EqSubst" => {
            want(4)?;
            Rule::EqSubst {
                t: term_from(&args[0])?,
                u: term_from(&args[1])?,
                zeta: formula_from(&args[2])?,
                var: symbol(&args[3], "variable")?,
            }
        }
        "TheoryAxiom" => {
            want(1)?;
            Rule::TheoryAxiom {
                formula: formula_from(&args[0])?,
            }
        }
        _ => return Err(err(head, format!("unknown rule `{tag}`"))),
    })
}

pub fn print_proof(p: &ProofTree) -> String {
    let mut s = format!("(proof (rule {}) (concl {}) (premises", print_rule(&p.rule), p.conclusion);
    for q in &p.premises {
        s.push(' ');
        s.push_str(&print_proof(q));
    }
    s.push_str("))");
    s
}

pub fn proof_from(e: &Sexp) -> Result<ProofTree, ParseError> {
    let args = e.expect_form("proof")?;
    check_sections(args, &["rule", "concl", "premises"])?;
    let get = |name: &str| -> Result<&[Sexp], ParseError> {
        section(args, name)
            .ok_or_else(|| err(e, format!("proof needs a ({name} ..) section")))?
            .expect_form(name)
    };
    let r = get("rule")?;
    let rule_e = r.first().ok_or_else(|| err(e, "empty rule section"))?;
    arity(r, 1, e, "rule")?;
    let c = get("concl")?;
    arity(c, 1, e, "concl")?;
    let premises = match section(args, "premises") {
        Some(p) => p.expect_form("premises")?.iter().map(proof_from).collect::<Result<_, _>>()?,
        None => vec![],
    };
    Ok(ProofTree::new(sequent_from(&c[0])?, rule_from(rule_e)?, premises))
}

fn usize_list(items: &[Sexp]) -> Result<Vec<usize>, ParseError> {
    items.iter().map(|x| x.expect_usize("element")).collect()
}

pub fn structure_from(e: &Sexp) -> Result<FiniteStructure, ParseError> {
    let args = e.expect_form("structure")?;
    let size_e = args.first().ok_or_else(|| err(e, "structure needs (size N) first"))?;
    let sz = size_e.expect_form("size")?;
    arity(sz, 1, size_e, "size")?;
    let size = sz[0].expect_usize("size")?;
    let mut m = FiniteStructure::new(size);
    for a in &args[1..] {
        let items = a.expect_list("structure entry")?;
        let kind = a.head().unwrap_or_default();
        if (kind != "pred" && kind != "fun") || items.len() < 3 {
            return Err(err(a, "expected (pred R n tuple..) or (fun f n tuple..)"));
        }
        let name = symbol(&items[1], "symbol")?;
        let n = items[2].expect_usize("arity")?;
        let count = tuple_count(size, n).ok_or_else(|| err(a, "table too large"))?;
        let mut rows = Vec::new();
        for t in &items[3..] {
            let row = usize_list(t.expect_list("tuple")?)?;
            let want = if kind == "pred" { n } else { n + 1 };
            if row.len() != want || row.iter().any(|&v| v >= size) {
                return Err(err(t, format!("tuple must have {want} elements below {size}")));
            }
            rows.push((t, row));
        }
        if kind == "pred" {
            let tuples: Vec<Vec<usize>> = rows.into_iter().map(|(_, r)| r).collect();
            m.set_relation(&name, n, &tuples).map_err(|x| err(a, x.to_string()))?;
        } else {
            let mut table: Vec<Option<usize>> = vec![None; count];
            for (t, row) in rows {
                let i = tuple_index(size, &row[..n]);
                if table[i].replace(row[n]).is_some() {
                    return Err(err(t, "function value given twice"));
                }
            }
            let table: Option<Vec<usize>> = table.into_iter().collect();
            let table = table.ok_or_else(|| err(a, format!("function `{name}` is not total")))?;
            m.set_function(&name, n, table).map_err(|x| err(a, x.to_string()))?;
        }
    }
    Ok(m)
}

fn elem_list(items: &[Sexp]) -> Result<Vec<Elem>, ParseError> {
    items.iter().map(|x| x.expect_u64("element")).collect()
}

fn join<T: ToString>(xs: impl IntoIterator<Item = T>) -> String {
    xs.into_iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
}

pub fn print_doctrine(d: &FiniteDoctrine) -> String {
    let c = d.base();
    let obj = |x: usize| c.object_name(x).to_string();
    let mor = |f: usize| c.morphism(f).name.clone();
    let mut s = format!("(doctrine (objects {})", join(c.object_names()));
    s.push_str(" (homs");
    for m in c.morphisms() {
        s.push_str(&format!(" ({} {} {})", m.name, obj(m.dom), obj(m.cod)));
    }
    s.push_str(") (compose");
    let mut comp: Vec<(&(usize, usize), &usize)> = c.compose_table().iter().collect();
    comp.sort();
    for (&(g, f), &h) in comp {
        s.push_str(&format!(" ({} {} {})", mor(g), mor(f), mor(h)));
    }
    s.push_str(&format!(") (terminal {}) (products", obj(c.terminal())));
    for (&(x, y), p) in c.products() {
        s.push_str(&format!(" ({} {} {} {} {})", obj(x), obj(y), obj(p.object), mor(p.pr1), mor(p.pr2)));
    }
    s.push_str(") (fibers");
    for (x, a) in d.fiber_atoms().into_iter().enumerate() {
        s.push_str(&format!(" ({} {a})", obj(x)));
    }
    s.push_str(") (reindex");
    for f in 0..c.num_morphisms() {
        let h = d.reindexing(f);
        let table = d.reindex_table(f);
        let fiber = d.fiber(c.morphism(f).cod);
        if fiber.elements().all(|e| h.apply(e) == table[e as usize]) {
            s.push_str(&format!(" ({}", mor(f)));
            for a in &h.atom_map {
                s.push_str(&format!(" {a}"));
            }
            s.push(')');
        } else {
            s.push_str(&format!(" ({} (table {}))", mor(f), join(&table)));
        }
    }
    s.push(')');
    for (name, tables) in [("forall", d.forall_tables()), ("exists", d.exists_tables())] {
        if !tables.is_empty() {
            s.push_str(&format!(" ({name}"));
            for (&(x, y), t) in tables {
                s.push_str(&format!(" ({} {} {})", obj(x), obj(y), join(t)));
            }
            s.push(')');
        }
    }
    if !d.delta().is_empty() {
        s.push_str(" (delta");
        for (&x, e) in d.delta() {
            s.push_str(&format!(" ({} {e})", obj(x)));
        }
        s.push(')');
    }
    s.push(')');
    s
}

fn named<'a>(names: &BTreeMap<String, usize>, e: &'a Sexp, what: &str) -> Result<usize, ParseError> {
    let s = e.expect_atom(what)?;
    names.get(s).copied().ok_or_else(|| err(e, format!("unknown {what} `{s}`")))
}

/// The doctrine DSL. Identities are the endomorphisms that act as units in the
/// composition table; `(reindex (f a0 a1 ..))` gives the atom map of `P(f)` and
/// `(reindex (f (table e0 e1 ..)))` its full element table.
pub fn doctrine_from(e: &Sexp) -> Result<FiniteDoctrine, ParseError> {
    let args = e.expect_form("doctrine")?;
    check_sections(
        args,
        &["objects", "homs", "compose", "terminal", "products", "fibers", "reindex", "forall", "exists", "delta"],
    )?;
    let get = |name: &str| -> Result<&[Sexp], ParseError> {
        section(args, name)
            .ok_or_else(|| err(e, format!("doctrine needs a ({name} ..) section")))?
            .expect_form(name)
    };
    let opt = |name: &str| -> Result<&[Sexp], ParseError> {
        match section(args, name) {
            Some(s) => s.expect_form(name),
            None => Ok(&[]),
        }
    };
    let mut objects = Vec::new();
    let mut obj_ids = BTreeMap::new();
    for o in get("objects")? {
        let name = o.expect_atom("object")?.to_string();
        if obj_ids.insert(name.clone(), objects.len()).is_some() {
            return Err(err(o, format!("duplicate object `{name}`")));
        }
        objects.push(name);
    }
    let mut morphisms = Vec::new();
    let mut mor_ids = BTreeMap::new();
    for h in get("homs")? {
        let items = h.expect_list("hom")?;
        arity(items, 3, h, "hom entry")?;
        let name = items[0].expect_atom("hom name")?.to_string();
        let (dom, cod) = (named(&obj_ids, &items[1], "object")?, named(&obj_ids, &items[2], "object")?);
        if mor_ids.insert(name.clone(), morphisms.len()).is_some() {
            return Err(err(h, format!("duplicate hom `{name}`")));
        }
        morphisms.push(Morphism { name, dom, cod });
    }
    let mut compose = HashMap::new();
    for c in opt("compose")? {
        let items = c.expect_list("composite")?;
        arity(items, 3, c, "compose entry")?;
        let g = named(&mor_ids, &items[0], "hom")?;
        let f = named(&mor_ids, &items[1], "hom")?;
        let h = named(&mor_ids, &items[2], "hom")?;
        if compose.insert((g, f), h).is_some() {
            return Err(err(c, "composite given twice"));
        }
    }
    let identities = infer_identities(&objects, &morphisms, &compose).map_err(|m| err(e, m))?;
    let t = get("terminal")?;
    arity(t, 1, e, "terminal")?;
    let terminal = named(&obj_ids, &t[0], "object")?;
    let mut products = BTreeMap::new();
    for p in opt("products")? {
        let items = p.expect_list("product")?;
        arity(items, 5, p, "product entry")?;
        let x = named(&obj_ids, &items[0], "object")?;
        let y = named(&obj_ids, &items[1], "object")?;
        let diagram = ProductDiagram {
            object: named(&obj_ids, &items[2], "object")?,
            pr1: named(&mor_ids, &items[3], "hom")?,
            pr2: named(&mor_ids, &items[4], "hom")?,
        };
        if products.insert((x, y), diagram).is_some() {
            return Err(err(p, "product given twice"));
        }
    }
    let cat = FiniteProductCategory::new(objects, morphisms, identities, compose, terminal, products)
        .map_err(|x| err(e, x.to_string()))?;
    let mut atoms: Vec<Option<usize>> = vec![None; cat.num_objects()];
    for f in get("fibers")? {
        let items = f.expect_list("fiber")?;
        arity(items, 2, f, "fiber entry")?;
        let x = named(&obj_ids, &items[0], "object")?;
        if atoms[x].replace(items[1].expect_usize("atom count")?).is_some() {
            return Err(err(f, "fiber given twice"));
        }
    }
    let atoms: Vec<usize> = atoms
        .into_iter()
        .enumerate()
        .map(|(x, a)| a.ok_or_else(|| err(e, format!("no fiber for `{}`", cat.object_name(x)))))
        .collect::<Result<_, _>>()?;
    let mut maps: Vec<Option<BAHom>> = vec![None; cat.num_morphisms()];
    let mut tables: Vec<(usize, Vec<Elem>, &Sexp)> = Vec::new();
    for r in get("reindex")? {
        let items = r.expect_list("reindexing")?;
        let f = named(&mor_ids, items.first().ok_or_else(|| err(r, "empty reindexing"))?, "hom")?;
        let m = cat.morphism(f);
        let (src, tgt) = (atoms[m.cod], atoms[m.dom]);
        if maps[f].is_some() {
            return Err(err(r, "reindexing given twice"));
        }
        if items.len() == 2 && items[1].head() == Some("table") {
            tables.push((f, elem_list(items[1].expect_form("table")?)?, r));
            maps[f] = Some(BAHom::new(src, vec![0; if src == 0 { 0 } else { tgt }]));
        } else {
            let map = usize_list(&items[1..])?;
            let h = BAHom::new(src, map);
            if h.atom_map.len() != tgt || !h.is_valid() {
                return Err(err(r, format!("atom map of `{}` needs {tgt} entries below {src}", m.name)));
            }
            maps[f] = Some(h);
        }
    }
    let maps: Vec<BAHom> = maps
        .into_iter()
        .enumerate()
        .map(|(f, h)| h.ok_or_else(|| err(e, format!("no reindexing for `{}`", cat.morphism(f).name))))
        .collect::<Result<_, _>>()?;
    let mut d = FiniteDoctrine::new(Arc::new(cat), atoms, maps).map_err(|x| err(e, x.to_string()))?;
    for (f, table, r) in tables {
        d.set_reindex_table(f, table).map_err(|x| err(r, x.to_string()))?;
    }
    for name in ["forall", "exists"] {
        for q in opt(name)? {
            let items = q.expect_list("quantifier table")?;
            if items.len() < 2 {
                return Err(err(q, "expected (X Y e0 e1 ..)"));
            }
            let x = named(&obj_ids, &items[0], "object")?;
            let y = named(&obj_ids, &items[1], "object")?;
            let table = elem_list(&items[2..])?;
            let r = if name == "forall" {
                d.set_forall(x, y, table)
            } else {
                d.set_exists(x, y, table)
            };
            r.map_err(|m| err(q, m.to_string()))?;
        }
    }
    for q in opt("delta")? {
        let items = q.expect_list("delta entry")?;
        arity(items, 2, q, "delta entry")?;
        let x = named(&obj_ids, &items[0], "object")?;
        let v = items[1].expect_u64("element")?;
        let p = d.base().product(x, x).ok_or_else(|| err(q, "delta needs a chosen product X x X"))?;
        if !d.fiber(p.object).contains(v) {
            return Err(err(q, format!("element {v} is not in the fiber over the product")));
        }
        d.set_delta(x, v);
    }
    Ok(d)
}

fn infer_identities(
    objects: &[String],
    morphisms: &[Morphism],
    compose: &HashMap<(usize, usize), usize>,
) -> Result<Vec<usize>, String> {
    (0..objects.len())
        .map(|x| {
            morphisms
                .iter()
                .enumerate()
                .filter(|(_, m)| m.dom == x && m.cod == x)
                .map(|(i, _)| i)
                .find(|&i| {
                    morphisms.iter().enumerate().all(|(g, m)| {
                        (m.dom != x || compose.get(&(g, i)) == Some(&g)) && (m.cod != x || compose.get(&(i, g)) == Some(&g))
                    })
                })
                .ok_or_else(|| format!("no identity on `{}`", objects[x]))
        })
        .collect()
}

pub fn marking_from(e: &Sexp) -> Result<MarkingDoc, ParseError> {
    let mut out = BTreeMap::new();
    for m in e.expect_form("marking")? {
        let items = m.expect_list("marking entry")?;
        let (name, elems) = items.split_first().ok_or_else(|| err(m, "empty marking entry"))?;
        let name = name.expect_atom("object")?.to_string();
        if out.insert(name, elem_list(elems)?.into_iter().collect()).is_some() {
            return Err(err(m, "object marked twice"));
        }
    }
    Ok(MarkingDoc(out))
}

pub fn print_marking(m: &MarkingDoc) -> String {
    let mut s = String::from("(marking");
    for (name, elems) in &m.0 {
        s.push_str(&format!(" ({name}"));
        for e in elems {
            s.push_str(&format!(" {e}"));
        }
        s.push(')');
    }
    s.push(')');
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sexp::Pos;

    fn round(text: &str) -> String {
        let d = parse(text).unwrap();
        let p = d.print();
        assert_eq!(parse(&p).unwrap(), d, "{p}");
        p
    }

    #[test]
    fn formulas_print_canonically() {
        assert_eq!(round("(and true false)"), "(fic (ctx) (and true false))");
        assert_eq!(round("(forall x (R x))"), "(fic (ctx) (forall x (R x)))");
        assert_eq!(round("(and a b c)"), "(fic (ctx) (and (and a b) c))");
        assert_eq!(round("(exists (x y) (= x (f y)))"), "(fic (ctx) (exists x (exists y (= x (f y)))))");
    }

    #[test]
    fn duplicate_context_variables_are_rejected() {
        let e = parse("(seq (ctx x x) (ants) (sucs))").unwrap_err();
        assert_eq!(e.pos, Pos { line: 1, col: 6 });
        assert!(parse("(seq (ctx) (ants (P x)) (sucs))").is_err());
    }

    #[test]
    fn reserved_words_are_not_symbols() {
        assert!(parse("(forall and (P and))").is_err());
        assert!(parse("(not a b)").is_err());
    }

    #[test]
    fn theories_and_signatures() {
        round("(signature (equality) (pred P 1) (fun f 2) (family R))");
        let t = round("(theory (axioms (forall x (P x))))");
        assert_eq!(t, "(theory (signature (pred P 1)) (axioms (forall x (P x))))");
        round("(theory prefix)");
        assert!(parse("(theory (axioms (P x)))").is_err());
    }

    #[test]
    fn structures_round_trip() {
        round("(structure (size 2) (pred P 1 (1)) (fun f 1 (0 1) (1 1)))");
        assert!(parse("(structure (size 2) (fun f 1 (0 1)))").is_err());
    }

    #[test]
    fn markings_round_trip() {
        round("(marking (X 0 3) (Y))");
    }
}
