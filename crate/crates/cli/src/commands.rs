use std::path::Path;

use clap::{Parser, Subcommand, ValueEnum};
use doctrina::calculus::{check_proof, prove_bounded, Budget, SearchFailure, Sequent};
use doctrina::doctrine::fragment::full_marking;
use doctrina::doctrine::{
    colimit, find_fibered_equalities, stratify, verify_boolean_doctrine, verify_elementary, verify_first_order,
    verify_one_step, verify_qa_stratified, verify_qff, FiniteDoctrine, Marking, Report, Violation,
};
use doctrina::formula::{Formula, FormulaInContext};
use doctrina::lang::{Context, Signature};
use doctrina::prefix::{does_not_generate_demo, intersection_experiment, PrefixOracle};
use doctrina::syntactic::{
    completion_leq_with, countermodel_search, qa_depth_modulo, universal_consequences, BoundedOracle, CompletionConfig,
    Countermodel, DepthBounds, EntailmentOracle, TruthTableOracle, Verdict,
};
use doctrina::theory::Theory;
use thiserror::Error;

use crate::document::{
    doctrine_from, fic_from, infer_signature, marking_from, print_proof, proof_from, sequent_from, theory_from,
};
use crate::sexp::{read, ParseError, Sexp};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_UNKNOWN: i32 = 2;
pub const EXIT_INPUT: i32 = 3;

/// Exit code plus the buffered output streams.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl Outcome {
    fn report(code: i32, lines: Vec<String>) -> Self {
        let mut stdout = lines.join("\n");
        if !stdout.is_empty() {
            stdout.push('\n');
        }
        Self {
            code,
            stdout,
            stderr: String::new(),
        }
    }

    pub fn lines(&self) -> Vec<&str> {
        self.stdout.lines().collect()
    }
}

#[derive(Debug, Error)]
enum CliError {
    #[error("{what}: parse error at {source}")]
    Parse { what: String, source: ParseError },
    #[error("{0}")]
    Input(String),
}

type CliResult<T> = Result<T, CliError>;

#[derive(Parser, Debug)]
#[command(name = "doctrina", version, about = "Boolean doctrines, sequent proofs and finite model checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check a proof tree against the calculus.
    CheckProof {
        proof: String,
        #[arg(long)]
        theory: Option<String>,
    },
    /// Bounded proof search for a sequent.
    Prove {
        sequent: String,
        #[arg(long)]
        theory: Option<String>,
        /// Quantifier-instantiation depth; defaults to DOCTRINA_BUDGET or 6.
        #[arg(long)]
        budget: Option<usize>,
        #[arg(long, default_value_t = 1)]
        term_depth: usize,
    },
    /// Quantifier-alternation depth, syntactic or modulo a theory.
    QaDepth {
        formula: String,
        #[arg(long)]
        theory: Option<String>,
    },
    /// Decide `phi ≤ psi` with an entailment oracle.
    Entail {
        phi: String,
        psi: String,
        #[arg(long, value_enum, default_value_t = OracleKind::Bounded)]
        oracle: OracleKind,
        #[arg(long)]
        theory: Option<String>,
        #[arg(long)]
        budget: Option<usize>,
    },
    /// Verify the axioms of a finite doctrine.
    VerifyDoctrine {
        doctrine: String,
        #[arg(long, value_enum, default_value_t = Level::FirstOrder)]
        level: Level,
        /// Quantifier-free marking for the fragment levels; defaults to every element.
        #[arg(long)]
        marking: Option<String>,
    },
    /// Stratify a doctrine from a quantifier-free marking and check the round trip.
    Stratify { doctrine: String, marking: String },
    /// Experiments on the prefix theory.
    PrefixDemo {
        #[arg(value_enum)]
        demo: Demo,
        #[arg(long, default_value_t = 1)]
        k: usize,
        #[arg(long, default_value_t = 2)]
        arity: usize,
        #[arg(long, default_value_t = 3)]
        nmax: usize,
    },
    /// Universal consequences of a theory and order queries in its completion.
    Complete {
        theory: String,
        #[arg(long)]
        budget: Option<usize>,
        #[arg(long, requires = "rhs")]
        lhs: Option<String>,
        #[arg(long, requires = "lhs")]
        rhs: Option<String>,
    },
    /// Countermodel search up to a structure size.
    Models {
        sequent: String,
        #[arg(long)]
        theory: Option<String>,
        #[arg(long, default_value_t = 3)]
        size: usize,
        /// Largest instance of each axiom family the model must satisfy.
        #[arg(long, default_value_t = 3)]
        axiom_bound: usize,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum OracleKind {
    Truthtable,
    Prefix,
    Bounded,
}

#[derive(Clone, Copy, Debug, ValueEnum, PartialEq, Eq)]
enum Level {
    Boolean,
    FirstOrder,
    Elementary,
    Qff,
    OneStep,
    Stratified,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Demo {
    Intersection,
    NoLeast,
    Separations,
}

/// Runs one invocation; `args` includes the program name.
pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let text = e.render().to_string();
            return if e.use_stderr() {
                Outcome {
                    code,
                    stdout: String::new(),
                    stderr: text,
                }
            } else {
                Outcome {
                    code,
                    stdout: text,
                    stderr: String::new(),
                }
            };
        }
    };
    match dispatch(cli.command) {
        Ok(o) => o,
        Err(e) => Outcome {
            code: EXIT_INPUT,
            stdout: String::new(),
            stderr: format!("ERROR {e}\n"),
        },
    }
}

fn dispatch(cmd: Command) -> CliResult<Outcome> {
    match cmd {
        Command::CheckProof { proof, theory } => check_proof_cmd(&proof, theory.as_deref()),
        Command::Prove {
            sequent,
            theory,
            budget,
            term_depth,
        } => prove_cmd(&sequent, theory.as_deref(), budget, term_depth),
        Command::QaDepth { formula, theory } => qa_depth_cmd(&formula, theory.as_deref()),
        Command::Entail {
            phi,
            psi,
            oracle,
            theory,
            budget,
        } => entail_cmd(&phi, &psi, oracle, theory.as_deref(), budget),
        Command::VerifyDoctrine {
            doctrine,
            level,
            marking,
        } => verify_doctrine_cmd(&doctrine, level, marking.as_deref()),
        Command::Stratify { doctrine, marking } => stratify_cmd(&doctrine, &marking),
        Command::PrefixDemo { demo, k, arity, nmax } => prefix_demo_cmd(demo, k, arity, nmax),
        Command::Complete {
            theory,
            budget,
            lhs,
            rhs,
        } => complete_cmd(&theory, budget, lhs.zip(rhs)),
        Command::Models {
            sequent,
            theory,
            size,
            axiom_bound,
        } => models_cmd(&sequent, theory.as_deref(), size, axiom_bound),
    }
}

/// An argument is inline text when it starts with `(` or names no file.
fn load(arg: &str) -> CliResult<String> {
    let t = arg.trim_start();
    if t.starts_with('(') || !Path::new(arg).is_file() {
        return Ok(arg.to_string());
    }
    std::fs::read_to_string(arg).map_err(|e| CliError::Input(format!("cannot read {arg}: {e}")))
}

fn read_arg(what: &str, arg: &str) -> CliResult<Sexp> {
    let text = load(arg)?;
    read(&text).map_err(|source| CliError::Parse {
        what: what.into(),
        source,
    })
}

fn parsed<T>(what: &str, r: Result<T, ParseError>) -> CliResult<T> {
    r.map_err(|source| CliError::Parse {
        what: what.into(),
        source,
    })
}

/// The theory from `--theory`, or the empty theory over the symbols of `formulas`.
fn theory_arg(arg: Option<&str>, formulas: &[Formula]) -> CliResult<Theory> {
    match arg {
        Some(a) => {
            let e = read_arg("theory", a)?;
            parsed("theory", theory_from(&e, formulas))
        }
        None => Ok(Theory::new(
            infer_signature(&Signature::new(), formulas).map_err(CliError::Input)?,
        )),
    }
}

fn env_budget() -> CliResult<Option<usize>> {
    match std::env::var("DOCTRINA_BUDGET") {
        Ok(v) => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| CliError::Input(format!("DOCTRINA_BUDGET must be a number, found `{v}`"))),
        Err(_) => Ok(None),
    }
}

fn budget_of(flag: Option<usize>, term_depth: usize) -> CliResult<Budget> {
    let depth = match flag {
        Some(b) => b,
        None => env_budget()?.unwrap_or(Budget::default().max_depth),
    };
    Ok(Budget {
        max_depth: depth,
        max_term_depth: term_depth,
        ..Budget::default()
    })
}

fn well_formed(s: &Sequent, t: &Theory) -> CliResult<()> {
    s.well_formed(t)
        .map_err(|m| CliError::Input(format!("sequent is not well formed: {m}")))
}

fn countermodel_note(c: &Countermodel) -> String {
    if c.structure.size() == 0 {
        format!("NOTE countermodel size=0 empty structure {c}")
    } else {
        format!("NOTE countermodel size={} {c}", c.structure.size())
    }
}

fn verdict_outcome(v: &Verdict) -> Outcome {
    match v {
        Verdict::Proved(p) => Outcome::report(EXIT_OK, vec!["VERDICT proved".into(), format!("CERTIFICATE {}", print_proof(p))]),
        Verdict::Refuted(c) => {
            let mut lines = vec!["VERDICT refuted".into(), format!("CERTIFICATE {c}")];
            if c.structure.size() == 0 {
                lines.push("NOTE empty structure".into());
            }
            Outcome::report(EXIT_FAIL, lines)
        }
        Verdict::Unknown(why) => Outcome::report(EXIT_UNKNOWN, vec!["VERDICT unknown".into(), format!("NOTE {why}")]),
    }
}

fn check_proof_cmd(proof: &str, theory: Option<&str>) -> CliResult<Outcome> {
    let e = read_arg("proof", proof)?;
    let p = parsed("proof", proof_from(&e))?;
    let mut formulas = Vec::new();
    p.walk(&mut |_, node| formulas.extend(node.conclusion.formulas().cloned()));
    let t = theory_arg(theory, &formulas)?;
    let mut r = Report::new();
    if let Err(err) = check_proof(&p, &t) {
        let path = err.path.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(".");
        r.push(
            Violation::new("invalid-proof")
                .with("path", if path.is_empty() { "root".into() } else { path })
                .with("reason", err.reason),
        );
    }
    let code = if r.passed() { EXIT_OK } else { EXIT_FAIL };
    let mut lines = r.lines();
    if r.passed() {
        lines.push(format!("NOTE nodes={} height={}", p.size(), p.height()));
    }
    Ok(Outcome::report(code, lines))
}

fn prove_cmd(sequent: &str, theory: Option<&str>, budget: Option<usize>, term_depth: usize) -> CliResult<Outcome> {
    let e = read_arg("sequent", sequent)?;
    let s = parsed("sequent", sequent_from(&e))?;
    let t = theory_arg(theory, &s.formulas().cloned().collect::<Vec<_>>())?;
    well_formed(&s, &t)?;
    let budget = budget_of(budget, term_depth)?;
    match prove_bounded(&s, &t, budget) {
        Ok(p) => Ok(Outcome::report(
            EXIT_OK,
            vec!["VERDICT proved".into(), format!("CERTIFICATE {}", print_proof(&p))],
        )),
        Err(failure) => {
            let why = match failure {
                SearchFailure::Saturated => "saturated",
                SearchFailure::BudgetExhausted => "budget-exhausted",
            };
            let mut lines = vec![
                "VERDICT unknown".to_string(),
                format!("NOTE search={why} depth={}", budget.max_depth),
            ];
            if let Some(c) = countermodel_search(&s, &t, 2, 3).model {
                lines.push(countermodel_note(&c));
            }
            Ok(Outcome::report(EXIT_UNKNOWN, lines))
        }
    }
}

fn qa_depth_cmd(formula: &str, theory: Option<&str>) -> CliResult<Outcome> {
    let e = read_arg("formula", formula)?;
    let phi = parsed("formula", fic_from(&e))?;
    let Some(_) = theory else {
        return Ok(Outcome::report(EXIT_OK, vec![phi.formula().qa_depth().to_string()]));
    };
    let t = theory_arg(theory, &[phi.formula().clone()])?;
    phi.formula()
        .check(t.signature())
        .map_err(|m| CliError::Input(m.to_string()))?;
    let d = qa_depth_modulo(&t, &BoundedOracle::default(), &phi, DepthBounds::default());
    let mut lines = vec![format!("DEPTH lower={} upper={}", d.lower, d.upper)];
    if let Some(w) = &d.witness {
        lines.push(format!("CERTIFICATE {w}"));
    }
    let code = if d.lower == d.upper { EXIT_OK } else { EXIT_UNKNOWN };
    Ok(Outcome::report(code, lines))
}

/// Both formulas over one context: a shared `fic` context, or their sorted free variables.
fn common_context(phi: &FormulaInContext, psi: &FormulaInContext) -> CliResult<Context> {
    if phi.ctx() == psi.ctx() {
        return Ok(phi.ctx().clone());
    }
    let mut vars = phi.formula().free_vars();
    vars.extend(psi.formula().free_vars());
    let ctx = Context::new(vars).map_err(|e| CliError::Input(e.to_string()))?;
    Ok(ctx)
}

fn pair_in_context(a: &str, b: &str) -> CliResult<(Context, Formula, Formula)> {
    let phi = parsed("phi", fic_from(&read_arg("phi", a)?))?;
    let psi = parsed("psi", fic_from(&read_arg("psi", b)?))?;
    let ctx = common_context(&phi, &psi)?;
    Ok((ctx, phi.formula().clone(), psi.formula().clone()))
}

fn entail_cmd(phi: &str, psi: &str, oracle: OracleKind, theory: Option<&str>, budget: Option<usize>) -> CliResult<Outcome> {
    let (ctx, a, b) = pair_in_context(phi, psi)?;
    let t = match (oracle, theory) {
        (OracleKind::Prefix, None) => Theory::prefix_theory(),
        _ => theory_arg(theory, &[a.clone(), b.clone()])?,
    };
    let s = Sequent::new(ctx, vec![a], vec![b]);
    well_formed(&s, &t)?;
    let v = match oracle {
        OracleKind::Truthtable => TruthTableOracle.decide(&s, &t),
        OracleKind::Prefix => PrefixOracle.decide(&s, &t),
        OracleKind::Bounded => BoundedOracle::with_budget(budget_of(budget, 1)?).decide(&s, &t),
    };
    Ok(verdict_outcome(&v))
}

fn doctrine_arg(arg: &str) -> CliResult<FiniteDoctrine> {
    let e = read_arg("doctrine", arg)?;
    parsed("doctrine", doctrine_from(&e))
}

fn marking_arg(d: &FiniteDoctrine, arg: Option<&str>) -> CliResult<Marking> {
    match arg {
        None => Ok(full_marking(d)),
        Some(a) => {
            let e = read_arg("marking", a)?;
            parsed("marking", marking_from(&e))?
                .resolve(d)
                .map_err(CliError::Input)
        }
    }
}

fn report_outcome(mut info: Vec<String>, r: &Report) -> Outcome {
    info.extend(r.lines());
    Outcome::report(if r.passed() { EXIT_OK } else { EXIT_FAIL }, info)
}

fn verify_doctrine_cmd(doctrine: &str, level: Level, marking: Option<&str>) -> CliResult<Outcome> {
    let d = doctrine_arg(doctrine)?;
    let mut info = Vec::new();
    let r = match level {
        Level::Boolean => verify_boolean_doctrine(&d),
        Level::FirstOrder => verify_first_order(&d),
        Level::Elementary => {
            let mut r = verify_first_order(&d);
            let delta = if d.delta().is_empty() {
                let search = find_fibered_equalities(&d);
                match search.family {
                    Some(f) => f,
                    None => {
                        for (x, c) in &search.candidates {
                            if c.len() != 1 {
                                r.push(
                                    Violation::new("no-equality")
                                        .with("X", d.obj_name(*x))
                                        .with("candidates", c.len()),
                                );
                            }
                        }
                        if r.passed() {
                            r.push(Violation::new("no-equality"));
                        }
                        return Ok(report_outcome(info, &r));
                    }
                }
            } else {
                d.delta().clone()
            };
            for (&x, e) in &delta {
                info.push(format!("EQUALITY X={} elem={e}", d.obj_name(x)));
            }
            r.extend(verify_elementary(&d, &delta));
            r
        }
        Level::Qff => verify_qff(&d, &marking_arg(&d, marking)?),
        Level::OneStep | Level::Stratified => {
            let m = marking_arg(&d, marking)?;
            let q = verify_qff(&d, &m);
            if !q.passed() {
                return Ok(report_outcome(info, &q));
            }
            let s = stratify(&d, &m).map_err(|e| CliError::Input(e.to_string()))?;
            if level == Level::Stratified {
                verify_qa_stratified(&s)
            } else {
                let mut r = Report::new();
                for n in 0..s.stabilization_index() {
                    for v in verify_one_step(&d, s.level(n), s.level(n + 1), s.quantifiers(n)).violations() {
                        r.push(v.with("n", n));
                    }
                }
                r
            }
        }
    };
    Ok(report_outcome(info, &r))
}

fn stratify_cmd(doctrine: &str, marking: &str) -> CliResult<Outcome> {
    let d = doctrine_arg(doctrine)?;
    let m = marking_arg(&d, Some(marking))?;
    let q = verify_qff(&d, &m);
    if !q.passed() {
        return Ok(report_outcome(vec![], &q));
    }
    let s = stratify(&d, &m).map_err(|e| CliError::Input(e.to_string()))?;
    let mut info = Vec::new();
    for (n, level) in s.levels.iter().enumerate() {
        for (x, sub) in level.iter().enumerate() {
            info.push(format!("LEVEL n={n} X={} blocks={} full={}", d.obj_name(x), sub.blocks().len(), sub.is_full()));
        }
    }
    info.push(format!("STABILIZES n={}", s.stabilization_index()));
    let mut r = verify_qa_stratified(&s);
    match colimit(&s) {
        Ok((back, p0)) => {
            for f in 0..d.base().num_morphisms() {
                if back.reindex_table(f) != d.reindex_table(f) {
                    r.push(Violation::new("colimit-reindexing").with("f", d.mor_name(f)));
                }
            }
            for &(x, y) in d.base().products().keys() {
                if back.universal(x, y) != d.universal(x, y) {
                    r.push(
                        Violation::new("colimit-quantifier")
                            .with("X", d.obj_name(x))
                            .with("Y", d.obj_name(y)),
                    );
                }
            }
            if p0 != m {
                for x in (0..m.len()).filter(|&x| p0[x] != m[x]) {
                    r.push(Violation::new("colimit-marking").with("X", d.obj_name(x)));
                }
            }
        }
        Err(e) => r.push(Violation::new("colimit-undefined").with("reason", e)),
    }
    Ok(report_outcome(info, &r))
}

fn without_verdict(lines: Vec<String>) -> Vec<String> {
    lines.into_iter().filter(|l| !l.starts_with("VERDICT")).collect()
}

fn prefix_demo_cmd(demo: Demo, k: usize, arity: usize, nmax: usize) -> CliResult<Outcome> {
    let input = |e: doctrina::prefix::PrefixError| CliError::Input(e.to_string());
    let (lines, passed) = match demo {
        Demo::Intersection => {
            let r = intersection_experiment(k, arity, nmax).map_err(input)?;
            (r.lines(), r.report.passed())
        }
        Demo::Separations => {
            let r = does_not_generate_demo();
            (r.lines(), r.report.passed())
        }
        Demo::NoLeast => {
            let i = intersection_experiment(k, arity, nmax).map_err(input)?;
            let s = does_not_generate_demo();
            let passed = i.report.passed() && s.report.passed();
            let mut lines = without_verdict(i.lines());
            lines.extend(without_verdict(s.lines()));
            lines.push(format!("VERDICT {}", if passed { "pass" } else { "fail" }));
            (lines, passed)
        }
    };
    Ok(Outcome::report(if passed { EXIT_OK } else { EXIT_FAIL }, lines))
}

fn complete_cmd(theory: &str, budget: Option<usize>, query: Option<(String, String)>) -> CliResult<Outcome> {
    let (ctx, a, b) = match &query {
        Some((l, r)) => {
            let (ctx, a, b) = pair_in_context(l, r)?;
            (ctx, vec![a.clone(), b.clone()], Some((a, b)))
        }
        None => (Context::empty(), vec![], None),
    };
    let t = theory_arg(Some(theory), &a)?;
    let cfg = CompletionConfig {
        budget: budget_of(budget, 1)?,
        ..CompletionConfig::default()
    };
    let cs = universal_consequences(&t, &cfg);
    let mut lines: Vec<String> = cs.iter().map(|c| format!("CONSEQUENCE {}", c.sentence)).collect();
    let Some((a, b)) = b else {
        lines.push("VERDICT pass".into());
        return Ok(Outcome::report(EXIT_OK, lines));
    };
    let fic = |f: Formula| FormulaInContext::new(ctx.clone(), f).map_err(|e| CliError::Input(e.to_string()));
    let (a, b) = (fic(a)?, fic(b)?);
    for f in [&a, &b] {
        f.formula()
            .check(t.signature())
            .map_err(|e| CliError::Input(e.to_string()))?;
    }
    let c = completion_leq_with(&t, &cs, &a, &b, &cfg.oracle).map_err(|e| CliError::Input(e.to_string()))?;
    let out = verdict_outcome(&c.verdict);
    lines.extend(out.lines().iter().map(|l| l.to_string()));
    Ok(Outcome::report(out.code, lines))
}

fn models_cmd(sequent: &str, theory: Option<&str>, size: usize, axiom_bound: usize) -> CliResult<Outcome> {
    let e = read_arg("sequent", sequent)?;
    let s = parsed("sequent", sequent_from(&e))?;
    let t = theory_arg(theory, &s.formulas().cloned().collect::<Vec<_>>())?;
    well_formed(&s, &t)?;
    let out = countermodel_search(&s, &t, size, axiom_bound);
    Ok(match out.model {
        Some(c) => verdict_outcome(&Verdict::Refuted(c)),
        None => {
            let scope = match out.exhaustive_through {
                Some(n) => format!("NOTE no countermodel exhaustive-through={n}"),
                None => "NOTE no countermodel found".to_string(),
            };
            Outcome::report(EXIT_UNKNOWN, vec!["VERDICT unknown".into(), scope])
        }
    })
}
