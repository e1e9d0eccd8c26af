//! Argument parsing, command dispatch, and the run report.
//!
//! Every invocation prints exactly one JSON run report on stdout:
//! `{"command", "status", "result", "timing_ms"}`.  The process exit code
//! mirrors the status: 0 for `ok`, 1 for `input-error`, 2 for
//! `check-failed` (a counterexample, a failed precondition, or a missing
//! convergence certificate), and 3 for `budget-exceeded`.
//!
//! Budgets resolve in increasing precedence: built-in defaults, the
//! document's `budgets` block, the `TGRW_BUDGET_STEPS` environment variable
//! (steps only), then the `--max-steps`/`--max-nodes`/`--max-len` flags.

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use tgrw_core::error::Result;
use tgrw_core::{
    arith_compose, arith_invariant, certify_convergence, check_local_confluence,
    group_presentation, pbw_normal_order, pbw_system, shuffle_prefab_invariant, shuffle_set,
    tutte_polynomial, weyl_normal_order, Budgets, ConfluenceStatus, ConvergenceReport, Error,
    Letter, Presentation, ReductionOutcome, RewriteSystem, Strategy, TerminationStatus, Trace,
};

use crate::doc::{
    document_budgets, load_system, parse_graph_document, parse_system_document, BudgetsDoc,
    LoadedSystem,
};

/// Rewriting in trace monoids: normal forms, convergence checks, group
/// invariants, and the bundled combinatorial packs.
#[derive(Debug, Parser)]
#[command(name = "tgrw", version, about)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub budgets: BudgetArgs,
}

/// Budget overrides; these beat the environment, which beats the document.
#[derive(Debug, Args)]
pub struct BudgetArgs {
    /// Maximum rewrite steps per normalization.
    #[arg(long = "max-steps", global = true, value_name = "N")]
    pub max_steps: Option<usize>,
    /// Maximum nodes per reduct-set or joinability search.
    #[arg(long = "max-nodes", global = true, value_name = "N")]
    pub max_nodes: Option<usize>,
    /// Maximum intermediate trace length.
    #[arg(long = "max-len", global = true, value_name = "N")]
    pub max_len: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Verify termination weights and local confluence for a system document.
    Check {
        /// Path to a system document (explicit tables or a named pack).
        system: PathBuf,
    },
    /// Reduce a trace to normal form.
    Normalize {
        system: PathBuf,
        /// The trace, one letter token per argument.
        #[arg(required = true)]
        trace: Vec<String>,
        #[arg(long, value_enum, default_value_t = StrategyArg::Leftmost)]
        strategy: StrategyArg,
        /// Seed for the random strategy.
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// List the irreducible letters in the document's scope.
    Irr { system: PathBuf },
    /// Decide Thue equivalence of two traces (certifies the system first).
    Equiv {
        system: PathBuf,
        #[arg(long, required = true, num_args = 1..)]
        left: Vec<String>,
        #[arg(long, required = true, num_args = 1..)]
        right: Vec<String>,
    },
    /// Universal group invariant of a letter (certifies the system first).
    Invariant { system: PathBuf, letter: String },
    /// Group presentation of the system over explicit generators.
    Present {
        system: PathBuf,
        /// Generator letters, in presentation order.
        #[arg(required = true)]
        generators: Vec<String>,
    },
    /// Tutte polynomial of a multigraph document.
    Tutte {
        /// Path to `{"vertices": n, "edges": [[u, v], ...]}`.
        graph: PathBuf,
    },
    /// Normally order a word in the Weyl letters (a, b, and central c).
    Weyl { word: String },
    /// Straighten a word over a totally ordered base alphabet.
    Pbw {
        word: String,
        /// Base order; defaults to the word's letters in sorted order.
        #[arg(long)]
        base: Option<String>,
    },
    /// Prefab combinatorics: factorizations and shuffles.
    Prefab {
        #[command(subcommand)]
        op: PrefabOp,
    },
}

#[derive(Debug, Subcommand)]
pub enum PrefabOp {
    /// With one argument, the prime invariant of m; with two, all
    /// compositions of factorizations of m and n.
    Arith { m: u64, n: Option<u64> },
    /// With two words, their shuffle set; with one, its letter counts.
    Shuffle { u: String, v: Option<String> },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum StrategyArg {
    Leftmost,
    Rightmost,
    Random,
}

/// Final status of a run, in one-to-one correspondence with the exit code.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Ok,
    InputError,
    CheckFailed,
    BudgetExceeded,
}

impl Status {
    pub fn code(self) -> i32 {
        match self {
            Status::Ok => 0,
            Status::InputError => 1,
            Status::CheckFailed => 2,
            Status::BudgetExceeded => 3,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Status::Ok => "ok",
            Status::InputError => "input-error",
            Status::CheckFailed => "check-failed",
            Status::BudgetExceeded => "budget-exceeded",
        }
    }
}

/// Sort errors into the exit-code classes.
pub fn classify_error(error: &Error) -> Status {
    match error {
        Error::InvalidLetter { .. }
        | Error::EmptyTrace
        | Error::AlphabetMismatch { .. }
        | Error::InvalidInput(_)
        | Error::Unsupported(_) => Status::InputError,
        Error::MissingCertificate { .. } | Error::Precondition(_) => Status::CheckFailed,
        Error::ResourceExceeded(_) | Error::Budget(_) => Status::BudgetExceeded,
    }
}

/// Parse arguments, run, print the report, and exit with the status code.
pub fn main_entry() -> ! {
    let cli = Cli::parse();
    let started = Instant::now();
    let (status, result) = execute(&cli);
    let report = json!({
        "command": command_name(&cli.command),
        "status": status.label(),
        "result": result,
        "timing_ms": started.elapsed().as_millis() as u64,
    });
    println!("{}", serde_json::to_string_pretty(&report).expect("report serializes"));
    std::process::exit(status.code());
}

pub fn command_name(command: &Command) -> &'static str {
    match command {
        Command::Check { .. } => "check",
        Command::Normalize { .. } => "normalize",
        Command::Irr { .. } => "irr",
        Command::Equiv { .. } => "equiv",
        Command::Invariant { .. } => "invariant",
        Command::Present { .. } => "present",
        Command::Tutte { .. } => "tutte",
        Command::Weyl { .. } => "weyl",
        Command::Pbw { .. } => "pbw",
        Command::Prefab { .. } => "prefab",
    }
}

/// Run one command, folding errors into their status class.
pub fn execute(cli: &Cli) -> (Status, Value) {
    let outcome = match &cli.command {
        Command::Check { system } => cmd_check(system, &cli.budgets),
        Command::Normalize {
            system,
            trace,
            strategy,
            seed,
        } => cmd_normalize(system, trace, *strategy, *seed, &cli.budgets),
        Command::Irr { system } => cmd_irr(system, &cli.budgets),
        Command::Equiv {
            system,
            left,
            right,
        } => cmd_equiv(system, left, right, &cli.budgets),
        Command::Invariant { system, letter } => cmd_invariant(system, letter, &cli.budgets),
        Command::Present { system, generators } => cmd_present(system, generators, &cli.budgets),
        Command::Tutte { graph } => cmd_tutte(graph),
        Command::Weyl { word } => cmd_weyl(word),
        Command::Pbw { word, base } => cmd_pbw(word, base.as_deref()),
        Command::Prefab { op } => cmd_prefab(op),
    };
    match outcome {
        Ok(pair) => pair,
        Err(e) => (classify_error(&e), json!({ "error": e.to_string() })),
    }
}

/// Merge budget sources in precedence order.
pub fn resolve_budgets(doc: Option<&BudgetsDoc>, args: &BudgetArgs) -> Result<Budgets> {
    let mut budgets = Budgets::default();
    if let Some(doc) = doc {
        budgets = doc.apply(budgets);
    }
    if let Some(raw) = std::env::var_os("TGRW_BUDGET_STEPS") {
        let text = raw.to_string_lossy();
        budgets.max_steps = text.trim().parse().map_err(|_| {
            Error::InvalidInput(format!(
                "TGRW_BUDGET_STEPS must be a nonnegative integer, got {text:?}"
            ))
        })?;
    }
    if let Some(v) = args.max_steps {
        budgets.max_steps = v;
    }
    if let Some(v) = args.max_nodes {
        budgets.max_reduct_nodes = v;
    }
    if let Some(v) = args.max_len {
        budgets.max_trace_len = v;
    }
    Ok(budgets)
}

fn read_file(path: &Path) -> Result<String> {
    std::fs::read_to_string(path)
        .map_err(|e| Error::InvalidInput(format!("cannot read {}: {e}", path.display())))
}

fn load_from_path(path: &Path, args: &BudgetArgs) -> Result<(LoadedSystem, Budgets)> {
    let doc = parse_system_document(&read_file(path)?)?;
    let budgets = resolve_budgets(document_budgets(&doc).as_ref(), args)?;
    Ok((load_system(&doc, budgets)?, budgets))
}

fn require_scope(loaded: &LoadedSystem) -> Result<&tgrw_core::Scope> {
    loaded.scope.as_ref().ok_or_else(|| {
        Error::Unsupported(
            "this system has no enumerable letter scope; checks need one".into(),
        )
    })
}

fn trace_json(trace: &Trace) -> Value {
    Value::from(trace.tokens())
}

fn termination_json(status: &TerminationStatus) -> Value {
    match status {
        TerminationStatus::Certified { exhaustive } => {
            json!({ "status": "certified", "exhaustive": exhaustive })
        }
        TerminationStatus::Unknown { reason } => json!({ "status": "unknown", "reason": reason }),
        TerminationStatus::RefutedByCycle { cycle } => json!({
            "status": "refuted-by-cycle",
            "cycle": cycle.iter().map(trace_json).collect::<Vec<_>>(),
        }),
    }
}

fn confluence_json(status: &ConfluenceStatus) -> Value {
    match status {
        ConfluenceStatus::Verified => json!({ "status": "verified" }),
        ConfluenceStatus::Counterexample(c) => json!({
            "status": "counterexample",
            "peak": trace_json(&c.peak),
            "left": trace_json(&c.left),
            "right": trace_json(&c.right),
        }),
        ConfluenceStatus::BudgetExhausted { detail } => {
            json!({ "status": "budget-exhausted", "detail": detail })
        }
        ConfluenceStatus::Unchecked => json!({ "status": "unchecked" }),
    }
}

fn check_json(report: &ConvergenceReport) -> Value {
    json!({
        "convergent": report.is_convergent_on_scope(),
        "scope": report.scope,
        "termination": termination_json(&report.termination),
        "local_confluence": confluence_json(&report.local_confluence),
    })
}

fn cmd_check(path: &Path, args: &BudgetArgs) -> Result<(Status, Value)> {
    let (loaded, budgets) = load_from_path(path, args)?;
    let scope = require_scope(&loaded)?;
    let report = match &loaded.weights {
        Some(weights) => certify_convergence(&loaded.system, weights, scope, &budgets)?,
        None => check_local_confluence(&loaded.system, scope, &budgets)?,
    };
    let status = if report.is_convergent_on_scope() {
        Status::Ok
    } else if matches!(report.local_confluence, ConfluenceStatus::BudgetExhausted { .. }) {
        Status::BudgetExceeded
    } else {
        Status::CheckFailed
    };
    Ok((status, check_json(&report)))
}

/// Certify the document's system and hand back a certificate-carrying copy,
/// or the failed check as a `check-failed` outcome.
fn certified(
    loaded: &LoadedSystem,
    budgets: &Budgets,
) -> Result<std::result::Result<RewriteSystem, Value>> {
    let scope = require_scope(loaded)?;
    let weights = loaded.weights.as_ref().ok_or(Error::MissingCertificate {
        operation: "certification without termination weights",
    })?;
    let report = certify_convergence(&loaded.system, weights, scope, budgets)?;
    match report.certificate() {
        Some(cert) => Ok(Ok(loaded.system.clone().with_certificate(cert.clone()))),
        None => Ok(Err(json!({
            "error": "the system was not certified convergent on the checked scope",
            "check": check_json(&report),
        }))),
    }
}

fn cmd_normalize(
    path: &Path,
    tokens: &[String],
    strategy: StrategyArg,
    seed: u64,
    args: &BudgetArgs,
) -> Result<(Status, Value)> {
    let (loaded, _) = load_from_path(path, args)?;
    let trace = loaded.system.alphabet().trace(tokens)?;
    let strategy = match strategy {
        StrategyArg::Leftmost => Strategy::Leftmost,
        StrategyArg::Rightmost => Strategy::Rightmost,
        StrategyArg::Random => Strategy::Random(seed),
    };
    let report = loaded.system.normalize_with(&trace, strategy)?;
    Ok(match report.outcome {
        ReductionOutcome::Irreducible(nf) => (
            Status::Ok,
            json!({ "normal_form": nf.tokens(), "steps": report.steps }),
        ),
        ReductionOutcome::Budget { kind, partial } => (
            Status::BudgetExceeded,
            json!({
                "budget": kind.to_string(),
                "partial": trace_json(&partial),
                "steps": report.steps,
            }),
        ),
    })
}

fn cmd_irr(path: &Path, args: &BudgetArgs) -> Result<(Status, Value)> {
    let (loaded, _) = load_from_path(path, args)?;
    require_scope(&loaded)?;
    let irreducible = loaded.system.irreducible_letters(&loaded.letters)?;
    let tokens: Vec<&str> = irreducible.iter().map(|l| l.as_str()).collect();
    Ok((Status::Ok, json!({ "irreducible": tokens })))
}

fn cmd_equiv(
    path: &Path,
    left: &[String],
    right: &[String],
    args: &BudgetArgs,
) -> Result<(Status, Value)> {
    let (loaded, budgets) = load_from_path(path, args)?;
    let system = match certified(&loaded, &budgets)? {
        Ok(system) => system,
        Err(failure) => return Ok((Status::CheckFailed, failure)),
    };
    let left = system.alphabet().trace(left)?;
    let right = system.alphabet().trace(right)?;
    let equivalent = system.thue_equivalent(&left, &right)?;
    let left_nf = system.normalize(&left)?;
    let right_nf = system.normalize(&right)?;
    Ok((
        Status::Ok,
        json!({
            "equivalent": equivalent,
            "left_normal_form": left_nf.normal_form().map(trace_json),
            "right_normal_form": right_nf.normal_form().map(trace_json),
        }),
    ))
}

fn cmd_invariant(path: &Path, letter: &str, args: &BudgetArgs) -> Result<(Status, Value)> {
    let (loaded, budgets) = load_from_path(path, args)?;
    let system = match certified(&loaded, &budgets)? {
        Ok(system) => system,
        Err(failure) => return Ok((Status::CheckFailed, failure)),
    };
    let element = tgrw_core::universal_invariant(&system, &Letter::new(letter))?;
    let word: Vec<Value> = element
        .signed_letters()
        .iter()
        .map(|(l, s)| json!([l.as_str(), s.as_i8()]))
        .collect();
    Ok((Status::Ok, json!({ "letter": letter, "invariant": word })))
}

fn presentation_json(presentation: &Presentation) -> Value {
    let generators: Vec<&str> = presentation.generators.iter().map(|g| g.as_str()).collect();
    let relations: Vec<Value> = presentation
        .relations
        .iter()
        .map(|r| {
            let side = |word: &[(Letter, tgrw_core::Sign)]| {
                word.iter()
                    .map(|(l, s)| json!([l.as_str(), s.as_i8()]))
                    .collect::<Vec<_>>()
            };
            json!({ "lhs": side(&r.lhs), "rhs": side(&r.rhs) })
        })
        .collect();
    json!({ "generators": generators, "relations": relations })
}

fn cmd_present(path: &Path, generators: &[String], args: &BudgetArgs) -> Result<(Status, Value)> {
    let (loaded, _) = load_from_path(path, args)?;
    let generators: Vec<Letter> = generators.iter().map(Letter::new).collect();
    let presentation = group_presentation(&loaded.system, &generators)?;
    Ok((Status::Ok, presentation_json(&presentation)))
}

fn cmd_tutte(path: &Path) -> Result<(Status, Value)> {
    let doc = parse_graph_document(&read_file(path)?)?;
    let graph = doc.to_multigraph()?;
    let certificate = graph.certificate()?;
    let poly = tutte_polynomial(&graph)?;
    let terms: Vec<Value> = poly
        .terms()
        .map(|((x, y), coeff)| json!({ "x": x, "y": y, "coeff": coeff }))
        .collect();
    Ok((
        Status::Ok,
        json!({
            "vertices": doc.vertices,
            "certificate": certificate,
            "terms": terms,
        }),
    ))
}

fn cmd_weyl(word: &str) -> Result<(Status, Value)> {
    let terms = weyl_normal_order(word)?;
    Ok((Status::Ok, json!({ "word": word, "terms": terms })))
}

fn cmd_pbw(word: &str, base: Option<&str>) -> Result<(Status, Value)> {
    let (base, terms) = match base {
        None => {
            let mut chars: Vec<char> = word.chars().collect();
            chars.sort_unstable();
            chars.dedup();
            (chars.into_iter().collect::<String>(), pbw_normal_order(word)?)
        }
        Some(base) => {
            let system = pbw_system(base)?;
            let trace = system.alphabet().trace(&[word])?;
            let report = system.normalize(&trace)?;
            let nf = report.normal_form().ok_or_else(|| {
                Error::Budget("straightening exhausted its budget".into())
            })?;
            let terms = nf
                .counts()
                .into_iter()
                .map(|(l, n)| (l.as_str().to_owned(), n))
                .collect();
            (base.to_owned(), terms)
        }
    };
    Ok((Status::Ok, json!({ "word": word, "base": base, "terms": terms })))
}

fn cmd_prefab(op: &PrefabOp) -> Result<(Status, Value)> {
    match op {
        PrefabOp::Arith { m, n: None } => {
            let invariant = arith_invariant(*m)?;
            let factorization: serde_json::Map<String, Value> = invariant
                .into_iter()
                .map(|(p, e)| (p.to_string(), Value::from(e)))
                .collect();
            Ok((Status::Ok, json!({ "n": m, "factorization": factorization })))
        }
        PrefabOp::Arith { m, n: Some(n) } => {
            let compose: Vec<Vec<u64>> = arith_compose(*m, *n)?.into_iter().collect();
            Ok((Status::Ok, json!({ "m": m, "n": n, "compose": compose })))
        }
        PrefabOp::Shuffle { u, v: Some(v) } => {
            let shuffles: Vec<String> = shuffle_set(u, v)?.into_iter().collect();
            Ok((Status::Ok, json!({ "u": u, "v": v, "shuffles": shuffles })))
        }
        PrefabOp::Shuffle { u, v: None } => {
            let counts = shuffle_prefab_invariant(u)?;
            let letter_counts: serde_json::Map<String, Value> = counts
                .into_iter()
                .map(|(c, n)| (c.to_string(), Value::from(n)))
                .collect();
            Ok((Status::Ok, json!({ "word": u, "letter_counts": letter_counts })))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn statuses_map_to_documented_exit_codes() {
        assert_eq!(Status::Ok.code(), 0);
        assert_eq!(Status::InputError.code(), 1);
        assert_eq!(Status::CheckFailed.code(), 2);
        assert_eq!(Status::BudgetExceeded.code(), 3);
    }

    #[test]
    fn error_classes_follow_their_exit_codes() {
        assert_eq!(
            classify_error(&Error::InvalidInput("bad".into())),
            Status::InputError
        );
        assert_eq!(
            classify_error(&Error::MissingCertificate { operation: "op" }),
            Status::CheckFailed
        );
        assert_eq!(
            classify_error(&Error::Budget("out of steps".into())),
            Status::BudgetExceeded
        );
    }

    #[test]
    fn flag_beats_environment_default_and_document() {
        // The environment variable is process-global, so exercise only the
        // flag/document layers here; the binary-level tests cover the
        // environment layer in a child process.
        let doc = BudgetsDoc {
            max_steps: Some(7),
            max_reduct_nodes: None,
            max_trace_len: Some(9),
        };
        let args = BudgetArgs {
            max_steps: Some(11),
            max_nodes: None,
            max_len: None,
        };
        if std::env::var_os("TGRW_BUDGET_STEPS").is_some() {
            return;
        }
        let budgets = resolve_budgets(Some(&doc), &args).unwrap();
        assert_eq!(budgets.max_steps, 11);
        assert_eq!(budgets.max_trace_len, 9);
        assert_eq!(budgets.max_reduct_nodes, Budgets::default().max_reduct_nodes);
    }
}
