//! `semdis`: compile conditional rewriting systems, check countermodels,
//! search for them, and saturate systems for cross-checks.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};

use semdis::checker::{Certificate, Overall};
use semdis::finder::SearchBudget;
use semdis::formats::{parse_ctrs, parse_model_as, parse_query, serialize_certificate, ModelBackend};
use semdis::oracle::saturate;
use semdis::queries::Query;
use semdis::pipeline::{self, oracle_check, prepare, Backend, PipelineOptions, Problem};
use semdis::structures::Structure;
use semdis::terms::Ctrs;

const EXIT_REFUTED: u8 = 1;
const EXIT_UNKNOWN: u8 = 2;
const EXIT_INPUT: u8 = 3;

#[derive(Parser, Debug)]
#[command(name = "semdis", version, about = "Disprove properties of conditional rewriting systems with verified countermodels")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Print the Horn theory of a system with provenance tags.
    Compile {
        system: PathBuf,
        #[command(flatten)]
        theory: TheoryFlags,
        /// Optional query whose predicates select auxiliary theories.
        #[command(flatten)]
        query: QueryFlags,
    },
    /// Check a model against a system and a query; prints a certificate.
    Check {
        system: PathBuf,
        #[arg(long)]
        model: PathBuf,
        #[command(flatten)]
        query: QueryFlags,
        #[command(flatten)]
        theory: TheoryFlags,
        #[command(flatten)]
        oracle: OracleFlags,
        /// How to read the model; `both` picks by the carriers.
        #[arg(long, value_enum, default_value_t = BackendArg::Both)]
        backend: BackendArg,
        /// Write the certificate here instead of standard output.
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Search for a countermodel; prints a certificate on success.
    Disprove {
        system: PathBuf,
        #[command(flatten)]
        query: QueryFlags,
        #[command(flatten)]
        theory: TheoryFlags,
        #[command(flatten)]
        oracle: OracleFlags,
        #[command(flatten)]
        budget: BudgetFlags,
        #[arg(long, value_enum, default_value_t = BackendArg::Both)]
        backend: BackendArg,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Print the atoms derivable by bounded saturation.
    Derive {
        system: PathBuf,
        /// Largest ground term considered.
        #[arg(long, default_value_t = 3)]
        size: usize,
        /// Largest proof height.
        #[arg(long, default_value_t = 5)]
        depth: usize,
    },
}

#[derive(Args, Debug, Default)]
struct TheoryFlags {
    /// Relativize sorted quantification into sort atoms.
    #[arg(long)]
    sorted: bool,
    #[arg(long)]
    with_subterm_theory: bool,
    #[arg(long)]
    with_root_theory: bool,
}

#[derive(Args, Debug)]
struct QueryFlags {
    /// Query text, e.g. `REACHABLE(a, b)`.
    #[arg(long, conflicts_with = "query_file")]
    query: Option<String>,
    #[arg(long)]
    query_file: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct OracleFlags {
    /// Cross-check the result against bounded saturation.
    #[arg(long, conflicts_with = "no_oracle_check")]
    oracle_check: bool,
    /// Skip the cross-check even for ground obligations.
    #[arg(long)]
    no_oracle_check: bool,
    #[arg(long, default_value_t = 3)]
    oracle_size: usize,
    #[arg(long, default_value_t = 5)]
    oracle_depth: usize,
}

#[derive(Args, Debug)]
struct BudgetFlags {
    /// Finite carriers as `lo:hi` pairs, e.g. `0:1,0:2,-1:1`.
    #[arg(long, allow_hyphen_values = true)]
    carriers: Option<String>,
    /// Lower ends of ray carriers, e.g. `0,-1,1`.
    #[arg(long, allow_hyphen_values = true)]
    rays: Option<String>,
    /// Coefficient range `lo:hi` for affine templates.
    #[arg(long, allow_hyphen_values = true)]
    coeff_range: Option<String>,
    /// Wall-clock limit in seconds.
    #[arg(long)]
    timeout: Option<f64>,
    /// Raw-table limits as `carrier` or `carrier:arity`.
    #[arg(long)]
    raw_table_max: Option<String>,
    #[arg(long)]
    candidate_cap: Option<u64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum BackendArg {
    Finite,
    Symbolic,
    Both,
}

struct Failed {
    code: u8,
    message: String,
}

fn input_error(message: impl Into<String>) -> Failed {
    Failed { code: EXIT_INPUT, message: message.into() }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("{}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn read(path: &Path) -> Result<String, Failed> {
    fs::read_to_string(path).map_err(|e| input_error(format!("cannot read {}: {e}", path.display())))
}

fn load_system(path: &Path) -> Result<(Ctrs, String), Failed> {
    let text = read(path)?;
    let ctrs = parse_ctrs(&path.display().to_string(), &text).map_err(|e| input_error(e.to_string()))?;
    Ok((ctrs, text))
}

fn query_text(flags: &QueryFlags) -> Result<Option<String>, Failed> {
    match (&flags.query, &flags.query_file) {
        (Some(q), _) => Ok(Some(q.clone())),
        (None, Some(p)) => read(p).map(Some),
        (None, None) => Ok(None),
    }
}

fn options(flags: &TheoryFlags) -> PipelineOptions {
    PipelineOptions {
        with_subterm_theory: flags.with_subterm_theory,
        with_root_theory: flags.with_root_theory,
        sorted: flags.sorted,
    }
}

fn load_problem(ctrs: &Ctrs, query: &str, flags: &TheoryFlags) -> Result<Problem, Failed> {
    let q = parse_query(query, ctrs).map_err(|e| input_error(e.to_string()))?;
    prepare(ctrs, &q, options(flags)).map_err(|e| input_error(e.to_string()))
}

fn emit(text: &str, output: Option<&Path>) -> Result<(), Failed> {
    match output {
        Some(p) => fs::write(p, text).map_err(|e| input_error(format!("cannot write {}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// Ground obligations get the cross-check unless it was turned off.
fn wants_oracle(flags: &OracleFlags, problem: &Problem) -> bool {
    if flags.no_oracle_check {
        return false;
    }
    flags.oracle_check || problem.plain_obligations.iter().all(|o| o.vars.is_empty())
}

fn cross_check(flags: &OracleFlags, problem: &Problem, structure: &Structure) -> Result<(), Failed> {
    let explicit = flags.oracle_check;
    let (size, depth) = if explicit { (flags.oracle_size, flags.oracle_depth) } else { (2, 4) };
    let report = oracle_check(problem, structure, size, depth).map_err(|e| input_error(e.to_string()))?;
    if !report.is_clean() {
        let lines: Vec<String> = report.violations.iter().map(|v| format!("  {v}")).collect();
        return Err(Failed {
            code: EXIT_REFUTED,
            message: format!("oracle cross-check FAILED:\n{}", lines.join("\n")),
        });
    }
    eprintln!(
        "oracle cross-check passed: {} derived atoms, {} evaluated (size {size}, depth {depth})",
        report.derived, report.evaluated
    );
    Ok(())
}

fn parse_pair(s: &str) -> Result<(i64, i64), Failed> {
    let (a, b) = s
        .split_once(':')
        .ok_or_else(|| input_error(format!("expected `lo:hi`, found `{s}`")))?;
    let num = |t: &str| {
        t.trim()
            .parse::<i64>()
            .map_err(|_| input_error(format!("`{t}` is not an integer")))
    };
    let (lo, hi) = (num(a)?, num(b)?);
    if hi < lo {
        return Err(input_error(format!("empty range `{s}`")));
    }
    Ok((lo, hi))
}

fn budget(flags: &BudgetFlags) -> Result<SearchBudget, Failed> {
    let mut b = SearchBudget::default();
    if let Some(c) = &flags.carriers {
        b.carriers = c.split(',').map(parse_pair).collect::<Result<_, _>>()?;
    }
    if let Some(r) = &flags.rays {
        b.rays = r
            .split(',')
            .map(|t| t.trim().parse().map_err(|_| input_error(format!("`{t}` is not an integer"))))
            .collect::<Result<_, _>>()?;
    }
    if let Some(c) = &flags.coeff_range {
        b.coeff_range = parse_pair(c)?;
    }
    if let Some(t) = flags.timeout {
        if !(t.is_finite() && t > 0.0) {
            return Err(input_error("the timeout must be positive"));
        }
        b.timeout = Duration::from_secs_f64(t);
    }
    if let Some(r) = &flags.raw_table_max {
        let (c, a) = r.split_once(':').unwrap_or((r, "2"));
        let num = |t: &str| t.trim().parse::<usize>().map_err(|_| input_error(format!("`{t}` is not a size")));
        b.raw_table_max_carrier = num(c)?;
        b.raw_table_max_arity = num(a)?;
    }
    if let Some(cap) = flags.candidate_cap {
        b.candidate_cap = cap;
    }
    Ok(b)
}

fn report(cert: &Certificate) {
    eprintln!("overall: {}", cert.overall);
    if let Some(f) = cert.first_failure() {
        eprintln!("first failure: {f}");
    }
}

fn run(command: Command) -> Result<(), Failed> {
    match command {
        Command::Compile { system, theory, query } => {
            let (ctrs, _) = load_system(&system)?;
            let problem = match query_text(&query)? {
                Some(q) => load_problem(&ctrs, &q, &theory)?,
                None => {
                    let none = Query { vars: vec![], disjuncts: vec![] };
                    prepare(&ctrs, &none, options(&theory)).map_err(|e| input_error(e.to_string()))?
                }
            };
            print!("{}", problem.theory.listing());
            for (i, o) in problem.obligations.iter().enumerate() {
                println!("[obligation {}] {o}", i + 1);
            }
            Ok(())
        }
        Command::Check { system, model, query, theory, oracle, backend, output } => {
            let (ctrs, system_text) = load_system(&system)?;
            let q = query_text(&query)?.ok_or_else(|| input_error("a query is required (--query or --query-file)"))?;
            let problem = load_problem(&ctrs, &q, &theory)?;
            let model_text = read(&model)?;
            let as_backend = match backend {
                BackendArg::Finite => ModelBackend::Finite,
                BackendArg::Symbolic => ModelBackend::Symbolic,
                BackendArg::Both => ModelBackend::Auto,
            };
            let structure =
                parse_model_as(&model_text, &ctrs.signature, as_backend).map_err(|e| input_error(e.to_string()))?;
            let cert = pipeline::check(&problem, &structure);
            let inputs = [("system", system_text.as_str()), ("query", q.as_str()), ("model", model_text.as_str())];
            emit(&serialize_certificate(&cert, &inputs), output.as_deref())?;
            report(&cert);
            match cert.overall {
                Overall::Verified => {
                    if wants_oracle(&oracle, &problem) {
                        cross_check(&oracle, &problem, &structure)?;
                    }
                    Ok(())
                }
                Overall::Refuted => Err(Failed { code: EXIT_REFUTED, message: "the model does not verify".into() }),
                Overall::Unknown => Err(Failed { code: EXIT_UNKNOWN, message: "verification is inconclusive".into() }),
            }
        }
        Command::Disprove { system, query, theory, oracle, budget: flags, backend, output } => {
            let (ctrs, system_text) = load_system(&system)?;
            let q = query_text(&query)?.ok_or_else(|| input_error("a query is required (--query or --query-file)"))?;
            let problem = load_problem(&ctrs, &q, &theory)?;
            let b = budget(&flags)?;
            let which = match backend {
                BackendArg::Finite => Backend::Finite,
                BackendArg::Symbolic => Backend::Symbolic,
                BackendArg::Both => Backend::Both,
            };
            match pipeline::disprove(&problem, &b, which) {
                Ok(found) => {
                    let inputs = [("system", system_text.as_str()), ("query", q.as_str())];
                    emit(&serialize_certificate(&found.certificate, &inputs), output.as_deref())?;
                    report(&found.certificate);
                    if wants_oracle(&oracle, &problem) {
                        cross_check(&oracle, &problem, &found.structure)?;
                    }
                    Ok(())
                }
                Err(absence) => Err(Failed { code: EXIT_UNKNOWN, message: format!("no model found: {absence}") }),
            }
        }
        Command::Derive { system, size, depth } => {
            let (ctrs, _) = load_system(&system)?;
            let set = saturate(&ctrs, size, depth).map_err(|e| input_error(e.to_string()))?;
            for (atom, d) in set.iter() {
                println!("{d}\t{atom}");
            }
            eprintln!("{} atoms over {} terms", set.len(), set.terms().len());
            Ok(())
        }
    }
}
