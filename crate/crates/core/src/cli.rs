//! Command-line front end. Every subcommand prints one JSON document.
//!
//! Exit codes: 0 when the check passes (or the search is feasible), 1 on a
//! failed certificate step, uncovered instance, counterexample or any other
//! domain error, and 2 on usage or input errors.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::json;

use crate::certificate::certify;
use crate::error::Error;
use crate::f2lemma::{exhaustive_lemma_check, random_lemma_check, EXHAUSTIVE_MAX_N};
use crate::linalg::RatVec;
use crate::model::{extremal_construction, verify_cover, Instance, Strategy};
use crate::search::{min_b_search, min_sum_search, SearchOptions, Universe, DEFAULT_CAP};

pub const CAP_ENV: &str = "SUMSET_LAB_CAP";

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "sumset-lab", version, about = "Exact checks for the sumset covering bound |B| >= n + C(t+1,2)")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Write the JSON result to FILE instead of stdout.
    #[arg(long, global = true, value_name = "FILE")]
    pub output: Option<PathBuf>,

    /// Progress and timing on stderr.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check S+S ⊆ A+B for an instance file.
    Verify(InputArgs),
    /// Run the full certification pipeline on an instance file.
    Certify(CertifyArgs),
    /// Emit the extremal construction for (n, t).
    Construct(ConstructArgs),
    /// Check the F_2^n coset lemma (exhaustive for n <= 4, sampled above).
    LemmaCheck(LemmaArgs),
    /// Exact minimum |B| subject to |A| <= n - t over a finite grid.
    Search(SearchArgs),
    /// Exact minimum |A| + |B| over a finite grid.
    SearchSum(UniverseArgs),
}

#[derive(Debug, Args)]
pub struct InputArgs {
    #[arg(long, value_name = "FILE")]
    pub input: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StrategyArg {
    Lex,
    Random,
}

#[derive(Debug, Args)]
pub struct CertifyArgs {
    #[arg(long, value_name = "FILE")]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value = "lex")]
    pub strategy: StrategyArg,
    /// Required with --strategy random, rejected otherwise.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct ConstructArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub t: usize,
    /// Optional JSON array of n basis vectors; defaults to the standard basis.
    #[arg(long, value_name = "FILE")]
    pub input: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct LemmaArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 1)]
    pub workers: usize,
    /// Sample count when n is too large for enumeration.
    #[arg(long, default_value_t = 1_000_000)]
    pub samples: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct UniverseArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = -1, allow_negative_numbers = true)]
    pub lo: i64,
    #[arg(long, default_value_t = 2, allow_negative_numbers = true)]
    pub hi: i64,
    #[arg(long, default_value_t = 1)]
    pub denom: u64,
    /// Largest universe the search accepts; overrides SUMSET_LAB_CAP.
    #[arg(long)]
    pub cap: Option<u64>,
    #[arg(long, default_value_t = 1)]
    pub workers: usize,
}

#[derive(Debug, Args)]
pub struct SearchArgs {
    #[arg(long)]
    pub t: usize,
    #[command(flatten)]
    pub universe: UniverseArgs,
}

/// Failure modes of a run, each mapped to an exit code.
enum Failure {
    Usage { message: String, field: Option<String> },
    Domain(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Domain(e)
    }
}

fn usage(message: impl Into<String>) -> Failure {
    Failure::Usage { message: message.into(), field: None }
}

/// Parses `args` (including the program name) and runs the selected
/// subcommand, writing JSON to `out` unless `--output` is given.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(err, "{e}");
                return EXIT_USAGE;
            }
            let _ = write!(out, "{e}");
            return EXIT_OK;
        }
    };
    let start = Instant::now();
    let result = dispatch(&cli);
    if cli.verbose > 0 {
        let _ = writeln!(err, "finished in {:.3?}", start.elapsed());
    }
    match result {
        Ok((value, code)) => match emit(&cli, &value, out) {
            Ok(()) => code,
            Err(e) => {
                let _ = writeln!(err, "error: {e}");
                EXIT_USAGE
            }
        },
        Err(Failure::Usage { message, field }) => {
            let _ = writeln!(err, "error: {message}");
            let _ = emit(&cli, &json!({ "error": { "kind": "InputError", "field": field, "message": message } }), out);
            EXIT_USAGE
        }
        Err(Failure::Domain(e)) => {
            let _ = emit(&cli, &json!({ "error": e.to_report() }), out);
            EXIT_FAIL
        }
    }
}

fn emit(cli: &Cli, value: &serde_json::Value, out: &mut dyn Write) -> std::io::Result<()> {
    let text = serde_json::to_string_pretty(value).expect("JSON values always serialize");
    match &cli.output {
        Some(path) => fs::write(path, text + "\n"),
        None => writeln!(out, "{text}"),
    }
}

fn to_value<T: Serialize>(v: &T) -> serde_json::Value {
    serde_json::to_value(v).expect("result types always serialize")
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    let text = fs::read_to_string(path).map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?;
    let mut de = serde_json::Deserializer::from_str(&text);
    serde_path_to_error::deserialize(&mut de).map_err(|e| {
        let field = e.path().to_string();
        Failure::Usage { message: format!("{}: {} at {field}", path.display(), e.inner()), field: Some(field) }
    })
}

fn read_instance(path: &Path) -> Result<Instance, Failure> {
    let inst: Instance = read_json(path)?;
    inst.validate().map_err(|e| usage(format!("{}: {e}", path.display())))?;
    Ok(inst)
}

fn resolve_cap(flag: Option<u64>) -> Result<u64, Failure> {
    if let Some(cap) = flag {
        return Ok(cap);
    }
    match std::env::var(CAP_ENV) {
        Ok(v) => v.trim().parse().map_err(|_| usage(format!("{CAP_ENV}={v:?} is not a non-negative integer"))),
        Err(_) => Ok(DEFAULT_CAP),
    }
}

fn universe_from(args: &UniverseArgs) -> Result<(Universe, SearchOptions), Failure> {
    let universe = Universe::new(args.n, args.lo, args.hi, args.denom).map_err(|e| usage(e.to_string()))?;
    let opts = SearchOptions { cap: resolve_cap(args.cap)?, workers: args.workers, ..Default::default() };
    Ok((universe, opts))
}

fn dispatch(cli: &Cli) -> Result<(serde_json::Value, i32), Failure> {
    match &cli.command {
        Command::Verify(args) => {
            let inst = read_instance(&args.input)?;
            let report = verify_cover(&inst)?;
            let code = if report.covered { EXIT_OK } else { EXIT_FAIL };
            Ok((to_value(&report), code))
        }
        Command::Certify(args) => {
            let strategy = match (args.strategy, args.seed) {
                (StrategyArg::Lex, None) => Strategy::Lexicographic,
                (StrategyArg::Random, Some(seed)) => Strategy::SeededRandom(seed),
                (StrategyArg::Random, None) => return Err(usage("--strategy random requires --seed")),
                (StrategyArg::Lex, Some(_)) => return Err(usage("--seed is only valid with --strategy random")),
            };
            let inst = read_instance(&args.input)?;
            let cert = certify(&inst, strategy)?;
            let code = if cert.passed() { EXIT_OK } else { EXIT_FAIL };
            Ok((to_value(&cert), code))
        }
        Command::Construct(args) => {
            let basis = match &args.input {
                Some(path) => Some(read_json::<Vec<RatVec>>(path)?),
                None => None,
            };
            let inst = extremal_construction(args.n, args.t, basis)?;
            Ok((to_value(&inst), EXIT_OK))
        }
        Command::LemmaCheck(args) => {
            if args.n <= EXHAUSTIVE_MAX_N {
                let report = exhaustive_lemma_check(args.n, args.workers)?;
                let code = if report.counterexample.is_none() { EXIT_OK } else { EXIT_FAIL };
                let mut value = to_value(&report);
                value["mode"] = json!("exhaustive");
                Ok((value, code))
            } else {
                let report = random_lemma_check(args.n, args.samples, args.seed)?;
                let code = if report.counterexample.is_none() && report.lemma_mismatches == 0 { EXIT_OK } else { EXIT_FAIL };
                let mut value = to_value(&report);
                value["mode"] = json!("random");
                Ok((value, code))
            }
        }
        Command::Search(args) => {
            let (universe, opts) = universe_from(&args.universe)?;
            let result = min_b_search(args.universe.n, args.t, &universe, opts)?;
            Ok((to_value(&result), search_code(result.minimum, result.bound)))
        }
        Command::SearchSum(args) => {
            let (universe, opts) = universe_from(args)?;
            let result = min_sum_search(args.n, &universe, opts)?;
            Ok((to_value(&result), search_code(result.minimum, result.bound)))
        }
    }
}

fn search_code(minimum: Option<usize>, bound: usize) -> i32 {
    match minimum {
        Some(m) if m >= bound => EXIT_OK,
        _ => EXIT_FAIL,
    }
}
