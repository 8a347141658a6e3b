use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::error;

use supercohom::algebra::{build_algebra, AlgebraFile, AlgebraSpec, SuperAlgebra};
use supercohom::cohomology::{
    cohomology, compare, emit_table, thread_pool, CohomologyOptions, CohomologyReport, Convention,
    Layout, PrimePolicy,
};
use supercohom::complex::CoefficientSpec;
use supercohom::nijenhuis::{bracket_table, BracketRequest};
use supercohom::Error;

const EXIT_ERROR: u8 = 1;
const EXIT_PARTIAL: u8 = 2;
const EXIT_DIFF: u8 = 3;
const EXIT_USAGE: u8 = 64;
const EXIT_FORMAT: u8 = 65;

#[derive(Parser, Debug)]
#[command(
    name = "supercohom",
    version,
    about = "Lie superalgebra cohomology over the rationals"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Compute H^k(g; M) per grading degree.
    Cohomology(RunArgs),
    /// Bracket table of cohomology representatives.
    Bracket(BracketArgs),
    /// Compare a report against a fixture cell by cell.
    Compare { report: PathBuf, fixture: PathBuf },
    /// Print the basis, grading and weights of an algebra.
    Build {
        #[arg(long)]
        algebra: String,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Coeff {
    Adjoint,
    PiAdjoint,
    Trivial,
}

impl From<Coeff> for CoefficientSpec {
    fn from(c: Coeff) -> Self {
        match c {
            Coeff::Adjoint => CoefficientSpec::Adjoint,
            Coeff::PiAdjoint => CoefficientSpec::PiAdjoint,
            Coeff::Trivial => CoefficientSpec::Trivial,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Grid,
    Report,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ConventionArg {
    Plain,
    PiShifted,
}

#[derive(Args, Debug)]
struct RunArgs {
    /// `family[:param[,param]]`, e.g. `po0n:5`, `osp42:3/7`, or `file:<path>`.
    #[arg(long)]
    algebra: String,
    #[arg(long, value_enum, default_value = "adjoint")]
    coeff: Coeff,
    #[arg(long, default_value_t = 3)]
    kmax: usize,
    #[arg(long, allow_hyphen_values = true)]
    deg_min: Option<i64>,
    #[arg(long, allow_hyphen_values = true)]
    deg_max: Option<i64>,
    /// Number of random primes that must agree.
    #[arg(long, default_value_t = 2)]
    primes: usize,
    #[arg(long)]
    verify_rational: bool,
    /// Disable the weight-zero reduction.
    #[arg(long)]
    full_weight: bool,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    cache: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "grid")]
    format: Format,
    /// Store class representatives in the report.
    #[arg(long)]
    reps: bool,
    #[arg(long, value_enum, default_value = "plain")]
    convention: ConventionArg,
    /// Largest slice (number of monomials) attempted.
    #[arg(long)]
    budget: Option<usize>,
    /// Write the report here instead of stdout.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct BracketArgs {
    #[arg(long)]
    algebra: String,
    /// Cells `k:degree` whose classes are bracketed pairwise.
    #[arg(long = "slice", allow_hyphen_values = true)]
    slices: Vec<String>,
    #[arg(long)]
    full_weight: bool,
    /// Largest slice (monomials) on which classes are solved exactly.
    #[arg(long)]
    budget: Option<usize>,
    /// Largest slice whose cohomology dimension is checked by modular ranks.
    #[arg(long)]
    rank_budget: Option<usize>,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long, short)]
    output: Option<PathBuf>,
}

fn load_algebra(spec: &str) -> supercohom::Result<(SuperAlgebra, Option<AlgebraSpec>)> {
    if let Some(path) = spec.strip_prefix("file:") {
        return Ok((AlgebraFile::load(Path::new(path))?, None));
    }
    let parsed: AlgebraSpec = spec.parse()?;
    Ok((build_algebra(&parsed)?, Some(parsed)))
}

fn write_output(path: &Option<PathBuf>, text: &str) -> supercohom::Result<()> {
    match path {
        Some(p) => std::fs::write(p, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn run_cohomology(args: RunArgs) -> supercohom::Result<u8> {
    let (g, spec) = load_algebra(&args.algebra)?;
    for w in g.warnings() {
        log::warn!("{w}");
    }
    let default_window = spec.as_ref().and_then(AlgebraSpec::default_degree_window);
    let window = match (args.deg_min, args.deg_max, default_window) {
        (None, None, w) => w,
        (lo, hi, w) => {
            let (dlo, dhi) = w.unwrap_or((-1000, 1000));
            Some((lo.unwrap_or(dlo), hi.unwrap_or(dhi)))
        }
    };
    if args.primes == 0 {
        return Err(Error::InvalidSpec {
            spec: "--primes".into(),
            reason: "need at least one prime".into(),
        });
    }
    let opts = CohomologyOptions {
        k_max: args.kmax,
        degree_window: window,
        full_weight: args.full_weight,
        primes: PrimePolicy {
            count: args.primes,
            verify_rational: args.verify_rational,
            ..Default::default()
        },
        slice_budget: args.budget,
        representatives: args.reps,
        convention: match args.convention {
            ConventionArg::Plain => Convention::Plain,
            ConventionArg::PiShifted => Convention::PiShifted,
        },
        workers: args.workers,
        cache_dir: args.cache.clone(),
        ..Default::default()
    };
    let report = cohomology(&g, args.coeff.into(), &opts)?;
    let text = match args.format {
        Format::Report => report.to_json(),
        Format::Grid => emit_table(&report, &Layout::default()),
    };
    write_output(&args.output, &text)?;
    if report.skipped.is_empty() {
        Ok(0)
    } else {
        for s in &report.skipped {
            eprintln!("skipped: k={} degree={} ({})", s.k, s.degree, s.reason);
        }
        Ok(EXIT_PARTIAL)
    }
}

fn run_bracket(args: BracketArgs) -> supercohom::Result<u8> {
    let (g, _) = load_algebra(&args.algebra)?;
    let mut cells = Vec::new();
    for s in &args.slices {
        let parsed = s
            .split_once(':')
            .and_then(|(k, d)| Some((k.parse::<usize>().ok()?, d.parse::<i64>().ok()?)));
        match parsed {
            Some(c) => cells.push(c),
            None => {
                return Err(Error::InvalidSpec {
                    spec: s.clone(),
                    reason: "expected `k:degree`".into(),
                })
            }
        }
    }
    let request = BracketRequest {
        cells,
        full_weight: args.full_weight,
        budget: args.budget.unwrap_or(BracketRequest::DEFAULT_BUDGET),
        rank_budget: args
            .rank_budget
            .unwrap_or(BracketRequest::DEFAULT_RANK_BUDGET),
    };
    let run = || bracket_table(&g, &request);
    let table = match args.workers {
        Some(n) => thread_pool(n)?.install(run)?,
        None => run()?,
    };
    write_output(&args.output, &table.to_json())?;
    if table.unknown.is_empty() && table.missing.is_empty() {
        Ok(0)
    } else {
        for m in &table.missing {
            eprintln!("missing slice: {m}");
        }
        for u in &table.unknown {
            eprintln!("unknown product: {u}");
        }
        Ok(EXIT_PARTIAL)
    }
}

fn run_compare(report: &Path, fixture: &Path) -> supercohom::Result<u8> {
    let read = |p: &Path| -> supercohom::Result<CohomologyReport> {
        let text = std::fs::read_to_string(p)?;
        CohomologyReport::from_json(&text)
    };
    let (r, f) = (read(report)?, read(fixture)?);
    let diffs = compare(&r, &f)?;
    for d in &diffs {
        println!("{d}");
    }
    Ok(if diffs.is_empty() { 0 } else { EXIT_DIFF })
}

fn run_build(spec: &str) -> supercohom::Result<u8> {
    let (g, _) = load_algebra(spec)?;
    let (e, o) = g.superdim();
    println!("{}: dim {} = {e}|{o}\u{304}", g.name(), g.dim());
    for w in g.warnings() {
        println!("warning: {w}");
    }
    for b in g.basis() {
        println!(
            "{:>4}  {:<16} {:<4} deg {:>3}  weight {:?}",
            b.index, b.name, b.parity, b.degree, b.weight
        );
    }
    Ok(0)
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::InvalidSpec { .. } => EXIT_USAGE,
        Error::Format(_) | Error::Json(_) => EXIT_FORMAT,
        _ => EXIT_ERROR,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Cohomology(args) => run_cohomology(args),
        Command::Bracket(args) => run_bracket(args),
        Command::Compare { report, fixture } => run_compare(&report, &fixture),
        Command::Build { algebra } => run_build(&algebra),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            error!("{e}");
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
