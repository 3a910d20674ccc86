//! Command-line experiment runner over `bhlab-core`: argument and config
//! handling, multi-threaded family traversal, and CSV/JSON emission.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;
pub mod config;
pub mod format;
pub mod parallel;

pub use format::Format;

/// Environment variable overriding every enumeration budget.
pub const BUDGET_ENV: &str = "BHLAB_BUDGET";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] bhlab_core::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("{0} check(s) failed")]
    ChecksFailed(usize),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Core(bhlab_core::Error::Domain(_)) => 2,
            CliError::Core(bhlab_core::Error::Budget { .. }) => 3,
            _ => 1,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "bhlab",
    version,
    about = "Desk-scale experiments on von Mangoldt sums over polynomial families"
)]
pub struct Cli {
    /// `key = value` file; explicit flags take precedence.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,

    /// Worker threads for family traversal; results do not depend on it.
    #[arg(long, global = true, default_value_t = 1)]
    pub threads: usize,

    /// Output file; standard output when absent.
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Exact counting identities over residue-class polynomials.
    Identities(IdentitiesArgs),
    /// Brun weight sandwich, telescoping, neutraliser and Mertens checks.
    SieveCheck(SieveArgs),
    /// Truncated singular series of one polynomial.
    SingularSeries(SingularArgs),
    /// ψ, ψ^abs, θ or the negative part for one polynomial.
    Psi(PsiArgs),
    /// Second moment of ψ - x·𝔖 over a polynomial family.
    Moment(MomentArgs),
    /// Bombieri–Vinogradov average of progression errors.
    Bv(BvArgs),
}

#[derive(Debug, Args)]
pub struct IdentitiesArgs {
    /// Largest squarefree modulus for the multiplicative checks.
    #[arg(long, default_value_t = 30)]
    pub max_k: u64,
    /// Largest degree for the multiplicative checks.
    #[arg(long, default_value_t = 2)]
    pub max_degree: u32,
}

#[derive(Debug, Args)]
pub struct SieveArgs {
    #[arg(long, value_delimiter = ',', default_values_t = [6.0, 12.0, 20.0])]
    pub w: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_values_t = [50.0, 1e3, 1e5])]
    pub y: Vec<f64>,
    #[arg(long, default_value_t = 100_000)]
    pub n_max: u64,
    /// Random polynomials per grid point for the neutraliser check.
    #[arg(long, default_value_t = 200)]
    pub pairs: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct SingularArgs {
    /// Coefficients c0,c1,...,cd.
    #[arg(
        long,
        value_delimiter = ',',
        allow_hyphen_values = true,
        required = true
    )]
    pub poly: Vec<i64>,
    #[arg(long)]
    pub z: f64,
}

#[derive(Debug, Args)]
pub struct PsiArgs {
    #[arg(
        long,
        value_delimiter = ',',
        allow_hyphen_values = true,
        required = true
    )]
    pub poly: Vec<i64>,
    #[arg(long)]
    pub x: u64,
    #[arg(long, conflicts_with_all = ["theta", "neg"])]
    pub abs: bool,
    #[arg(long, conflicts_with = "neg")]
    pub theta: bool,
    #[arg(long)]
    pub neg: bool,
    /// With --abs, sum over 1 <= m <= x instead of 1 < m <= x.
    #[arg(long, requires = "abs")]
    pub from_one: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Exhaustive,
    Mc,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CenterArg {
    Bh,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PsiArg {
    Plain,
    Abs,
}

#[derive(Debug, Args)]
pub struct MomentArgs {
    #[arg(long = "d")]
    pub degree: u32,
    #[arg(long = "H")]
    pub height: u64,
    /// One or more comma-separated x values.
    #[arg(long, value_delimiter = ',', required = true)]
    pub x: Vec<u64>,
    /// Truncation points; defaults to x^gamma for each x.
    #[arg(long, value_delimiter = ',')]
    pub z: Vec<f64>,
    #[arg(long, default_value_t = 1.0)]
    pub gamma: f64,
    #[arg(long, value_enum, default_value_t = ModeArg::Exhaustive)]
    pub mode: ModeArg,
    #[arg(long)]
    pub samples: Option<u64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = CenterArg::Bh)]
    pub center: CenterArg,
    #[arg(long, value_enum, default_value_t = PsiArg::Abs)]
    pub psi: PsiArg,
    /// With --psi abs, sum over 1 <= m <= x instead of 1 < m <= x.
    #[arg(long)]
    pub from_one: bool,
}

#[derive(Debug, Args)]
pub struct BvArgs {
    #[arg(long = "X")]
    pub x: u64,
    #[arg(long = "Q")]
    pub q: u64,
}

/// Budget override from [`BUDGET_ENV`], accepting integers or `1e9` style.
pub fn budget_override() -> Result<Option<u128>, CliError> {
    let Ok(raw) = std::env::var(BUDGET_ENV) else {
        return Ok(None);
    };
    let raw = raw.trim();
    if let Ok(v) = raw.parse::<u128>() {
        return Ok(Some(v));
    }
    match raw.parse::<f64>() {
        Ok(v) if v.is_finite() && v >= 0.0 => Ok(Some(v as u128)),
        _ => Err(CliError::Usage(format!(
            "{BUDGET_ENV} must be a non-negative number, got `{raw}`"
        ))),
    }
}

fn parse_args(args: Vec<OsString>) -> Result<Cli, clap::Error> {
    Cli::try_parse_from(args)
}

fn execute(cli: &Cli) -> Result<(), CliError> {
    let pool = parallel::thread_pool(cli.threads)
        .map_err(|e| CliError::Usage(format!("thread pool: {e}")))?;
    let budget = budget_override()?;
    let mut table = commands::dispatch(cli, &pool, budget)?;
    table.set("threads", cli.threads);
    table.set("format", format!("{:?}", cli.format).to_lowercase());
    table.set(
        "budget",
        budget.map_or("default".to_string(), |b| b.to_string()),
    );
    let failed = table
        .rows
        .iter()
        .filter(|r| {
            table
                .columns
                .iter()
                .zip(r.iter())
                .any(|(c, v)| *c == "passed" && *v == format::Cell::Bool(false))
        })
        .count();
    match &cli.out {
        Some(path) => {
            let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
            table.write(cli.format, &mut f)?;
            f.flush()?;
        }
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            table.write(cli.format, &mut lock)?;
        }
    }
    if failed > 0 {
        return Err(CliError::ChecksFailed(failed));
    }
    Ok(())
}

/// Runs the program on raw arguments and returns the process exit code.
pub fn run(args: impl IntoIterator<Item = impl Into<OsString>>) -> i32 {
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let merged = match config::find_config_path(&args) {
        Some(path) => std::fs::read_to_string(&path)
            .map_err(|e| CliError::Usage(format!("config {}: {e}", path.to_string_lossy())))
            .and_then(|text| config::parse(&text))
            .and_then(|entries| config::merge(args, &entries)),
        None => Ok(args),
    };
    let args = match merged {
        Ok(args) => args,
        Err(e) => {
            eprintln!("bhlab: {e}");
            return e.exit_code();
        }
    };
    let cli = match parse_args(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("bhlab: {e}");
            e.exit_code()
        }
    }
}
