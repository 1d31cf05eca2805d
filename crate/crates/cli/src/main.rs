mod commands;
mod error;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::CliError;

/// Batch driver for the autoredux laboratory.
#[derive(Debug, Parser)]
#[command(name = "autoredux", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub run: RunConfig,
}

/// Flags shared by every subcommand. A run is reproducible from these and
/// the subcommand options alone.
#[derive(Debug, Clone, Args)]
pub struct RunConfig {
    /// Universe size N.
    #[arg(long, global = true)]
    pub universe: Option<usize>,
    /// Seed for all sampling.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Infinite-like threshold; defaults to ceil(3N/4).
    #[arg(long, global = true)]
    pub tau: Option<usize>,
    /// Monte-Carlo sample count.
    #[arg(long, global = true, default_value_t = 100_000)]
    pub samples: u64,
    /// Input files, in the order the subcommand expects them.
    #[arg(long = "in", global = true, num_args = 1..)]
    pub inputs: Vec<PathBuf>,
    /// Output file (or directory for `gen`); stdout when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Autoreducible fraction per universe size, as CSV.
    Measure(MeasureArgs),
    /// Diagonalize a set against a list of operators.
    Diag(DiagArgs),
    /// Compression report for a set and an introenumerator.
    Compress(CompressArgs),
    /// Enumerate a left-c.e. real's 1-positions from its complement.
    Cototal(CototalArgs),
    /// Check a cototal or introenumeration witness.
    Check(CheckArgs),
    /// Write fixture files.
    Gen(GenArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PsiChoice {
    /// Ψ built from the evens' cototal witness.
    CototalExample,
    /// Ψ ≡ 0.
    Zero,
    /// Ψ(n, Z) = Z((n+1) mod N).
    CopyNext,
    /// Ψ from `--in DELTA`.
    Cototal,
    /// Ψ from `--in PHI GAMMA DELTA`.
    Uie,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MeasureMode {
    /// Exhaustive up to N = 20, sampled above.
    Auto,
    Exhaustive,
    Sampled,
}

#[derive(Debug, Args)]
pub struct MeasureArgs {
    #[arg(long, value_enum, default_value_t = PsiChoice::CototalExample)]
    pub psi: PsiChoice,
    /// Universe sweep `FROM:TO[:STEP]`, inclusive.
    #[arg(long)]
    pub sweep: Option<String>,
    #[arg(long, value_enum, default_value_t = MeasureMode::Auto)]
    pub mode: MeasureMode,
}

#[derive(Debug, Args)]
pub struct DiagArgs {
    /// Run the degree engine with this Φ.
    #[arg(long, requires = "delta")]
    pub phi: Option<PathBuf>,
    /// Run the degree engine with this Δ.
    #[arg(long, requires = "phi")]
    pub delta: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CompressArgs {
    /// Window sizes, `M` or `FROM:TO`; defaults to 1 up to the set's largest
    /// element.
    #[arg(long)]
    pub m: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ScheduleChoice {
    RoundRobin,
    CompFirst,
    QFirst,
}

#[derive(Debug, Args)]
pub struct CototalArgs {
    #[arg(long, value_enum, default_value_t = ScheduleChoice::RoundRobin)]
    pub schedule: ScheduleChoice,
    /// Feed the complement in a seeded random order instead of ascending.
    #[arg(long)]
    pub shuffle: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum WitnessKind {
    Cototal,
    Uie,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    #[arg(long, value_enum)]
    pub kind: WitnessKind,
    /// Force sampling even for small sets.
    #[arg(long)]
    pub sampled: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FixtureKind {
    /// Evens with their cototal witness.
    Cototal,
    /// Evens with the pairwise introenumerator.
    TrivialUie,
    /// Evens with the introenumerator through elements at or above τ.
    ThresholdUie,
    /// Evens and three operators for `diag`.
    Diag,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long, value_enum, default_value_t = FixtureKind::Cototal)]
    pub kind: FixtureKind,
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("AUTOREDUX_THREADS") else {
        return Ok(());
    };
    let threads: usize = raw.trim().parse().ok().filter(|&t| t > 0).ok_or_else(|| {
        CliError::usage(format!(
            "AUTOREDUX_THREADS must be a positive integer, got {raw:?}"
        ))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::usage(e.to_string()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = configure_threads().and_then(|()| commands::run(&cli));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}: {}", e.code(), e);
            ExitCode::from(e.exit_status())
        }
    }
}
