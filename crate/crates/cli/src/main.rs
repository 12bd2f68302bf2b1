//! `schmidt`: command-line driver for Schmidt-norm maximization.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::FermionMode;

#[derive(Debug, Parser)]
#[command(name = "schmidt", version, about = "Maximize Schmidt norms of states constrained to a subspace")]
struct Cli {
    /// JSON run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed; restart seeds are derived from it.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Where to write the JSON report.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Where to write the per-iteration trace CSV.
    #[arg(long, global = true)]
    trace: Option<PathBuf>,
    /// Worker threads for independent restarts.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[arg(long, global = true)]
    restarts: Option<usize>,
    #[arg(long, global = true)]
    max_iters: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Schmidt coefficients and entanglement spectrum of a state.
    Decompose(DecomposeArgs),
    /// Maximize a sum of Schmidt norms over a subspace.
    Maximize(MaximizeArgs),
    /// Search for absolutely maximally entangled states.
    Ame(AmeArgs),
    /// Extremal eigenvalues and entropies of fermionic density matrices.
    Fermion(FermionArgs),
    /// Largest subspace dimension avoiding a variety.
    Variety(VarietyArgs),
    /// Minimal output Rényi entropy of a channel.
    Channel(ChannelArgs),
    /// Ten-restart benchmark table.
    Table1(Table1Args),
}

#[derive(Debug, Args)]
struct DecomposeArgs {
    /// State file: `{"dims": [..], "amps": [[re, im], ..]}`.
    #[arg(long, conflicts_with = "generator")]
    state: Option<PathBuf>,
    #[arg(long, value_enum)]
    generator: Option<commands::Generator>,
    #[arg(long, value_delimiter = ',')]
    dims: Option<Vec<usize>>,
    /// Factors on side A, 1-based.
    #[arg(long, value_delimiter = ',', default_value = "1")]
    cut: Vec<usize>,
}

#[derive(Debug, Args)]
struct MaximizeArgs {
    #[arg(long, value_enum)]
    space: Option<commands::SpaceKind>,
    #[arg(long, value_delimiter = ',')]
    dims: Option<Vec<usize>>,
    #[arg(long)]
    d: Option<usize>,
    #[arg(long)]
    n: Option<usize>,
    /// Particles on side A of a fermionic split.
    #[arg(long)]
    split: Option<usize>,
    /// Factors on side A, 1-based.
    #[arg(long, value_delimiter = ',')]
    cut: Option<Vec<usize>>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    k: Option<usize>,
}

#[derive(Debug, Args)]
struct AmeArgs {
    #[arg(long, value_delimiter = ',')]
    dims: Option<Vec<usize>>,
}

#[derive(Debug, Args)]
struct FermionArgs {
    #[arg(long)]
    d: Option<usize>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    split: Option<usize>,
    #[arg(long, value_enum)]
    mode: Option<FermionMode>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    alpha: Option<f64>,
}

#[derive(Debug, Args)]
struct VarietyArgs {
    #[arg(long, value_enum)]
    space: Option<commands::ProbeSpaceKind>,
    #[arg(long, value_delimiter = ',')]
    dims: Option<Vec<usize>>,
    #[arg(long)]
    d: Option<usize>,
    #[arg(long)]
    n: Option<usize>,
    /// rank1, rank:R, ranks:R1,R2,.., max_entangled, condensate, slater or yang.
    #[arg(long)]
    target: Option<String>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    start_dim: Option<usize>,
}

#[derive(Debug, Args)]
struct ChannelArgs {
    /// Channel file: Kraus operators or a named channel.
    #[arg(long)]
    spec: Option<PathBuf>,
    /// Second channel, to compare `E ⊗ F` against `E` and `F`.
    #[arg(long)]
    second: Option<PathBuf>,
    #[arg(long)]
    alpha: Option<f64>,
}

#[derive(Debug, Args)]
struct Table1Args {
    /// Where to write the table as CSV.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Debug)]
pub enum CliError {
    Config(String),
    NonConvergence(String),
    Inconsistent(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            Self::Config(_) => 1,
            Self::NonConvergence(_) => 2,
            Self::Inconsistent(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Config(m) => write!(f, "configuration error: {m}"),
            Self::NonConvergence(m) => write!(f, "no restart converged: {m}"),
            Self::Inconsistent(m) => write!(f, "internal inconsistency: {m}"),
        }
    }
}

impl From<schmidt_core::Error> for CliError {
    fn from(e: schmidt_core::Error) -> Self {
        use schmidt_core::Error as E;
        match e {
            E::AllRestartsFailed(_) => Self::NonConvergence(e.to_string()),
            E::Inconsistent(_) | E::Backend(_) => Self::Inconsistent(e.to_string()),
            _ => Self::Config(e.to_string()),
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
