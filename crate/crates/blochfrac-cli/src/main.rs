//! Command-line front end for the blochfrac library.

mod config;
mod io;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

use config::{Experiment, ExperimentConfig, Format};

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Lib(#[from] blochfrac::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error("{0}")]
    Usage(String),
}

#[derive(Parser)]
#[command(
    name = "blochfrac",
    version,
    about = "Radial-weight numerics on the unit disc: classification, fractional derivatives, norm profiles, kernel asymptotics, lacunary constructions, and verification suites"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Format {
        match f {
            FormatArg::Csv => Format::Csv,
            FormatArg::Json => Format::Json,
        }
    }
}

#[derive(Args)]
struct Common {
    /// Weight spec (repeatable): constant | standard:beta=B |
    /// exp:alpha=A,l=L,beta=B | lograpid:alpha=A | tabulated:file=PATH
    #[arg(long = "weight")]
    weights: Vec<String>,
    /// Kernel weight of a (kernel, derivative) pair
    #[arg(long)]
    omega: Option<String>,
    /// Derivative weight of a (kernel, derivative) pair
    #[arg(long)]
    mu: Option<String>,
    /// Power-family derivative order (dmu without --weight)
    #[arg(long = "classical-beta")]
    classical_beta: Option<f64>,
    /// Coefficient CSV with header n,re,im
    #[arg(long)]
    coeffs: Option<PathBuf>,
    /// Series truncation for kernel work
    #[arg(long, default_value_t = 8192)]
    trunc: usize,
    /// Radial grid depth in octaves of boundary distance
    #[arg(long = "grid-depth")]
    grid_depth: Option<u32>,
    /// Corpus seed for randomized suites
    #[arg(long, default_value_t = blochfrac::norms::CORPUS_SEED)]
    seed: u64,
    /// Lacunary depth
    #[arg(long, default_value_t = 20)]
    nmax: usize,
    /// Report file (stdout when absent)
    #[arg(long)]
    out: Option<PathBuf>,
    /// csv or json; each subcommand has a natural default
    #[arg(long)]
    format: Option<FormatArg>,
}

#[derive(Subcommand)]
enum Command {
    /// Class verdicts for radial weights (JSON; verdicts are data, exit 0)
    Classify(Common),
    /// Apply the weight-induced or power-family derivative to coefficients
    Dmu(Common),
    /// Norm profile of a coefficient file (weighted with --weight, else unweighted)
    Norms(Common),
    /// Kernel derivative means against the comparison integral over a level grid
    KernelAsymptotics(Common),
    /// Dyadic tail levels: deltas, radii, lacunary exponents
    Lacunary(Common),
    /// Lacunary witness report: norm trace, partial sums, growth profile
    Counterexample(Common),
    /// Embedding suite: unweighted norm within a stable constant of the weighted norm
    VerifyThm12(Common),
    /// Equivalence suite: two-sided norm band plus the multiplier condition
    VerifyThm13(Common),
    /// Kernel-means suite: certified band against the comparison integral
    VerifyProp23(Common),
    /// Partition suite: block polynomials sum to one and reconstruct
    VerifyPartition(Common),
    /// Multiplier suite: bounded (1-r)M_1 sup, stable under refinement
    VerifyMultiplier(Common),
}

impl Command {
    fn into_config(self) -> ExperimentConfig {
        let (experiment, common) = match self {
            Command::Classify(c) => (Experiment::Classify, c),
            Command::Dmu(c) => (Experiment::Dmu, c),
            Command::Norms(c) => (Experiment::Norms, c),
            Command::KernelAsymptotics(c) => (Experiment::KernelAsymptotics, c),
            Command::Lacunary(c) => (Experiment::Lacunary, c),
            Command::Counterexample(c) => (Experiment::Counterexample, c),
            Command::VerifyThm12(c) => (Experiment::VerifyThm12, c),
            Command::VerifyThm13(c) => (Experiment::VerifyThm13, c),
            Command::VerifyProp23(c) => (Experiment::VerifyProp23, c),
            Command::VerifyPartition(c) => (Experiment::VerifyPartition, c),
            Command::VerifyMultiplier(c) => (Experiment::VerifyMultiplier, c),
        };
        ExperimentConfig {
            experiment,
            weights: common.weights,
            omega: common.omega,
            mu: common.mu,
            classical_beta: common.classical_beta,
            coeffs: common.coeffs,
            trunc: common.trunc,
            grid_depth: common.grid_depth,
            seed: common.seed,
            nmax: common.nmax,
            out: common.out,
            format: common.format.map(Format::from),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let config = cli.command.into_config();
    match run::run(&config) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
