use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "probval", version, about = "Sample-size planning, sequential validation and envelope identification")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample size for a closed-form bound, the exact inversion, or a raw tail value.
    Plan(PlanArgs),
    /// Validation schedules and runs.
    Spv {
        #[command(subcommand)]
        command: SpvCommand,
    },
    /// Envelope identification with the finite-family, scenario or SPV design.
    Demo(DemoArgs),
    /// Lower bound on the chance that a strict scheme finds no solution.
    StrictBound(StrictArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PlanKind {
    Tail,
    Exact,
    Lemma2,
    Euler,
    Suboptimal,
    Optimal,
    Sqrt,
    Worstcase,
    Finite,
    Scenario,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BoundArg {
    Lemma2,
    Euler,
    Suboptimal,
    Optimal,
    Sqrt,
    Exact,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Human,
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ApproachArg {
    Finite,
    Scenario,
    Spv,
    All,
}

#[derive(Debug, Args)]
pub struct PlanArgs {
    pub kind: PlanKind,
    /// Accuracy η in (0, 1).
    #[arg(long, value_parser = probability)]
    pub eta: Option<f64>,
    /// Confidence δ in (0, 1).
    #[arg(long, value_parser = probability)]
    pub delta: Option<f64>,
    /// Allowed violations (default 0).
    #[arg(long)]
    pub m: Option<u64>,
    /// Cardinality of the finite family.
    #[arg(long)]
    pub nc: Option<u64>,
    /// Number of decision variables of the scenario program.
    #[arg(long)]
    pub ntheta: Option<u64>,
    /// Bound parameter a > 1 (lemma2).
    #[arg(long)]
    pub a: Option<f64>,
    /// Bound used by finite and scenario plans.
    #[arg(long, value_enum)]
    pub bound: Option<BoundArg>,
    /// Number of trials (tail).
    #[arg(long)]
    pub n: Option<u64>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// JSON object supplying values for flags not given.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum SpvCommand {
    /// Print (k, m_k, M_k) for k = 1..=K.
    Cardinality(CardinalityArgs),
    /// Run the validation loop described by a JSON config.
    Run(RunArgs),
}

#[derive(Debug, Args)]
pub struct CardinalityArgs {
    #[arg(long, value_parser = probability)]
    pub eta: Option<f64>,
    #[arg(long, value_parser = probability)]
    pub delta: Option<f64>,
    /// Level slope a ≥ 0.
    #[arg(long)]
    pub a: Option<f64>,
    /// Failure exponent α > 1.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Last iteration K.
    #[arg(long)]
    pub k: Option<u64>,
    /// Add the ratio M_k / m_k (requires a > 0).
    #[arg(long)]
    pub ratios: bool,
    /// Print only the row for K.
    #[arg(long)]
    pub last: bool,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Run configuration (JSON).
    #[arg(long)]
    pub config: PathBuf,
    /// Write the per-iteration JSON-lines trace here.
    #[arg(long)]
    pub log: Option<PathBuf>,
    /// Overrides the seed of the config.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Args)]
pub struct DemoArgs {
    #[arg(long, value_enum)]
    pub approach: Option<ApproachArg>,
    #[arg(long, value_parser = probability)]
    pub eta: Option<f64>,
    /// Default 1e-6.
    #[arg(long, value_parser = probability)]
    pub delta: Option<f64>,
    /// Default: PROBVAL_SEED, then 0.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Polynomial degree of the scenario and SPV designs (default 15).
    #[arg(long)]
    pub degree: Option<usize>,
    /// Initial SPV pool (default 500).
    #[arg(long)]
    pub pool: Option<usize>,
    /// Bound for the scenario design (default euler).
    #[arg(long, value_enum)]
    pub bound: Option<BoundArg>,
    /// Bound parameter for --bound lemma2.
    #[arg(long)]
    pub a_bound: Option<f64>,
    /// SPV level slope (default 0.75).
    #[arg(long)]
    pub a: Option<f64>,
    /// SPV failure exponent (default 2).
    #[arg(long)]
    pub alpha: Option<f64>,
    /// SPV iteration budget (default 50).
    #[arg(long)]
    pub max_iterations: Option<u64>,
    /// Empirical validation size (default 10·N).
    #[arg(long)]
    pub validation_size: Option<u64>,
    /// Default csv for --approach all, human otherwise.
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct StrictArgs {
    #[arg(long, value_parser = probability)]
    pub eta: Option<f64>,
    #[arg(long, value_parser = probability)]
    pub delta: Option<f64>,
    /// Lower bound on the violation probability of every design.
    #[arg(long)]
    pub mu: Option<f64>,
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Number of iterations.
    #[arg(long = "L", id = "L")]
    pub iterations: Option<u64>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    #[arg(long)]
    pub config: Option<PathBuf>,
}

/// Decimal or scientific notation, strictly inside (0, 1).
pub fn probability(s: &str) -> Result<f64, String> {
    let v: f64 = s.trim().parse().map_err(|_| format!("`{s}` is not a number"))?;
    if v > 0.0 && v < 1.0 {
        Ok(v)
    } else {
        Err(format!("{v} is not strictly between 0 and 1"))
    }
}
