use probval_core::complexity::strict_failure_bound;
use probval_core::RiskSpec64;
use serde::{Deserialize, Serialize};

use crate::args::{Format, StrictArgs};
use crate::config::Layer;
use crate::error::CliError;
use crate::output;

const KEYS: &[&str] = &["eta", "delta", "mu", "alpha", "L", "format"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrictReport {
    pub eta: f64,
    pub delta: f64,
    pub mu: f64,
    pub alpha: f64,
    #[serde(rename = "L")]
    pub iterations: u64,
    /// Lower bound on the probability that no candidate is accepted.
    pub bound: f64,
}

pub fn run(args: StrictArgs) -> Result<String, CliError> {
    let layer = Layer::load(args.config.as_deref(), KEYS)?;
    let format = layer.get_enum(args.format, "format")?.unwrap_or(Format::Human);
    let eta = layer.require_probability(args.eta, "eta")?;
    let delta = layer.require_probability(args.delta, "delta")?;
    let mu: f64 = layer.require(args.mu, "mu")?;
    let alpha: f64 = layer.require(args.alpha, "alpha")?;
    let iterations: u64 = layer.require(args.iterations, "L")?;
    let risk = RiskSpec64::new(eta, delta)?;
    let bound = strict_failure_bound(&risk, mu, alpha, iterations)?;
    let report = StrictReport {
        eta,
        delta,
        mu,
        alpha,
        iterations,
        bound,
    };
    match format {
        Format::Json => output::json(&report),
        Format::Csv => output::csv([&report]),
        Format::Human => Ok(format!(
            "P(no acceptance in {iterations} iterations) >= {bound:.6}\n"
        )),
    }
}
