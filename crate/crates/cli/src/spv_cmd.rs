use std::fs::File;
use std::io::BufWriter;

use anyhow::Context;
use probval_core::envelope::EnvelopeProblem;
use probval_core::spv::{run_spv, schedule_row, SpvRng, SpvTrace, ValidationProblem};
use probval_core::{RiskSpec64, SpvConfig64, SpvSchedule64};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::args::{CardinalityArgs, Format, RunArgs};
use crate::config::Layer;
use crate::error::CliError;
use crate::output;

const CARDINALITY_KEYS: &[&str] = &["eta", "delta", "a", "alpha", "k", "format"];

#[derive(Serialize)]
struct CardinalityCsvRow {
    k: u64,
    m_k: u64,
    #[serde(rename = "M_k")]
    big_m_k: u64,
}

#[derive(Serialize)]
struct RatioCsvRow {
    k: u64,
    m_k: u64,
    #[serde(rename = "M_k")]
    big_m_k: u64,
    ratio: f64,
}

pub fn cardinality(args: CardinalityArgs) -> Result<String, CliError> {
    let layer = Layer::load(args.config.as_deref(), CARDINALITY_KEYS)?;
    let format = layer.get_enum(args.format, "format")?.unwrap_or(Format::Human);
    let eta = layer.require_probability(args.eta, "eta")?;
    let delta = layer.require_probability(args.delta, "delta")?;
    let a: f64 = layer.require(args.a, "a")?;
    let alpha: f64 = layer.require(args.alpha, "alpha")?;
    let k_max: u64 = layer.require(args.k, "k")?;
    if k_max == 0 {
        return Err(CliError::usage("--k must be at least 1"));
    }
    if args.ratios && a == 0.0 {
        return Err(CliError::usage(
            "--ratios needs a > 0: with a = 0 every level m_k is 0 and M_k / m_k is undefined",
        ));
    }
    let risk = RiskSpec64::new(eta, delta)?;
    let schedule = SpvSchedule64::new(a, alpha)?;
    let first = if args.last { k_max } else { 1 };
    let rows = (first..=k_max)
        .map(|k| schedule_row(&schedule, &risk, k))
        .collect::<Result<Vec<_>, _>>()?;

    match format {
        Format::Json => output::json(&rows),
        Format::Csv if args.ratios => output::csv(rows.iter().map(|r| RatioCsvRow {
            k: r.k,
            m_k: r.level,
            big_m_k: r.cardinality,
            ratio: r.ratio.unwrap_or(f64::NAN),
        })),
        Format::Csv => output::csv(rows.iter().map(|r| CardinalityCsvRow {
            k: r.k,
            m_k: r.level,
            big_m_k: r.cardinality,
        })),
        Format::Human => {
            let mut out = if args.ratios {
                format!("{:>10} {:>10} {:>14} {:>12}\n", "k", "m_k", "M_k", "M_k/m_k")
            } else {
                format!("{:>10} {:>10} {:>14}\n", "k", "m_k", "M_k")
            };
            for r in &rows {
                out += &format!("{:>10} {:>10} {:>14}", r.k, r.level, r.cardinality);
                if args.ratios {
                    out += &format!(" {:>12}", output::opt(r.ratio.map(|x| format!("{x:.4}"))));
                }
                out.push('\n');
            }
            Ok(out)
        }
    }
}

/// Candidate generator of a `spv run`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProblemConfig {
    /// Sampled-LP envelope of the given degree.
    Envelope {
        #[serde(default = "default_degree")]
        degree: usize,
        #[serde(default = "default_initial_pool")]
        initial_pool: usize,
    },
    /// Every candidate violates the specification with probability `rate`.
    FixedRate { rate: f64 },
}

fn default_degree() -> usize {
    15
}

fn default_initial_pool() -> usize {
    500
}

/// JSON config of `spv run`; keys mirror the flags of `spv cardinality`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub eta: f64,
    pub delta: f64,
    #[serde(default = "default_a")]
    pub a: f64,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default = "default_max_iterations")]
    pub max_iterations: u64,
    #[serde(default = "default_stop")]
    pub stop_after_accepted: u64,
    #[serde(default = "default_pool_validation")]
    pub pool_validation: bool,
    pub problem: ProblemConfig,
}

fn default_a() -> f64 {
    0.75
}

fn default_alpha() -> f64 {
    2.0
}

fn default_max_iterations() -> u64 {
    100
}

fn default_stop() -> u64 {
    1
}

fn default_pool_validation() -> bool {
    true
}

pub struct FixedRate {
    pub rate: f64,
}

impl ValidationProblem for FixedRate {
    type Candidate = ();
    type Sample = f64;

    fn generate(&mut self, _k: u64, _pool: &[f64], _rng: &mut SpvRng) -> probval_core::Result<()> {
        Ok(())
    }

    fn violates(&self, _c: &(), w: &f64) -> bool {
        *w < self.rate
    }

    fn sample(&self, rng: &mut SpvRng, n: usize) -> Vec<f64> {
        (0..n).map(|_| rng.random::<f64>()).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub seed: u64,
    pub config: RunConfig,
    pub trace: SpvTrace,
}

pub fn run(args: RunArgs) -> Result<String, CliError> {
    let text = std::fs::read_to_string(&args.config)
        .map_err(|e| CliError::usage(format!("cannot read config {}: {e}", args.config.display())))?;
    let config: RunConfig = serde_json::from_str(&text).map_err(|e| CliError::usage(format!("invalid run config: {e}")))?;
    let format = args.format.unwrap_or(Format::Human);
    let seed = Layer::default().seed(args.seed.or(config.seed))?;
    for (name, p) in [("eta", config.eta), ("delta", config.delta)] {
        if !(p > 0.0 && p < 1.0) {
            return Err(CliError::usage(format!("{name} = {p} is not strictly between 0 and 1")));
        }
    }
    let spv = SpvConfig64 {
        risk: RiskSpec64::new(config.eta, config.delta)?,
        schedule: SpvSchedule64::new(config.a, config.alpha)?,
        max_iterations: config.max_iterations,
        stop_after_accepted: config.stop_after_accepted,
        seed,
        pool_validation: config.pool_validation,
    };
    spv.validate()?;
    let trace = match config.problem {
        ProblemConfig::Envelope { degree, initial_pool } => {
            if degree == 0 {
                return Err(CliError::usage("problem.degree must be at least 1"));
            }
            run_spv(&mut EnvelopeProblem { degree, initial_pool }, &spv)?.trace
        }
        ProblemConfig::FixedRate { rate } => {
            if !(0.0..=1.0).contains(&rate) {
                return Err(CliError::usage(format!("problem.rate = {rate} is outside [0, 1]")));
            }
            run_spv(&mut FixedRate { rate }, &spv)?.trace
        }
    };

    if let Some(path) = &args.log {
        let file = File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
        trace
            .write_jsonl(BufWriter::new(file))
            .with_context(|| format!("cannot write {}", path.display()))?;
    }
    let text = match format {
        Format::Json => output::json(&RunReport {
            seed,
            config,
            trace: trace.clone(),
        })?,
        Format::Csv => output::csv(&trace.records)?,
        Format::Human => human_trace(&trace),
    };
    if let Some(abort) = &trace.summary.aborted {
        return Err(anyhow::anyhow!("{text}run aborted at iteration {}: {}", abort.iteration, abort.reason).into());
    }
    Ok(text)
}

fn human_trace(trace: &SpvTrace) -> String {
    let mut out = format!(
        "{:>6} {:>8} {:>12} {:>10} {:>9} {:>10}  {}\n",
        "k", "m_k", "M_k", "violations", "accepted", "pool", "candidate"
    );
    for r in &trace.records {
        out += &format!(
            "{:>6} {:>8} {:>12} {:>10} {:>9} {:>10}  {}\n",
            r.k, r.level, r.cardinality, r.violation_count, r.accepted, r.pool_size, r.candidate_id
        );
    }
    let s = &trace.summary;
    out += &output::table(&[
        ("iterations", s.iterations_run.to_string()),
        ("accepted", s.accepted_count.to_string()),
        ("samples", s.samples_consumed.to_string()),
    ]);
    out
}
