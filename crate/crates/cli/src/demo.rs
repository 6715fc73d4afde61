use probval_core::envelope::{run_all, run_approach, Approach, DemoOptions, DemoReport};
use probval_core::RiskSpec64;
use serde::Serialize;

use crate::args::{ApproachArg, BoundArg, DemoArgs, Format};
use crate::config::Layer;
use crate::error::CliError;
use crate::output;
use crate::plan::bound_of;

const KEYS: &[&str] = &[
    "approach",
    "eta",
    "delta",
    "seed",
    "degree",
    "pool",
    "bound",
    "a_bound",
    "a",
    "alpha",
    "max_iterations",
    "validation_size",
    "format",
];

const DEFAULT_DELTA: f64 = 1e-6;

/// Fixed column order of the CSV output.
#[derive(Debug, Serialize)]
pub struct DemoCsvRow {
    pub eta: f64,
    pub approach: &'static str,
    #[serde(rename = "planned_N")]
    pub planned_n: u64,
    pub total_samples: u64,
    pub performance_index: Option<f64>,
    pub empirical_violation: Option<f64>,
    pub seed: u64,
}

impl From<&DemoReport> for DemoCsvRow {
    fn from(r: &DemoReport) -> Self {
        Self {
            eta: r.eta,
            approach: r.approach.as_str(),
            planned_n: r.planned_samples,
            total_samples: r.total_samples,
            performance_index: r.performance_index,
            empirical_violation: r.empirical_violation,
            seed: r.seed,
        }
    }
}

pub fn run(args: DemoArgs) -> Result<String, CliError> {
    let layer = Layer::load(args.config.as_deref(), KEYS)?;
    let approach = layer.get_enum(args.approach, "approach")?.unwrap_or(ApproachArg::All);
    let format = layer.get_enum(args.format, "format")?.unwrap_or(match approach {
        ApproachArg::All => Format::Csv,
        _ => Format::Human,
    });
    let eta = layer.require_probability(args.eta, "eta")?;
    let delta = layer.probability(args.delta, "delta")?.unwrap_or(DEFAULT_DELTA);
    let seed = layer.seed(args.seed)?;
    let risk = RiskSpec64::new(eta, delta)?;

    let defaults = DemoOptions::default();
    let degree: usize = layer.get(args.degree, "degree")?.unwrap_or(defaults.degree);
    if degree == 0 {
        return Err(CliError::usage("--degree must be at least 1"));
    }
    let a_bound: Option<f64> = layer.get(args.a_bound, "a_bound")?;
    let scenario_bound = match layer.get_enum::<BoundArg>(args.bound, "bound")? {
        Some(b) => bound_of(b, a_bound)?,
        None => defaults.scenario_bound,
    };
    let validation_size: Option<u64> = layer.get(args.validation_size, "validation_size")?;
    if validation_size == Some(0) {
        return Err(CliError::usage("--validation-size must be at least 1"));
    }
    let opts = DemoOptions {
        degree,
        initial_pool: layer.get(args.pool, "pool")?.unwrap_or(defaults.initial_pool),
        scenario_bound,
        level_slope: layer.get(args.a, "a")?.unwrap_or(defaults.level_slope),
        failure_exponent: layer.get(args.alpha, "alpha")?.unwrap_or(defaults.failure_exponent),
        spv_max_iterations: layer.get(args.max_iterations, "max_iterations")?.unwrap_or(defaults.spv_max_iterations),
        validation_size,
        ..defaults
    };
    if opts.spv_max_iterations == 0 {
        return Err(CliError::usage("--max-iterations must be at least 1"));
    }
    probval_core::SpvSchedule64::new(opts.level_slope, opts.failure_exponent)?;

    let reports = match approach {
        ApproachArg::All => run_all(&risk, seed, &opts)?,
        ApproachArg::Finite => vec![run_approach(Approach::Finite, &risk, seed, &opts)?],
        ApproachArg::Scenario => vec![run_approach(Approach::Scenario, &risk, seed, &opts)?],
        ApproachArg::Spv => vec![run_approach(Approach::Spv, &risk, seed, &opts)?],
    };
    render(&reports, format)
}

pub fn render(reports: &[DemoReport], format: Format) -> Result<String, CliError> {
    match format {
        Format::Csv => output::csv(reports.iter().map(DemoCsvRow::from)),
        Format::Json => output::json(reports),
        Format::Human => Ok(human(reports)),
    }
}

fn human(reports: &[DemoReport]) -> String {
    let mut out = format!(
        "{:<9} {:>8} {:>10} {:>10} {:>8} {:>10}  {}\n",
        "approach", "eta", "planned_N", "total", "J", "eta_emp", "detail"
    );
    for r in reports {
        let detail = match (&r.finite_choice, &r.spv_trace) {
            (Some(c), _) => format!("d={} j={}", c.degree, c.scale_index),
            (_, Some(t)) => {
                let cards: Vec<String> = t.records.iter().map(|rec| rec.cardinality.to_string()).collect();
                format!("accepted={} M_k={}", t.summary.accepted_count, cards.join(","))
            }
            _ => r.model.as_ref().map_or_else(String::new, |m| format!("d={}", m.degree())),
        };
        out += &format!(
            "{:<9} {:>8} {:>10} {:>10} {:>8} {:>10}  {}\n",
            r.approach.as_str(),
            r.eta,
            r.planned_samples,
            r.total_samples,
            output::opt(r.performance_index.map(|j| format!("{j:.4}"))),
            output::opt(r.empirical_violation.map(|v| format!("{v:.2e}"))),
            detail
        );
    }
    out
}
