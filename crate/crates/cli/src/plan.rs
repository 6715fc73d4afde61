use probval_core::binomial::{binom_tail, TailQuery};
use probval_core::complexity::{
    plan_euler, plan_exact, plan_finite, plan_lemma2, plan_optimal_a, plan_scenario, plan_sqrt, plan_suboptimal_a,
    plan_worstcase, Bound,
};
use probval_core::{PlanResult64, RiskSpec64, TailValue64};
use serde::{Deserialize, Serialize};

use crate::args::{BoundArg, Format, PlanArgs, PlanKind};
use crate::config::Layer;
use crate::error::CliError;
use crate::output;

const KEYS: &[&str] = &["eta", "delta", "m", "nc", "ntheta", "a", "bound", "n", "format"];

/// JSON form of a plan: the inputs next to the planner output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanReport {
    pub kind: String,
    pub eta: f64,
    pub delta: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_c: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_theta: Option<u64>,
    #[serde(flatten)]
    pub result: PlanResult64,
}

/// JSON form of a raw tail evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailReport {
    pub trials: u64,
    pub eta: f64,
    pub cutoff: u64,
    #[serde(flatten)]
    pub tail: TailValue64,
}

#[derive(Serialize)]
struct PlanCsvRow<'a> {
    kind: &'a str,
    eta: f64,
    delta: f64,
    samples: u64,
    bound: &'a str,
    a_used: Option<f64>,
    cutoff: u64,
    certificate: f64,
    target: f64,
}

pub fn bound_of(arg: BoundArg, a: Option<f64>) -> Result<Bound<f64>, CliError> {
    Ok(match arg {
        BoundArg::Lemma2 => Bound::Lemma2 {
            a: a.ok_or_else(|| CliError::usage("--bound lemma2 needs --a"))?,
        },
        BoundArg::Euler => Bound::Euler,
        BoundArg::Suboptimal => Bound::SuboptimalA,
        BoundArg::Optimal => Bound::OptimalA,
        BoundArg::Sqrt => Bound::Sqrt,
        BoundArg::Exact => Bound::Exact,
    })
}

fn kind_name(kind: PlanKind) -> String {
    clap::ValueEnum::to_possible_value(&kind).map(|v| v.get_name().to_owned()).unwrap_or_default()
}

pub fn run(args: PlanArgs) -> Result<String, CliError> {
    let layer = Layer::load(args.config.as_deref(), KEYS)?;
    let format = layer.get_enum(args.format, "format")?.unwrap_or(Format::Human);
    let eta = layer.require_probability(args.eta, "eta")?;
    let m: u64 = layer.get(args.m, "m")?.unwrap_or(0);

    if args.kind == PlanKind::Tail {
        let n: u64 = layer.require(args.n, "n")?;
        let query = TailQuery::new(n, eta, m)?;
        let report = TailReport {
            trials: n,
            eta,
            cutoff: m,
            tail: binom_tail(&query),
        };
        return render_tail(&report, format);
    }

    let delta = layer.require_probability(args.delta, "delta")?;
    let risk = RiskSpec64::new(eta, delta)?;
    let a: Option<f64> = layer.get(args.a, "a")?;
    let bound_arg = layer.get_enum(args.bound, "bound")?;
    let (mut n_c, mut n_theta) = (None, None);
    let result = match args.kind {
        PlanKind::Tail => unreachable!(),
        PlanKind::Exact => plan_exact(&risk, m)?,
        PlanKind::Lemma2 => plan_lemma2(&risk, m, layer.require(a, "a")?)?,
        PlanKind::Euler => plan_euler(&risk, m)?,
        PlanKind::Suboptimal => plan_suboptimal_a(&risk, m)?,
        PlanKind::Optimal => plan_optimal_a(&risk, m)?,
        PlanKind::Sqrt => plan_sqrt(&risk, m)?,
        PlanKind::Worstcase => {
            if m != 0 {
                return Err(CliError::usage("worstcase admits no violations; drop --m"));
            }
            plan_worstcase(&risk)?
        }
        PlanKind::Finite => {
            let nc: u64 = layer.require(args.nc, "nc")?;
            if nc == 0 {
                return Err(CliError::usage("--nc must be at least 1"));
            }
            n_c = Some(nc);
            plan_finite(&risk, m, nc, bound_of(bound_arg.unwrap_or(BoundArg::Sqrt), a)?)?
        }
        PlanKind::Scenario => {
            if args.m.is_some() {
                return Err(CliError::usage("scenario plans fix m = ntheta - 1; drop --m"));
            }
            let nt: u64 = layer.require(args.ntheta, "ntheta")?;
            if nt == 0 {
                return Err(CliError::usage("--ntheta must be at least 1"));
            }
            n_theta = Some(nt);
            plan_scenario(&risk, nt, bound_of(bound_arg.unwrap_or(BoundArg::Euler), a)?)?
        }
    };
    let report = PlanReport {
        kind: kind_name(args.kind),
        eta,
        delta,
        n_c,
        n_theta,
        result,
    };
    render_plan(&report, format)
}

pub fn certificate_line(report: &PlanReport) -> String {
    let r = &report.result;
    format!(
        "B({}, {}, {}) = {:.6e} <= {:e}",
        r.samples, report.eta, r.cutoff, r.certificate, r.target
    )
}

fn render_plan(report: &PlanReport, format: Format) -> Result<String, CliError> {
    let r = &report.result;
    match format {
        Format::Json => output::json(report),
        Format::Csv => output::csv([PlanCsvRow {
            kind: &report.kind,
            eta: report.eta,
            delta: report.delta,
            samples: r.samples,
            bound: r.bound_name.as_str(),
            a_used: r.a_used,
            cutoff: r.cutoff,
            certificate: r.certificate,
            target: r.target,
        }]),
        Format::Human => Ok(output::table(&[
            ("N", r.samples.to_string()),
            ("bound", r.bound_name.as_str().to_owned()),
            ("a", output::opt(r.a_used)),
            ("m", r.cutoff.to_string()),
            ("certificate", certificate_line(report)),
        ])),
    }
}

fn render_tail(report: &TailReport, format: Format) -> Result<String, CliError> {
    match format {
        Format::Json => output::json(report),
        Format::Csv => output::csv([report]),
        Format::Human => Ok(output::table(&[
            (
                "tail",
                format!("B({}, {}, {}) = {:.12e}", report.trials, report.eta, report.cutoff, report.tail.value),
            ),
            ("ln", format!("{:.12e}", report.tail.log_value)),
        ])),
    }
}
