//! Sequential probabilistic validation.
//!
//! Each iteration `k` asks a [`ValidationProblem`] for a candidate design,
//! draws `M_k` fresh i.i.d. samples and accepts the candidate when it violates
//! the specification on at most `m_k` of them. With the linear level function
//! `m_k = ⌊ak⌋`, the zeta failure function `μ(k) = 1/(ξ(α)k^α)` and
//!
//! ```text
//! M_k = ⌈(1/η)(m_k + ln(ξ(α)k^α/δ) + √(2 m_k ln(ξ(α)k^α/δ)))⌉
//! ```
//!
//! the probability that any accepted candidate has violation probability
//! above `η` is at most `δ`, however many iterations run.
//!
//! # Randomness
//!
//! A run is driven by one root seed. Two ChaCha8 streams are derived from it
//! with [`ChaCha8Rng::seed_from_u64`] and [`ChaCha8Rng::set_stream`]:
//! stream [`GENERATOR_STREAM`] feeds the initial pool and the candidate
//! generator, stream [`VALIDATION_STREAM`] feeds the validation sets. The
//! derivation is fixed, so a trace replays bit for bit on any platform.
//!
//! # Violation counting
//!
//! Validation samples are evaluated in fixed-size chunks that may run on
//! several worker threads. Counting stops at the first chunk boundary where
//! the count exceeds `m_k`, and the recorded count saturates at `m_k + 1`, so
//! the trace does not depend on the number of workers.

use std::io::{self, Write};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::complexity::{requirement, riemann_zeta, zeta_failure, Bound, RiskSpec};
use crate::error::{domain, Error, Result};
use crate::scalar::Real;

/// Random stream used by all problems.
pub type SpvRng = ChaCha8Rng;

pub const GENERATOR_STREAM: u64 = 0;
pub const VALIDATION_STREAM: u64 = 1;

const VIOLATION_CHUNK: usize = 1024;
const CHUNKS_PER_ROUND: usize = 16;

/// Level slope `a`, failure exponent `α` and the cached `ξ(α)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(
    try_from = "RawSchedule<T>",
    into = "RawSchedule<T>",
    bound(serialize = "T: Real + Serialize", deserialize = "T: Real + Deserialize<'de>")
)]
pub struct SpvSchedule<T> {
    level_slope: T,
    failure_exponent: T,
    zeta_alpha: T,
}

#[derive(Serialize, Deserialize)]
struct RawSchedule<T> {
    level_slope: T,
    failure_exponent: T,
}

impl<T: Real> TryFrom<RawSchedule<T>> for SpvSchedule<T> {
    type Error = Error;

    fn try_from(raw: RawSchedule<T>) -> Result<Self> {
        Self::new(raw.level_slope, raw.failure_exponent)
    }
}

impl<T: Real> From<SpvSchedule<T>> for RawSchedule<T> {
    fn from(s: SpvSchedule<T>) -> Self {
        Self {
            level_slope: s.level_slope,
            failure_exponent: s.failure_exponent,
        }
    }
}

impl<T: Real> SpvSchedule<T> {
    pub fn new(level_slope: T, failure_exponent: T) -> Result<Self> {
        if !(level_slope >= T::zero()) || !level_slope.is_finite() {
            return Err(domain("a", level_slope.as_f64(), "[0, inf)"));
        }
        let zeta_alpha = riemann_zeta(failure_exponent)?;
        Ok(Self {
            level_slope,
            failure_exponent,
            zeta_alpha,
        })
    }

    /// The strict scheme, `a = 0`.
    pub fn strict(failure_exponent: T) -> Result<Self> {
        Self::new(T::zero(), failure_exponent)
    }

    pub fn level_slope(&self) -> T {
        self.level_slope
    }

    pub fn failure_exponent(&self) -> T {
        self.failure_exponent
    }

    pub fn zeta_alpha(&self) -> T {
        self.zeta_alpha
    }

    pub fn level(&self, k: u64) -> u64 {
        level_linear(self.level_slope, k)
    }
}

/// `m_k = ⌊ak⌋`.
pub fn level_linear<T: Real>(a: T, k: u64) -> u64 {
    (a * T::from_u64_lossy(k)).floor().to_u64().unwrap_or(u64::MAX)
}

/// `μ(k) = 1/(ξ(α)k^α)`.
pub fn failure_zeta<T: Real>(schedule: &SpvSchedule<T>, k: u64) -> T {
    zeta_failure(schedule.zeta_alpha, schedule.failure_exponent, k)
}

/// Validation-set size `M_k`; always exceeds `m_k`.
pub fn cardinality<T: Real>(schedule: &SpvSchedule<T>, risk: &RiskSpec<T>, k: u64) -> Result<u64> {
    if k == 0 {
        return Err(domain("k", 0.0, "k >= 1"));
    }
    let m = schedule.level(k);
    // ln(ξ(α) k^α / δ)
    let log_budget = schedule.zeta_alpha.ln() + schedule.failure_exponent * T::from_u64_lossy(k).ln() - risk.delta().ln();
    let req = requirement(log_budget, m, Bound::Sqrt)?;
    let samples = (req.scaled / risk.eta())
        .ceil()
        .to_u64()
        .filter(|&n| n < (1u64 << 53))
        .ok_or(Error::Overflow(k))?;
    Ok(samples.max(m + 1))
}

/// One row of [`schedule_diagnostics`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScheduleRow<T> {
    pub k: u64,
    pub level: u64,
    pub cardinality: u64,
    /// `M_k / m_k`; absent while `m_k = 0`.
    pub ratio: Option<T>,
}

/// `(k, m_k, M_k, M_k/m_k)` for a single iteration.
pub fn schedule_row<T: Real>(schedule: &SpvSchedule<T>, risk: &RiskSpec<T>, k: u64) -> Result<ScheduleRow<T>> {
    let level = schedule.level(k);
    let cardinality = cardinality(schedule, risk, k)?;
    let ratio = (level > 0).then(|| T::from_u64_lossy(cardinality) / T::from_u64_lossy(level));
    Ok(ScheduleRow {
        k,
        level,
        cardinality,
        ratio,
    })
}

/// Rows for `k = 1..=k_max`. The ratio tends to `1/η` as `k` grows; the strict
/// scheme has no finite ratio and is rejected.
pub fn schedule_diagnostics<T: Real>(
    schedule: &SpvSchedule<T>,
    risk: &RiskSpec<T>,
    k_max: u64,
) -> Result<Vec<ScheduleRow<T>>> {
    if !(schedule.level_slope > T::zero()) {
        return Err(domain("a", schedule.level_slope.as_f64(), "(0, inf) for ratio diagnostics"));
    }
    (1..=k_max).map(|k| schedule_row(schedule, risk, k)).collect()
}

/// A design problem that the engine can validate.
///
/// `violates` must be a deterministic function of its arguments and `sample`
/// must produce i.i.d. draws that depend only on the stream state.
pub trait ValidationProblem: Sync {
    type Candidate: Sync;
    type Sample: Clone + Send + Sync;

    /// Samples drawn once, before the first iteration, to seed the generator
    /// pool. They count towards the consumed total.
    fn initial_pool(&mut self, _rng: &mut SpvRng) -> Vec<Self::Sample> {
        Vec::new()
    }

    /// Candidate for iteration `k`, built from the accumulated pool.
    fn generate(&mut self, k: u64, pool: &[Self::Sample], rng: &mut SpvRng) -> Result<Self::Candidate>;

    /// `g(θ, w)`: whether the candidate fails the specification at `w`.
    fn violates(&self, candidate: &Self::Candidate, w: &Self::Sample) -> bool;

    fn sample(&self, rng: &mut SpvRng, n: usize) -> Vec<Self::Sample>;

    fn candidate_id(&self, k: u64, _candidate: &Self::Candidate) -> String {
        format!("k{k}")
    }
}

/// Run parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Real + Serialize", deserialize = "T: Real + Deserialize<'de>"))]
pub struct SpvConfig<T> {
    pub risk: RiskSpec<T>,
    pub schedule: SpvSchedule<T>,
    pub max_iterations: u64,
    pub stop_after_accepted: u64,
    pub seed: u64,
    /// Hand each validation set to the generator pool of the next iteration.
    #[serde(default = "default_pool_validation")]
    pub pool_validation: bool,
}

fn default_pool_validation() -> bool {
    true
}

impl<T: Real> SpvConfig<T> {
    /// Stops at the first acceptance or after 100 iterations, with pooling.
    pub fn new(risk: RiskSpec<T>, schedule: SpvSchedule<T>, seed: u64) -> Self {
        Self {
            risk,
            schedule,
            max_iterations: 100,
            stop_after_accepted: 1,
            seed,
            pool_validation: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_iterations == 0 {
            return Err(domain("max_iterations", 0.0, "max_iterations >= 1"));
        }
        if self.stop_after_accepted == 0 {
            return Err(domain("stop_after_accepted", 0.0, "stop_after_accepted >= 1"));
        }
        Ok(())
    }
}

/// One iteration of a run.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub k: u64,
    pub level: u64,
    pub cardinality: u64,
    /// Violations counted, saturating at `level + 1`.
    pub violation_count: u64,
    pub accepted: bool,
    pub candidate_id: String,
    /// Size of the pool the candidate was generated from.
    pub pool_size: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Abort {
    pub iteration: u64,
    pub reason: String,
}

/// Totals of a run, written as the last line of the log.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpvSummary {
    pub samples_consumed: u64,
    pub initial_pool: u64,
    pub accepted_count: u64,
    pub iterations_run: u64,
    pub aborted: Option<Abort>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpvTrace {
    pub records: Vec<IterationRecord>,
    pub summary: SpvSummary,
}

impl SpvTrace {
    pub fn accepted(&self) -> impl Iterator<Item = &IterationRecord> {
        self.records.iter().filter(|r| r.accepted)
    }

    /// One JSON object per iteration, then `{"summary": …}`.
    pub fn write_jsonl<W: Write>(&self, mut out: W) -> io::Result<()> {
        for r in &self.records {
            serde_json::to_writer(&mut out, r)?;
            out.write_all(b"\n")?;
        }
        serde_json::to_writer(&mut out, &SummaryLine { summary: &self.summary })?;
        out.write_all(b"\n")
    }

    pub fn to_jsonl(&self) -> String {
        let mut buf = Vec::new();
        self.write_jsonl(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("JSON is UTF-8")
    }
}

#[derive(Serialize)]
struct SummaryLine<'a> {
    summary: &'a SpvSummary,
}

/// A trace together with the accepted candidates, in acceptance order.
#[derive(Debug, Clone)]
pub struct SpvOutcome<C> {
    pub trace: SpvTrace,
    pub accepted: Vec<(u64, C)>,
}

fn stream(seed: u64, id: u64) -> SpvRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

fn count_violations<P: ValidationProblem>(problem: &P, candidate: &P::Candidate, samples: &[P::Sample], level: u64) -> u64 {
    let limit = level.saturating_add(1);
    let mut count = 0u64;
    for round in samples.chunks(VIOLATION_CHUNK * CHUNKS_PER_ROUND) {
        count += round
            .par_chunks(VIOLATION_CHUNK)
            .map(|chunk| chunk.iter().filter(|w| problem.violates(candidate, w)).count() as u64)
            .sum::<u64>();
        if count >= limit {
            return limit;
        }
    }
    count
}

/// Runs the validation loop until `stop_after_accepted` candidates have been
/// accepted, `max_iterations` is reached or the generator fails.
pub fn run_spv<T: Real, P: ValidationProblem>(problem: &mut P, config: &SpvConfig<T>) -> Result<SpvOutcome<P::Candidate>> {
    config.validate()?;
    let mut gen_rng = stream(config.seed, GENERATOR_STREAM);
    let mut val_rng = stream(config.seed, VALIDATION_STREAM);

    let mut pool = problem.initial_pool(&mut gen_rng);
    let initial_pool = pool.len() as u64;
    let mut consumed = initial_pool;
    let mut records = Vec::new();
    let mut accepted = Vec::new();
    let mut aborted = None;

    for k in 1..=config.max_iterations {
        let candidate = match problem.generate(k, &pool, &mut gen_rng) {
            Ok(c) => c,
            Err(e) => {
                aborted = Some(Abort {
                    iteration: k,
                    reason: e.to_string(),
                });
                break;
            }
        };
        let level = config.schedule.level(k);
        let card = cardinality(&config.schedule, &config.risk, k)?;
        let size = usize::try_from(card).map_err(|_| Error::Overflow(card))?;
        let validation = problem.sample(&mut val_rng, size);
        consumed += card;
        let violation_count = count_violations(problem, &candidate, &validation, level);
        let ok = violation_count <= level;
        records.push(IterationRecord {
            k,
            level,
            cardinality: card,
            violation_count,
            accepted: ok,
            candidate_id: problem.candidate_id(k, &candidate),
            pool_size: pool.len() as u64,
        });
        if ok {
            accepted.push((k, candidate));
        }
        if accepted.len() as u64 >= config.stop_after_accepted {
            break;
        }
        if config.pool_validation {
            pool.extend(validation);
        }
    }

    let summary = SpvSummary {
        samples_consumed: consumed,
        initial_pool,
        accepted_count: accepted.len() as u64,
        iterations_run: records.len() as u64,
        aborted,
    };
    Ok(SpvOutcome {
        trace: SpvTrace { records, summary },
        accepted,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn reference_risk() -> RiskSpec<f64> {
        RiskSpec::new(0.01, 1e-6).unwrap()
    }

    #[test]
    fn level_examples() {
        assert_eq!(level_linear(0.0, 17), 0);
        assert_eq!(level_linear(0.75, 2), 1);
        assert_eq!(level_linear(0.75, 4), 3);
    }

    #[test]
    fn failure_examples() {
        let s = SpvSchedule::new(0.75f64, 2.0).unwrap();
        assert!((failure_zeta(&s, 1) - 0.607927).abs() < 1e-6);
        assert!((failure_zeta(&s, 2) - 0.151982).abs() < 1e-6);
        assert!((s.zeta_alpha() - std::f64::consts::PI.powi(2) / 6.0).abs() < 1e-9);
    }

    #[test]
    fn cardinality_examples() {
        let s = SpvSchedule::new(0.75, 2.0).unwrap();
        assert_eq!(cardinality(&s, &reference_risk(), 1).unwrap(), 1432);
        assert_eq!(cardinality(&s, &reference_risk(), 2).unwrap(), 2231);
        let strict = SpvSchedule::strict(2.0).unwrap();
        assert_eq!(cardinality(&strict, &reference_risk(), 1).unwrap(), 1432);
        assert!(cardinality(&s, &reference_risk(), 0).is_err());
    }

    #[test]
    fn strict_reduction() {
        let strict = SpvSchedule::strict(2.0).unwrap();
        for k in [1u64, 2, 10, 1000, 123_456] {
            let want = (100.0 * (std::f64::consts::PI.powi(2) * (k as f64).powi(2) / (6.0 * 1e-6)).ln()).ceil() as u64;
            assert_eq!(cardinality(&strict, &reference_risk(), k).unwrap(), want, "k={k}");
        }
    }

    #[test]
    fn diagnostics() {
        let s = SpvSchedule::new(0.75, 2.0).unwrap();
        let r4 = schedule_row(&s, &reference_risk(), 10_000).unwrap();
        assert!((r4.ratio.unwrap() - 109.8).abs() < 0.05, "{r4:?}");
        let r6 = schedule_row(&s, &reference_risk(), 1_000_000).unwrap();
        assert!((r6.ratio.unwrap() - 101.1).abs() < 0.05, "{r6:?}");
        assert!(r6.ratio.unwrap() < 102.0);
        let rows = schedule_diagnostics(&s, &reference_risk(), 3).unwrap();
        assert_eq!(rows[0].ratio, None);
        assert_eq!((rows[1].level, rows[1].cardinality), (1, 2231));
        assert!(schedule_diagnostics(&SpvSchedule::strict(2.0).unwrap(), &reference_risk(), 3).is_err());
    }

    #[test]
    fn schedule_validation_and_serde() {
        assert!(SpvSchedule::new(-0.1, 2.0).is_err());
        assert!(SpvSchedule::new(0.5, 1.0).is_err());
        let s = SpvSchedule::new(0.75, 2.0).unwrap();
        let json = serde_json::to_string(&s).unwrap();
        assert_eq!(json, r#"{"level_slope":0.75,"failure_exponent":2.0}"#);
        assert_eq!(serde_json::from_str::<SpvSchedule<f64>>(&json).unwrap(), s);
        assert!(serde_json::from_str::<SpvSchedule<f64>>(r#"{"level_slope":0.75,"failure_exponent":0.5}"#).is_err());
    }

    /// Uniform scalar samples; candidates violate below a fixed threshold.
    struct Threshold {
        threshold: f64,
        pool: usize,
        fail_at: Option<u64>,
    }

    impl ValidationProblem for Threshold {
        type Candidate = f64;
        type Sample = f64;

        fn initial_pool(&mut self, rng: &mut SpvRng) -> Vec<f64> {
            self.sample(rng, self.pool)
        }

        fn generate(&mut self, k: u64, pool: &[f64], _rng: &mut SpvRng) -> Result<f64> {
            if Some(k) == self.fail_at {
                return Err(Error::Lp(crate::lp::LpStatus::Infeasible));
            }
            Ok(pool.len() as f64)
        }

        fn violates(&self, _c: &f64, w: &f64) -> bool {
            *w < self.threshold
        }

        fn sample(&self, rng: &mut SpvRng, n: usize) -> Vec<f64> {
            (0..n).map(|_| rng.random::<f64>()).collect()
        }
    }

    fn config(seed: u64) -> SpvConfig<f64> {
        SpvConfig::new(reference_risk(), SpvSchedule::new(0.75, 2.0).unwrap(), seed)
    }

    #[test]
    fn never_violating_accepts_first() {
        let mut p = Threshold { threshold: 0.0, pool: 500, fail_at: None };
        let out = run_spv(&mut p, &config(1)).unwrap();
        let t = &out.trace;
        assert_eq!(t.summary.iterations_run, 1);
        assert_eq!(t.records[0].violation_count, 0);
        assert!(t.records[0].accepted);
        assert_eq!(t.summary.samples_consumed, 500 + 1432);
        assert_eq!(out.accepted.len(), 1);
    }

    #[test]
    fn always_violating_never_accepts() {
        let mut p = Threshold { threshold: 2.0, pool: 0, fail_at: None };
        let mut cfg = config(1);
        cfg.max_iterations = 12;
        let out = run_spv(&mut p, &cfg).unwrap();
        assert_eq!(out.trace.summary.iterations_run, 12);
        assert_eq!(out.trace.summary.accepted_count, 0);
        for r in &out.trace.records {
            assert_eq!(r.violation_count, r.level + 1);
            assert!(!r.accepted);
        }
        let total: u64 = out.trace.records.iter().map(|r| r.cardinality).sum();
        assert_eq!(out.trace.summary.samples_consumed, total);
    }

    #[test]
    fn pooling_grows_generator_pool() {
        let mut p = Threshold { threshold: 2.0, pool: 500, fail_at: None };
        let mut cfg = config(3);
        cfg.max_iterations = 3;
        let out = run_spv(&mut p, &cfg).unwrap();
        let pools: Vec<u64> = out.trace.records.iter().map(|r| r.pool_size).collect();
        assert_eq!(pools, vec![500, 500 + 1432, 500 + 1432 + 2231]);
        cfg.pool_validation = false;
        let out = run_spv(&mut p, &cfg).unwrap();
        assert!(out.trace.records.iter().all(|r| r.pool_size == 500));
    }

    #[test]
    fn generator_failure_aborts() {
        let mut p = Threshold { threshold: 2.0, pool: 0, fail_at: Some(3) };
        let out = run_spv(&mut p, &config(1)).unwrap();
        assert_eq!(out.trace.summary.iterations_run, 2);
        assert_eq!(out.trace.summary.aborted.as_ref().unwrap().iteration, 3);
    }

    #[test]
    fn reproducible_and_jsonl() {
        let mut p = Threshold { threshold: 0.003, pool: 100, fail_at: None };
        let mut cfg = config(99);
        cfg.stop_after_accepted = 3;
        let a = run_spv(&mut p, &cfg).unwrap().trace;
        let b = run_spv(&mut p, &cfg).unwrap().trace;
        assert_eq!(a, b);
        let log = a.to_jsonl();
        let lines: Vec<&str> = log.lines().collect();
        assert_eq!(lines.len(), a.records.len() + 1);
        let first: IterationRecord = serde_json::from_str(lines[0]).unwrap();
        assert_eq!(first, a.records[0]);
        let last: serde_json::Value = serde_json::from_str(lines[lines.len() - 1]).unwrap();
        let summary: SpvSummary = serde_json::from_value(last["summary"].clone()).unwrap();
        assert_eq!(summary, a.summary);
    }

    #[test]
    fn config_round_trip() {
        let cfg = config(5);
        let json = serde_json::to_string(&cfg).unwrap();
        assert_eq!(serde_json::from_str::<SpvConfig<f64>>(&json).unwrap(), cfg);
        let mut bad = cfg;
        bad.max_iterations = 0;
        assert!(bad.validate().is_err());
    }
}
