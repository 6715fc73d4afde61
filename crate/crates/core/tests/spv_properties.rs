//! Schedule guarantees and statistical behaviour of the validation loop.

use probval_core::binomial::binom_tail_at;
use probval_core::complexity::{riemann_zeta, RiskSpec};
use probval_core::spv::{
    cardinality, failure_zeta, run_spv, schedule_row, SpvConfig, SpvRng, SpvSchedule, ValidationProblem,
};
use probval_core::Result;
use rand::Rng;

#[test]
fn per_iteration_certificate() {
    let grid = [(0.01, 1e-6, 0.75, 2.0), (0.1, 0.05, 0.75, 2.0), (0.05, 1e-3, 0.3, 1.1), (0.01, 1e-6, 0.0, 2.0)];
    for &(eta, delta, a, alpha) in &grid {
        let risk = RiskSpec::new(eta, delta).unwrap();
        let s = SpvSchedule::new(a, alpha).unwrap();
        for k in 1..=10_000u64 {
            let m = s.level(k);
            let big_m = cardinality(&s, &risk, k).unwrap();
            assert!(m < big_m);
            let tail = binom_tail_at(big_m, eta, m).unwrap();
            let budget = delta * failure_zeta(&s, k);
            assert!(tail.value <= budget, "eta={eta} a={a} k={k}: {} > {budget}", tail.value);
        }
    }
}

#[test]
fn strict_cardinalities_match_closed_form() {
    for &alpha in &[1.1, 2.0, 3.0] {
        let z = riemann_zeta(alpha).unwrap();
        let s = SpvSchedule::strict(alpha).unwrap();
        let risk = RiskSpec::new(0.05, 1e-4).unwrap();
        for k in 1..=2000u64 {
            let want = ((1.0 / 0.05) * (z * (k as f64).powf(alpha) / 1e-4).ln()).ceil() as u64;
            assert_eq!(cardinality(&s, &risk, k).unwrap(), want, "alpha={alpha} k={k}");
        }
    }
}

#[test]
fn ratio_approaches_inverse_eta() {
    let risk = RiskSpec::new(0.01, 1e-6).unwrap();
    let s = SpvSchedule::new(0.75, 2.0).unwrap();
    let ks = [100u64, 1_000, 10_000, 100_000, 1_000_000];
    let ratios: Vec<f64> = ks.iter().map(|&k| schedule_row(&s, &risk, k).unwrap().ratio.unwrap()).collect();
    assert!(ratios.windows(2).all(|w| w[1] < w[0]), "{ratios:?}");
    assert!(ratios[4] < 1.02 * 100.0 && ratios[4] > 100.0);
}

/// Every candidate violates with probability exactly `rate`.
struct FixedRate {
    rate: f64,
}

impl ValidationProblem for FixedRate {
    type Candidate = ();
    type Sample = f64;

    fn generate(&mut self, _k: u64, _pool: &[f64], _rng: &mut SpvRng) -> Result<()> {
        Ok(())
    }

    fn violates(&self, _c: &(), w: &f64) -> bool {
        *w < self.rate
    }

    fn sample(&self, rng: &mut SpvRng, n: usize) -> Vec<f64> {
        (0..n).map(|_| rng.random::<f64>()).collect()
    }
}

#[test]
fn misclassification_rate_within_confidence() {
    let (eta, delta) = (0.1, 0.05);
    let trials = 1000u64;
    let risk = RiskSpec::new(eta, delta).unwrap();
    let mut wrongly_accepted = 0u64;
    for seed in 0..trials {
        let mut cfg = SpvConfig::new(risk, SpvSchedule::new(0.75, 2.0).unwrap(), seed);
        cfg.max_iterations = 30;
        cfg.pool_validation = false;
        let out = run_spv(&mut FixedRate { rate: 2.0 * eta }, &cfg).unwrap();
        if out.trace.summary.accepted_count > 0 {
            wrongly_accepted += 1;
        }
    }
    let rate = wrongly_accepted as f64 / trials as f64;
    let limit = delta + 3.0 * (delta * (1.0 - delta) / trials as f64).sqrt();
    assert!(rate <= limit, "rate {rate} > {limit}");
}

#[test]
fn good_candidates_are_accepted() {
    // violation probability well below η passes the first few iterations
    let risk = RiskSpec::new(0.1, 0.05).unwrap();
    let mut accepted = 0;
    for seed in 0..200 {
        let cfg = SpvConfig::new(risk, SpvSchedule::new(0.75, 2.0).unwrap(), seed);
        let out = run_spv(&mut FixedRate { rate: 0.01 }, &cfg).unwrap();
        if out.trace.summary.accepted_count == 1 {
            accepted += 1;
        }
    }
    assert_eq!(accepted, 200);
}

#[test]
fn strict_scheme_respects_failure_bound() {
    // every candidate violates with probability mu, so the lower bound on
    // the chance of never accepting must hold empirically
    let (eta, delta, mu, alpha, iterations) = (0.1, 0.01, 0.05, 2.0, 16u64);
    let risk = RiskSpec::new(eta, delta).unwrap();
    let bound = probval_core::complexity::strict_failure_bound(&risk, mu, alpha, iterations).unwrap();
    let trials = 2000u64;
    let mut never = 0u64;
    for seed in 0..trials {
        let mut cfg = SpvConfig::new(risk, SpvSchedule::strict(alpha).unwrap(), seed);
        cfg.max_iterations = iterations;
        cfg.pool_validation = false;
        let out = run_spv(&mut FixedRate { rate: mu }, &cfg).unwrap();
        if out.trace.summary.accepted_count == 0 {
            never += 1;
        }
    }
    let p = never as f64 / trials as f64;
    let slack = 3.0 * (bound * (1.0 - bound) / trials as f64).sqrt();
    assert!(bound > 0.5);
    assert!(p >= bound - slack, "never-accept rate {p} below bound {bound}");
}
