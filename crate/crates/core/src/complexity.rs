//! Closed-form sample-complexity planners.
//!
//! Every planner evaluates a real-valued requirement `η·N` (which never
//! depends on `η`), divides by `η` and rounds up. The result is then
//! certified by evaluating the exact binomial tail at the returned `N`.

use serde::{Deserialize, Serialize};

use crate::binomial::{binom_tail, check_open_unit, min_samples_exact, TailQuery};
use crate::error::{domain, Error, Result};
use crate::scalar::{ceil_log2, Real};

/// Accuracy `η` and confidence `δ`, both strictly inside `(0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawRisk<T>", bound(deserialize = "T: Real + Deserialize<'de>"))]
pub struct RiskSpec<T> {
    eta: T,
    delta: T,
}

#[derive(Deserialize)]
struct RawRisk<T> {
    eta: T,
    delta: T,
}

impl<T: Real> TryFrom<RawRisk<T>> for RiskSpec<T> {
    type Error = Error;

    fn try_from(raw: RawRisk<T>) -> Result<Self> {
        RiskSpec::new(raw.eta, raw.delta)
    }
}

impl<T: Real> RiskSpec<T> {
    pub fn new(eta: T, delta: T) -> Result<Self> {
        check_open_unit("eta", eta)?;
        check_open_unit("delta", delta)?;
        Ok(Self { eta, delta })
    }

    pub fn eta(&self) -> T {
        self.eta
    }

    pub fn delta(&self) -> T {
        self.delta
    }

    /// Same accuracy, confidence budget divided by `parts`.
    pub fn split_delta(&self, parts: u64) -> Result<Self> {
        if parts == 0 {
            return Err(domain("n_C", 0.0, "n_C >= 1"));
        }
        Self::new(self.eta, self.delta / T::from_u64_lossy(parts))
    }
}

/// Which bound produced a sample size.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundName {
    Lemma2FixedA,
    Euler,
    SuboptimalA,
    OptimalA,
    Sqrt,
    Worstcase,
    ExactOracle,
}

impl BoundName {
    pub fn as_str(&self) -> &'static str {
        match self {
            BoundName::Lemma2FixedA => "lemma2_fixed_a",
            BoundName::Euler => "euler",
            BoundName::SuboptimalA => "suboptimal_a",
            BoundName::OptimalA => "optimal_a",
            BoundName::Sqrt => "sqrt",
            BoundName::Worstcase => "worstcase",
            BoundName::ExactOracle => "exact_oracle",
        }
    }
}

/// Bound selector for the finite-family and scenario planners.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Bound<T> {
    Lemma2 { a: T },
    Euler,
    SuboptimalA,
    OptimalA,
    Sqrt,
    Exact,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlanResult<T> {
    pub samples: u64,
    pub bound_name: BoundName,
    pub a_used: Option<T>,
    /// `B(N, η, m)` at the returned `N`.
    pub certificate: T,
    /// Budget the certificate is checked against (`δ`, or `δ/n_C` for a
    /// finite family).
    pub target: T,
    pub cutoff: u64,
}

/// `η·N` before rounding, together with the `a` that produced it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Requirement<T> {
    pub scaled: T,
    pub a_used: Option<T>,
    pub bound_name: BoundName,
}

fn lemma2_requirement<T: Real>(log_inv_delta: T, m: u64, a: T) -> T {
    let mf = T::from_u64_lossy(m);
    a / (a - T::one()) * (log_inv_delta + mf * a.ln())
}

fn suboptimal_a<T: Real>(log_inv_delta: T, m: u64) -> T {
    let mf = T::from_u64_lossy(m);
    T::one() + log_inv_delta / mf + (T::lit(2.0) * log_inv_delta / mf).sqrt()
}

const GOLDEN_TOL: f64 = 1e-6;

/// Minimizes `f(a) = a/(a-1) (ln(1/δ) + m ln a)` over `a > 1` by golden-section
/// search. Returns `(a*, f(a*))`. Only meaningful for `m > 0`.
pub fn optimal_a<T: Real>(log_inv_delta: T, m: u64) -> (T, T) {
    let f = |a: T| lemma2_requirement(log_inv_delta, m, a);
    let mut lo = T::one() + T::lit(1e-9);
    let mut hi = T::lit(10.0).max(T::lit(10.0) * suboptimal_a(log_inv_delta, m));
    let inv_phi = (T::lit(5.0).sqrt() - T::one()) / T::lit(2.0);
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    let tol = T::lit(GOLDEN_TOL);
    while hi - lo > tol {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2);
        }
        if hi - lo <= tol || x1 >= x2 {
            break;
        }
    }
    let a = (lo + hi) / T::lit(2.0);
    (a, f(a))
}

/// The pre-ceiling requirement `η·N` of a closed-form bound.
pub fn requirement<T: Real>(log_inv_delta: T, m: u64, bound: Bound<T>) -> Result<Requirement<T>> {
    let mf = T::from_u64_lossy(m);
    let req = match bound {
        Bound::Lemma2 { a } => {
            if !(a > T::one()) || !a.is_finite() {
                return Err(domain("a", a.as_f64(), "(1, inf)"));
            }
            Requirement {
                scaled: lemma2_requirement(log_inv_delta, m, a),
                a_used: Some(a),
                bound_name: BoundName::Lemma2FixedA,
            }
        }
        Bound::Euler => Requirement {
            scaled: lemma2_requirement(log_inv_delta, m, T::E()),
            a_used: Some(T::E()),
            bound_name: BoundName::Euler,
        },
        Bound::SuboptimalA => {
            let a = if m == 0 {
                T::E()
            } else {
                suboptimal_a(log_inv_delta, m)
            };
            Requirement {
                scaled: lemma2_requirement(log_inv_delta, m, a),
                a_used: Some(a),
                bound_name: BoundName::SuboptimalA,
            }
        }
        Bound::OptimalA => {
            if m == 0 {
                // f(a) decreases to ln(1/δ) as a → ∞
                Requirement {
                    scaled: log_inv_delta,
                    a_used: None,
                    bound_name: BoundName::OptimalA,
                }
            } else {
                let (a, value) = optimal_a(log_inv_delta, m);
                Requirement {
                    scaled: value,
                    a_used: Some(a),
                    bound_name: BoundName::OptimalA,
                }
            }
        }
        Bound::Sqrt => Requirement {
            scaled: mf + log_inv_delta + (T::lit(2.0) * mf * log_inv_delta).sqrt(),
            a_used: None,
            bound_name: BoundName::Sqrt,
        },
        Bound::Exact => return Err(domain("bound", f64::NAN, "closed-form bounds")),
    };
    Ok(req)
}

fn ceil_samples<T: Real>(real: T) -> Result<u64> {
    let n = real.ceil();
    n.to_u64()
        .filter(|&n| n < (1u64 << 53))
        .ok_or(Error::Overflow(u64::MAX))
}

fn certify<T: Real>(
    spec: &RiskSpec<T>,
    m: u64,
    samples: u64,
    bound_name: BoundName,
    a_used: Option<T>,
) -> Result<PlanResult<T>> {
    if samples <= m {
        return Err(Error::CutoffExceedsTrials {
            cutoff: m,
            trials: samples,
        });
    }
    let certificate = binom_tail(&TailQuery::new(samples, spec.eta(), m)?).value;
    if certificate > spec.delta() {
        return Err(Error::Certificate {
            samples,
            certificate: certificate.as_f64(),
            target: spec.delta().as_f64(),
        });
    }
    Ok(PlanResult {
        samples,
        bound_name,
        a_used,
        certificate,
        target: spec.delta(),
        cutoff: m,
    })
}

/// Sample size for `B(N, η, m) <= δ` under the selected bound.
pub fn plan<T: Real>(spec: &RiskSpec<T>, m: u64, bound: Bound<T>) -> Result<PlanResult<T>> {
    if let Bound::Exact = bound {
        let samples = min_samples_exact(spec.eta(), spec.delta(), m)?;
        return certify(spec, m, samples, BoundName::ExactOracle, None);
    }
    let log_inv_delta = -spec.delta().ln();
    let req = requirement(log_inv_delta, m, bound)?;
    let samples = ceil_samples(req.scaled / spec.eta())?;
    certify(spec, m, samples, req.bound_name, req.a_used)
}

pub fn plan_lemma2<T: Real>(spec: &RiskSpec<T>, m: u64, a: T) -> Result<PlanResult<T>> {
    plan(spec, m, Bound::Lemma2 { a })
}

/// Lemma-2 bound at `a = e`.
pub fn plan_euler<T: Real>(spec: &RiskSpec<T>, m: u64) -> Result<PlanResult<T>> {
    plan(spec, m, Bound::Euler)
}

/// `a = 1 + ln(1/δ)/m + √(2 ln(1/δ)/m)`, falling back to `a = e` at `m = 0`.
pub fn plan_suboptimal_a<T: Real>(spec: &RiskSpec<T>, m: u64) -> Result<PlanResult<T>> {
    plan(spec, m, Bound::SuboptimalA)
}

pub fn plan_optimal_a<T: Real>(spec: &RiskSpec<T>, m: u64) -> Result<PlanResult<T>> {
    plan(spec, m, Bound::OptimalA)
}

/// `N >= (m + ln(1/δ) + √(2 m ln(1/δ))) / η`.
pub fn plan_sqrt<T: Real>(spec: &RiskSpec<T>, m: u64) -> Result<PlanResult<T>> {
    plan(spec, m, Bound::Sqrt)
}

pub fn plan_exact<T: Real>(spec: &RiskSpec<T>, m: u64) -> Result<PlanResult<T>> {
    plan(spec, m, Bound::Exact)
}

/// Worst-case performance analysis: `N >= ln(1/δ) / ln(1/(1-η))`.
pub fn plan_worstcase<T: Real>(spec: &RiskSpec<T>) -> Result<PlanResult<T>> {
    let real = spec.delta().ln() / (-spec.eta()).ln_1p();
    let samples = ceil_samples(real)?.max(1);
    certify(spec, 0, samples, BoundName::Worstcase, None)
}

/// Finite family of at most `n_c` designs: the bound is applied to `δ/n_C`.
pub fn plan_finite<T: Real>(
    spec: &RiskSpec<T>,
    m: u64,
    n_c: u64,
    bound: Bound<T>,
) -> Result<PlanResult<T>> {
    plan(&spec.split_delta(n_c)?, m, bound)
}

/// Convex scenario program with `n_theta` decision variables: `m = n_θ - 1`.
pub fn plan_scenario<T: Real>(spec: &RiskSpec<T>, n_theta: u64, bound: Bound<T>) -> Result<PlanResult<T>> {
    if n_theta == 0 {
        return Err(domain("n_theta", 0.0, "n_theta >= 1"));
    }
    plan(spec, n_theta - 1, bound)
}

/// `Φ(s, t) = Σ_{k=0}^{t} 2^{(1-s)k}`, in closed form.
pub fn phi<T: Real>(s: T, t: u64) -> Result<T> {
    if !(s > T::zero()) {
        return Err(domain("s", s.as_f64(), "(0, inf)"));
    }
    if s == T::one() {
        return Ok(T::from_u64_lossy(t) + T::one());
    }
    let two = T::lit(2.0);
    let r = T::one() - s;
    let tp1 = T::from_u64_lossy(t) + T::one();
    Ok((T::one() - two.powf(r * tp1)) / (T::one() - two.powf(r)))
}

/// Target half-width of the bracket around ζ(α).
pub const ZETA_TOLERANCE: f64 = 1e-9;

/// Riemann zeta `ξ(α)` for `α > 1`.
///
/// Sums `K` terms directly and brackets the tail `Σ_{k>K} k^{-α}` between the
/// trapezoid bound `∫_{K+1}^∞ x^{-α}dx + (K+1)^{-α}/2` and the midpoint bound
/// `∫_{K+1/2}^∞ x^{-α}dx` (both valid because `x^{-α}` is convex). `K` doubles
/// until the bracket is narrower than [`ZETA_TOLERANCE`]; the midpoint is
/// returned.
pub fn riemann_zeta<T: Real>(alpha: T) -> Result<T> {
    let (lo, hi) = zeta_bracket(alpha)?;
    Ok((lo + hi) / T::lit(2.0))
}

/// Rigorous bracket `[lower, upper]` around `ξ(α)` (up to rounding).
pub fn zeta_bracket<T: Real>(alpha: T) -> Result<(T, T)> {
    if !(alpha > T::one()) || !alpha.is_finite() {
        return Err(domain("alpha", alpha.as_f64(), "(1, inf)"));
    }
    let tol = T::lit(ZETA_TOLERANCE).max(T::epsilon() * T::lit(16.0));
    let one = T::one();
    let tail_integral = |x: T| x.powf(one - alpha) / (alpha - one);
    let mut partial = crate::scalar::CompensatedSum::new();
    let mut k: u64 = 0;
    let mut target: u64 = 16;
    loop {
        while k < target {
            k += 1;
            partial.add(T::from_u64_lossy(k).powf(-alpha));
        }
        let kf = T::from_u64_lossy(k);
        let next = kf + one;
        let lower = partial.value() + tail_integral(next) + next.powf(-alpha) / T::lit(2.0);
        let upper = partial.value() + tail_integral(kf + T::lit(0.5));
        if upper - lower <= tol || k >= (1 << 24) {
            return Ok((lower, upper));
        }
        target *= 2;
    }
}

/// Failure function `μ(k) = 1 / (ξ(α) k^α)` given a cached `ξ(α)`.
pub fn zeta_failure<T: Real>(zeta_alpha: T, alpha: T, k: u64) -> T {
    (zeta_alpha * T::from_u64_lossy(k).powf(alpha)).recip()
}

/// Lower bound on the probability that a strict validation scheme (`a = 0`)
/// classifies no candidate as a probabilistic solution within `L` iterations,
/// when every design has violation probability at least `μ`:
/// `1 - (δ/ξ(α))^{μ/η} Φ(αμ/η, ⌈log₂ L⌉)`.
pub fn strict_failure_bound<T: Real>(spec: &RiskSpec<T>, mu: T, alpha: T, iterations: u64) -> Result<T> {
    if !(mu > T::zero()) {
        return Err(domain("mu", mu.as_f64(), "(0, inf)"));
    }
    if iterations == 0 {
        return Err(domain("L", 0.0, "L >= 1"));
    }
    let zeta = riemann_zeta(alpha)?;
    let ratio = mu / spec.eta();
    let scale = (spec.delta() / zeta).powf(ratio);
    let partial = phi(alpha * ratio, u64::from(ceil_log2(iterations)))?;
    Ok(T::one() - scale * partial)
}

/// `h(r) = √(2(r-1)) - ln(r + √(2(r-1)))`, non-negative for `r >= 1`.
pub fn sqrt_bound_auxiliary<T: Real>(r: T) -> T {
    let root = (T::lit(2.0) * (r - T::one())).sqrt();
    root - (r + root).ln()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(eta: f64, delta: f64) -> RiskSpec<f64> {
        RiskSpec::new(eta, delta).unwrap()
    }

    #[test]
    fn lemma2_examples() {
        assert_eq!(plan_lemma2(&spec(0.01, 1e-6), 0, std::f64::consts::E).unwrap().samples, 2186);
        assert_eq!(plan_lemma2(&spec(0.01, 1e-6), 31, std::f64::consts::E).unwrap().samples, 7090);
        assert_eq!(plan_lemma2(&spec(0.1, 0.1), 0, 2.0).unwrap().samples, 47);
        assert!(plan_lemma2(&spec(0.1, 0.1), 0, 1.0).is_err());
    }

    #[test]
    fn euler_examples() {
        let r = plan_euler(&spec(0.01, 1e-6), 31).unwrap();
        assert_eq!(r.samples, 7090);
        assert_eq!(r.bound_name, BoundName::Euler);
        assert!(r.certificate <= 1e-6);
        assert_eq!(plan_euler(&spec(0.01, 1e-6), 0).unwrap().samples, 2186);
    }

    #[test]
    fn suboptimal_examples() {
        let r = plan_suboptimal_a(&spec(0.01, 1e-6), 31).unwrap();
        assert!((r.a_used.unwrap() - 2.389_760_811).abs() < 1e-8);
        assert_eq!(r.samples, 7020);
        let r0 = plan_suboptimal_a(&spec(0.01, 1e-6), 0).unwrap();
        assert_eq!(r0.a_used, Some(std::f64::consts::E));
        assert_eq!(r0.samples, 2186);
    }

    #[test]
    fn optimal_m_zero_is_limit() {
        let r = plan_optimal_a(&spec(0.01, 1e-6), 0).unwrap();
        assert_eq!(r.samples, 1382);
        assert_eq!(r.a_used, None);
    }

    #[test]
    fn sqrt_examples() {
        assert_eq!(plan_sqrt(&spec(0.01, 1e-6), 0).unwrap().samples, 1382);
        assert_eq!(plan_sqrt(&spec(0.01, 1e-6), 31).unwrap().samples, 7409);
        assert_eq!(plan_sqrt(&spec(0.5, 0.5), 1).unwrap().samples, 6);
    }

    #[test]
    fn worstcase_examples() {
        assert_eq!(plan_worstcase(&spec(0.5, 0.5)).unwrap().samples, 1);
        assert_eq!(plan_worstcase(&spec(0.01, 1e-6)).unwrap().samples, 1375);
        assert_eq!(plan_worstcase(&spec(0.1, 1e-6)).unwrap().samples, 132);
    }

    #[test]
    fn finite_examples() {
        let s = spec(0.01, 1e-6);
        let r = plan_finite(&s, 0, 400, Bound::Sqrt).unwrap();
        assert_eq!(r.samples, 1981);
        assert!((r.target - 1e-6 / 400.0).abs() < 1e-20);
        assert!(r.certificate <= r.target);
        assert_eq!(plan_finite(&s, 0, 1, Bound::Sqrt).unwrap().samples, 1382);
        assert_eq!(plan_finite(&spec(0.001, 1e-6), 0, 400, Bound::Sqrt).unwrap().samples, 19807);
        assert!(plan_finite(&s, 0, 0, Bound::Sqrt).is_err());
    }

    #[test]
    fn scenario_examples() {
        let s = spec(0.01, 1e-6);
        assert_eq!(plan_scenario(&s, 32, Bound::Euler).unwrap().samples, 7090);
        assert_eq!(plan_scenario(&s, 1, Bound::Sqrt).unwrap().samples, 1382);
        assert!(plan_scenario(&s, 0, Bound::Sqrt).is_err());
    }

    #[test]
    fn phi_examples() {
        assert_eq!(phi(1.0, 7).unwrap(), 8.0);
        assert!((phi(2.0f64, 3).unwrap() - 1.875).abs() < 1e-15);
        assert!((phi(1.48f64, 20).unwrap() - 3.5300).abs() < 1e-4);
        assert!(phi(0.0f64, 3).is_err());
    }

    #[test]
    fn zeta_examples() {
        let pi2_6 = std::f64::consts::PI.powi(2) / 6.0;
        assert!((riemann_zeta(2.0).unwrap() - pi2_6).abs() < 1e-9);
        assert!((riemann_zeta(1.1f64).unwrap() - 10.5844).abs() < 1e-3);
        assert!((riemann_zeta(20.0f64).unwrap() - 1.000_000_95).abs() < 1e-8);
        assert!(riemann_zeta(1.0).is_err());
        let (lo, hi) = zeta_bracket(1.5).unwrap();
        assert!(hi - lo <= ZETA_TOLERANCE && lo <= hi);
    }

    #[test]
    fn strict_bound_examples() {
        let s = spec(0.1, 1e-4);
        let b11 = strict_failure_bound(&s, 0.074, 1.1, 1_000_000).unwrap();
        assert!((b11 - 0.9806).abs() < 1e-3 && b11 >= 0.98, "{b11}");
        let b2 = strict_failure_bound(&s, 0.074, 2.0, 1_000_000).unwrap();
        assert!((b2 - 0.9973).abs() < 1e-3 && b2 >= 0.99, "{b2}");
        let b = strict_failure_bound(&s, 0.1, 2.0, 1_000_000).unwrap();
        let expected = 1.0 - 1e-4 / riemann_zeta(2.0).unwrap() * phi(2.0, 20).unwrap();
        assert!((b - expected).abs() < 1e-12);
        assert!((b - 0.99988).abs() < 1e-5);
    }

    #[test]
    fn risk_spec_validation() {
        assert!(RiskSpec::new(0.0, 0.5).is_err());
        assert!(RiskSpec::new(0.5, 1.0).is_err());
        let parsed: std::result::Result<RiskSpec<f64>, _> =
            serde_json::from_str(r#"{"eta": 1.5, "delta": 0.1}"#);
        assert!(parsed.is_err());
    }

    #[test]
    fn single_precision_planners() {
        let s = RiskSpec::new(0.01f32, 1e-6).unwrap();
        assert_eq!(plan_finite(&s, 0, 400, Bound::Sqrt).unwrap().samples, 1981);
        assert_eq!(plan_scenario(&s, 32, Bound::Euler).unwrap().samples, 7090);
    }
}
