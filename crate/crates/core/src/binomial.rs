//! Binomial lower tail `B(N, η, m) = Σ_{i=0}^{m} C(N,i) η^i (1-η)^{N-i}`.
//!
//! Every term is evaluated in log space with Loader's saddle-point split
//! (Stirling error plus binomial deviance), so the logarithm of a term carries
//! an absolute error of a few ulps even when `N` is in the millions. The sum is
//! anchored at the largest term of the range and accumulated with compensated
//! summation; the walk away from the anchor stops once the remaining terms can
//! no longer move the result, which is exact to rounding because the binomial
//! pmf is log-concave.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::scalar::{CompensatedSum, Real};

/// Arguments of a tail evaluation: `N` trials, success probability `η`,
/// cutoff `m`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawQuery<T>", bound(deserialize = "T: Real + Deserialize<'de>"))]
pub struct TailQuery<T> {
    trials: u64,
    success_prob: T,
    cutoff: u64,
}

#[derive(Deserialize)]
struct RawQuery<T> {
    trials: u64,
    success_prob: T,
    cutoff: u64,
}

impl<T: Real> TryFrom<RawQuery<T>> for TailQuery<T> {
    type Error = Error;

    fn try_from(raw: RawQuery<T>) -> Result<Self> {
        Self::new(raw.trials, raw.success_prob, raw.cutoff)
    }
}

impl<T: Real> TailQuery<T> {
    pub fn new(trials: u64, success_prob: T, cutoff: u64) -> Result<Self> {
        if trials == 0 {
            return Err(domain("N", 0.0, "N >= 1"));
        }
        check_open_unit("eta", success_prob)?;
        if cutoff > trials {
            return Err(Error::CutoffExceedsTrials { cutoff, trials });
        }
        Ok(Self {
            trials,
            success_prob,
            cutoff,
        })
    }

    pub fn trials(&self) -> u64 {
        self.trials
    }

    pub fn success_prob(&self) -> T {
        self.success_prob
    }

    pub fn cutoff(&self) -> u64 {
        self.cutoff
    }
}

/// A probability together with its natural logarithm. `value` is always
/// `exp(log_value)`; the logarithm survives where the value underflows.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailValue<T> {
    pub value: T,
    pub log_value: T,
}

impl<T: Real> TailValue<T> {
    pub fn from_log(log_value: T) -> Self {
        let log_value = log_value.min(T::zero());
        Self {
            value: log_value.exp(),
            log_value,
        }
    }

    pub fn one() -> Self {
        Self {
            value: T::one(),
            log_value: T::zero(),
        }
    }
}

pub(crate) fn check_open_unit<T: Real>(name: &'static str, x: T) -> Result<()> {
    if x > T::zero() && x < T::one() {
        Ok(())
    } else {
        Err(domain(name, x.as_f64(), "(0, 1)"))
    }
}

/// Exact binomial lower tail `B(N, η, m)`.
pub fn binom_tail<T: Real>(query: &TailQuery<T>) -> TailValue<T> {
    let n = query.trials;
    let m = query.cutoff;
    if m >= n {
        return TailValue::one();
    }
    let p = query.success_prob;
    let q = T::one() - p;
    let mode = ((T::from_u64_lossy(n) + T::one()) * p)
        .floor()
        .to_u64()
        .unwrap_or(n)
        .min(n);
    // Near one the lower tail is better resolved through its complement.
    if mode <= m {
        let log_upper = log_pmf_range(n, p, q, m + 1, n, mode);
        if log_upper < -T::LN_2() {
            return TailValue::from_log((-log_upper.exp()).ln_1p());
        }
    }
    TailValue::from_log(log_pmf_range(n, p, q, 0, m, mode))
}

/// `ln Σ_{lo<=i<=hi} pmf(i)`, anchored at the largest term.
fn log_pmf_range<T: Real>(n: u64, p: T, q: T, lo: u64, hi: u64, mode: u64) -> T {
    // The pmf is unimodal, so the largest term of [lo, hi] is the clamped mode.
    let anchor = mode.clamp(lo, hi);
    let log_anchor = ln_binom_pmf(anchor, n, p, q);
    let cutoff = T::epsilon() * T::lit(1e-3);

    let mut acc = CompensatedSum::new();
    acc.add(T::one());
    for i in (lo..anchor).rev() {
        let r = (ln_binom_pmf(i, n, p, q) - log_anchor).exp();
        acc.add(r);
        if r < cutoff * acc.value() {
            break;
        }
    }
    for i in anchor + 1..=hi {
        let r = (ln_binom_pmf(i, n, p, q) - log_anchor).exp();
        acc.add(r);
        if r < cutoff * acc.value() {
            break;
        }
    }
    log_anchor + acc.value().ln()
}

/// Convenience wrapper validating the arguments.
pub fn binom_tail_at<T: Real>(trials: u64, success_prob: T, cutoff: u64) -> Result<TailValue<T>> {
    Ok(binom_tail(&TailQuery::new(trials, success_prob, cutoff)?))
}

/// Analytic majorant `a^m (η/a + 1 - η)^N`, valid for every `a >= 1`.
pub fn lemma1_bound<T: Real>(query: &TailQuery<T>, a: T) -> Result<TailValue<T>> {
    if !(a >= T::one()) || !a.is_finite() {
        return Err(domain("a", a.as_f64(), "[1, inf)"));
    }
    let n = T::from_u64_lossy(query.trials);
    let m = T::from_u64_lossy(query.cutoff);
    let eta = query.success_prob;
    // η/a + 1 - η = 1 - η(1 - 1/a)
    let shrink = eta * (T::one() - a.recip());
    let log_value = m * a.ln() + n * (-shrink).ln_1p();
    Ok(TailValue {
        value: log_value.exp(),
        log_value,
    })
}

/// Smallest `N > m` with `B(N, η, m) <= δ`, found by doubling from `m + 1`
/// and bisecting. Comparisons use the computed tail directly, so at exact
/// equality the answer may move by one sample across platforms.
pub fn min_samples_exact<T: Real>(eta: T, delta: T, m: u64) -> Result<u64> {
    check_open_unit("eta", eta)?;
    check_open_unit("delta", delta)?;
    let passes = |n: u64| binom_tail(&TailQuery { trials: n, success_prob: eta, cutoff: m }).value <= delta;

    let mut lo = m; // largest N known to fail (or N <= m)
    let mut hi = m.checked_add(1).ok_or(Error::Overflow(m))?;
    while !passes(hi) {
        lo = hi;
        hi = hi.checked_mul(2).ok_or(Error::Overflow(hi))?;
    }
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if passes(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    assert!(
        hi - 1 <= m || !passes(hi - 1),
        "bisection returned a non-minimal sample size"
    );
    Ok(hi)
}

/// `ln[C(n,x) p^x q^(n-x)]` for `0 <= x <= n`, with `q = 1 - p`.
pub(crate) fn ln_binom_pmf<T: Real>(x: u64, n: u64, p: T, q: T) -> T {
    let nf = T::from_u64_lossy(n);
    if x == 0 {
        return if p < T::lit(0.1) {
            -deviance(nf, nf * q) - nf * p
        } else {
            nf * q.ln()
        };
    }
    if x == n {
        return if q < T::lit(0.1) {
            -deviance(nf, nf * p) - nf * q
        } else {
            nf * p.ln()
        };
    }
    let xf = T::from_u64_lossy(x);
    let rest = nf - xf;
    let lc = stirling_error::<T>(n) - stirling_error::<T>(x) - stirling_error::<T>(n - x)
        - deviance(xf, nf * p)
        - deviance(rest, nf * q);
    let lf = (T::lit(2.0) * T::PI()).ln() + xf.ln() + (-xf / nf).ln_1p();
    lc - T::lit(0.5) * lf
}

/// `ln(n!) - [(n + 1/2) ln n - n + ln √(2π)]`.
pub(crate) fn stirling_error<T: Real>(n: u64) -> T {
    if n == 0 {
        return T::zero();
    }
    if n <= 15 {
        let factorial: u64 = (1..=n).product();
        let nf = T::from_u64_lossy(n);
        return T::from_u64_lossy(factorial).ln() - (nf + T::lit(0.5)) * nf.ln() + nf
            - T::lit(0.5) * (T::lit(2.0) * T::PI()).ln();
    }
    let s0 = T::lit(1.0 / 12.0);
    let s1 = T::lit(1.0 / 360.0);
    let s2 = T::lit(1.0 / 1260.0);
    let s3 = T::lit(1.0 / 1680.0);
    let s4 = T::lit(1.0 / 1188.0);
    let nf = T::from_u64_lossy(n);
    let nn = nf * nf;
    if n > 500 {
        (s0 - s1 / nn) / nf
    } else if n > 80 {
        (s0 - (s1 - s2 / nn) / nn) / nf
    } else if n > 35 {
        (s0 - (s1 - (s2 - s3 / nn) / nn) / nn) / nf
    } else {
        (s0 - (s1 - (s2 - (s3 - s4 / nn) / nn) / nn) / nn) / nf
    }
}

/// Deviance `x ln(x/μ) + μ - x`, evaluated by series when `x ≈ μ`.
pub(crate) fn deviance<T: Real>(x: T, mu: T) -> T {
    let diff = x - mu;
    let total = x + mu;
    if diff.abs() < T::lit(0.1) * total {
        let mut v = diff / total;
        let mut s = diff * v;
        if s.abs() < T::min_positive_value() {
            return s;
        }
        let mut ej = T::lit(2.0) * x * v;
        v = v * v;
        for j in 1..1000u32 {
            ej *= v;
            let s1 = s + ej / T::from_u32(2 * j + 1).unwrap();
            if s1 == s {
                return s1;
            }
            s = s1;
        }
        return s;
    }
    x * (x / mu).ln() + mu - x
}
