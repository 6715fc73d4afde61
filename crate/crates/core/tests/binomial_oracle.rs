//! Binomial tail against exact rational summation.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use probval_core::binomial::{binom_tail_at, lemma1_bound, min_samples_exact, TailQuery};
use proptest::prelude::*;

/// Σ_{i≤m} C(N,i) p^i (1-p)^{N-i} with p = num/den, in exact arithmetic.
fn exact_tail(n: u64, num: i64, den: i64, m: u64) -> BigRational {
    let p = BigRational::new(BigInt::from(num), BigInt::from(den));
    let q = BigRational::one() - &p;
    let mut total = BigRational::zero();
    let mut binom = BigInt::one();
    for i in 0..=m {
        if i > 0 {
            binom = binom * BigInt::from(n - i + 1) / BigInt::from(i);
        }
        let term = BigRational::from_integer(binom.clone()) * pow(&p, i) * pow(&q, n - i);
        total += term;
    }
    total
}

fn pow(x: &BigRational, e: u64) -> BigRational {
    num_traits::pow(x.clone(), e as usize)
}

fn rel_err(got: f64, want: f64) -> f64 {
    ((got - want) / want).abs()
}

#[test]
fn matches_exact_rational_sums() {
    let cases: &[(u64, i64, i64, u64)] = &[
        (2, 1, 2, 1),
        (10, 1, 10, 0),
        (10, 1, 10, 3),
        (50, 1, 100, 2),
        (200, 1, 100, 0),
        (200, 1, 100, 5),
        (300, 1, 20, 30),
        (400, 1, 3, 200),
        (400, 7, 10, 250),
        (500, 1, 1000, 3),
        (1000, 1, 100, 31),
        (1000, 1, 2, 400),
    ];
    for &(n, num, den, m) in cases {
        let want = exact_tail(n, num, den, m).to_f64().unwrap();
        let got = binom_tail_at(n, num as f64 / den as f64, m).unwrap();
        assert!(
            rel_err(got.value, want) < 1e-12,
            "B({n}, {num}/{den}, {m}): got {} want {want}",
            got.value
        );
        assert!((got.value - got.log_value.exp()).abs() <= 1e-12 * got.value);
    }
}

#[test]
fn deep_tail_log_space_matches_rational() {
    // values around 1e-200 still agree through their logarithms
    let exact = exact_tail(3000, 1, 10, 20);
    let (numer, denom) = (exact.numer().clone(), exact.denom().clone());
    let want_log = ln_big(&numer) - ln_big(&denom);
    let got = binom_tail_at(3000, 0.1, 20).unwrap();
    assert!((got.log_value - want_log).abs() < 1e-10 * want_log.abs(), "{} vs {want_log}", got.log_value);
}

fn ln_big(x: &BigInt) -> f64 {
    let bits = x.bits();
    let shift = bits.saturating_sub(60);
    let top = (x >> shift).to_f64().unwrap();
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

#[test]
fn sample_inversion_boundary() {
    for &(eta, delta, m) in &[(0.01, 1e-6, 0u64), (0.05, 1e-3, 3), (0.1, 0.05, 10), (0.2, 1e-9, 40)] {
        let n = min_samples_exact(eta, delta, m).unwrap();
        assert!(binom_tail_at(n, eta, m).unwrap().value <= delta);
        if n - 1 > m {
            assert!(binom_tail_at(n - 1, eta, m).unwrap().value > delta);
        }
    }
    // m = 0 closed form
    let n = min_samples_exact(0.01, 1e-6, 0).unwrap();
    assert_eq!(n, ((1e6f64).ln() / (1.0f64 / 0.99).ln()).ceil() as u64);
}

const ETA_GRID: [f64; 9] = [0.001, 0.01, 0.05, 0.1, 0.2, 0.3, 0.5, 0.7, 0.9];

#[test]
fn decreasing_in_eta() {
    for &(n, m) in &[(10u64, 0u64), (10, 9), (100, 5), (1000, 31), (5000, 100)] {
        for w in ETA_GRID.windows(2) {
            let lo = binom_tail_at(n, w[0], m).unwrap();
            let hi = binom_tail_at(n, w[1], m).unwrap();
            assert!(lo.log_value > hi.log_value, "N={n} m={m} eta {} vs {}", w[0], w[1]);
        }
    }
}

#[test]
fn decreasing_in_trials() {
    for &eta in &ETA_GRID {
        for m in [0u64, 1, 5, 20] {
            let mut prev = binom_tail_at(m + 1, eta, m).unwrap().log_value;
            for n in m + 2..m + 300 {
                let cur = binom_tail_at(n, eta, m).unwrap().log_value;
                // strict only where the complement is representable
                assert!(cur <= prev, "eta={eta} m={m} N={n}");
                if prev < -1e-12 {
                    assert!(cur < prev, "eta={eta} m={m} N={n}");
                }
                prev = cur;
            }
        }
    }
}

#[test]
fn lemma1_dominates_exact_tail() {
    let a_grid = [1.0, 1.5, 2.0, std::f64::consts::E, 5.0, 50.0];
    for &n in &[1u64, 5, 20, 100, 1000] {
        for &eta in &ETA_GRID {
            for m in [0, 1, n / 10, n / 2, n] {
                let q = TailQuery::new(n, eta, m).unwrap();
                let exact = probval_core::binomial::binom_tail(&q);
                for &a in &a_grid {
                    let bound = lemma1_bound(&q, a).unwrap();
                    assert!(
                        bound.log_value >= exact.log_value - 1e-12,
                        "N={n} eta={eta} m={m} a={a}"
                    );
                }
            }
        }
    }
}

proptest! {
    #[test]
    fn value_and_log_agree(n in 1u64..5000, eta in 1e-4f64..0.9999, frac in 0.0f64..1.0) {
        let m = ((n as f64) * frac) as u64;
        let t = binom_tail_at(n, eta, m).unwrap();
        prop_assert!(t.value >= 0.0 && t.value <= 1.0);
        prop_assert!((t.value - t.log_value.exp()).abs() <= 1e-12 * t.value);
    }

    #[test]
    fn random_rational_cases(n in 1u64..120, num in 1i64..99, m_frac in 0.0f64..1.0) {
        let m = ((n as f64) * m_frac) as u64;
        let want = exact_tail(n, num, 100, m).to_f64().unwrap();
        let got = binom_tail_at(n, num as f64 / 100.0, m).unwrap().value;
        prop_assume!(want > 1e-300);
        prop_assert!(rel_err(got, want) < 1e-11, "got {} want {}", got, want);
    }
}
