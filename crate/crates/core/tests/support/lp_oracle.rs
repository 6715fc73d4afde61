//! Random small integer LPs and their exact optimum by vertex enumeration.

use num_rational::Ratio;
use num_traits::Zero;
use probval_core::lp::{LinearProgram, Sense};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub type Q = Ratio<i128>;

pub struct Instance {
    pub c: Vec<i64>,
    pub rows: Vec<(Vec<i64>, Sense, i64)>,
    pub lower: Vec<i64>,
    pub upper: Vec<i64>,
}

impl Instance {
    pub fn random(rng: &mut ChaCha8Rng) -> Self {
        let n = rng.random_range(1..=4);
        let r = rng.random_range(1..=6);
        let c = (0..n).map(|_| rng.random_range(-5..=5)).collect();
        let rows = (0..r)
            .map(|_| {
                let a = (0..n).map(|_| rng.random_range(-5..=5)).collect();
                let sense = match rng.random_range(0..5) {
                    0 | 1 => Sense::Le,
                    2 | 3 => Sense::Ge,
                    _ => Sense::Eq,
                };
                (a, sense, rng.random_range(-10..=10))
            })
            .collect();
        let lower = (0..n).map(|_| if rng.random_bool(0.7) { 0 } else { -5 }).collect();
        let upper = (0..n).map(|_| if rng.random_bool(0.7) { 10 } else { 3 }).collect();
        Self { c, rows, lower, upper }
    }

    pub fn program(&self) -> LinearProgram<f64> {
        let mut lp = LinearProgram::new(self.c.iter().map(|&v| v as f64).collect()).unwrap();
        for (a, sense, b) in &self.rows {
            lp.add_constraint(a.iter().map(|&v| v as f64).collect(), *sense, *b as f64).unwrap();
        }
        for j in 0..self.c.len() {
            lp.set_bounds(j, self.lower[j] as f64, self.upper[j] as f64).unwrap();
        }
        lp
    }

    /// Every constraint and bound as a hyperplane `aᵀx = b`.
    fn hyperplanes(&self) -> Vec<(Vec<Q>, Q)> {
        let n = self.c.len();
        let mut out: Vec<(Vec<Q>, Q)> = self
            .rows
            .iter()
            .map(|(a, _, b)| (a.iter().map(|&v| Q::from(v as i128)).collect(), Q::from(*b as i128)))
            .collect();
        for j in 0..n {
            for bound in [self.lower[j], self.upper[j]] {
                let mut e = vec![Q::zero(); n];
                e[j] = Q::from(1);
                out.push((e, Q::from(bound as i128)));
            }
        }
        out
    }

    pub fn feasible(&self, x: &[Q]) -> bool {
        let bounds_ok = x
            .iter()
            .enumerate()
            .all(|(j, v)| *v >= Q::from(self.lower[j] as i128) && *v <= Q::from(self.upper[j] as i128));
        bounds_ok
            && self.rows.iter().all(|(a, sense, b)| {
                let lhs: Q = a.iter().zip(x).map(|(&ai, xi)| Q::from(ai as i128) * xi).sum();
                let b = Q::from(*b as i128);
                match sense {
                    Sense::Le => lhs <= b,
                    Sense::Ge => lhs >= b,
                    Sense::Eq => lhs == b,
                }
            })
    }

    /// Exact optimum over all vertices, `None` when the polytope is empty.
    pub fn brute_force(&self) -> Option<Q> {
        let n = self.c.len();
        let planes = self.hyperplanes();
        let mut best: Option<Q> = None;
        for subset in combinations(planes.len(), n) {
            let Some(x) = solve_exact(subset.iter().map(|&i| planes[i].clone()).collect()) else {
                continue;
            };
            if !self.feasible(&x) {
                continue;
            }
            let obj: Q = self.c.iter().zip(&x).map(|(&cj, xj)| Q::from(cj as i128) * xj).sum();
            if best.as_ref().is_none_or(|b| obj < *b) {
                best = Some(obj);
            }
        }
        best
    }
}

fn combinations(total: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, total: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..total {
            cur.push(i);
            rec(i + 1, total, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, total, k, &mut Vec::new(), &mut out);
    out
}

/// Gaussian elimination over the rationals; `None` when singular.
#[allow(clippy::needless_range_loop)]
fn solve_exact(mut rows: Vec<(Vec<Q>, Q)>) -> Option<Vec<Q>> {
    let n = rows.len();
    for col in 0..n {
        let pivot = (col..n).find(|&r| !rows[r].0[col].is_zero())?;
        rows.swap(col, pivot);
        let (prow, prhs) = rows[col].clone();
        for r in 0..n {
            if r != col && !rows[r].0[col].is_zero() {
                let f = rows[r].0[col] / prow[col];
                for j in 0..n {
                    let delta = f * prow[j];
                    rows[r].0[j] -= delta;
                }
                rows[r].1 -= f * prhs;
            }
        }
    }
    Some(rows.iter().enumerate().map(|(i, (a, b))| b / a[i]).collect())
}

pub fn to_f64(q: &Q) -> f64 {
    *q.numer() as f64 / *q.denom() as f64
}
