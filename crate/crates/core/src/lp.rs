//! Dense two-phase primal simplex.
//!
//! Problems are stated as
//!
//! ```text
//! minimize    cᵀx
//! subject to  aᵢᵀx (≤ | ≥ | =) bᵢ     for every constraint row
//!             lⱼ ≤ xⱼ ≤ uⱼ            (infinite bounds allowed)
//! ```
//!
//! Two routes share one tableau engine. The primal route shifts or splits
//! variables into standard form `min c'ᵀz, Az = b, z ≥ 0`. The dual route
//! turns bounds into rows, treats every variable as free and solves the dual
//! `max bᵀy, Aᵀy = c, y ≥ 0 (inequality rows)`, whose basis has one row per
//! variable. [`Strategy::Auto`] picks the route with the smaller basis, which
//! is the dual whenever rows outnumber columns.
//!
//! Pricing is Dantzig (most negative reduced cost, lowest index on ties) with
//! a switch to Bland's rule after a run of degenerate pivots; Bland's rule
//! stays on for the remainder of the phase. The tableau is recomputed from the
//! original data through a Gauss-Jordan inverse of the basis every
//! `refactor_interval` pivots and before optimality is declared.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Absolute-plus-relative primal feasibility tolerance.
pub const FEASIBILITY_TOL: f64 = 1e-7;
/// Entries at or below this magnitude are never used as pivots.
pub const PIVOT_TOL: f64 = 1e-11;
pub const OPTIMALITY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Constraint<T> {
    pub coeffs: Vec<T>,
    pub sense: Sense,
    pub rhs: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearProgram<T> {
    objective: Vec<T>,
    constraints: Vec<Constraint<T>>,
    lower: Vec<T>,
    upper: Vec<T>,
}

impl<T: Real> LinearProgram<T> {
    /// New program with objective `c`; variables default to `x ≥ 0`.
    pub fn new(objective: Vec<T>) -> Result<Self> {
        if objective.iter().any(|c| !c.is_finite()) {
            return Err(Error::Dimension("objective entries must be finite".into()));
        }
        let n = objective.len();
        Ok(Self {
            objective,
            constraints: Vec::new(),
            lower: vec![T::zero(); n],
            upper: vec![T::infinity(); n],
        })
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn objective(&self) -> &[T] {
        &self.objective
    }

    pub fn constraints(&self) -> &[Constraint<T>] {
        &self.constraints
    }

    pub fn bounds(&self, j: usize) -> (T, T) {
        (self.lower[j], self.upper[j])
    }

    pub fn add_constraint(&mut self, coeffs: Vec<T>, sense: Sense, rhs: T) -> Result<&mut Self> {
        if coeffs.len() != self.num_vars() {
            return Err(Error::Dimension(format!(
                "constraint has {} coefficients, program has {} variables",
                coeffs.len(),
                self.num_vars()
            )));
        }
        if coeffs.iter().any(|a| !a.is_finite()) || !rhs.is_finite() {
            return Err(Error::Dimension("constraint data must be finite".into()));
        }
        self.constraints.push(Constraint { coeffs, sense, rhs });
        Ok(self)
    }

    pub fn set_bounds(&mut self, j: usize, lower: T, upper: T) -> Result<&mut Self> {
        if j >= self.num_vars() {
            return Err(Error::Dimension(format!("variable {j} out of range")));
        }
        if lower.is_nan() || upper.is_nan() || lower > upper || lower == T::infinity() || upper == T::neg_infinity() {
            return Err(Error::Dimension(format!("invalid bounds [{lower}, {upper}] for variable {j}")));
        }
        self.lower[j] = lower;
        self.upper[j] = upper;
        Ok(self)
    }

    pub fn set_free(&mut self, j: usize) -> Result<&mut Self> {
        self.set_bounds(j, T::neg_infinity(), T::infinity())
    }

    /// Largest violation of any constraint or bound at `x`.
    pub fn max_violation(&self, x: &[T]) -> T {
        let mut worst = T::zero();
        for row in &self.constraints {
            let lhs = dot(&row.coeffs, x);
            let v = match row.sense {
                Sense::Le => lhs - row.rhs,
                Sense::Ge => row.rhs - lhs,
                Sense::Eq => (lhs - row.rhs).abs(),
            };
            worst = worst.max(v);
        }
        for (j, &xj) in x.iter().enumerate() {
            worst = worst.max(self.lower[j] - xj).max(xj - self.upper[j]);
        }
        worst
    }

    fn rhs_scale(&self) -> T {
        let mut s = T::zero();
        for row in &self.constraints {
            s = s.max(row.rhs.abs());
        }
        for j in 0..self.num_vars() {
            for b in [self.lower[j], self.upper[j]] {
                if b.is_finite() {
                    s = s.max(b.abs());
                }
            }
        }
        s
    }

    /// Fixed-format MPS listing. Rows are named `R0001…`, columns `X0001…`.
    /// Numbers are written in shortest round-trip form and may overflow the
    /// nominal 12-character fields.
    pub fn to_mps(&self, name: &str) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "NAME          {name}");
        let _ = writeln!(out, "ROWS");
        let _ = writeln!(out, " N  COST");
        for (i, row) in self.constraints.iter().enumerate() {
            let tag = match row.sense {
                Sense::Le => "L",
                Sense::Ge => "G",
                Sense::Eq => "E",
            };
            let _ = writeln!(out, " {tag}  R{:04}", i + 1);
        }
        let _ = writeln!(out, "COLUMNS");
        for j in 0..self.num_vars() {
            let col = format!("X{:04}", j + 1);
            if self.objective[j] != T::zero() {
                let _ = writeln!(out, "    {col:<8}  {:<8}  {:>12}", "COST", self.objective[j]);
            }
            for (i, row) in self.constraints.iter().enumerate() {
                if row.coeffs[j] != T::zero() {
                    let _ = writeln!(out, "    {col:<8}  R{:<7}  {:>12}", format!("{:04}", i + 1), row.coeffs[j]);
                }
            }
        }
        let _ = writeln!(out, "RHS");
        for (i, row) in self.constraints.iter().enumerate() {
            if row.rhs != T::zero() {
                let _ = writeln!(out, "    {:<8}  R{:<7}  {:>12}", "RHS", format!("{:04}", i + 1), row.rhs);
            }
        }
        let _ = writeln!(out, "BOUNDS");
        for j in 0..self.num_vars() {
            let col = format!("X{:04}", j + 1);
            let (lo, hi) = (self.lower[j], self.upper[j]);
            if lo == hi {
                let _ = writeln!(out, " FX {:<8}  {col:<8}  {:>12}", "BND", lo);
                continue;
            }
            if lo == T::neg_infinity() && hi == T::infinity() {
                let _ = writeln!(out, " FR {:<8}  {col:<8}", "BND");
                continue;
            }
            if lo == T::neg_infinity() {
                let _ = writeln!(out, " MI {:<8}  {col:<8}", "BND");
            } else if lo != T::zero() {
                let _ = writeln!(out, " LO {:<8}  {col:<8}  {:>12}", "BND", lo);
            }
            if hi != T::infinity() {
                let _ = writeln!(out, " UP {:<8}  {col:<8}  {:>12}", "BND", hi);
            }
        }
        let _ = writeln!(out, "ENDATA");
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    /// A basis could not be refactored or the final point failed its
    /// residual check.
    NumericalFailure,
    IterationLimit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LpSolution<T> {
    pub status: LpStatus,
    /// Primal point (empty unless optimal).
    pub x: Vec<T>,
    pub objective: T,
    /// One multiplier per constraint row: `≥ 0` for `≥` rows, `≤ 0` for `≤`
    /// rows, free for equalities.
    pub row_duals: Vec<T>,
    /// `c - Aᵀy`, absorbed by the variable bounds.
    pub reduced_costs: Vec<T>,
    /// `bᵀy` plus the bound terms of the reduced costs.
    pub dual_objective: T,
    pub iterations: usize,
}

impl<T: Real> LpSolution<T> {
    fn failed(status: LpStatus, iterations: usize) -> Self {
        Self {
            status,
            x: Vec::new(),
            objective: T::nan(),
            row_duals: Vec::new(),
            reduced_costs: Vec::new(),
            dual_objective: T::nan(),
            iterations,
        }
    }

    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }

    /// Converts a non-optimal status into an error.
    pub fn into_result(self) -> Result<Self> {
        if self.is_optimal() {
            Ok(self)
        } else {
            Err(Error::Lp(self.status))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Strategy {
    Auto,
    Primal,
    Dual,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Pricing {
    /// Dantzig pricing with Bland fallback on degenerate stalls.
    DantzigBland,
    /// Pure Bland: lowest-index improving column throughout.
    Bland,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions<T> {
    pub strategy: Strategy,
    pub pricing: Pricing,
    pub feasibility_tol: T,
    pub pivot_tol: T,
    pub optimality_tol: T,
    pub refactor_interval: usize,
    pub degenerate_switch: usize,
    /// `None` means `20 (rows + cols) + 1000`.
    pub max_iterations: Option<usize>,
}

impl<T: Real> Default for SolverOptions<T> {
    fn default() -> Self {
        Self {
            strategy: Strategy::Auto,
            pricing: Pricing::DantzigBland,
            feasibility_tol: T::lit(FEASIBILITY_TOL),
            pivot_tol: T::lit(PIVOT_TOL),
            optimality_tol: T::lit(OPTIMALITY_TOL),
            refactor_interval: 64,
            degenerate_switch: 50,
            max_iterations: None,
        }
    }
}

/// Solves with default options.
pub fn solve_lp<T: Real>(program: &LinearProgram<T>) -> LpSolution<T> {
    solve_lp_with(program, &SolverOptions::default())
}

pub fn solve_lp_with<T: Real>(program: &LinearProgram<T>, opts: &SolverOptions<T>) -> LpSolution<T> {
    let canon = Canonical::from_program(program);
    let strategy = match opts.strategy {
        Strategy::Auto if canon.rows.len() > program.num_vars() => Strategy::Dual,
        Strategy::Auto => Strategy::Primal,
        s => s,
    };
    let mut sol = match strategy {
        Strategy::Dual => solve_via_dual(program, &canon, opts),
        _ => solve_primal(program, opts, false),
    };
    if sol.is_optimal() {
        let tol = opts.feasibility_tol * (T::one() + program.rhs_scale());
        if program.max_violation(&sol.x) > tol {
            sol = LpSolution::failed(LpStatus::NumericalFailure, sol.iterations);
        }
    }
    sol
}

fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (&x, &y)| acc + x * y)
}

/// Fills in duals, reduced costs and the dual objective for an optimal `x`.
fn finish<T: Real>(program: &LinearProgram<T>, x: Vec<T>, row_duals: Vec<T>, iterations: usize, opts: &SolverOptions<T>) -> LpSolution<T> {
    let n = program.num_vars();
    let mut reduced = program.objective.clone();
    let mut dual_obj = T::zero();
    for (row, &y) in program.constraints.iter().zip(&row_duals) {
        dual_obj += row.rhs * y;
        for j in 0..n {
            reduced[j] -= row.coeffs[j] * y;
        }
    }
    for j in 0..n {
        let d = reduced[j];
        if d.abs() <= opts.optimality_tol {
            continue;
        }
        let bound = if d > T::zero() { program.lower[j] } else { program.upper[j] };
        if bound.is_finite() {
            dual_obj += d * bound;
        } else {
            dual_obj = T::nan();
        }
    }
    let objective = dot(&program.objective, &x);
    LpSolution {
        status: LpStatus::Optimal,
        x,
        objective,
        row_duals,
        reduced_costs: reduced,
        dual_objective: dual_obj,
        iterations,
    }
}

// ---------------------------------------------------------------------------
// primal route

/// How an original variable maps onto standard-form columns.
#[derive(Clone, Copy)]
enum VarMap<T> {
    /// x = lower + z
    Shift { col: usize, lower: T },
    /// x = upper - z
    Mirror { col: usize, upper: T },
    /// x = z⁺ - z⁻
    Split { pos: usize, neg: usize },
}

fn solve_primal<T: Real>(program: &LinearProgram<T>, opts: &SolverOptions<T>, feasibility_only: bool) -> LpSolution<T> {
    let n = program.num_vars();
    let mut maps = Vec::with_capacity(n);
    let mut ncols = 0usize;
    for j in 0..n {
        let (lo, hi) = (program.lower[j], program.upper[j]);
        if lo.is_finite() {
            maps.push(VarMap::Shift { col: ncols, lower: lo });
            ncols += 1;
        } else if hi.is_finite() {
            maps.push(VarMap::Mirror { col: ncols, upper: hi });
            ncols += 1;
        } else {
            maps.push(VarMap::Split { pos: ncols, neg: ncols + 1 });
            ncols += 2;
        }
    }

    // Rows: original constraints, then upper bounds of shifted variables.
    struct Row<T> {
        coeffs: Vec<(usize, T)>,
        sense: Sense,
        rhs: T,
    }
    let mut rows: Vec<Row<T>> = Vec::new();
    for con in &program.constraints {
        let mut coeffs = Vec::new();
        let mut rhs = con.rhs;
        for (j, &a) in con.coeffs.iter().enumerate() {
            if a == T::zero() {
                continue;
            }
            match maps[j] {
                VarMap::Shift { col, lower } => {
                    coeffs.push((col, a));
                    rhs -= a * lower;
                }
                VarMap::Mirror { col, upper } => {
                    coeffs.push((col, -a));
                    rhs -= a * upper;
                }
                VarMap::Split { pos, neg } => {
                    coeffs.push((pos, a));
                    coeffs.push((neg, -a));
                }
            }
        }
        rows.push(Row { coeffs, sense: con.sense, rhs });
    }
    for j in 0..n {
        if let VarMap::Shift { col, lower } = maps[j] {
            if program.upper[j].is_finite() {
                rows.push(Row {
                    coeffs: vec![(col, T::one())],
                    sense: Sense::Le,
                    rhs: program.upper[j] - lower,
                });
            }
        }
    }

    let m = rows.len();
    let slack_count = rows.iter().filter(|r| r.sense != Sense::Eq).count();
    let total = ncols + slack_count;
    let mut a = vec![T::zero(); m * total];
    let mut b = vec![T::zero(); m];
    let mut row_sign = vec![T::one(); m];
    let mut hint = vec![None; m];
    let mut slack = ncols;
    for (i, row) in rows.iter().enumerate() {
        let neg = row.rhs < T::zero();
        let s = if neg { -T::one() } else { T::one() };
        row_sign[i] = s;
        for &(c, v) in &row.coeffs {
            a[i * total + c] += s * v;
        }
        b[i] = s * row.rhs;
        match row.sense {
            Sense::Le | Sense::Ge => {
                let coef = if row.sense == Sense::Le { T::one() } else { -T::one() };
                a[i * total + slack] = s * coef;
                if s * coef > T::zero() {
                    hint[i] = Some(slack);
                }
                slack += 1;
            }
            Sense::Eq => {}
        }
    }
    let mut c = vec![T::zero(); total];
    if !feasibility_only {
        for j in 0..n {
            let cj = program.objective[j];
            match maps[j] {
                VarMap::Shift { col, .. } => c[col] = cj,
                VarMap::Mirror { col, .. } => c[col] = -cj,
                VarMap::Split { pos, neg } => {
                    c[pos] = cj;
                    c[neg] = -cj;
                }
            }
        }
    }

    let std = StandardForm { m, n: total, a, b, c, hint };
    let out = Tableau::solve(&std, opts);
    if out.status != LpStatus::Optimal {
        return LpSolution::failed(out.status, out.iterations);
    }
    let mut x = vec![T::zero(); n];
    for j in 0..n {
        x[j] = match maps[j] {
            VarMap::Shift { col, lower } => lower + out.z[col],
            VarMap::Mirror { col, upper } => upper - out.z[col],
            VarMap::Split { pos, neg } => out.z[pos] - out.z[neg],
        };
    }
    let duals = (0..program.constraints.len()).map(|i| out.pi[i] * row_sign[i]).collect();
    finish(program, x, duals, out.iterations, opts)
}

// ---------------------------------------------------------------------------
// dual route

/// Program rewritten with free variables and `≥` / `=` rows only.
struct Canonical<T> {
    rows: Vec<CanonRow<T>>,
}

struct CanonRow<T> {
    coeffs: Vec<(usize, T)>,
    rhs: T,
    equality: bool,
    origin: RowOrigin,
}

#[derive(Clone, Copy)]
enum RowOrigin {
    /// Constraint `i`, multiplied by `sign` to reach `≥` form.
    Constraint { index: usize, negated: bool },
    Bound,
}

impl<T: Real> Canonical<T> {
    fn from_program(program: &LinearProgram<T>) -> Self {
        let mut rows = Vec::new();
        for (index, con) in program.constraints.iter().enumerate() {
            let negated = con.sense == Sense::Le;
            let s = if negated { -T::one() } else { T::one() };
            let coeffs = con
                .coeffs
                .iter()
                .enumerate()
                .filter(|(_, &a)| a != T::zero())
                .map(|(j, &a)| (j, s * a))
                .collect();
            rows.push(CanonRow {
                coeffs,
                rhs: s * con.rhs,
                equality: con.sense == Sense::Eq,
                origin: RowOrigin::Constraint { index, negated },
            });
        }
        for j in 0..program.num_vars() {
            let (lo, hi) = (program.lower[j], program.upper[j]);
            if lo == hi {
                rows.push(CanonRow { coeffs: vec![(j, T::one())], rhs: lo, equality: true, origin: RowOrigin::Bound });
                continue;
            }
            if lo.is_finite() {
                rows.push(CanonRow { coeffs: vec![(j, T::one())], rhs: lo, equality: false, origin: RowOrigin::Bound });
            }
            if hi.is_finite() {
                rows.push(CanonRow { coeffs: vec![(j, -T::one())], rhs: -hi, equality: false, origin: RowOrigin::Bound });
            }
        }
        Self { rows }
    }
}

fn solve_via_dual<T: Real>(program: &LinearProgram<T>, canon: &Canonical<T>, opts: &SolverOptions<T>) -> LpSolution<T> {
    let n = program.num_vars();
    // dual columns: one per ≥ row, two per equality row
    let mut col_of_row = Vec::with_capacity(canon.rows.len());
    let mut total = 0usize;
    for row in &canon.rows {
        col_of_row.push(total);
        total += if row.equality { 2 } else { 1 };
    }
    let m = n;
    let mut a = vec![T::zero(); m * total];
    let mut cost = vec![T::zero(); total];
    for (r, row) in canon.rows.iter().enumerate() {
        let col = col_of_row[r];
        cost[col] = -row.rhs;
        if row.equality {
            cost[col + 1] = row.rhs;
        }
        for &(j, v) in &row.coeffs {
            a[j * total + col] = v;
            if row.equality {
                a[j * total + col + 1] = -v;
            }
        }
    }
    let mut b = program.objective.clone();
    let mut sign = vec![T::one(); m];
    for j in 0..m {
        if b[j] < T::zero() {
            sign[j] = -T::one();
            b[j] = -b[j];
            for v in &mut a[j * total..(j + 1) * total] {
                *v = -*v;
            }
        }
    }
    let std = StandardForm { m, n: total, a, b, c: cost, hint: vec![None; m] };
    let out = Tableau::solve(&std, opts);
    match out.status {
        LpStatus::Optimal => {}
        LpStatus::Unbounded => return LpSolution::failed(LpStatus::Infeasible, out.iterations),
        LpStatus::Infeasible => {
            // Dual infeasible: primal is unbounded if it has a feasible point.
            let feas = solve_primal(program, opts, true);
            let status = match feas.status {
                LpStatus::Optimal => LpStatus::Unbounded,
                LpStatus::Infeasible => LpStatus::Infeasible,
                other => other,
            };
            return LpSolution::failed(status, out.iterations + feas.iterations);
        }
        other => return LpSolution::failed(other, out.iterations),
    }
    // Multipliers π of the dual standard form satisfy Aπ ≤ -b, so x = -π.
    let x: Vec<T> = (0..n).map(|j| -out.pi[j] * sign[j]).collect();
    let mut duals = vec![T::zero(); program.constraints.len()];
    for (r, row) in canon.rows.iter().enumerate() {
        if let RowOrigin::Constraint { index, negated } = row.origin {
            let col = col_of_row[r];
            let mut y = out.z[col];
            if row.equality {
                y -= out.z[col + 1];
            }
            duals[index] = if negated { -y } else { y };
        }
    }
    finish(program, x, duals, out.iterations, opts)
}

// ---------------------------------------------------------------------------
// tableau engine

/// `min cᵀz, Az = b, z ≥ 0` with `b ≥ 0`; `a` is row-major `m × n`.
struct StandardForm<T> {
    m: usize,
    n: usize,
    a: Vec<T>,
    b: Vec<T>,
    c: Vec<T>,
    /// Columns usable as an initial basic variable for a row (unit columns).
    hint: Vec<Option<usize>>,
}

struct StdOutcome<T> {
    status: LpStatus,
    z: Vec<T>,
    pi: Vec<T>,
    iterations: usize,
}

struct Tableau<'a, T> {
    sf: &'a StandardForm<T>,
    opts: &'a SolverOptions<T>,
    /// Row-major `m × width`, columns `[structural | artificial]`.
    t: Vec<T>,
    rhs: Vec<T>,
    width: usize,
    basis: Vec<usize>,
    is_basic: Vec<bool>,
    reduced: Vec<T>,
    cost: Vec<T>,
    iterations: usize,
    since_refactor: usize,
    max_iterations: usize,
}

enum Phase {
    One,
    Two,
}

enum StepResult {
    Optimal,
    Unbounded,
    Failure(LpStatus),
}

impl<'a, T: Real> Tableau<'a, T> {
    fn solve(sf: &'a StandardForm<T>, opts: &'a SolverOptions<T>) -> StdOutcome<T> {
        let m = sf.m;
        let width = sf.n + m;
        let mut basis = Vec::with_capacity(m);
        for i in 0..m {
            basis.push(sf.hint[i].unwrap_or(sf.n + i));
        }
        let mut is_basic = vec![false; width];
        for &j in &basis {
            is_basic[j] = true;
        }
        let max_iterations = opts.max_iterations.unwrap_or(20 * (m + sf.n) + 1000);
        let mut tab = Tableau {
            sf,
            opts,
            t: vec![T::zero(); m * width],
            rhs: sf.b.clone(),
            width,
            basis,
            is_basic,
            reduced: vec![T::zero(); width],
            cost: vec![T::zero(); width],
            iterations: 0,
            since_refactor: 0,
            max_iterations,
        };
        let fail = |tab: &Tableau<T>, status| StdOutcome { status, z: Vec::new(), pi: Vec::new(), iterations: tab.iterations };

        // phase one: minimize the sum of artificials
        for i in 0..m {
            tab.cost[sf.n + i] = T::one();
        }
        if !tab.refactor() {
            return fail(&tab, LpStatus::NumericalFailure);
        }
        match tab.run(Phase::One) {
            StepResult::Optimal => {}
            // phase one is bounded below by zero
            StepResult::Unbounded => return fail(&tab, LpStatus::NumericalFailure),
            StepResult::Failure(s) => return fail(&tab, s),
        }
        let infeas: T = (0..m)
            .filter(|&i| tab.basis[i] >= sf.n)
            .fold(T::zero(), |acc, i| acc + tab.rhs[i]);
        let bscale = sf.b.iter().fold(T::zero(), |acc, &v| acc.max(v));
        if infeas > opts.feasibility_tol * (T::one() + bscale) {
            return fail(&tab, LpStatus::Infeasible);
        }
        tab.drive_out_artificials();

        // phase two
        for j in 0..width {
            tab.cost[j] = if j < sf.n { sf.c[j] } else { T::zero() };
        }
        if !tab.refactor() {
            return fail(&tab, LpStatus::NumericalFailure);
        }
        match tab.run(Phase::Two) {
            StepResult::Optimal => {}
            StepResult::Unbounded => return fail(&tab, LpStatus::Unbounded),
            StepResult::Failure(s) => return fail(&tab, s),
        }
        let mut z = vec![T::zero(); sf.n];
        for i in 0..m {
            if tab.basis[i] < sf.n {
                z[tab.basis[i]] = tab.rhs[i].max(T::zero());
            }
        }
        // π_i = -(reduced cost of artificial column i), artificial cost 0
        let pi = (0..m).map(|i| -tab.reduced[sf.n + i]).collect();
        StdOutcome { status: LpStatus::Optimal, z, pi, iterations: tab.iterations }
    }

    fn column(&self, j: usize, i: usize) -> T {
        if j < self.sf.n {
            self.sf.a[i * self.sf.n + j]
        } else if j - self.sf.n == i {
            T::one()
        } else {
            T::zero()
        }
    }

    /// Rebuilds tableau, right-hand side and reduced costs from the original
    /// data for the current basis.
    fn refactor(&mut self) -> bool {
        let m = self.sf.m;
        self.since_refactor = 0;
        if m == 0 {
            self.reduced.copy_from_slice(&self.cost);
            return true;
        }
        let mut bmat = vec![T::zero(); m * m];
        for (k, &j) in self.basis.iter().enumerate() {
            for i in 0..m {
                bmat[i * m + k] = self.column(j, i);
            }
        }
        let Some(inv) = invert(&bmat, m, self.opts.pivot_tol) else {
            return false;
        };
        let width = self.width;
        let n = self.sf.n;
        let mut t = vec![T::zero(); m * width];
        for r in 0..m {
            let inv_row = &inv[r * m..(r + 1) * m];
            let trow = &mut t[r * width..(r + 1) * width];
            for (i, &w) in inv_row.iter().enumerate() {
                if w == T::zero() {
                    continue;
                }
                let arow = &self.sf.a[i * n..(i + 1) * n];
                for (dst, &src) in trow[..n].iter_mut().zip(arow) {
                    *dst += w * src;
                }
                trow[n + i] += w;
            }
        }
        for r in 0..m {
            let v = dot(&inv[r * m..(r + 1) * m], &self.sf.b);
            self.rhs[r] = if v < T::zero() && v > -self.opts.feasibility_tol { T::zero() } else { v };
        }
        // tidy basic columns to exact unit vectors
        for (r, &j) in self.basis.iter().enumerate() {
            for i in 0..m {
                t[i * width + j] = if i == r { T::one() } else { T::zero() };
            }
        }
        self.t = t;
        self.recompute_reduced();
        true
    }

    fn recompute_reduced(&mut self) {
        let m = self.sf.m;
        let width = self.width;
        self.reduced.copy_from_slice(&self.cost);
        for r in 0..m {
            let cb = self.cost[self.basis[r]];
            if cb == T::zero() {
                continue;
            }
            let trow = &self.t[r * width..(r + 1) * width];
            for (d, &v) in self.reduced.iter_mut().zip(trow) {
                *d -= cb * v;
            }
        }
        for &j in &self.basis {
            self.reduced[j] = T::zero();
        }
    }

    fn eligible(&self, j: usize, phase: &Phase) -> bool {
        if self.is_basic[j] {
            return false;
        }
        match phase {
            Phase::One => true,
            Phase::Two => j < self.sf.n,
        }
    }

    fn run(&mut self, phase: Phase) -> StepResult {
        let mut degenerate_run = 0usize;
        let mut bland = self.opts.pricing == Pricing::Bland;
        loop {
            if self.since_refactor >= self.opts.refactor_interval && !self.refactor() {
                return StepResult::Failure(LpStatus::NumericalFailure);
            }
            let tol = self.opts.optimality_tol;
            let mut entering = None;
            let mut best = -tol;
            for j in 0..self.width {
                if !self.eligible(j, &phase) {
                    continue;
                }
                let d = self.reduced[j];
                if d < best {
                    entering = Some(j);
                    if bland {
                        break;
                    }
                    best = d;
                }
            }
            let Some(q) = entering else {
                // confirm against a fresh factorization before stopping
                if self.since_refactor == 0 {
                    return StepResult::Optimal;
                }
                if !self.refactor() {
                    return StepResult::Failure(LpStatus::NumericalFailure);
                }
                continue;
            };
            if self.iterations >= self.max_iterations {
                return StepResult::Failure(LpStatus::IterationLimit);
            }

            // ratio test
            let m = self.sf.m;
            let width = self.width;
            let ptol = self.opts.pivot_tol;
            let mut min_ratio = T::infinity();
            for i in 0..m {
                let v = self.t[i * width + q];
                if v > ptol {
                    min_ratio = min_ratio.min(self.rhs[i].max(T::zero()) / v);
                }
            }
            if min_ratio == T::infinity() {
                return StepResult::Unbounded;
            }
            let slack = min_ratio * T::lit(1e-12) + T::lit(1e-15);
            let mut leaving: Option<usize> = None;
            for i in 0..m {
                let v = self.t[i * width + q];
                if v <= ptol {
                    continue;
                }
                let ratio = self.rhs[i].max(T::zero()) / v;
                if ratio > min_ratio + slack {
                    continue;
                }
                leaving = Some(match leaving {
                    None => i,
                    Some(l) => {
                        let better = if bland {
                            self.basis[i] < self.basis[l]
                        } else {
                            v > self.t[l * width + q]
                        };
                        if better { i } else { l }
                    }
                });
            }
            let p = leaving.expect("ratio test found a row");
            if min_ratio <= T::epsilon() {
                degenerate_run += 1;
                if degenerate_run >= self.opts.degenerate_switch {
                    bland = true;
                }
            } else {
                degenerate_run = 0;
            }
            self.pivot(p, q);
        }
    }

    fn pivot(&mut self, p: usize, q: usize) {
        let m = self.sf.m;
        let width = self.width;
        let pv = self.t[p * width + q];
        let inv = pv.recip();
        {
            let row = &mut self.t[p * width..(p + 1) * width];
            for v in row.iter_mut() {
                *v *= inv;
            }
            row[q] = T::one();
        }
        self.rhs[p] *= inv;
        let prow: Vec<T> = self.t[p * width..(p + 1) * width].to_vec();
        let prhs = self.rhs[p];
        for i in 0..m {
            if i == p {
                continue;
            }
            let f = self.t[i * width + q];
            if f == T::zero() {
                continue;
            }
            let row = &mut self.t[i * width..(i + 1) * width];
            for (dst, &src) in row.iter_mut().zip(&prow) {
                *dst -= f * src;
            }
            row[q] = T::zero();
            self.rhs[i] -= f * prhs;
        }
        let f = self.reduced[q];
        if f != T::zero() {
            for (dst, &src) in self.reduced.iter_mut().zip(&prow) {
                *dst -= f * src;
            }
            self.reduced[q] = T::zero();
        }
        let old = self.basis[p];
        self.is_basic[old] = false;
        self.is_basic[q] = true;
        self.basis[p] = q;
        self.iterations += 1;
        self.since_refactor += 1;
    }

    /// Pivots zero-level artificials out of the basis where a structural
    /// column allows it; rows where none does are redundant and keep theirs.
    fn drive_out_artificials(&mut self) {
        let m = self.sf.m;
        let n = self.sf.n;
        for r in 0..m {
            if self.basis[r] < n {
                continue;
            }
            let mut best: Option<(usize, T)> = None;
            for j in 0..n {
                if self.is_basic[j] {
                    continue;
                }
                let v = self.t[r * self.width + j].abs();
                if v > self.opts.pivot_tol * T::lit(1e3) && best.is_none_or(|(_, b)| v > b) {
                    best = Some((j, v));
                }
            }
            if let Some((j, _)) = best {
                self.pivot(r, j);
            }
        }
    }
}

/// Inverse of a dense `m × m` matrix by Gauss-Jordan elimination with partial
/// pivoting. `None` when a pivot falls below `tol` times the matrix scale.
fn invert<T: Real>(mat: &[T], m: usize, tol: T) -> Option<Vec<T>> {
    let scale = mat.iter().fold(T::zero(), |acc, &v| acc.max(v.abs())).max(T::one());
    let w = 2 * m;
    let mut aug = vec![T::zero(); m * w];
    for i in 0..m {
        aug[i * w..i * w + m].copy_from_slice(&mat[i * m..(i + 1) * m]);
        aug[i * w + m + i] = T::one();
    }
    for col in 0..m {
        let mut piv = col;
        let mut best = aug[col * w + col].abs();
        for r in col + 1..m {
            let v = aug[r * w + col].abs();
            if v > best {
                best = v;
                piv = r;
            }
        }
        if best <= tol * scale {
            return None;
        }
        if piv != col {
            for k in 0..w {
                aug.swap(col * w + k, piv * w + k);
            }
        }
        let inv = aug[col * w + col].recip();
        for k in 0..w {
            aug[col * w + k] *= inv;
        }
        let prow: Vec<T> = aug[col * w..(col + 1) * w].to_vec();
        for r in 0..m {
            if r == col {
                continue;
            }
            let f = aug[r * w + col];
            if f == T::zero() {
                continue;
            }
            for (dst, &src) in aug[r * w..(r + 1) * w].iter_mut().zip(&prow) {
                *dst -= f * src;
            }
        }
    }
    let mut out = vec![T::zero(); m * m];
    for i in 0..m {
        out[i * m..(i + 1) * m].copy_from_slice(&aug[i * w + m..(i + 1) * w]);
    }
    Some(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn both_routes(lp: &LinearProgram<f64>) -> [LpSolution<f64>; 2] {
        let p = SolverOptions { strategy: Strategy::Primal, ..Default::default() };
        let d = SolverOptions { strategy: Strategy::Dual, ..Default::default() };
        [solve_lp_with(lp, &p), solve_lp_with(lp, &d)]
    }

    #[test]
    fn single_lower_bound() {
        let mut lp = LinearProgram::new(vec![1.0]).unwrap();
        lp.set_free(0).unwrap();
        lp.add_constraint(vec![1.0], Sense::Ge, 1.0).unwrap();
        for sol in both_routes(&lp) {
            assert!(sol.is_optimal());
            assert!((sol.x[0] - 1.0).abs() < 1e-12);
            assert!((sol.objective - 1.0).abs() < 1e-12);
            assert!((sol.row_duals[0] - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn contradictory_bounds_are_infeasible() {
        let mut lp = LinearProgram::new(vec![1.0]).unwrap();
        lp.set_free(0).unwrap();
        lp.add_constraint(vec![1.0], Sense::Ge, 1.0).unwrap();
        lp.add_constraint(vec![1.0], Sense::Le, 0.0).unwrap();
        for sol in both_routes(&lp) {
            assert_eq!(sol.status, LpStatus::Infeasible);
        }
    }

    #[test]
    fn two_variable_vertex() {
        let mut lp = LinearProgram::new(vec![1.0, 1.0]).unwrap();
        lp.add_constraint(vec![1.0, 2.0], Sense::Ge, 2.0).unwrap();
        lp.add_constraint(vec![2.0, 1.0], Sense::Ge, 2.0).unwrap();
        for sol in both_routes(&lp) {
            assert!(sol.is_optimal());
            assert!((sol.x[0] - 2.0 / 3.0).abs() < 1e-12);
            assert!((sol.x[1] - 2.0 / 3.0).abs() < 1e-12);
            assert!((sol.objective - 4.0 / 3.0).abs() < 1e-12);
            assert!((sol.dual_objective - sol.objective).abs() < 1e-12);
        }
    }

    #[test]
    fn unbounded_detected() {
        let mut lp = LinearProgram::new(vec![-1.0, 0.0]).unwrap();
        lp.add_constraint(vec![1.0, -1.0], Sense::Le, 1.0).unwrap();
        for sol in both_routes(&lp) {
            assert_eq!(sol.status, LpStatus::Unbounded);
        }
    }

    #[test]
    fn equality_and_upper_bounds() {
        // min -x - 2y s.t. x + y = 3, 0 <= x <= 2, 0 <= y <= 2
        let mut lp = LinearProgram::new(vec![-1.0, -2.0]).unwrap();
        lp.add_constraint(vec![1.0, 1.0], Sense::Eq, 3.0).unwrap();
        lp.set_bounds(0, 0.0, 2.0).unwrap();
        lp.set_bounds(1, 0.0, 2.0).unwrap();
        for sol in both_routes(&lp) {
            assert!(sol.is_optimal());
            assert!((sol.x[0] - 1.0).abs() < 1e-12 && (sol.x[1] - 2.0).abs() < 1e-12);
            assert!((sol.objective + 5.0).abs() < 1e-12);
            assert!((sol.dual_objective - sol.objective).abs() < 1e-12);
        }
    }

    #[test]
    fn degenerate_cycling_example() {
        // Beale's example cycles under naive Dantzig pricing.
        let mut lp = LinearProgram::<f64>::new(vec![-0.75, 150.0, -0.02, 6.0]).unwrap();
        lp.add_constraint(vec![0.25, -60.0, -0.04, 9.0], Sense::Le, 0.0).unwrap();
        lp.add_constraint(vec![0.5, -90.0, -0.02, 3.0], Sense::Le, 0.0).unwrap();
        lp.add_constraint(vec![0.0, 0.0, 1.0, 0.0], Sense::Le, 1.0).unwrap();
        for pricing in [Pricing::Bland, Pricing::DantzigBland] {
            let opts = SolverOptions { strategy: Strategy::Primal, pricing, ..Default::default() };
            let sol = solve_lp_with(&lp, &opts);
            assert!(sol.is_optimal());
            assert!((sol.objective + 0.05).abs() < 1e-12, "{}", sol.objective);
        }
    }

    #[test]
    fn construction_errors() {
        assert!(LinearProgram::new(vec![f64::NAN]).is_err());
        let mut lp = LinearProgram::new(vec![1.0, 2.0]).unwrap();
        assert!(lp.add_constraint(vec![1.0], Sense::Ge, 0.0).is_err());
        assert!(lp.add_constraint(vec![1.0, f64::NAN], Sense::Ge, 0.0).is_err());
        assert!(lp.set_bounds(0, 2.0, 1.0).is_err());
        assert!(lp.set_bounds(5, 0.0, 1.0).is_err());
    }

    #[test]
    fn mps_listing() {
        let mut lp = LinearProgram::new(vec![1.0, 1.0]).unwrap();
        lp.add_constraint(vec![1.0, 2.0], Sense::Ge, 2.0).unwrap();
        lp.add_constraint(vec![2.0, 1.0], Sense::Le, 4.0).unwrap();
        lp.set_free(1).unwrap();
        let mps = lp.to_mps("TOY");
        assert!(mps.starts_with("NAME          TOY\nROWS\n N  COST\n G  R0001\n L  R0002\n"));
        assert!(mps.contains(" FR BND       X0002"));
        assert!(mps.trim_end().ends_with("ENDATA"));
    }

    #[test]
    fn invert_identity_and_singular() {
        let inv = invert(&[2.0, 0.0, 0.0, 4.0], 2, 1e-11).unwrap();
        assert_eq!(inv, vec![0.5, 0.0, 0.0, 0.25]);
        assert!(invert(&[1.0, 2.0, 2.0, 4.0], 2, 1e-11).is_none());
    }
}
