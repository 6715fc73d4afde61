//! Sample-complexity planners for randomized design of uncertain systems,
//! sequential probabilistic validation, and the polynomial-envelope
//! identification study built on top of them.
//!
//! The numeric core ([`binomial`], [`complexity`], [`lp`], the schedule part
//! of [`spv`]) is generic over [`Real`]; the aliases below fix it to `f64`.

// negated comparisons let NaN fail domain checks
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod binomial;
pub mod complexity;
pub mod envelope;
pub mod error;
pub mod lp;
pub mod scalar;
pub mod spv;

pub use error::{Error, Result};
pub use scalar::Real;

pub type TailQuery64 = binomial::TailQuery<f64>;
pub type TailValue64 = binomial::TailValue<f64>;
pub type RiskSpec64 = complexity::RiskSpec<f64>;
pub type PlanResult64 = complexity::PlanResult<f64>;
pub type Bound64 = complexity::Bound<f64>;
pub type LinearProgram64 = lp::LinearProgram<f64>;
pub type LpSolution64 = lp::LpSolution<f64>;
pub type SpvSchedule64 = spv::SpvSchedule<f64>;
pub type SpvConfig64 = spv::SpvConfig<f64>;
