use thiserror::Error;

use crate::lp::LpStatus;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{name} = {value} is outside its domain {domain}")]
    Domain {
        name: &'static str,
        value: f64,
        domain: &'static str,
    },

    #[error("cutoff m = {cutoff} exceeds the number of trials N = {trials}")]
    CutoffExceedsTrials { cutoff: u64, trials: u64 },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("linear program not solved to optimality: {0:?}")]
    Lp(LpStatus),

    #[error("sample count {0} exceeds the supported range")]
    Overflow(u64),

    #[error("certificate {certificate:e} exceeds the target {target:e} at N = {samples}")]
    Certificate {
        samples: u64,
        certificate: f64,
        target: f64,
    },

    #[error("no candidate of the finite family is feasible on the validation set")]
    NoFeasibleCandidate,
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn domain(name: &'static str, value: f64, domain: &'static str) -> Error {
    Error::Domain {
        name,
        value,
        domain,
    }
}
