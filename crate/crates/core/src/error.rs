use thiserror::Error;

/// Errors produced by the numerical core.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("map is not expanding: minimum sampled derivative {min_derivative} <= {threshold}")]
    NotExpanding { min_derivative: f64, threshold: f64 },

    #[error("bad parameters: {0}")]
    BadParams(String),

    #[error("point {0} lies outside [0, 1)")]
    Domain(f64),

    #[error("branch inversion failed to bracket target {target} on branch {branch}")]
    Convergence { target: f64, branch: usize },

    #[error("non-finite value encountered while {0}")]
    NonFinite(&'static str),

    #[error(
        "under-sampled: {samples} points for {cylinders} cylinders (need at least {required})"
    )]
    UnderSampled {
        samples: usize,
        cylinders: usize,
        required: usize,
    },

    #[error("power iteration did not converge after {iterations} iterations (last L1 step {last_step:e})")]
    NoConvergence { iterations: usize, last_step: f64 },

    #[error("stationary vector has not been solved")]
    NotSolved,
}

impl Error {
    /// True for failures of the numerics themselves, as opposed to invalid input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NotExpanding { .. }
                | Error::Convergence { .. }
                | Error::NonFinite(_)
                | Error::UnderSampled { .. }
                | Error::NoConvergence { .. }
                | Error::NotSolved
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
