//! Error type shared across the crate.

use thiserror::Error;

/// Errors produced by estimators, special functions, and the simulation
/// engine.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A series, continued fraction, or root search did not converge
    /// within its iteration budget.
    #[error("no convergence within {0} iterations")]
    NoConvergence(usize),

    /// The truncation normalizer of a one-sided kernel vanished: the
    /// kernel carries no mass on its side of the cutoff.
    #[error("degenerate truncation: kernel mass on the {0} side of the cutoff is zero")]
    DegenerateTruncation(&'static str),

    /// The pilot estimate at bandwidth `b/delta` vanished while the
    /// estimate at `b` did not, so the bias-corrected combination is
    /// undefined.
    #[error("degenerate pilot: estimate at b/delta vanished while the estimate at b did not")]
    DegeneratePilot,

    /// Every density estimate entering the variance formula vanished; the
    /// test statistic is undefined.
    #[error("degenerate variance: density estimates at the cutoff all vanished")]
    DegenerateVariance,

    /// The sample has no observations on one side of the cutoff.
    #[error("one-sided sample: no observations {0} the cutoff")]
    OneSidedSample(&'static str),

    /// The requested number of sub-samples cannot be formed.
    #[error("invalid sub-sample count M={m}: must satisfy 1 <= M <= min(n-, n+) = {max}")]
    SubsampleCount { m: usize, max: usize },

    /// The truncated-mixture weight `gamma = F(c) - d` fell outside `[0, 1]`.
    #[error("invalid mixture weight gamma = {0}: F(c) - d must lie in [0, 1]")]
    InvalidMixture(f64),

    /// More than 1% of Monte Carlo replications were degenerate.
    #[error("excessive degenerate replications: {excluded} of {reps}")]
    ExcessiveDegeneracy { excluded: usize, reps: usize },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    /// True for error classes caused by insufficient local data rather
    /// than by invalid inputs.
    pub fn is_degeneracy(&self) -> bool {
        matches!(
            self,
            Error::DegenerateTruncation(_)
                | Error::DegeneratePilot
                | Error::DegenerateVariance
                | Error::OneSidedSample(_)
                | Error::SubsampleCount { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
