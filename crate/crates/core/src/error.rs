use thiserror::Error;

/// Errors raised by the certification pipeline.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch in {op}: {left:?} vs {right:?}")]
    DimensionMismatch { op: &'static str, left: (usize, usize), right: (usize, usize) },

    #[error("invalid system: {0}")]
    InvalidSystem(String),

    #[error("Kalman condition violated: stacked rank {rank} < {n}")]
    KalmanViolated { rank: usize, n: usize },

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("fitted slope {slope:.4} is not within {tol} of an integer")]
    NonIntegerSlope { slope: f64, tol: f64 },

    #[error("no mixing coefficient satisfies the pairing condition")]
    NoSolution,

    #[error("B^s is not of rank one")]
    NotRankOne,

    #[error("xi = {xi} is outside the {regime} regime")]
    RegimeMismatch { xi: f64, regime: &'static str },

    #[error("functional is not equivalent to the energy (c1 = {c1:.3e})")]
    NotEquivalent { c1: f64 },

    #[error("no epsilon in the sweep certifies the functional")]
    EpsilonSweepFailed,

    #[error("step dt = {dt:.3e} exceeds the stability bound {max:.3e}")]
    StepTooLarge { dt: f64, max: f64 },

    #[error("trajectory decayed only by a factor {ratio:.3e} (need 1e-3)")]
    InsufficientDecay { ratio: f64 },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("unknown model `{0}`")]
    UnknownModel(String),

    #[error("internal consistency check failed: {0}")]
    Internal(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// Whether the error stems from malformed input rather than analysis.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::InvalidSystem(_) | Error::Parse(_) | Error::UnknownModel(_) | Error::Io(_) | Error::Precondition(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
