use std::io;
use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("lattice coordinates overflowed 64-bit coefficients")]
    LatticeOverflow,

    #[error("branch {index} is not invertible (|a| = 0 or non-finite coefficients)")]
    NonInvertibleBranch { index: usize },

    #[error("multi-function has no branches")]
    NoBranches,

    #[error("no branch has an isolated fixed point: {0}")]
    NoFixedPoints(String),

    #[error("multi-function is not contracting: Lipschitz constant {0} >= 1")]
    NotContracting(f64),

    #[error("multi-function is not expanding: Lipschitz constant of the inverse {0} >= 1")]
    NotExpanding(f64),

    #[error("point budget {budget} exceeded at depth {depth} ({needed} candidate points)")]
    Budget { budget: usize, depth: usize, needed: usize },

    #[error(
        "cannot certify the repelling property at layer {k}: measured distance {measured} \
         does not exceed the micro-fractal error {precision}"
    )]
    CertificationFailed { k: usize, measured: f64, precision: f64 },

    #[error("operation needs a non-empty point set")]
    EmptySet,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unknown preset `{0}`")]
    UnknownPreset(String),

    #[error("multi-function does not preserve the {0} lattice: {1}")]
    NotLatticePreserving(String, String),

    #[error("invalid config: {0}")]
    Config(String),

    #[error("point is the north pole (the point at infinity)")]
    PointAtInfinity,

    #[error("i/o error at {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error("image encoding failed at {}: {message}", path.display())]
    Encode { path: PathBuf, message: String },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

/// Coarse error classes reported by the command line.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ErrorCategory {
    BadConfig,
    Budget,
    CertificationFailed,
    Io,
}

impl ErrorCategory {
    pub fn as_str(self) -> &'static str {
        match self {
            ErrorCategory::BadConfig => "bad-config",
            ErrorCategory::Budget => "budget",
            ErrorCategory::CertificationFailed => "certification-failed",
            ErrorCategory::Io => "io",
        }
    }

    pub fn exit_code(self) -> u8 {
        match self {
            ErrorCategory::BadConfig => 2,
            ErrorCategory::Budget => 3,
            ErrorCategory::CertificationFailed => 4,
            ErrorCategory::Io => 5,
        }
    }
}

impl Error {
    pub fn category(&self) -> ErrorCategory {
        match self {
            Error::Budget { .. } | Error::LatticeOverflow => ErrorCategory::Budget,
            Error::CertificationFailed { .. } => ErrorCategory::CertificationFailed,
            Error::Io { .. } | Error::Encode { .. } => ErrorCategory::Io,
            _ => ErrorCategory::BadConfig,
        }
    }
}
