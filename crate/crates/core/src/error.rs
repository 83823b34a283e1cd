use std::path::PathBuf;

use crate::reinit::ReinitOutcome;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("grid geometries do not match")]
    GeometryMismatch,

    #[error("point {point:?} lies outside the grid bounding box")]
    OutOfBounds { point: [f64; 3] },

    #[error("field has no zero crossing")]
    NoZeroCrossing,

    #[error("{stage}: no convergence after {iterations} iterations (residual {residual:.3e})")]
    NotConverged {
        stage: &'static str,
        iterations: usize,
        residual: f64,
    },

    #[error("constraint at {point:?} missed by {miss:.3e} m (allowed {allowed:.3e} m)")]
    ConstraintViolated {
        point: [f64; 3],
        miss: f64,
        allowed: f64,
    },

    #[error(
        "residual {:.3e} still above target after {} iterations",
        .0.final_residual,
        .0.iterations
    )]
    ReinitStalled(Box<ReinitOutcome>),

    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn format(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        Error::Format {
            path: path.into(),
            message: message.into(),
        }
    }

    /// Wraps the error with the name of the pipeline stage that raised it.
    pub fn in_stage(self, stage: &'static str) -> Self {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }

    /// The best reinitialization iterate carried by a stalled run, looking
    /// through stage tags.
    pub fn best_iterate(&self) -> Option<&ReinitOutcome> {
        match self {
            Error::ReinitStalled(best) => Some(best),
            Error::Stage { source, .. } => source.best_iterate(),
            _ => None,
        }
    }

    /// True for failures of an iterative numerical method, as opposed to bad
    /// inputs or I/O.
    pub fn is_numerical(&self) -> bool {
        match self {
            Error::NotConverged { .. } | Error::ConstraintViolated { .. } | Error::ReinitStalled(_) => {
                true
            },
            Error::Stage { source, .. } => source.is_numerical(),
            _ => false,
        }
    }
}
