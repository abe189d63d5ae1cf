use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("series is empty")]
    EmptySeries,
    #[error("non-finite wind speed at index {index}")]
    NonFinite { index: usize },
    #[error("negative wind speed at index {index}")]
    NegativeSpeed { index: usize },
    #[error("step must be positive")]
    InvalidStep,
    #[error("{0}")]
    InvalidSpec(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("timestamp on line {line} is not strictly after the previous one")]
    NonMonotonicTimestamp { line: usize },
    #[error("no complete days in input")]
    NoCompleteDays,

    #[error("power curve speeds must be strictly increasing (row {row})")]
    NonMonotonicSpeeds { row: usize },
    #[error("power curve has negative power at row {row}")]
    NegativePower { row: usize },
    #[error("power curve needs at least two points, got {0}")]
    FewerThanTwoPoints(usize),

    #[error("block length {t} exceeds series length {len}")]
    BlockLongerThanSeries { t: usize, len: usize },

    #[error("grid is empty")]
    EmptyGrid,
    #[error("need at least {required} samples, got {got}")]
    TooFewSamples { required: usize, got: usize },
    #[error("sample variance is zero")]
    ZeroVariance,

    #[error("invalid distribution parameters: {0}")]
    InvalidParams(String),
    #[error("sample value at index {index} lies outside the distribution support")]
    SampleOutsideSupport { index: usize },
    #[error("optimizer did not converge within {iterations} iterations")]
    NonConvergence { iterations: usize },
    #[error("series step of {step_seconds} s is monthly or coarser; such samples are not Weibull-like (use force to fit anyway)")]
    MonthlyResolution { step_seconds: u64 },

    #[error("reference energy is zero")]
    ZeroReferenceEnergy,
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for failures of the filesystem rather than of the data.
    pub fn is_io(&self) -> bool {
        matches!(self, Error::Io { .. })
    }
}
