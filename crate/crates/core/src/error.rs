use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Coarse error classes. The CLI maps these onto its exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// Bad arguments or an invalid configuration.
    Usage,
    /// Input data could not be read or failed validation.
    Data,
    /// The statistic is undefined for this sample.
    Numeric,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("need at least {required} values, got {got}")]
    TooFewObservations { required: usize, got: usize },

    #[error("non-finite value at position {index}")]
    NonFinite { index: usize },

    #[error("order-statistic index {index} out of range 1..={max}")]
    IndexOutOfRange { index: usize, max: usize },

    #[error("split point sits on the boundary (p_n = {p_n}); one side of the split is empty")]
    DegenerateSplit { p_n: f64 },

    #[error("cross-over curve is identically zero (all increments equal)")]
    DegenerateZeroCurve,

    #[error("derivative estimate delta_n is zero or not finite ({delta})")]
    ZeroDelta { delta: f64 },

    #[error("variance estimate eta_n = {eta} is not positive")]
    NonPositiveEta { eta: f64 },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("no sign change of the cross-over function on [{lo}, {hi}]")]
    NoSignChange { lo: f64, hi: f64 },

    #[error("quadrature did not converge (estimated error {error:e})")]
    QuadratureFailed { error: f64 },

    #[error("density is zero at the quantile, slope undefined")]
    ZeroDensity,

    #[error("unsupported model for this operation: {0}")]
    UnsupportedModel(String),

    #[error("power-variation denominator is zero (constant path)")]
    ZeroVariation,

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv: {0}")]
    Csv(String),

    #[error("column `{0}` not found in header")]
    MissingColumn(String),

    #[error("{bad} of {total} rows could not be parsed (limit {limit:.1}%)")]
    TooManyBadRows {
        bad: usize,
        total: usize,
        limit: f64,
    },

    #[error("dates are not strictly increasing at row {row} ({date})")]
    NonMonotoneDates { row: usize, date: String },

    #[error("config: {0}")]
    Config(String),
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        use Error::*;
        match self {
            DegenerateSplit { .. }
            | DegenerateZeroCurve
            | ZeroDelta { .. }
            | NonPositiveEta { .. }
            | NoSignChange { .. }
            | QuadratureFailed { .. }
            | ZeroDensity
            | ZeroVariation => ErrorKind::Numeric,
            InvalidParameter { .. } | UnsupportedModel(_) | Config(_) => ErrorKind::Usage,
            TooFewObservations { .. }
            | NonFinite { .. }
            | IndexOutOfRange { .. }
            | Io { .. }
            | Csv(_)
            | MissingColumn(_)
            | TooManyBadRows { .. }
            | NonMonotoneDates { .. } => ErrorKind::Data,
        }
    }

    /// Short machine-readable tag, stable across releases.
    pub fn code(&self) -> &'static str {
        use Error::*;
        match self {
            TooFewObservations { .. } => "too_few_observations",
            NonFinite { .. } => "non_finite_input",
            IndexOutOfRange { .. } => "index_out_of_range",
            DegenerateSplit { .. } => "degenerate_split",
            DegenerateZeroCurve => "degenerate_zero_curve",
            ZeroDelta { .. } => "zero_delta",
            NonPositiveEta { .. } => "non_positive_eta",
            InvalidParameter { .. } => "invalid_parameter",
            NoSignChange { .. } => "no_sign_change",
            QuadratureFailed { .. } => "quadrature_failed",
            ZeroDensity => "zero_density",
            UnsupportedModel(_) => "unsupported_model",
            ZeroVariation => "zero_variation",
            Io { .. } => "io",
            Csv(_) => "csv",
            MissingColumn(_) => "missing_column",
            TooManyBadRows { .. } => "too_many_bad_rows",
            NonMonotoneDates { .. } => "non_monotone_dates",
            Config(_) => "config",
        }
    }

    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
