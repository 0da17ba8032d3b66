use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Argument outside the mathematical domain of the function.
    #[error("domain error in {op}: {detail}")]
    Domain { op: &'static str, detail: String },

    /// A value violates an invariant of a domain type.
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: String, reason: String },

    #[error("no sign change on [{lo}, {hi}]: f(lo)={f_lo}, f(hi)={f_hi}")]
    NoSignChange { lo: f64, hi: f64, f_lo: f64, f_hi: f64 },

    #[error("root solver did not converge after {iterations} iterations (bracket width {width})")]
    NoConvergence { iterations: usize, width: f64 },

    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    #[error("value {value} outside tabulated range [{min}, {max}]")]
    OutOfRange { value: f64, min: f64, max: f64 },

    /// Campbell integrals diverge for the given path-loss exponent.
    #[error("aggregate-interference integral diverges: path-loss exponent {alpha} must exceed {required}")]
    ConvergenceViolation { alpha: f64, required: f64 },

    #[error("operation requires a power-law path-loss model")]
    PowerLawRequired,

    /// The analytic interference tail beyond the sampling radius is too large.
    #[error("truncation too severe: tail beyond outer radius is {tail_fraction:.3e} of the mean (limit {limit:.1e})")]
    TruncationTooSevere { tail_fraction: f64, limit: f64 },

    #[error("optimality violated in trial {trial}: perturbed area {perturbed_area} < optimal area {optimal_area}")]
    OptimalityViolation {
        trial: usize,
        perturbed_area: f64,
        optimal_area: f64,
    },

    #[error("csv: {0}")]
    Csv(String),
}

impl Error {
    pub(crate) fn domain(op: &'static str, detail: impl Into<String>) -> Self {
        Error::Domain {
            op,
            detail: detail.into(),
        }
    }

    pub(crate) fn invalid(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            field: field.into(),
            reason: reason.into(),
        }
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Csv(e.to_string())
    }
}
