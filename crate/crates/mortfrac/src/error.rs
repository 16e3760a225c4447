use thiserror::Error;

/// Crate-wide result type.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("quadrature did not converge: requested rtol {rtol:e}, achieved {achieved:e}")]
    QuadratureNonConvergence { rtol: f64, achieved: f64 },

    #[error("numeric overflow guard: exponent magnitude {0:.3} exceeds 700")]
    Overflow(f64),

    #[error("covariance is numerically degenerate: Cholesky pivot {pivot:e} at index {index}")]
    DegenerateCovariance { pivot: f64, index: usize },

    #[error("degenerate series: {0}")]
    DegenerateSeries(String),

    #[error("ill-conditioned estimator: {0}")]
    IllConditioned(String),

    #[error("insufficient samples: need at least {need}, got {got}")]
    InsufficientSamples { need: usize, got: usize },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("no bracket: {0}")]
    NoBracket(String),

    #[error("infeasible calibration: {0}")]
    Infeasible(String),

    #[error("format error in {file} line {line}: {msg}")]
    Format {
        file: String,
        line: usize,
        msg: String,
    },

    #[error("coverage error: {0}")]
    Coverage(String),

    #[error("estimation step {step} failed: {source}")]
    EstimationStep {
        step: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn at_step(step: &'static str) -> impl FnOnce(Error) -> Error {
        move |e| Error::EstimationStep {
            step,
            source: Box::new(e),
        }
    }
}
