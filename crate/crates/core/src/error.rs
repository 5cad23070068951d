use thiserror::Error;

/// Failures raised by the integral engine and the quadrature oracle.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum IntegralError {
    #[error("non-finite input: {0}")]
    NonFinite(&'static str),
    #[error("horizon must be positive and finite, got {0}")]
    InvalidHorizon(f64),
    #[error("relative tolerance must lie in (0, 1e-2], got {0}")]
    InvalidTolerance(f64),
    #[error("exponential growth overflows: rate*tau = {0}")]
    Range(f64),
    #[error("quadrature did not converge after {subdivisions} subdivisions (estimate {estimate}, error {error})")]
    NoConvergence {
        subdivisions: usize,
        estimate: f64,
        error: f64,
    },
    #[error("integrand produced a non-finite value at t = {0}")]
    NonFiniteIntegrand(f64),
}

/// Failures raised while building or evaluating system responses.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ResponseError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("invalid basis family: {0}")]
    Basis(String),
    #[error("invalid system parameters: {0}")]
    Params(String),
    #[error("invalid simulation request: {0}")]
    Simulation(String),
    #[error(transparent)]
    Integral(#[from] IntegralError),
}

/// Failures raised by the bound calculators.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum BoundsError {
    #[error("invalid argument `{field}`: {reason}")]
    InvalidArgument { field: &'static str, reason: String },
    #[error("missing input `{0}`")]
    Missing(String),
    #[error("overflow evaluating {0}")]
    Overflow(&'static str),
}

/// Failures raised by the shattering constructions and estimators.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ShatterError {
    #[error("invalid request: {0}")]
    Invalid(String),
    #[error("k = {k} exceeds the double-precision reliability limit {limit}")]
    PrecisionLimit { k: usize, limit: usize },
    #[error("no well-conditioned lambda set after {attempts} attempts (best condition number {best_condition:e})")]
    SearchExhausted { attempts: usize, best_condition: f64 },
    #[error(transparent)]
    Response(#[from] ResponseError),
    #[error(transparent)]
    Integral(#[from] IntegralError),
}

impl From<BoundsError> for ShatterError {
    fn from(e: BoundsError) -> Self {
        ShatterError::Invalid(e.to_string())
    }
}

/// A JSON document that does not match the documented schema.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("{path}: {message}")]
pub struct SchemaError {
    /// Field path such as `coeffs[0][1]`, or `.` for the document root.
    pub path: String,
    pub message: String,
}

impl SchemaError {
    pub fn new(path: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            path: path.into(),
            message: message.into(),
        }
    }
}

/// Failures raised by the learning experiment.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum LearnError {
    #[error("invalid experiment configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Response(#[from] ResponseError),
    #[error(transparent)]
    Bounds(#[from] BoundsError),
}
