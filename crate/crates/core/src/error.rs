use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("singular design: {0}")]
    SingularDesign(String),

    #[error("model {inner:?} is not nested in {outer:?}")]
    NestingViolation { inner: Vec<usize>, outer: Vec<usize> },

    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    #[error("index {index} out of range for {len} columns")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("argument out of domain: {0}")]
    Domain(String),

    #[error("unsupported regime: {0}")]
    UnsupportedRegime(String),

    #[error("series did not converge: {0}")]
    ConvergenceFailure(String),

    #[error("quadrature did not converge after {nodes} nodes (last difference {last_diff:e})")]
    QuadratureFailure { nodes: usize, last_diff: f64 },

    #[error("k = {k} exceeds the enumeration cap of {cap}; use the stochastic search")]
    EnumerationCap { k: usize, cap: usize },

    #[error("internal consistency: {0}")]
    Internal(String),

    #[error("i/o: {0}")]
    Io(String),

    #[error("parse error at row {row}, column {column}: {message}")]
    Parse {
        row: usize,
        column: usize,
        message: String,
    },

    #[error("configuration: {0}")]
    Config(String),
}

impl Error {
    /// Short stable tag used in machine-readable error records.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidModel(_) => "invalid_model",
            Error::SingularDesign(_) => "singular_design",
            Error::NestingViolation { .. } => "nesting_violation",
            Error::DegenerateFit(_) => "degenerate_fit",
            Error::IndexOutOfRange { .. } => "index_out_of_range",
            Error::Shape(_) => "shape",
            Error::Domain(_) => "domain",
            Error::UnsupportedRegime(_) => "unsupported_regime",
            Error::ConvergenceFailure(_) => "convergence_failure",
            Error::QuadratureFailure { .. } => "quadrature_failure",
            Error::EnumerationCap { .. } => "enumeration_cap",
            Error::Internal(_) => "internal",
            Error::Io(_) => "io",
            Error::Parse { .. } => "parse",
            Error::Config(_) => "config",
        }
    }

    /// Whether the failure comes from input or configuration rather than numerics.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::InvalidModel(_)
                | Error::NestingViolation { .. }
                | Error::IndexOutOfRange { .. }
                | Error::Shape(_)
                | Error::Domain(_)
                | Error::EnumerationCap { .. }
                | Error::Io(_)
                | Error::Parse { .. }
                | Error::Config(_)
                | Error::SingularDesign(_)
        )
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
