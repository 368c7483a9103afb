use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown potential family `{0}`")]
    UnknownFamily(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("non-finite {what} sample at node {node} (x = {x})")]
    NonFiniteSample { what: &'static str, node: usize, x: f64 },

    #[error("quadrature did not converge on [{a}, {b}]: estimated error {estimate:e} after {evaluations} evaluations")]
    QuadratureFailed {
        a: f64,
        b: f64,
        estimate: f64,
        evaluations: usize,
    },

    #[error(
        "envelope exponent {exponent:.3e} exceeds the representable range at node {node}; \
         use a smaller box half-width or rescale the parameters"
    )]
    EnvelopeOverflow { node: usize, exponent: f64 },

    #[error(
        "operator is ill-conditioned: log10 of the envelope condition number is {log10_cond:.3e}, above the limit {limit_log10}; \
         reduce the box half-width or mu*L"
    )]
    IllConditioned { log10_cond: f64, limit_log10: f64 },

    #[error("eigensolver failed to converge for a {dim}x{dim} matrix")]
    EigenNonConvergence { dim: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("step size underflow at x = {x} (h = {h:e}); the system is stiff here, try the phi-form route")]
    StepSizeUnderflow { x: f64, h: f64 },

    #[error("{0}")]
    EnergyExcluded(String),

    #[error("{0}")]
    WrongSubclass(String),

    #[error("invalid boundary condition: {0}")]
    InvalidBoundaryCondition(String),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}
