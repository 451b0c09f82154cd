use thiserror::Error;

/// Errors raised by the rod kernels, solvers and experiment drivers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum RodError {
    #[error("rotation angle {angle} is at or beyond the logarithm singularity at pi")]
    AngleAtPi { angle: f64 },

    #[error("inverse tangent map is singular for rotation vector norm {norm}")]
    TangentSingular { norm: f64 },

    #[error("matrix is not skew-symmetric (defect {defect:e})")]
    NotSkew { defect: f64 },

    #[error("parameter xi = {xi} outside [{lo}, {hi}]")]
    OutOfRange { xi: f64, lo: f64, hi: f64 },

    #[error("unsupported polynomial order {0}")]
    UnsupportedOrder(usize),

    #[error("interpolation {kind} requires polynomial order 1, got {order}")]
    IncompatibleKind { kind: &'static str, order: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("invalid boundary condition: {0}")]
    BoundaryCondition(String),

    #[error("invalid model data: {0}")]
    InvalidModel(String),

    #[error("singular linear system at pivot {0}")]
    SingularMatrix(usize),

    #[error(
        "Newton did not converge in load step {step} after {iterations} iterations (residual {residual:e})"
    )]
    NoConvergence {
        step: usize,
        iterations: usize,
        residual: f64,
    },

    #[error("step size underflow at t = {t} (h = {h:e})")]
    StepSizeUnderflow { t: f64, h: f64 },

    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },

    #[error("io error: {0}")]
    Io(String),
}

impl RodError {
    /// Process exit code used by the command-line driver.
    pub fn exit_code(&self) -> i32 {
        match self {
            RodError::Config { .. } | RodError::Io(_) => 2,
            RodError::NoConvergence { .. } | RodError::StepSizeUnderflow { .. } => 3,
            RodError::AngleAtPi { .. }
            | RodError::TangentSingular { .. }
            | RodError::SingularMatrix(_) => 4,
            _ => 2,
        }
    }
}

impl From<std::io::Error> for RodError {
    fn from(e: std::io::Error) -> Self {
        RodError::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, RodError>;
