use thiserror::Error;

/// Errors raised by the laboratory's solvers and evaluators.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum LabError {
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("degree cap mismatch: expected {expected}, found {found}")]
    DegreeCapMismatch { expected: usize, found: usize },
    #[error("unsupported degree {degree} (maximum {max})")]
    UnsupportedDegree { degree: usize, max: usize },
    #[error("unsupported dimension n = {0}")]
    UnsupportedDimension(usize),
    #[error("form degree k = {k} out of range 1..={n}")]
    DegreeOutOfRange { k: usize, n: usize },
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("singular matrix encountered in exact elimination")]
    Singular,
    #[error("compatibility violated: defect {defect:e} exceeds {tol:e}")]
    Compatibility { defect: f64, tol: f64 },
    #[error("ellipticity lost at iterate {iter}: margin {margin:e}")]
    EllipticityLost { iter: usize, margin: f64 },
    #[error("positivity of the Kahler form lost at iterate {iter}: margin {margin:e}")]
    PositivityLost { iter: usize, margin: f64 },
    #[error("maximum iterations ({max_iters}) exceeded, residual {residual:e}")]
    MaxIterations { max_iters: usize, residual: f64 },
    #[error("linear solver failed to converge: {0}")]
    LinearSolver(String),
    #[error("admissibility violated: defect {defect:e} exceeds {tol:e}")]
    Admissibility { defect: f64, tol: f64 },
    #[error("continuation failed at parameter {at}: {source}")]
    Continuation {
        at: f64,
        last_reached: f64,
        #[source]
        source: Box<LabError>,
    },
    #[error("newton iteration diverged at iterate {iter}, residual {residual:e}")]
    Divergence { iter: usize, residual: f64 },
    #[error("io: {0}")]
    Io(String),
}

impl From<std::io::Error> for LabError {
    fn from(e: std::io::Error) -> Self {
        LabError::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, LabError>;
