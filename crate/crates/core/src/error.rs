use core::fmt;

/// Everything that can go wrong inside the library.
///
/// Variants carry the measured violation so callers can report exactly which
/// invariant failed and by how much.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Matrix is not Hermitian; carries max_ij |m_ij - conj(m_ji)|.
    NotHermitian { residual: f64 },
    /// Trace differs from one; carries |Tr - 1|.
    TraceNotOne { deviation: f64 },
    /// Negative eigenvalue below tolerance; carries the offending eigenvalue.
    NotPositive { min_eigenvalue: f64 },
    /// Operands have incompatible dimensions.
    DimensionMismatch { expected: usize, found: usize },
    /// Matrix must be at least 2x2.
    DimensionTooSmall { dim: usize },
    /// The operator has a single distinct eigenvalue, so the spectral gap
    /// (and with it the whole control problem) is undefined.
    SingleEigenvalue,
    /// Deterministic integration drifted off the trace-one manifold.
    StepTooLarge { trace_deviation: f64 },
    /// Kraus-form normalization collapsed; the step size is too large for the
    /// operator norms involved.
    DegenerateNormalization { norm: f64 },
    /// A controller returned something other than 0 or 1.
    ControllerFault { value: f64 },
    /// gamma lies outside the admissible interval for the selected mode.
    InvalidGamma { gamma: f64, low: f64, high: f64 },
    /// Scalar argument outside its domain.
    DomainError { name: &'static str, value: f64 },
    /// Requested state dimension is unusable.
    InvalidDimension { dim: usize },
    /// A model assumption failed at ensemble start.
    AssumptionViolation { which: &'static str },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::NotHermitian { residual } => {
                write!(f, "matrix is not Hermitian (residual {residual:.3e})")
            }
            Error::TraceNotOne { deviation } => {
                write!(f, "trace differs from one by {deviation:.3e}")
            }
            Error::NotPositive { min_eigenvalue } => {
                write!(f, "matrix is not positive semidefinite (min eigenvalue {min_eigenvalue:.3e})")
            }
            Error::DimensionMismatch { expected, found } => {
                write!(f, "dimension mismatch: expected {expected}, found {found}")
            }
            Error::DimensionTooSmall { dim } => {
                write!(f, "dimension {dim} is too small (need at least 2)")
            }
            Error::SingleEigenvalue => {
                write!(f, "operator has a single distinct eigenvalue; spectral gap undefined")
            }
            Error::StepTooLarge { trace_deviation } => {
                write!(f, "trace drifted by {trace_deviation:.3e}; reduce the step size")
            }
            Error::DegenerateNormalization { norm } => {
                write!(f, "Kraus normalization collapsed (norm {norm:.3e}); step size too large")
            }
            Error::ControllerFault { value } => {
                write!(f, "controller returned non-binary control value {value}")
            }
            Error::InvalidGamma { gamma, low, high } => {
                write!(f, "gamma = {gamma} outside the admissible interval ({low}, {high})")
            }
            Error::DomainError { name, value } => {
                write!(f, "argument {name} = {value} outside its domain")
            }
            Error::InvalidDimension { dim } => {
                write!(f, "invalid state dimension {dim}")
            }
            Error::AssumptionViolation { which } => {
                write!(f, "model assumption {which} failed")
            }
        }
    }
}

impl core::error::Error for Error {}

pub type Result<T> = core::result::Result<T, Error>;
