use thiserror::Error;

use crate::geodesic::Trajectory;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors raised by model construction and the geometric operations.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("unknown model kind `{0}`")]
    UnknownKind(String),
    #[error("homogeneity degree {0} is out of range (need an integer n >= 2)")]
    DegreeOutOfRange(f64),
    #[error("metric input is not symmetric at ({row}, {col})")]
    NonSymmetricMetricInput { row: usize, col: usize },
    #[error("invalid model parameters: {0}")]
    InvalidParams(String),
    #[error("jet order (x: {x_order}, y: {y_order}) is not supported")]
    OrderUnsupported { x_order: usize, y_order: usize },
    #[error("evaluation outside the model domain: {0}")]
    EvaluationDomainError(String),
    #[error("finite-difference step underflowed")]
    StepUnderflow,
    #[error("finite-difference oracle is inconsistent (Richardson levels differ by {0:e})")]
    OracleInconsistent(f64),
    #[error("vector is null: |L| = {0:e}")]
    NullVectorError(f64),
    #[error("Hessian metric is degenerate")]
    DegenerateHessian,
    #[error("no observer-cone direction found")]
    NoConeFound,
    #[error("Hessian degenerated during integration at tau = {tau}")]
    DegeneracyEncountered { tau: f64, partial: Box<Trajectory> },
    #[error("integration step failed: {0}")]
    StepFailure(String),
    #[error("too few samples for quadrature ({0})")]
    InsufficientSamples(usize),
    #[error("shooting diverged after {iterations} iterations (residual {residual:e})")]
    ShootingDiverged { iterations: usize, residual: f64 },
    #[error("fiber path crosses the null structure at s = {0}")]
    NullCrossing(f64),
    #[error("frame is not orthonormal (residual {0:e})")]
    FrameNotOrthonormal(f64),
    #[error("seed vectors do not span the tangent space")]
    SeedDegenerate,
    #[error("point is not in observer space")]
    NotObserverPoint,
    #[error("trajectory leaves observer space at sample {0}")]
    TrajectoryLeftObserverSpace(usize),
    #[error("algebra element violates eta-antisymmetry (residual {0:e})")]
    InvalidAlgebraElement(f64),
}

/// Coarse classification used to pick process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Config,
    Domain,
    Numerical,
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        use Error::*;
        match self {
            UnknownKind(_)
            | DegreeOutOfRange(_)
            | NonSymmetricMetricInput { .. }
            | InvalidParams(_)
            | OrderUnsupported { .. } => ErrorClass::Config,
            EvaluationDomainError(_)
            | NullVectorError(_)
            | DegenerateHessian
            | NoConeFound
            | DegeneracyEncountered { .. }
            | NullCrossing(_)
            | FrameNotOrthonormal(_)
            | SeedDegenerate
            | NotObserverPoint
            | TrajectoryLeftObserverSpace(_)
            | InvalidAlgebraElement(_) => ErrorClass::Domain,
            StepUnderflow
            | OracleInconsistent(_)
            | StepFailure(_)
            | InsufficientSamples(_)
            | ShootingDiverged { .. } => ErrorClass::Numerical,
        }
    }
}
