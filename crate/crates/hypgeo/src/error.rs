use thiserror::Error;

/// Every failure the library can report.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("geometry infeasible: {0}")]
    GeometryInfeasible(String),
    #[error("geometry inconsistent: {0}")]
    GeometryInconsistent(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("search exhausted: {0}")]
    SearchExhausted(String),
    #[error("curvature out of band at rho = {rho}: K = {curvature}, band = [{lo}, {hi}]")]
    CurvatureOutOfBand { rho: f64, curvature: f64, lo: f64, hi: f64 },
    #[error("integration failure: {0}")]
    IntegrationFailure(String),
    #[error("horizon too short: need {needed}, have {have}")]
    HorizonTooShort { needed: f64, have: f64 },
    #[error("bound violated for {mode}: ratio {ratio} > bound {bound}")]
    BoundViolated { mode: String, ratio: f64, bound: f64 },
    #[error("precondition unmet: {0}")]
    PreconditionUnmet(String),
    #[error("admissibility failed: {0}")]
    AdmissibilityFailed(String),
    #[error("certification failed at (u, v) = ({u}, {v}): {what} (margin {margin})")]
    CertificationFailed { u: f64, v: f64, what: String, margin: f64 },
    #[error("length constraint violated: {0}")]
    LengthConstraintViolated(String),
    #[error("pattern mismatch: {0}")]
    PatternMismatch(String),
    #[error("arity mismatch: expected {expected}, got {got}")]
    ArityMismatch { expected: usize, got: usize },
    #[error("degenerate area {area} for piece {piece}")]
    DegenerateArea { piece: usize, area: f64 },
    #[error("integer overflow evaluating {0}")]
    Overflow(String),
    #[error("solver failure: {0}")]
    SolverFailure(String),
    #[error("no sign change on [{lo}, {hi}]")]
    NoSignChange { lo: f64, hi: f64 },
    #[error("stencil at rho = {0} reaches past the sampled range")]
    BoundaryTooClose(f64),
    #[error("io: {0}")]
    Io(String),
    #[error("malformed data: {0}")]
    Malformed(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Malformed(e.to_string())
    }
}
