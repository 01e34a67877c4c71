use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("point is not on the unit sphere (|q| - 1 = {0:e})")]
    NotUnit(f64),
    #[error("tangent vector is not orthogonal to its base point (<v,q> = {0:e})")]
    NotTangent(f64),
    #[error("point lies outside the flow-invariant frame chart")]
    PolicyChartMiss,
    #[error("frame policy is degenerate at this point")]
    FrameDegenerate,
    #[error("adaptive integration could not meet tolerance {tol:e}")]
    StepFailure { tol: f64 },
    #[error("form degree {0} is not supported here")]
    BadDegree(usize),
    #[error("no calibration lattice point passes:\n{0}")]
    CalibrationFailed(String),
    #[error("the origin is not a point of the cone")]
    OriginNotInCone,
    #[error("point lies outside the field's smoothness domain")]
    EvalDomain,
    #[error("gauge transformation is singular (|det| = {0:e})")]
    SingularGauge(f64),
    #[error("bad parameters: {0}")]
    BadParams(String),
    #[error("profile reduction residual {residual:e} exceeds tolerance {tol:e}")]
    ReductionInconsistent { residual: f64, tol: f64 },
    #[error("finite-difference stencil leaves the flow box")]
    StencilOutOfBox,
    #[error("orbit crosses the excluded set of the field")]
    DomainExcluded,
    #[error("field is not a Bogomolny solution here (residual {residual:e} > {tol:e})")]
    NotABogomolnySolution { residual: f64, tol: f64 },
    #[error("transport loop leaves the domain")]
    LoopExitsDomain,
    #[error("missing inputs: {0}")]
    MissingInputs(String),
    #[error("empty sample set")]
    Empty,
    #[error("Hoelder exponent {0} outside (0, 1]")]
    BadAlpha(f64),
    #[error("invalid configuration: {0}")]
    ConfigInvalid(String),
    #[error("{suite}: {source}")]
    Suite {
        suite: String,
        #[source]
        source: Box<Error>,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub fn in_suite(self, suite: &str) -> Error {
        Error::Suite {
            suite: suite.to_string(),
            source: Box::new(self),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
