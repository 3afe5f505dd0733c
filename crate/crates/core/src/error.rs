use alloc::boxed::Box;
use alloc::string::String;

pub type Result<T, E = PdmpError> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PdmpError {
    #[error("non-finite value for {0}")]
    NonFinite(&'static str),
    #[error("negative time {0}")]
    NegativeTime(f64),
    #[error("time {t} lies beyond the boundary hitting time {boundary}")]
    BeyondBoundary { t: f64, boundary: f64 },
    #[error("time {t} exceeds the trajectory horizon {horizon}")]
    BeyondHorizon { t: f64, horizon: f64 },
    #[error("state has dimension {got}, expected {expected}")]
    Dimension { expected: usize, got: usize },
    #[error("quadrature did not converge on [{a}, {b}]")]
    Quadrature { a: f64, b: f64 },
    #[error("root finding failed to bracket a solution")]
    RootBracket,
    #[error("thinning requested without a rate bound")]
    MissingRateBound,
    #[error("jump rate {rate} exceeds the declared bound {bound}")]
    RateBoundViolated { rate: f64, bound: f64 },
    #[error("thinning made {0} proposals without accepting a jump")]
    ThinningStalled(usize),
    #[error("explosion: more than {cap} jumps on the horizon")]
    Explosion { cap: usize },
    #[error("transition kernel returned its input state at time {time}")]
    DegenerateJump { time: f64 },
    #[error("state left the declared invariant set at time {time}")]
    LeftInvariantSet { time: f64 },
    #[error("no transition measure registered for kernel evaluation")]
    MissingTransitionMeasure,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("model invariant violated: {0}")]
    Model(String),
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("no chain transition starts in A")]
    EmptyA,
    #[error("the at-risk set is empty over the whole grid")]
    EmptyAtRisk,
    #[error("path {index}: {source}")]
    Path {
        index: usize,
        #[source]
        source: Box<PdmpError>,
    },
}

impl PdmpError {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        PdmpError::InvalidParameter(msg.into())
    }
}

pub(crate) fn finite(v: f64, what: &'static str) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(PdmpError::NonFinite(what))
    }
}
