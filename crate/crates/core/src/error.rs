use thiserror::Error;

/// Errors raised by the library operations.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("unknown point `{0}`")]
    UnknownPoint(String),
    #[error("point {0} does not lie in the space")]
    PointOutOfSpace(String),
    #[error("invalid space: {0}")]
    InvalidSpace(String),
    #[error("invalid time parameter {0}: must be finite and nonnegative")]
    InvalidTime(f64),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("g not bijective: {0}")]
    NotBijective(String),
    #[error("inverse undefined: {0}")]
    InverseUndefined(String),
    #[error("invalid map: {0}")]
    InvalidMap(String),
    #[error("modulus is not in class Phi: {0}")]
    PhiInvalid(String),
    #[error("invalid contraction constant k = {0}: must lie in (0,1)")]
    InvalidK(f64),
    #[error("horizon exceeded the iteration cap {cap}")]
    HorizonExceeded { cap: usize },
    #[error("no admissible successor for u = {u} in T(g({y})) at t = {t}")]
    NoAdmissibleSuccessor { u: String, y: String, t: f64 },
    #[error("demicompactness cannot be decided for a non-finite space; assert it explicitly")]
    NotDemicompact,
    #[error("iteration did not converge within {max_iter} steps")]
    MaxIterExceeded { max_iter: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
