use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("grid geometry mismatch: {0}")]
    GeometryMismatch(String),

    #[error("pair is not admissible: {0}")]
    NotAdmissible(String),

    #[error("unbalanced masses: source total {source_total}, target total {target_total}")]
    Unbalanced { source_total: f64, target_total: f64 },

    #[error("instance of {atoms} atoms exceeds solver capacity {capacity}")]
    CapacityExceeded { atoms: usize, capacity: usize },

    #[error("exponent p = {0} is not supported here (requires p = 1)")]
    UnsupportedExponent(f64),

    #[error("inconsistent transport data: {0}")]
    Consistency(String),

    #[error("potential is not 1-Lipschitz: |φ(x) − φ(y)| − |x − y| = {excess:e} at atoms {first} and {second}")]
    InvalidPotential { excess: f64, first: usize, second: usize },

    #[error("degenerate curve: {0}")]
    DegenerateCurve(String),

    #[error("offset {delta} too large for max curvature {max_curvature} (need |δ|·max|κ| < 1/4)")]
    OffsetTooLarge { delta: f64, max_curvature: f64 },

    #[error("length {t} outside the monotone range of the mass coordinate")]
    OutOfRange { t: f64 },

    #[error("degenerate ray: discriminant {0} is not positive")]
    DegenerateRay(f64),

    #[error("|ξ| = {0} outside the expansion domain |ξ| < 1")]
    ExpansionDomain(f64),

    #[error("epsilon {epsilon} is not admissible (ε₀ = {epsilon0})")]
    InadmissibleEpsilon { epsilon: f64, epsilon0: f64 },

    #[error("grid spacing {h} too coarse for epsilon {epsilon} (need h ≤ ε/4)")]
    GridTooCoarse { h: f64, epsilon: f64 },

    #[error("malformed input in {path}: {message}")]
    Parse { path: PathBuf, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(message: impl Into<String>) -> Error {
    Error::InvalidParameter(message.into())
}
