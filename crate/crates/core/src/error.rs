use thiserror::Error;

/// Errors raised by the library. Check failures are reported through
/// [`crate::report::CheckRecord`] values, not through this type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("group specifications do not match: {0}")]
    SpecMismatch(String),
    #[error("unsupported group: {0}")]
    UnsupportedGroup(String),
    #[error("matrix is not in the algebra: {0}")]
    NotInAlgebra(String),
    #[error("matrix is not in the group: {0}")]
    NotInGroup(String),
    #[error("element is singular")]
    Singular,
    #[error("element is not unipotent (diagonal deviates from 1 by {0:e})")]
    NotUnipotent(f64),
    #[error("degenerate lattice: {0}")]
    DegenerateLattice(String),
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),
    #[error("band overflow: tail norm {tail:e} exceeds tolerance for product norm {norm:e}")]
    BandOverflow { tail: f64, norm: f64 },
    #[error("incompatible forms: {0}")]
    Incompatible(String),
    #[error("harmonic obstruction of norm {norm:e}{}", level.map(|l| format!(" at level {l}")).unwrap_or_default())]
    HarmonicObstruction { norm: f64, level: Option<i32> },
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("connection is not flat (curvature norm {0:e})")]
    NonFlat(f64),
    #[error("twist mismatch: {0}")]
    TwistMismatch(String),
    #[error("invalid twist: {0}")]
    InvalidTwist(String),
    #[error("invalid gauge: {0}")]
    InvalidGauge(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("format error: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
