use thiserror::Error;

/// Errors raised by the numerical routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("field length {got} does not match grid size {expected}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("every grid point is masked")]
    FullyMasked,

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("{what} is singular at the requested point")]
    Singular { what: &'static str },

    #[error("principal direction {direction} focalizes at layer offset n = {n}")]
    FocalCrossing { direction: usize, n: i64 },

    #[error("unsupported geometry: {0}")]
    UnsupportedGeometry(String),

    #[error("defect density is not divergence free (|q·m| = {residual:e} at q = {q:?})")]
    NotDivergenceFree { residual: f64, q: [f64; 3] },

    #[error("circuit is invalid: {0}")]
    InvalidCircuit(String),

    #[error("circuit passes within two grid spacings of a masked or out-of-domain point at {point:?}")]
    CircuitIntersectsMask { point: [f64; 3] },

    #[error("degenerate curve: {0}")]
    DegenerateCurve(String),

    #[error("flow speed singular (|1 - 2 lambda H| = {margin:.3e}) at arclength {arclength:.6} on layer {layer}")]
    FlowSingularity {
        arclength: f64,
        margin: f64,
        layer: f64,
    },

    #[error("curve self-intersects near arclength {arclength:.6}")]
    SelfIntersection { arclength: f64 },

    #[error("no contour at level {level} inside the sampled domain")]
    ContourAbsent { level: f64 },

    #[error("root finding failed: {0}")]
    NoConvergence(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
