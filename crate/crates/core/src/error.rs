use thiserror::Error;

/// Errors surfaced by the library operations.
#[derive(Debug, Error)]
pub enum Error {
    #[error("no such point: {0}")]
    NoSuchPoint(usize),
    #[error("insufficient geometry: {0}")]
    InsufficientGeometry(String),
    #[error("empty boundary")]
    EmptyBoundary,
    #[error("empty interior")]
    EmptyInterior,
    #[error("unresolvable scale: delta {delta} below minimal spacing {spacing}")]
    UnresolvableScale { delta: f64, spacing: f64 },
    #[error("degenerate metric: points {0} and {1} coincide")]
    DegenerateMetric(usize, usize),
    #[error("not connected at this resolution")]
    NotConnected,
    #[error("resolution too low: {0}")]
    ResolutionTooLow(String),
    #[error("zero distance to boundary at point {0}")]
    ZeroDistanceToBoundary(usize),
    #[error("boundary resolution too coarse for this ball")]
    EmptyBoundaryPatch,
    #[error("radius below resolution: ball at {0} has empty interior intersection")]
    RadiusBelowResolution(usize),
    #[error("supercritical trace only: p = {p} <= theta = {theta}, use the weighted trace")]
    SupercriticalTraceOnly { p: f64, theta: f64 },
    #[error("hypothesis failed: column {col} sums to {sum}, exceeding the bound {bound}")]
    HypothesisFailed { col: usize, sum: f64, bound: f64 },
    #[error("selection infeasible: best row has {best} small entries, {requested} required")]
    SelectionInfeasible { best: usize, requested: usize },
    #[error("non-monotone weight spec")]
    NonMonotoneWeight,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("format error: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
