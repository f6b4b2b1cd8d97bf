use thiserror::Error;

/// Errors raised by the library.
///
/// Unsatisfied inequality preconditions (a Hardy or Rellich condition that fails)
/// are not errors; they are reported through validity flags on the result
/// types. Errors are reserved for malformed input and numerical failure.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid convex body: {0}")]
    InvalidBody(String),

    #[error("convex body is empty (infeasible constraints)")]
    EmptyBody,

    #[error("point lies in the convex body; {0} requires a point of the complement")]
    PointInBody(&'static str),

    #[error("finite-difference stencil of half-width {step} crosses the boundary (distance {distance})")]
    StencilCrossesBoundary { step: f64, distance: f64 },

    #[error("segment intersects the convex body")]
    SegmentIntersectsBody,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("delta out of [0,2): {0}")]
    ExponentDomain(String),

    #[error("integral diverges: {0}")]
    Divergent(String),

    #[error("trial function support violation: {0}")]
    SupportViolation(String),

    #[error("denominator underflow: trial function is numerically zero")]
    DenominatorUnderflow,

    #[error("quadrature did not converge: {0}")]
    QuadratureFailure(String),

    #[error("sample budget too small: {0}")]
    InsufficientSamples(String),

    #[error("not enough sweep points: need at least {needed}, got {got}")]
    TooFewPoints { needed: usize, got: usize },

    #[error("unsupported combination: {0}")]
    Unsupported(String),

    #[error("bracket inverted: lower {lower} exceeds upper {upper}")]
    InvertedBracket { lower: f64, upper: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
