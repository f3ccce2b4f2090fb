use thiserror::Error;

/// Failure modes shared by every numerical routine in the crate.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum TauError {
    #[error("point {point} lies outside the validity annulus [{r_in}, {r_out}] of the loop")]
    Domain { point: String, r_in: f64, r_out: f64 },

    #[error("insufficient resolution: relative tail {tail:.3e} exceeds tolerance {tol:.3e}")]
    InsufficientResolution { tail: f64, tol: f64 },

    #[error("jump degenerate on contour: singular sample at angle index {index}")]
    DegenerateJump { index: usize },

    #[error("resolution error: {0}")]
    Resolution(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("geometry error: {0}")]
    Geometry(String),

    #[error("incompatible operands: {0}")]
    Incompatible(String),

    #[error("resonant exponent at p = {p}, q = {q}, colors ({alpha}, {beta})")]
    ResonantExponent { p: f64, q: f64, alpha: usize, beta: usize },

    #[error("dual RHP numerically unsolvable (residual {residual:.3e})")]
    DualUnsolvable { residual: f64 },

    #[error("exceptional hypergeometric parameters: {0}")]
    ExceptionalParameters(String),

    #[error("index {index} beyond cutoff {cutoff}")]
    Truncation { index: f64, cutoff: f64 },

    #[error("tau vanishes at this truncation")]
    TauVanishes,

    #[error("non-resonance violated: {0}")]
    Resonance(String),
}

pub type Result<T> = std::result::Result<T, TauError>;
