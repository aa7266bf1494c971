//! Error types shared across the crate.

use thiserror::Error;

#[derive(Debug, Clone, Error)]
pub enum MphiError {
    #[error("invalid algebra signature: {0}")]
    InvalidSignature(String),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("element not invertible: smallest block singular value {smallest:.3e} <= {threshold:.3e}")]
    Singular { smallest: f64, threshold: f64 },

    #[error(
        "rank decision ambiguous: singular value {value:.3e} inside band [{lo:.3e}, {hi:.3e}] (scale {scale:.3e})"
    )]
    RankAmbiguous { value: f64, lo: f64, hi: f64, scale: f64 },

    #[error("per-block complex dimension {dim} of block {block} not divisible by {unit}")]
    NonIntegralBlock { block: usize, dim: usize, unit: usize },

    #[error("subspace is not invariant under the right algebra action: residual {residual:.3e} > {tol:.3e}")]
    NotInvariant { residual: f64, tol: f64 },

    #[error("operator is zero")]
    ZeroOperator,

    #[error("decomposition is not direct: {0}")]
    NotDirect(String),

    #[error("head entry of the generating vector is not invertible")]
    HeadNotInvertible,

    #[error("kernel nesting violated: ker of entry 0 is not contained in ker of entry {entry}")]
    KernelNotNested { entry: usize },

    #[error("generalized inverse unavailable: {0}")]
    NotRegular(String),

    #[error("unknown catalog name: {0}")]
    UnknownName(String),

    #[error("operator leaves the representable shift-term family: {0}")]
    NotRepresentable(String),

    #[error("truncation window {window} too small, need at least {needed}")]
    WindowTooSmall { window: u64, needed: u64 },

    #[error("classification undecided: {0}")]
    Undecided(String),

    #[error("symbol polynomial vanishes identically on block {0}")]
    DegenerateSymbol(usize),

    #[error("radii undecidable: operator outside the classifiable families")]
    Undecidable,

    #[error("path leaves the semi-Fredholm region at step {step} of {steps}")]
    PathHitsBoundary { step: usize, steps: usize },

    #[error("spectral point not isolated: {0}")]
    NotIsolated(String),

    #[error("hypothesis undecided: {0}")]
    HypothesisUndecided(String),

    #[error("input classification undecided: {0}")]
    UndecidedInput(String),

    #[error("unknown suite: {0}")]
    UnknownSuite(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, MphiError>;
