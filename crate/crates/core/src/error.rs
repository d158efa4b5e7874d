use alloc::string::String;

/// Errors produced by the modeling, dataset and training layers.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Error {
    /// Geometry violates a physical constraint (non-positive dimension or a
    /// neck at least as wide as its cavity).
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),

    /// The neck-radius quadratic has no real root for this order: the
    /// requested resistance/inertance pair corresponds to no physical neck.
    #[error("no physical neck radius for order {order}: discriminant {discriminant:.6e} < 0")]
    NoPhysicalNeckRadius { order: usize, discriminant: f64 },

    /// Both quadratic roots lead to geometry outside the configured ranges.
    #[error("recovered geometry lies outside the configured ranges")]
    GeometryOutOfRange,

    /// Fewer than two branch-reactance zeros classified as resonances inside
    /// the analysis band.
    #[error("fewer than two resonances in the analysis band [{lo:.1}, {hi:.1}] Hz")]
    ResonancesOutOfBand { lo: f64, hi: f64 },

    #[error("tensor shape mismatch: expected {expected_rows}x{expected_cols}, got {rows}x{cols}")]
    ShapeMismatch {
        expected_rows: usize,
        expected_cols: usize,
        rows: usize,
        cols: usize,
    },

    /// A spectrum was sampled on a different grid than the model expects.
    #[error("frequency grid mismatch: {0}")]
    GridMismatch(String),

    #[error("non-finite gradient at optimizer step {step}")]
    NonFiniteGradient { step: u64 },

    #[error("non-finite loss at epoch {epoch}")]
    NonFiniteLoss { epoch: usize },

    #[error("empty dataset partition: {0}")]
    EmptyDataset(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// Every synthesized candidate failed inversion or forward evaluation.
    #[error("no realizable design among {candidates} candidates")]
    NoRealizableDesign { candidates: usize },
}

pub type Result<T> = core::result::Result<T, Error>;
