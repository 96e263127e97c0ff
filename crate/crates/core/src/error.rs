//! Error type shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A test or generator needs at least one point in each class.
    #[error("class {0} is empty; both classes need at least one point")]
    EmptyClass(u8),

    #[error("parameter {name} = {value} must lie in {range}")]
    ParamRange {
        name: &'static str,
        value: f64,
        range: &'static str,
    },

    #[error("need at least {need} points, got {got}")]
    TooFewPoints { need: usize, got: usize },

    #[error("point ({x}, {y}) lies outside the region")]
    PointOutsideRegion { x: f64, y: f64 },

    #[error("invalid region: require x_min < x_max and y_min < y_max")]
    BadRegion,

    #[error("points and labels have different lengths ({points} vs {labels})")]
    LengthMismatch { points: usize, labels: usize },

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("input contains no points")]
    EmptyInput,

    /// The conditional variance of a statistic came out non-positive, so the
    /// standardized statistic is undefined for this input.
    #[error("variance of {0} is not positive; statistic undefined")]
    DegenerateVariance(&'static str),

    /// A variance formula produced a value below the rounding guard, which
    /// signals inconsistent (n1, n2, Q, R) rather than floating-point noise.
    #[error("computed variance {0} is negative; check Q and R against the class sizes")]
    NegativeVariance(f64),

    #[error("column {0} of the NNCT is empty")]
    EmptyColumn(u8),

    #[error("one-sided alternative is undefined for {0}")]
    OneSidedUndefined(&'static str),

    /// Planar Euclidean NN in-degrees cannot exceed 6 except for coincident
    /// points; larger values make the Q_k decomposition meaningless.
    #[error("NN in-degree {0} exceeds 6; degenerate geometry (coincident points?)")]
    InDegreeOverflow(usize),

    #[error("t grid exceeds a quarter of the shorter region side ({limit})")]
    GridBound { limit: f64 },

    #[error("t grid must be non-empty, non-negative, and ascending")]
    BadGrid,

    #[error("need at least {need} simulations for 2.5/97.5 percentile bounds, got {got}")]
    TooFewSims { need: usize, got: usize },

    #[error("{0} must not be empty")]
    EmptyConfig(&'static str),

    #[error("too few usable replicates: {0}")]
    InsufficientReplicates(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
