use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("image must be at least 1x1, got {width}x{height}")]
    EmptyImage { width: usize, height: usize },

    #[error("expected {expected} values for a {width}x{height} image, got {actual}")]
    SizeMismatch {
        width: usize,
        height: usize,
        expected: usize,
        actual: usize,
    },

    #[error("channel value {value} at pixel {index} is outside [0, 1]")]
    ChannelOutOfRange { index: usize, value: f64 },

    #[error("lambda must have {expected} entries, got {actual}")]
    LambdaLength { expected: usize, actual: usize },

    #[error("lambda entry {index} is {value}; entries must be finite and >= 0")]
    LambdaValue { index: usize, value: f64 },

    #[error("k must be at least 1")]
    ZeroK,

    #[error("k = {k} needs more than {k} nodes, only {nodes} available")]
    KTooLarge { k: usize, nodes: usize },

    #[error("point data has {len} values, not a multiple of dimension {dim}")]
    DimensionMismatch { len: usize, dim: usize },

    #[error("query has dimension {actual}, index has {expected}")]
    QueryDimension { expected: usize, actual: usize },

    #[error("class count must be at least 2, got {0}")]
    TooFewClasses(usize),

    #[error("class id {class} outside 1..={classes}")]
    ClassOutOfRange { class: usize, classes: usize },

    #[error("only {0} distinct class(es) seeded, at least 2 are needed")]
    TooFewSeededClasses(usize),

    #[error("invalid trimap value {value} at row {row}, column {col} (allowed: 0, 64, 128, 255)")]
    TrimapValue { value: u8, row: usize, col: usize },

    #[error("stroke point ({x}, {y}) is outside the {width}x{height} image")]
    StrokeOutOfBounds {
        x: i64,
        y: i64,
        width: usize,
        height: usize,
    },

    #[error("graph has {graph} nodes but the domination matrix has {matrix}")]
    NodeCountMismatch { graph: usize, matrix: usize },

    #[error("no unlabeled pixels outside the ground-truth uncertainty band")]
    EmptyEvaluation,

    #[error("invalid configuration: {0}")]
    Config(String),
}
