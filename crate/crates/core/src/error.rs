use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid box: {0}")]
    InvalidBox(String),

    #[error("location ({x}, {y}, {z}) lies outside the box")]
    LocationOutsideBox { x: f64, y: f64, z: f64 },

    #[error("negative face distance {0}: location is outside the box")]
    NegativeDelta(f64),

    #[error("degenerate extent: {0}")]
    DegenerateExtent(String),

    #[error("aspect ratio must be positive, got {0}")]
    NonPositiveRatio(f64),

    #[error("mode {0} is not valid here")]
    UnsupportedMode(&'static str),

    #[error("point cloud is empty")]
    EmptyCloud,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("voxel {0:?} has no score")]
    MissingScore([i64; 3]),

    #[error("misaligned inputs: {0}")]
    Misaligned(String),

    #[error("unknown class label {label} (class count {num_classes})")]
    UnknownClass { label: usize, num_classes: usize },

    #[error("infeasible scene spec: {0}")]
    InfeasibleScene(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}
