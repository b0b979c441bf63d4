use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid box: {0}")]
    InvalidBox(String),
    #[error("invalid transform: {0}")]
    InvalidTransform(String),
    #[error("rotation tilts the z axis by {angle:e} rad (limit {limit:e})")]
    TiltedRotation { angle: f64, limit: f64 },
    #[error("invalid polygon: {0}")]
    InvalidPolygon(String),
    #[error("non-finite value: {0}")]
    NonFinite(&'static str),
    #[error("invalid voxel grid spec: {0}")]
    InvalidVoxelSpec(String),
    #[error("feature dimension mismatch: expected {expected}, found {found}")]
    FeatureDimMismatch { expected: usize, found: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("assignment needs at least one ground truth and one candidate (got {gts} and {candidates})")]
    EmptyAssignment { gts: usize, candidates: usize },
    #[error("no ensemble weight for model `{model_id}` on class {class_id}")]
    UnknownModel { model_id: String, class_id: u32 },
    #[error("malformed point cloud at byte offset {offset}: {reason}")]
    MalformedPointCloud { offset: usize, reason: String },
    #[error("line {line}: {reason}")]
    Schema { line: usize, reason: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
