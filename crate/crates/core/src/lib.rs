//! Non-neural building blocks of a LiDAR 3D detection pipeline:
//! oriented-box geometry and IoU, point-cloud voxelization, dense target
//! assignment with dynamic budgets, test-time augmentation, weighted box
//! fusion and ensembling, ground-truth paste with fading, and AP/APH
//! evaluation.
//!
//! All numeric code is generic over [`Real`] (`f32` or `f64`). The aliases
//! below fix the scalar for callers that do not care.

pub mod assign;
pub mod augment;
pub mod detection;
pub mod error;
pub mod eval;
pub mod fusion;
pub mod geom;
pub mod io;
pub mod pcf;
pub mod pointcloud;
pub mod rng;
pub mod scalar;

pub use detection::{ClassId, Detection, GroundTruthObject};
pub use error::{Error, Result};
pub use scalar::Real;

pub type Box3D64 = geom::Box3D<f64>;
pub type Box3D32 = geom::Box3D<f32>;
pub type RigidTransform64 = geom::RigidTransform<f64>;
pub type ConvexPolygon64 = geom::ConvexPolygon2D<f64>;
pub type PointCloud64 = pointcloud::PointCloud<f64>;
pub type PointCloud32 = pointcloud::PointCloud<f32>;
pub type VoxelGridSpec64 = pointcloud::VoxelGridSpec<f64>;
pub type VoxelGrid64 = pointcloud::VoxelGrid<f64>;
pub type Detection64 = Detection<f64>;
pub type Detection32 = Detection<f32>;
pub type GroundTruth64 = GroundTruthObject<f64>;
pub type TtaTransform64 = augment::TtaTransform<f64>;
pub type ObjectDbEntry64 = augment::ObjectDbEntry<f64>;
pub type PredictionGrid64 = assign::PredictionGrid<f64>;
pub type CostMatrix64 = assign::CostMatrix<f64>;
