//! Non-neural core of an anchor-free, fully sparse 3D object detector.
//!
//! The crate covers everything around the network: box types and rotated
//! IoU, the AABB / naive / sin-cos / Mobius regression parametrizations,
//! sparse voxel levels, multi-level target assignment with center sampling,
//! the training loss terms, centerness-weighted rotated NMS and the
//! mAP@0.25/0.5 evaluation protocol.

// `!(x > 0.0)` is used on purpose so NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod assign;
pub mod eval;
pub mod geometry;
pub mod grid;
pub mod io;
pub mod loss;
pub mod param;
pub mod postprocess;

mod error;

pub use assign::{assign, covered_locations, select_level, AssignmentConfig, AssignmentTarget, Foreground, GroundTruth};
pub use error::{Error, Result};
pub use eval::{average_precision, evaluate, match_detections, EvalReport};
pub use geometry::{centerness3d, iou_aabb, iou_obb, volume, AxisAlignedBox3, Location3, OrientedBox3};
pub use grid::{level_locations, prune_topk, voxelize, LevelSpec, Point, PointCloud, SparseVoxelSet, Voxel};
pub use loss::{centerness_loss, fd_gradient, focal_loss, iou_loss, total_loss, LocationPrediction, LossBreakdown};
pub use param::{
    canonicalize_obb, decode_aabb, decode_obb, encode_aabb, encode_obb, mobius_embed, BoxDeltas, MobiusPoint, Mode,
};
pub use postprocess::{apply_centerness, nms_rotated, Detection};
