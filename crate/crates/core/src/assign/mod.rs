//! Target assignment between annotated objects and dense detection
//! candidates.
//!
//! The cost of giving ground truth `i` to candidate `j` is the binary
//! cross-entropy of the candidate's class probabilities against the one-hot
//! ground-truth class plus the L1 distance between the two boxes in the
//! 8-slot encoding `(cx, cy, cz, l, w, h, sin yaw, cos yaw)`. Every ground
//! truth gets a budget equal to the floor of its summed IoU with all
//! candidates (at least one), and candidates are then handed out greedily
//! by cost. A center-only assignment is kept as the baseline.

mod cost;
mod grid;
mod ota;

pub use cost::{bce, bce_classes, build_cost_matrix, encode_box, l1_reg, Candidate, CostMatrix, BCE_EPS, ENCODING_LEN};
pub use grid::{
    center_assign, decode, decode_candidates, score_rectify, CellPrediction, CellTarget, GridGeometry, HeatmapOptions,
    PredictionGrid, TargetGrid,
};
pub use ota::{assign_targets, dynamic_k, ota_assign, AssignOptions, Assignment, AssignmentResult};
