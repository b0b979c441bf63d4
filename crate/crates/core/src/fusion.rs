//! Combining overlapping predictions: greedy NMS, weighted box fusion and
//! per-class multi-model ensembling.
//!
//! All routines expect detections of a single class except
//! [`ensemble_fuse`], which partitions by class itself.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::detection::{order_by_score_desc, ClassId, Detection};
use crate::error::{Error, Result};
use crate::geom::{iou, Box3D, IouKind};
use crate::scalar::Real;

pub const DEFAULT_MAX_BOXES: usize = 500;

/// Greedy NMS on BEV IoU.
pub fn nms<T: Real>(dets: &[Detection<T>], iou_threshold: T) -> Vec<Detection<T>> {
    nms_with(dets, iou_threshold, IouKind::Bev)
}

/// Keeps the best remaining box and drops every box overlapping it by more
/// than `iou_threshold`; repeats. Output is sorted by descending score.
pub fn nms_with<T: Real>(dets: &[Detection<T>], iou_threshold: T, kind: IouKind) -> Vec<Detection<T>> {
    let order = order_by_score_desc(dets.iter().map(Detection::score));
    let mut suppressed = vec![false; dets.len()];
    let mut keep = Vec::new();
    for (pos, &i) in order.iter().enumerate() {
        if suppressed[i] {
            continue;
        }
        keep.push(dets[i].clone());
        for &j in &order[pos + 1..] {
            if !suppressed[j] && iou(kind, &dets[i].bbox, &dets[j].bbox) > iou_threshold {
                suppressed[j] = true;
            }
        }
    }
    keep
}

/// How member yaws are averaged.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum YawFusion {
    /// Score-weighted circular mean of `(sin, cos)`.
    #[default]
    Full,
    /// Circular mean of doubled angles, for heads that cannot tell front
    /// from back.
    HalfTurn,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct WbfOptions {
    pub iou_kind: IouKind,
    pub yaw: YawFusion,
}

/// Weighted box fusion with BEV matching and full-angle yaw averaging.
pub fn wbf<T: Real>(dets: &[Detection<T>], iou_match_threshold: T, max_boxes: usize) -> Vec<Detection<T>> {
    wbf_with(dets, iou_match_threshold, max_boxes, &WbfOptions::default())
}

struct Cluster<T> {
    members: Vec<usize>,
    fused: Box3D<T>,
}

/// Visits detections by descending score. Each joins the first cluster
/// (in creation order) whose current fused box overlaps it by more than
/// the threshold, otherwise it opens a new cluster. Fused geometry is the
/// score-weighted mean of the members, the fused score is the plain mean
/// of member scores, and the best `max_boxes` clusters are returned.
pub fn wbf_with<T: Real>(
    dets: &[Detection<T>],
    iou_match_threshold: T,
    max_boxes: usize,
    options: &WbfOptions,
) -> Vec<Detection<T>> {
    let order = order_by_score_desc(dets.iter().map(Detection::score));
    let mut clusters: Vec<Cluster<T>> = Vec::new();
    for i in order {
        let candidate = &dets[i].bbox;
        match clusters
            .iter_mut()
            .find(|c| iou(options.iou_kind, &c.fused, candidate) > iou_match_threshold)
        {
            Some(cluster) => {
                cluster.members.push(i);
                cluster.fused = fuse_boxes(dets, &cluster.members, options.yaw);
            }
            None => clusters.push(Cluster {
                members: vec![i],
                fused: *candidate,
            }),
        }
    }

    let mut fused: Vec<Detection<T>> = clusters
        .iter()
        .map(|c| {
            let n = T::from_usize_lossy(c.members.len());
            let score = c.members.iter().map(|&i| dets[i].score()).sum::<T>() / n;
            let first = &dets[c.members[0]];
            let mut det = Detection::new(c.fused, first.class_id, T::zero()).expect("zero score");
            det.set_score_clamped(score);
            if c.members.iter().all(|&i| dets[i].model_id == first.model_id) {
                det.model_id = first.model_id.clone();
            }
            det
        })
        .collect();
    let order = order_by_score_desc(fused.iter().map(Detection::score));
    let mut slots: Vec<Option<Detection<T>>> = fused.drain(..).map(Some).collect();
    order
        .into_iter()
        .take(max_boxes)
        .map(|i| slots[i].take().expect("each cluster emitted once"))
        .collect()
}

fn fuse_boxes<T: Real>(dets: &[Detection<T>], members: &[usize], yaw_mode: YawFusion) -> Box3D<T> {
    let total: T = members.iter().map(|&i| dets[i].score()).sum();
    let uniform = total <= T::zero();
    let weight = |i: usize| if uniform { T::one() } else { dets[i].score() };
    let norm = if uniform {
        T::from_usize_lossy(members.len())
    } else {
        total
    };

    let mut fields = [T::zero(); 6];
    let (mut s, mut c) = (T::zero(), T::zero());
    let factor = match yaw_mode {
        YawFusion::Full => T::one(),
        YawFusion::HalfTurn => T::lit(2.0),
    };
    for &i in members {
        let w = weight(i);
        let b = &dets[i].bbox;
        let v = b.to_array();
        for k in 0..6 {
            fields[k] += w * v[k];
        }
        let (si, ci) = (b.yaw() * factor).sin_cos();
        s += w * si;
        c += w * ci;
    }
    for f in &mut fields {
        *f /= norm;
    }
    let yaw = if s.hypot(c) <= T::lit(1e-12) * norm {
        // opposing headings cancel; fall back to the strongest member
        dets[members[0]].bbox.yaw()
    } else {
        s.atan2(c) / factor
    };
    Box3D::new(
        [fields[0], fields[1], fields[2]],
        [fields[3], fields[4], fields[5]],
        yaw,
    )
    .expect("mean of valid boxes is valid")
}

/// Per-class model weights and the WBF settings applied after pooling.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleConfig {
    /// `class_id -> (model_id -> weight)`.
    pub classes: BTreeMap<ClassId, BTreeMap<String, f64>>,
    pub iou_match_threshold: f64,
    #[serde(default = "default_max_boxes")]
    pub max_boxes: usize,
}

fn default_max_boxes() -> usize {
    DEFAULT_MAX_BOXES
}

impl EnsembleConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.iou_match_threshold) {
            return Err(Error::InvalidParameter(format!(
                "iou_match_threshold {} outside [0, 1]",
                self.iou_match_threshold
            )));
        }
        for (class, weights) in &self.classes {
            if weights.values().any(|w| !w.is_finite() || *w < 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "class {class}: weights must be finite and non-negative"
                )));
            }
            if !weights.values().any(|w| *w > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "class {class}: at least one model needs a positive weight"
                )));
            }
        }
        Ok(())
    }

    /// Weight 1 for every listed model on every listed class.
    pub fn uniform(classes: &[ClassId], models: &[&str], iou_match_threshold: f64) -> Self {
        let weights: BTreeMap<String, f64> = models.iter().map(|m| (m.to_string(), 1.0)).collect();
        Self {
            classes: classes.iter().map(|&c| (c, weights.clone())).collect(),
            iou_match_threshold,
            max_boxes: DEFAULT_MAX_BOXES,
        }
    }

    pub fn weight(&self, class_id: ClassId, model_id: &str) -> Option<f64> {
        self.classes.get(&class_id)?.get(model_id).copied()
    }
}

/// Scales every detection's score by its model's weight for its class,
/// pools all models, and runs WBF per class. A zero weight removes that
/// model's detections of the class. Output is grouped by ascending class.
pub fn ensemble_fuse<T: Real>(
    per_model: &BTreeMap<String, Vec<Detection<T>>>,
    config: &EnsembleConfig,
) -> Result<Vec<Detection<T>>> {
    ensemble_fuse_with(per_model, config, &WbfOptions::default())
}

pub fn ensemble_fuse_with<T: Real>(
    per_model: &BTreeMap<String, Vec<Detection<T>>>,
    config: &EnsembleConfig,
    options: &WbfOptions,
) -> Result<Vec<Detection<T>>> {
    config.validate()?;
    let mut pooled: BTreeMap<ClassId, Vec<Detection<T>>> = BTreeMap::new();
    for (model_id, dets) in per_model {
        for det in dets {
            let weight = config
                .weight(det.class_id, model_id)
                .ok_or_else(|| Error::UnknownModel {
                    model_id: model_id.clone(),
                    class_id: det.class_id,
                })?;
            if weight == 0.0 {
                continue;
            }
            let mut scaled = det.clone();
            scaled.set_score_clamped(det.score() * T::lit(weight));
            scaled.model_id = Some(model_id.clone());
            pooled.entry(det.class_id).or_default().push(scaled);
        }
    }
    let threshold = T::lit(config.iou_match_threshold);
    let mut out = Vec::new();
    for dets in pooled.values() {
        out.extend(wbf_with(dets, threshold, config.max_boxes, options));
    }
    Ok(out)
}
