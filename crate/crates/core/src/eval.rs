//! Detection evaluation: IoU matching, AP and heading-weighted APH.
//!
//! Heading accuracy of a match is `1 - |wrap(yaw_pred - yaw_gt)| / pi`, so a
//! box facing exactly backwards earns nothing. APH replaces the unit
//! true-positive credit in the precision numerator with that accuracy;
//! recall still counts matches. Predictions with equal scores enter the
//! precision-recall curve together as one operating point, and AP is the
//! exact area under the max-interpolated curve.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::detection::{order_by_score_desc, ClassId, Detection, GroundTruthObject};
use crate::geom::{iou, wrap_finite, IouKind};
use crate::scalar::Real;

/// Per-class IoU needed for a true positive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IouThresholds {
    pub default: f64,
    #[serde(default)]
    pub per_class: BTreeMap<ClassId, f64>,
}

impl IouThresholds {
    pub fn uniform(threshold: f64) -> Self {
        Self {
            default: threshold,
            per_class: BTreeMap::new(),
        }
    }

    pub fn get(&self, class_id: ClassId) -> f64 {
        self.per_class.get(&class_id).copied().unwrap_or(self.default)
    }
}

impl Default for IouThresholds {
    /// 0.7 for class 0 (vehicles), 0.5 for everything else.
    fn default() -> Self {
        Self {
            default: 0.5,
            per_class: BTreeMap::from([(0, 0.7)]),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvalConfig {
    #[serde(default)]
    pub thresholds: IouThresholds,
    #[serde(default = "default_eval_iou")]
    pub iou_kind: IouKind,
}

fn default_eval_iou() -> IouKind {
    IouKind::ThreeD
}

impl EvalConfig {
    pub fn new(thresholds: IouThresholds) -> Self {
        Self {
            thresholds,
            iou_kind: IouKind::ThreeD,
        }
    }
}

pub fn heading_accuracy<T: Real>(pred_yaw: T, gt_yaw: T) -> T {
    let d = wrap_finite(pred_yaw - gt_yaw).abs();
    (T::one() - d / T::PI()).max(T::zero())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PredictionMatch<T> {
    pub gt: Option<usize>,
    pub iou: T,
    /// Heading accuracy, zero when unmatched.
    pub heading: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatchResult<T> {
    /// Indexed like the input detections.
    pub predictions: Vec<PredictionMatch<T>>,
}

/// Per class, predictions in descending score order take the unmatched
/// same-class ground truth with the highest IoU at or above the class
/// threshold (lowest index on ties).
pub fn match_detections<T: Real>(
    dets: &[Detection<T>],
    gts: &[GroundTruthObject<T>],
    config: &EvalConfig,
) -> MatchResult<T> {
    let mut predictions = vec![
        PredictionMatch {
            gt: None,
            iou: T::zero(),
            heading: T::zero(),
        };
        dets.len()
    ];
    let mut taken = vec![false; gts.len()];
    for i in order_by_score_desc(dets.iter().map(Detection::score)) {
        let det = &dets[i];
        let threshold = T::lit(config.thresholds.get(det.class_id));
        let mut best: Option<(usize, T)> = None;
        for (g, gt) in gts.iter().enumerate() {
            if taken[g] || gt.class_id != det.class_id {
                continue;
            }
            let overlap = iou(config.iou_kind, &det.bbox, &gt.bbox);
            if overlap >= threshold && best.is_none_or(|(_, b)| overlap > b) {
                best = Some((g, overlap));
            }
        }
        if let Some((g, overlap)) = best {
            taken[g] = true;
            predictions[i] = PredictionMatch {
                gt: Some(g),
                iou: overlap,
                heading: heading_accuracy(det.bbox.yaw(), gts[g].bbox.yaw()),
            };
        }
    }
    MatchResult { predictions }
}

/// One prediction's contribution to a precision-recall curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoredMatch<T> {
    pub score: T,
    pub matched: bool,
    pub heading: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PrPoint<T> {
    /// Lowest score admitted at this operating point.
    pub score: T,
    pub recall: T,
    pub precision: T,
}

/// Precision-recall operating points, one per distinct score.
pub fn pr_curve<T: Real>(records: &[ScoredMatch<T>], num_gt: usize, heading_weighted: bool) -> Vec<PrPoint<T>> {
    let order = order_by_score_desc(records.iter().map(|r| r.score));
    let num_gt = T::from_usize_lossy(num_gt);
    let mut points = Vec::new();
    let (mut matched, mut credit) = (T::zero(), T::zero());
    for (pos, &i) in order.iter().enumerate() {
        let r = &records[i];
        if r.matched {
            matched += T::one();
            credit += if heading_weighted { r.heading } else { T::one() };
        }
        let last_of_group = order.get(pos + 1).is_none_or(|&n| records[n].score != r.score);
        if last_of_group {
            points.push(PrPoint {
                score: r.score,
                recall: matched / num_gt,
                precision: credit / T::from_usize_lossy(pos + 1),
            });
        }
    }
    points
}

/// Area under the max-interpolated precision-recall curve. `None` when
/// there are no ground truths.
pub fn average_precision<T: Real>(records: &[ScoredMatch<T>], num_gt: usize, heading_weighted: bool) -> Option<T> {
    if num_gt == 0 {
        return None;
    }
    let points = pr_curve(records, num_gt, heading_weighted);
    let mut envelope = vec![T::zero(); points.len()];
    let mut running = T::zero();
    for (k, p) in points.iter().enumerate().rev() {
        running = running.max(p.precision);
        envelope[k] = running;
    }
    let mut area = T::zero();
    let mut prev_recall = T::zero();
    for (p, &env) in points.iter().zip(&envelope) {
        area += (p.recall - prev_recall) * env;
        prev_recall = p.recall;
    }
    Some(area)
}

/// Detections and annotations of one frame.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame<T> {
    pub detections: Vec<Detection<T>>,
    pub ground_truths: Vec<GroundTruthObject<T>>,
}

impl<T> Default for Frame<T> {
    fn default() -> Self {
        Self {
            detections: Vec::new(),
            ground_truths: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassMetrics<T> {
    pub num_gt: usize,
    pub num_detections: usize,
    pub ap: Option<T>,
    pub aph: Option<T>,
    #[serde(skip)]
    pub pr: Vec<PrPoint<T>>,
    #[serde(skip)]
    pub pr_heading: Vec<PrPoint<T>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalResult<T> {
    pub per_class: BTreeMap<ClassId, ClassMetrics<T>>,
    /// Unweighted mean of AP over classes with at least one ground truth.
    pub map: Option<T>,
    pub maph: Option<T>,
}

/// Pools matches over all frames and reports AP/APH per class.
pub fn evaluate<T: Real>(frames: &BTreeMap<String, Frame<T>>, config: &EvalConfig) -> EvalResult<T> {
    let mut records: BTreeMap<ClassId, Vec<ScoredMatch<T>>> = BTreeMap::new();
    let mut num_gt: BTreeMap<ClassId, usize> = BTreeMap::new();
    let mut classes = BTreeSet::new();
    for frame in frames.values() {
        for gt in &frame.ground_truths {
            *num_gt.entry(gt.class_id).or_default() += 1;
            classes.insert(gt.class_id);
        }
        let matches = match_detections(&frame.detections, &frame.ground_truths, config);
        for (det, m) in frame.detections.iter().zip(&matches.predictions) {
            classes.insert(det.class_id);
            records.entry(det.class_id).or_default().push(ScoredMatch {
                score: det.score(),
                matched: m.gt.is_some(),
                heading: m.heading,
            });
        }
    }

    let mut per_class = BTreeMap::new();
    for class in classes {
        let recs = records.remove(&class).unwrap_or_default();
        let n = num_gt.get(&class).copied().unwrap_or(0);
        per_class.insert(
            class,
            ClassMetrics {
                num_gt: n,
                num_detections: recs.len(),
                ap: average_precision(&recs, n, false),
                aph: average_precision(&recs, n, true),
                pr: if n > 0 { pr_curve(&recs, n, false) } else { Vec::new() },
                pr_heading: if n > 0 { pr_curve(&recs, n, true) } else { Vec::new() },
            },
        );
    }
    let mean = |pick: fn(&ClassMetrics<T>) -> Option<T>| {
        let vals: Vec<T> = per_class.values().filter_map(pick).collect();
        (!vals.is_empty()).then(|| vals.iter().copied().sum::<T>() / T::from_usize_lossy(vals.len()))
    };
    let map = mean(|m| m.ap);
    let maph = mean(|m| m.aph);
    EvalResult { per_class, map, maph }
}
