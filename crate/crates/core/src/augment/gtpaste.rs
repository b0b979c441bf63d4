use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::detection::{ClassId, GroundTruthObject};
use crate::error::{Error, Result};
use crate::geom::{bev_iou, Box3D};
use crate::pointcloud::PointCloud;
use crate::rng;
use crate::scalar::Real;

/// A stored object: its box and the points that were inside it, in the
/// box frame (origin at the center, x along the length).
#[derive(Debug, Clone, PartialEq)]
pub struct ObjectDbEntry<T> {
    pub bbox: Box3D<T>,
    pub class_id: ClassId,
    pub points: PointCloud<T>,
}

/// Turns pasting off for the final `fade_last` epochs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FadingSchedule {
    total_epochs: usize,
    fade_last: usize,
}

impl FadingSchedule {
    pub const DEFAULT_FADE_LAST: usize = 5;

    pub fn new(total_epochs: usize, fade_last: usize) -> Result<Self> {
        if fade_last > total_epochs {
            return Err(Error::InvalidParameter(format!(
                "fade_last {fade_last} exceeds total_epochs {total_epochs}"
            )));
        }
        Ok(Self {
            total_epochs,
            fade_last,
        })
    }

    pub fn with_default_fade(total_epochs: usize) -> Result<Self> {
        Self::new(total_epochs, Self::DEFAULT_FADE_LAST)
    }

    pub fn total_epochs(&self) -> usize {
        self.total_epochs
    }

    pub fn fade_last(&self) -> usize {
        self.fade_last
    }

    /// Whether pasting runs in 0-indexed `epoch`.
    pub fn is_active(&self, epoch: usize) -> bool {
        epoch < self.total_epochs - self.fade_last
    }

    pub fn active_epochs(&self) -> usize {
        self.total_epochs - self.fade_last
    }
}

/// Where a pasted object is put.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Placement<T> {
    /// The pose the object had when it was stored.
    Original,
    /// A uniformly drawn ground position and yaw; height is kept.
    Resample { x_range: [T; 2], y_range: [T; 2] },
}

#[derive(Debug, Clone, PartialEq)]
pub struct PasteOptions<T> {
    /// Objects requested per class.
    pub per_class_counts: BTreeMap<ClassId, usize>,
    pub placement: Placement<T>,
}

/// Collects one database entry per ground-truth box with the frame points
/// strictly inside it, expressed in the box frame.
pub fn build_object_db<T: Real>(frames: &[(PointCloud<T>, Vec<GroundTruthObject<T>>)]) -> Vec<ObjectDbEntry<T>> {
    let mut db = Vec::new();
    for (cloud, gts) in frames {
        for gt in gts {
            let mut points = PointCloud::new(cloud.feature_dim());
            let mut row = Vec::with_capacity(cloud.stride());
            for p in cloud.points() {
                let xyz = [p[0], p[1], p[2]];
                if gt.bbox.contains_strict(xyz) {
                    row.clear();
                    row.extend_from_slice(&gt.bbox.to_local(xyz));
                    row.extend_from_slice(&p[3..]);
                    points.push(&row).expect("row matches cloud stride");
                }
            }
            db.push(ObjectDbEntry {
                bbox: gt.bbox,
                class_id: gt.class_id,
                points,
            });
        }
    }
    db
}

/// Pastes database objects into a scene unless `epoch` falls in the fade
/// window. Candidates overlapping (BEV IoU > 0) any existing or already
/// pasted box are skipped, so a request may be only partly filled.
/// Classes are processed in ascending id order; the draw is deterministic
/// in `seed`.
pub fn paste_objects<T: Real>(
    scene: (&PointCloud<T>, &[GroundTruthObject<T>]),
    db: &[ObjectDbEntry<T>],
    options: &PasteOptions<T>,
    epoch: usize,
    schedule: &FadingSchedule,
    seed: u64,
) -> Result<(PointCloud<T>, Vec<GroundTruthObject<T>>)> {
    let (cloud, gts) = scene;
    let mut out_cloud = cloud.clone();
    let mut out_gts = gts.to_vec();
    if !schedule.is_active(epoch) {
        return Ok((out_cloud, out_gts));
    }
    let mut rng = rng::stream(seed, epoch as u64);
    let mut row = Vec::with_capacity(cloud.stride());
    for (&class_id, &count) in &options.per_class_counts {
        let mut pool: Vec<&ObjectDbEntry<T>> = db.iter().filter(|e| e.class_id == class_id).collect();
        pool.shuffle(&mut rng);
        let mut pasted = 0;
        for entry in pool {
            if pasted == count {
                break;
            }
            if !entry.points.is_empty() && entry.points.feature_dim() != cloud.feature_dim() {
                return Err(Error::FeatureDimMismatch {
                    expected: cloud.feature_dim(),
                    found: entry.points.feature_dim(),
                });
            }
            let bbox = match options.placement {
                Placement::Original => entry.bbox,
                Placement::Resample { x_range, y_range } => {
                    let x = x_range[0] + (x_range[1] - x_range[0]) * T::lit(rng.gen::<f64>());
                    let y = y_range[0] + (y_range[1] - y_range[0]) * T::lit(rng.gen::<f64>());
                    let yaw = T::PI() * T::lit(2.0 * rng.gen::<f64>() - 1.0);
                    Box3D::new([x, y, entry.bbox.cz()], entry.bbox.dims(), yaw)?
                }
            };
            if out_gts.iter().any(|g| bev_iou(&g.bbox, &bbox) > T::zero()) {
                continue;
            }
            for p in entry.points.points() {
                row.clear();
                row.extend_from_slice(&bbox.to_world([p[0], p[1], p[2]]));
                row.extend_from_slice(&p[3..]);
                out_cloud.push(&row)?;
            }
            out_gts.push(GroundTruthObject::new(bbox, class_id));
            pasted += 1;
        }
    }
    Ok((out_cloud, out_gts))
}
