use crate::detection::GroundTruthObject;
use crate::error::{Error, Result};
use crate::geom::Box3D;
use crate::scalar::Real;

/// Probabilities are clamped to `[BCE_EPS, 1 - BCE_EPS]`.
pub const BCE_EPS: f64 = 1e-7;
pub const ENCODING_LEN: usize = 8;

/// Binary cross-entropy of one probability against a 0/1 label.
pub fn bce<T: Real>(prob: T, label: bool) -> T {
    let eps = T::lit(BCE_EPS);
    let p = prob.max(eps).min(T::one() - eps);
    let y = if label { T::one() } else { T::zero() };
    -(y * p.ln() + (T::one() - y) * (T::one() - p).ln())
}

/// BCE summed over all classes against a one-hot target at `class`.
pub fn bce_classes<T: Real>(probs: &[T], class: usize) -> T {
    probs.iter().enumerate().map(|(k, &p)| bce(p, k == class)).sum()
}

/// `(cx, cy, cz, l, w, h, sin yaw, cos yaw)` in metric units.
pub fn encode_box<T: Real>(b: &Box3D<T>) -> [T; ENCODING_LEN] {
    let [cx, cy, cz] = b.center();
    let [l, w, h] = b.dims();
    let (s, c) = b.yaw().sin_cos();
    [cx, cy, cz, l, w, h, s, c]
}

/// Sum of absolute differences between two 8-slot encodings.
pub fn l1_reg<T: Real>(pred: &[T], gt: &[T]) -> Result<T> {
    for v in [pred, gt] {
        if v.len() != ENCODING_LEN {
            return Err(Error::DimensionMismatch {
                expected: ENCODING_LEN,
                found: v.len(),
            });
        }
    }
    Ok(pred.iter().zip(gt).map(|(a, b)| (*a - *b).abs()).sum())
}

/// A decoded location considered for assignment.
#[derive(Debug, Clone, PartialEq)]
pub struct Candidate<T> {
    pub bbox: Box3D<T>,
    pub class_probs: Vec<T>,
    pub iou_pred: T,
}

/// Dense `N x M` matrix of non-negative assignment costs.
#[derive(Debug, Clone, PartialEq)]
pub struct CostMatrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Real> CostMatrix<T> {
    pub fn new(rows: usize, cols: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                found: data.len(),
            });
        }
        if data.iter().any(|v| !v.is_finite() || *v < T::zero()) {
            return Err(Error::InvalidParameter("costs must be finite and non-negative".into()));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().find(|r| r.len() != cols) {
            return Err(Error::DimensionMismatch {
                expected: cols,
                found: bad.len(),
            });
        }
        Self::new(rows.len(), cols, rows.concat())
    }

    /// Number of ground truths.
    pub fn rows(&self) -> usize {
        self.rows
    }

    /// Number of candidates.
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, gt: usize, candidate: usize) -> T {
        self.data[gt * self.cols + candidate]
    }

    pub fn row(&self, gt: usize) -> &[T] {
        &self.data[gt * self.cols..(gt + 1) * self.cols]
    }

    pub fn scaled(&self, factor: T) -> Result<Self> {
        Self::new(self.rows, self.cols, self.data.iter().map(|&v| v * factor).collect())
    }
}

/// `C[i][j] = BCE(candidate j's class probs, one-hot gt i class) + L1(encodings)`.
pub fn build_cost_matrix<T: Real>(gts: &[GroundTruthObject<T>], candidates: &[Candidate<T>]) -> Result<CostMatrix<T>> {
    if gts.is_empty() || candidates.is_empty() {
        return Err(Error::EmptyAssignment {
            gts: gts.len(),
            candidates: candidates.len(),
        });
    }
    let mut data = Vec::with_capacity(gts.len() * candidates.len());
    for gt in gts {
        let gt_enc = encode_box(&gt.bbox);
        for cand in candidates {
            let class = gt.class_id as usize;
            if class >= cand.class_probs.len() {
                return Err(Error::InvalidParameter(format!(
                    "ground-truth class {class} outside {} candidate classes",
                    cand.class_probs.len()
                )));
            }
            let cls = bce_classes(&cand.class_probs, class);
            let reg = l1_reg(&encode_box(&cand.bbox), &gt_enc)?;
            data.push(cls + reg);
        }
    }
    CostMatrix::new(gts.len(), candidates.len(), data)
}
