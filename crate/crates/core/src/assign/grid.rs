use super::cost::{encode_box, Candidate, ENCODING_LEN};
use crate::detection::{order_by_score_desc, ClassId, Detection, GroundTruthObject};
use crate::error::{Error, Result};
use crate::geom::Box3D;
use crate::scalar::Real;

/// Placement of a bird's-eye-view output grid. Column index runs along x,
/// row index along y; cell `(row, col)` covers
/// `[origin + col * stride_x, origin + (col + 1) * stride_x)` in x.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridGeometry<T> {
    pub height: usize,
    pub width: usize,
    pub stride: [T; 2],
    pub origin: [T; 2],
}

impl<T: Real> GridGeometry<T> {
    pub fn new(height: usize, width: usize, stride: [T; 2], origin: [T; 2]) -> Result<Self> {
        if height == 0 || width == 0 {
            return Err(Error::InvalidParameter("grid must have at least one cell".into()));
        }
        if stride.iter().any(|s| *s <= T::zero() || !s.is_finite()) || origin.iter().any(|o| !o.is_finite()) {
            return Err(Error::InvalidParameter(
                "grid stride must be positive and finite".into(),
            ));
        }
        Ok(Self {
            height,
            width,
            stride,
            origin,
        })
    }

    pub fn num_cells(&self) -> usize {
        self.height * self.width
    }

    /// Fractional cell coordinates `(col, row)` of a ground position.
    pub fn to_cell_coords(&self, x: T, y: T) -> (T, T) {
        (
            (x - self.origin[0]) / self.stride[0],
            (y - self.origin[1]) / self.stride[1],
        )
    }

    /// Cell `(row, col)` containing a ground position.
    pub fn cell_of(&self, x: T, y: T) -> Option<(usize, usize)> {
        let (u, v) = self.to_cell_coords(x, y);
        if u < T::zero() || v < T::zero() {
            return None;
        }
        let col = u.floor().to_usize()?;
        let row = v.floor().to_usize()?;
        (row < self.height && col < self.width).then_some((row, col))
    }
}

/// All head outputs at one location.
#[derive(Debug, Clone, PartialEq)]
pub struct CellPrediction<T> {
    pub class_probs: Vec<T>,
    /// Sub-cell center offset in cell units.
    pub offset: [T; 2],
    pub z: T,
    pub size: [T; 3],
    /// `(sin yaw, cos yaw)`, not necessarily unit length.
    pub orientation: [T; 2],
    pub iou: T,
}

impl<T: Real> CellPrediction<T> {
    pub fn background(num_classes: usize) -> Self {
        Self {
            class_probs: vec![T::zero(); num_classes],
            offset: [T::zero(); 2],
            z: T::zero(),
            size: [T::one(); 3],
            orientation: [T::zero(), T::one()],
            iou: T::zero(),
        }
    }

    /// Highest class probability and its class (lowest index on ties).
    pub fn best_class(&self) -> Option<(usize, T)> {
        let mut best: Option<(usize, T)> = None;
        for (k, &p) in self.class_probs.iter().enumerate() {
            if best.is_none_or(|(_, b)| p > b) {
                best = Some((k, p));
            }
        }
        best
    }
}

/// Dense per-location outputs of the six prediction heads: class heatmap,
/// xy offset, z, size, orientation and IoU.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictionGrid<T> {
    pub geometry: GridGeometry<T>,
    num_classes: usize,
    cells: Vec<CellPrediction<T>>,
}

impl<T: Real> PredictionGrid<T> {
    pub fn new(geometry: GridGeometry<T>, num_classes: usize) -> Self {
        Self {
            geometry,
            num_classes,
            cells: vec![CellPrediction::background(num_classes); geometry.num_cells()],
        }
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn cell(&self, row: usize, col: usize) -> &CellPrediction<T> {
        &self.cells[row * self.geometry.width + col]
    }

    pub fn set_cell(&mut self, row: usize, col: usize, cell: CellPrediction<T>) -> Result<()> {
        if row >= self.geometry.height || col >= self.geometry.width {
            return Err(Error::InvalidParameter(format!("cell ({row}, {col}) outside grid")));
        }
        if cell.class_probs.len() != self.num_classes {
            return Err(Error::DimensionMismatch {
                expected: self.num_classes,
                found: cell.class_probs.len(),
            });
        }
        if cell.class_probs.iter().any(|p| !(*p >= T::zero() && *p <= T::one())) {
            return Err(Error::InvalidParameter("class probabilities must lie in [0, 1]".into()));
        }
        self.cells[row * self.geometry.width + col] = cell;
        Ok(())
    }

    /// Grid whose heads reproduce a target grid exactly: heatmap as class
    /// probabilities and regression targets at positive cells.
    pub fn from_targets(targets: &TargetGrid<T>) -> Self {
        let mut grid = Self::new(targets.geometry, targets.num_classes);
        let k = targets.num_classes;
        for (idx, cell) in grid.cells.iter_mut().enumerate() {
            cell.class_probs
                .copy_from_slice(&targets.heatmap[idx * k..(idx + 1) * k]);
            if let Some(t) = &targets.targets[idx] {
                let r = &t.regression;
                cell.offset = t.offset;
                cell.z = r[2];
                cell.size = [r[3], r[4], r[5]];
                cell.orientation = [r[6], r[7]];
                cell.iou = T::one();
            }
        }
        grid
    }

    fn decode_cell(&self, idx: usize) -> Option<(Box3D<T>, usize, T)> {
        let cell = &self.cells[idx];
        let (class, score) = cell.best_class()?;
        let g = &self.geometry;
        let row = T::from_usize_lossy(idx / g.width);
        let col = T::from_usize_lossy(idx % g.width);
        let cx = g.origin[0] + (col + cell.offset[0]) * g.stride[0];
        let cy = g.origin[1] + (row + cell.offset[1]) * g.stride[1];
        let yaw = cell.orientation[0].atan2(cell.orientation[1]);
        let bbox = Box3D::new([cx, cy, cell.z], cell.size, yaw).ok()?;
        Some((bbox, class, score))
    }
}

/// Detections at locations whose best class probability exceeds
/// `score_threshold`, best `max_outputs` first. Locations with
/// non-positive sizes are skipped.
pub fn decode<T: Real>(grid: &PredictionGrid<T>, score_threshold: T, max_outputs: usize) -> Vec<Detection<T>> {
    let mut found = Vec::new();
    for idx in 0..grid.cells.len() {
        if let Some((bbox, class, score)) = grid.decode_cell(idx) {
            if score > score_threshold {
                found.push(Detection::new(bbox, class as ClassId, score).expect("probability score"));
            }
        }
    }
    let order = order_by_score_desc(found.iter().map(Detection::score));
    order.into_iter().take(max_outputs).map(|i| found[i].clone()).collect()
}

/// The `top_m` locations by best class probability, unthresholded.
pub fn decode_candidates<T: Real>(grid: &PredictionGrid<T>, top_m: usize) -> Vec<Candidate<T>> {
    let mut found = Vec::new();
    for idx in 0..grid.cells.len() {
        if let Some((bbox, _, score)) = grid.decode_cell(idx) {
            let cell = &grid.cells[idx];
            found.push((
                score,
                Candidate {
                    bbox,
                    class_probs: cell.class_probs.clone(),
                    iou_pred: cell.iou,
                },
            ));
        }
    }
    let order = order_by_score_desc(found.iter().map(|(s, _)| *s));
    order.into_iter().take(top_m).map(|i| found[i].1.clone()).collect()
}

/// `score^(1 - alpha) * iou_pred^alpha`.
pub fn score_rectify<T: Real>(score: T, iou_pred: T, alpha: T) -> T {
    if alpha == T::zero() {
        return score;
    }
    if alpha == T::one() {
        return iou_pred;
    }
    score.powf(T::one() - alpha) * iou_pred.powf(alpha)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeatmapOptions<T> {
    /// Lower bound on the Gaussian radius, in cells.
    pub min_radius: T,
}

impl<T: Real> Default for HeatmapOptions<T> {
    fn default() -> Self {
        Self {
            min_radius: T::lit(2.0),
        }
    }
}

/// Supervision at one positive location.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellTarget<T> {
    pub gt_index: usize,
    pub class_id: ClassId,
    /// Center position inside the cell, in cell units from its lower corner.
    pub offset: [T; 2],
    pub regression: [T; ENCODING_LEN],
}

/// Center-only training targets.
#[derive(Debug, Clone, PartialEq)]
pub struct TargetGrid<T> {
    pub geometry: GridGeometry<T>,
    pub num_classes: usize,
    /// `height * width * num_classes`, class fastest.
    pub heatmap: Vec<T>,
    pub targets: Vec<Option<CellTarget<T>>>,
    /// Ground truths whose center fell outside the grid.
    pub skipped: usize,
    /// Ground truths whose center cell was already taken by an earlier one.
    pub collisions: usize,
}

impl<T: Real> TargetGrid<T> {
    pub fn heat(&self, row: usize, col: usize, class: usize) -> T {
        self.heatmap[(row * self.geometry.width + col) * self.num_classes + class]
    }

    pub fn target(&self, row: usize, col: usize) -> Option<&CellTarget<T>> {
        self.targets[row * self.geometry.width + col].as_ref()
    }

    pub fn num_positive(&self) -> usize {
        self.targets.iter().filter(|t| t.is_some()).count()
    }
}

/// Baseline assignment: each ground truth supervises only the cell holding
/// its center, and a Gaussian is splatted into its class heatmap with
/// radius `max(min_radius, half the footprint diagonal in cells)` and
/// sigma `radius / 3`.
pub fn center_assign<T: Real>(
    gts: &[GroundTruthObject<T>],
    geometry: &GridGeometry<T>,
    num_classes: usize,
    options: &HeatmapOptions<T>,
) -> Result<TargetGrid<T>> {
    let mut out = TargetGrid {
        geometry: *geometry,
        num_classes,
        heatmap: vec![T::zero(); geometry.num_cells() * num_classes],
        targets: vec![None; geometry.num_cells()],
        skipped: 0,
        collisions: 0,
    };
    for (gi, gt) in gts.iter().enumerate() {
        let class = gt.class_id as usize;
        if class >= num_classes {
            return Err(Error::InvalidParameter(format!(
                "class {class} outside {num_classes} heatmap classes"
            )));
        }
        let Some((row, col)) = geometry.cell_of(gt.bbox.cx(), gt.bbox.cy()) else {
            out.skipped += 1;
            continue;
        };
        let (u, v) = geometry.to_cell_coords(gt.bbox.cx(), gt.bbox.cy());
        let slot = &mut out.targets[row * geometry.width + col];
        if slot.is_some() {
            out.collisions += 1;
        } else {
            *slot = Some(CellTarget {
                gt_index: gi,
                class_id: gt.class_id,
                offset: [u - T::from_usize_lossy(col), v - T::from_usize_lossy(row)],
                regression: encode_box(&gt.bbox),
            });
        }

        let half = T::lit(0.5);
        let diag = (gt.bbox.length() / geometry.stride[0]).hypot(gt.bbox.width() / geometry.stride[1]);
        let radius = options.min_radius.max(diag * half);
        let sigma = radius / T::lit(3.0);
        let reach = radius.floor().to_usize().unwrap_or(0);
        let two_sigma_sq = T::lit(2.0) * sigma * sigma;
        let r0 = row.saturating_sub(reach);
        let r1 = (row + reach).min(geometry.height - 1);
        let c0 = col.saturating_sub(reach);
        let c1 = (col + reach).min(geometry.width - 1);
        for r in r0..=r1 {
            for c in c0..=c1 {
                let dr = T::from_usize_lossy(r.abs_diff(row));
                let dc = T::from_usize_lossy(c.abs_diff(col));
                let value = (-(dr * dr + dc * dc) / two_sigma_sq).exp();
                let h = &mut out.heatmap[(r * geometry.width + c) * num_classes + class];
                *h = h.max(value);
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn geometry() -> GridGeometry<f64> {
        GridGeometry::new(188, 188, [0.8, 0.8], [-75.2, -75.2]).unwrap()
    }

    fn gt_at(x: f64, y: f64, class: ClassId) -> GroundTruthObject<f64> {
        GroundTruthObject::new(Box3D::new([x, y, 1.0], [4.0, 2.0, 1.5], 0.3).unwrap(), class)
    }

    #[test]
    fn decode_below_threshold_is_empty() {
        let mut grid = PredictionGrid::new(geometry(), 2);
        let mut cell = CellPrediction::background(2);
        cell.class_probs = vec![0.2, 0.3];
        grid.set_cell(3, 4, cell).unwrap();
        assert!(decode(&grid, 0.3, 10).is_empty());
    }

    #[test]
    fn decode_formula() {
        let mut grid = PredictionGrid::new(geometry(), 3);
        grid.set_cell(
            0,
            0,
            CellPrediction {
                class_probs: vec![0.1, 0.9, 0.2],
                offset: [0.5, 0.5],
                z: 1.25,
                size: [4.0, 2.0, 1.5],
                orientation: [0.0, 1.0],
                iou: 0.7,
            },
        )
        .unwrap();
        let dets = decode(&grid, 0.5, 10);
        assert_eq!(dets.len(), 1);
        let d = &dets[0];
        assert!((d.bbox.cx() + 74.8).abs() < 1e-12 && (d.bbox.cy() + 74.8).abs() < 1e-12);
        assert_eq!(d.bbox.cz(), 1.25);
        assert_eq!(d.bbox.yaw(), 0.0);
        assert_eq!(d.class_id, 1);
        assert_eq!(d.score(), 0.9);
    }

    #[test]
    fn decode_orders_and_truncates() {
        let mut grid = PredictionGrid::new(geometry(), 1);
        for (k, p) in [0.6, 0.9, 0.7, 0.9].iter().enumerate() {
            let mut cell = CellPrediction::background(1);
            cell.class_probs = vec![*p];
            grid.set_cell(10, 10 + k, cell).unwrap();
        }
        let dets = decode(&grid, 0.5, 3);
        let scores: Vec<f64> = dets.iter().map(|d| d.score()).collect();
        assert_eq!(scores, vec![0.9, 0.9, 0.7]);
        assert!(dets[0].bbox.cx() < dets[1].bbox.cx());
        assert_eq!(decode_candidates(&grid, 2).len(), 2);
    }

    #[test]
    fn set_cell_validation() {
        let mut grid = PredictionGrid::new(geometry(), 2);
        assert!(grid.set_cell(500, 0, CellPrediction::background(2)).is_err());
        assert!(grid.set_cell(0, 0, CellPrediction::background(3)).is_err());
        let mut bad = CellPrediction::background(2);
        bad.class_probs[0] = 1.5;
        assert!(grid.set_cell(0, 0, bad).is_err());
    }

    #[test]
    fn rectify_examples() {
        assert_eq!(score_rectify(0.3, 0.9, 0.0), 0.3);
        assert_eq!(score_rectify(0.3, 0.9, 1.0), 0.9);
        assert!((score_rectify(0.81f64, 0.64, 0.5) - 0.72).abs() < 1e-12);
    }

    #[test]
    fn center_assign_offsets() {
        let g = geometry();
        // center of cell (row 2, col 3)
        let x = -75.2 + 3.5 * 0.8;
        let y = -75.2 + 2.5 * 0.8;
        let t = center_assign(&[gt_at(x, y, 0)], &g, 2, &HeatmapOptions::default()).unwrap();
        let target = t.target(2, 3).unwrap();
        assert!((target.offset[0] - 0.5).abs() < 1e-9 && (target.offset[1] - 0.5).abs() < 1e-9);
        assert_eq!(t.num_positive(), 1);
        assert_eq!(t.heat(2, 3, 0), 1.0);
        assert_eq!(t.heat(2, 3, 1), 0.0);
        assert!(t.heat(2, 4, 0) > 0.0 && t.heat(2, 4, 0) < 1.0);
    }

    #[test]
    fn center_assign_counts() {
        let g = geometry();
        let t = center_assign(
            &[gt_at(0.1, 0.1, 0), gt_at(10.0, 5.0, 1)],
            &g,
            2,
            &HeatmapOptions::default(),
        )
        .unwrap();
        assert_eq!(t.num_positive(), 2);
        let empty = center_assign::<f64>(&[], &g, 2, &HeatmapOptions::default()).unwrap();
        assert_eq!(empty.num_positive(), 0);
        assert!(empty.heatmap.iter().all(|&h| h == 0.0));
        let outside = center_assign(&[gt_at(100.0, 0.0, 0)], &g, 2, &HeatmapOptions::default()).unwrap();
        assert_eq!(outside.skipped, 1);
    }

    #[test]
    fn decode_inverts_encode() {
        let g = geometry();
        let gt = gt_at(12.34, -5.67, 1);
        let targets = center_assign(&[gt], &g, 2, &HeatmapOptions::default()).unwrap();
        let grid = PredictionGrid::from_targets(&targets);
        let dets = decode(&grid, 0.99, 1);
        assert_eq!(dets.len(), 1);
        for (a, b) in dets[0].bbox.to_array().iter().zip(gt.bbox.to_array()) {
            assert!((a - b).abs() < 1e-6);
        }
        assert_eq!(dets[0].class_id, 1);
    }
}
