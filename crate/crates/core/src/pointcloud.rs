//! Point clouds, range cropping, mean-pooled voxelization and multi-frame
//! densification.
//!
//! A cloud stores its points row-major: `x, y, z` followed by
//! `feature_dim` extra channels (reflectance, elongation, time lag, ...).

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::geom::RigidTransform;
use crate::scalar::{CompensatedSum, Real};

#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud<T> {
    data: Vec<T>,
    feature_dim: usize,
    pub frame_id: String,
    pub pose: Option<RigidTransform<T>>,
}

impl<T: Real> PointCloud<T> {
    pub fn new(feature_dim: usize) -> Self {
        Self {
            data: Vec::new(),
            feature_dim,
            frame_id: String::new(),
            pose: None,
        }
    }

    pub fn with_frame_id(mut self, frame_id: impl Into<String>) -> Self {
        self.frame_id = frame_id.into();
        self
    }

    /// Builds a cloud from flat row-major data with `3 + feature_dim`
    /// values per point.
    pub fn from_flat(data: Vec<T>, feature_dim: usize) -> Result<Self> {
        let stride = 3 + feature_dim;
        if !data.len().is_multiple_of(stride) {
            return Err(Error::DimensionMismatch {
                expected: stride,
                found: data.len() % stride,
            });
        }
        if data.chunks_exact(stride).any(|p| p[..3].iter().any(|v| !v.is_finite())) {
            return Err(Error::NonFinite("point coordinate"));
        }
        Ok(Self {
            data,
            feature_dim,
            ..Self::new(feature_dim)
        })
    }

    /// Convenience constructor for clouds with no extra channels.
    pub fn from_xyz(points: &[[T; 3]]) -> Self {
        let mut cloud = Self::new(0);
        for p in points {
            cloud.data.extend_from_slice(p);
        }
        cloud
    }

    pub fn feature_dim(&self) -> usize {
        self.feature_dim
    }

    /// Values per point (`3 + feature_dim`).
    pub fn stride(&self) -> usize {
        3 + self.feature_dim
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.stride()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn as_flat(&self) -> &[T] {
        &self.data
    }

    pub fn point(&self, i: usize) -> &[T] {
        let s = self.stride();
        &self.data[i * s..(i + 1) * s]
    }

    pub fn points(&self) -> std::slice::ChunksExact<'_, T> {
        self.data.chunks_exact(self.stride())
    }

    pub fn points_mut(&mut self) -> std::slice::ChunksExactMut<'_, T> {
        let s = self.stride();
        self.data.chunks_exact_mut(s)
    }

    /// Appends one point given as `[x, y, z, extra...]`.
    pub fn push(&mut self, point: &[T]) -> Result<()> {
        if point.len() != self.stride() {
            return Err(Error::FeatureDimMismatch {
                expected: self.feature_dim,
                found: point.len().saturating_sub(3),
            });
        }
        if point[..3].iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("point coordinate"));
        }
        self.data.extend_from_slice(point);
        Ok(())
    }

    pub fn extend_from(&mut self, other: &PointCloud<T>) -> Result<()> {
        if other.feature_dim != self.feature_dim {
            return Err(Error::FeatureDimMismatch {
                expected: self.feature_dim,
                found: other.feature_dim,
            });
        }
        self.data.extend_from_slice(&other.data);
        Ok(())
    }

    /// Applies `f` to the xyz part of every point.
    pub fn map_xyz(&self, mut f: impl FnMut([T; 3]) -> [T; 3]) -> Self {
        let mut out = self.clone();
        for p in out.points_mut() {
            let q = f([p[0], p[1], p[2]]);
            p[..3].copy_from_slice(&q);
        }
        out
    }
}

/// Axis-aligned voxel lattice: half-open range `[min, max)` per axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VoxelGridSpec<T> {
    min: [T; 3],
    max: [T; 3],
    voxel_size: [T; 3],
    dims: [usize; 3],
    upper: [T; 3],
}

impl<T: Real> VoxelGridSpec<T> {
    pub fn new(min: [T; 3], max: [T; 3], voxel_size: [T; 3]) -> Result<Self> {
        let mut dims = [0usize; 3];
        let mut upper = max;
        for k in 0..3 {
            if !(min[k].is_finite() && max[k].is_finite() && voxel_size[k].is_finite()) {
                return Err(Error::InvalidVoxelSpec("non-finite bound".into()));
            }
            if max[k] <= min[k] {
                return Err(Error::InvalidVoxelSpec(format!("axis {k}: max must exceed min")));
            }
            if voxel_size[k] <= T::zero() {
                return Err(Error::InvalidVoxelSpec(format!(
                    "axis {k}: voxel size must be positive"
                )));
            }
            let q = (max[k] - min[k]) / voxel_size[k];
            // absorb representation error in extents that are exact multiples
            let rel = T::lit(1e-9).max(T::epsilon() * T::lit(64.0));
            let n = (q + q * rel).floor();
            if n < T::one() {
                return Err(Error::InvalidVoxelSpec(format!("axis {k}: voxel larger than range")));
            }
            dims[k] = n
                .to_usize()
                .ok_or_else(|| Error::InvalidVoxelSpec(format!("axis {k}: too many voxels")))?;
            // a trailing partial slab is not part of the lattice
            let covered = min[k] + n * voxel_size[k];
            let slack = (max[k] - min[k]).abs() * rel;
            if (covered - max[k]).abs() > slack {
                upper[k] = covered.min(max[k]);
            }
        }
        Ok(Self {
            min,
            max,
            voxel_size,
            dims,
            upper,
        })
    }

    /// The detection range used for Waymo-style LiDAR frames.
    pub fn waymo_default() -> Self {
        Self::new(
            [T::lit(-75.2), T::lit(-75.2), T::lit(-2.0)],
            [T::lit(75.2), T::lit(75.2), T::lit(4.0)],
            [T::lit(0.1), T::lit(0.1), T::lit(0.15)],
        )
        .expect("valid default spec")
    }

    pub fn min(&self) -> [T; 3] {
        self.min
    }

    pub fn max(&self) -> [T; 3] {
        self.max
    }

    pub fn voxel_size(&self) -> [T; 3] {
        self.voxel_size
    }

    /// Cells per axis.
    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn num_cells(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn contains(&self, p: &[T]) -> bool {
        (0..3).all(|k| p[k] >= self.min[k] && p[k] < self.max[k] && p[k] < self.upper[k])
    }

    /// Cell index of an in-range point.
    pub fn index_of(&self, p: &[T]) -> Option<[usize; 3]> {
        if !self.contains(p) {
            return None;
        }
        let mut idx = [0usize; 3];
        for k in 0..3 {
            let i = ((p[k] - self.min[k]) / self.voxel_size[k]).floor().to_usize()?;
            idx[k] = i.min(self.dims[k] - 1);
        }
        Some(idx)
    }

    /// Lower and upper corner of a cell.
    pub fn cell_bounds(&self, idx: [usize; 3]) -> ([T; 3], [T; 3]) {
        let mut lo = [T::zero(); 3];
        let mut hi = [T::zero(); 3];
        for k in 0..3 {
            let i = T::from_usize_lossy(idx[k]);
            lo[k] = self.min[k] + i * self.voxel_size[k];
            hi[k] = self.min[k] + (i + T::one()) * self.voxel_size[k];
        }
        (lo, hi)
    }
}

/// One occupied voxel.
#[derive(Debug, Clone, PartialEq)]
pub struct VoxelCell<T> {
    /// Mean over `[x, y, z, extra...]` of the member points.
    pub mean: Vec<T>,
    pub point_count: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VoxelGrid<T> {
    pub spec: VoxelGridSpec<T>,
    /// Occupied cells keyed by `(ix, iy, iz)`.
    pub cells: BTreeMap<[usize; 3], VoxelCell<T>>,
}

impl<T: Real> VoxelGrid<T> {
    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn total_points(&self) -> usize {
        self.cells.values().map(|c| c.point_count).sum()
    }

    /// Fraction of lattice cells that hold at least one point.
    pub fn occupancy(&self) -> f64 {
        self.cells.len() as f64 / self.spec.num_cells() as f64
    }
}

/// Keeps the points with `min <= coord < max` on every axis, in order.
pub fn crop_range<T: Real>(cloud: &PointCloud<T>, spec: &VoxelGridSpec<T>) -> PointCloud<T> {
    let mut data = Vec::with_capacity(cloud.data.len());
    for p in cloud.points().filter(|p| spec.contains(p)) {
        data.extend_from_slice(p);
    }
    PointCloud {
        data,
        feature_dim: cloud.feature_dim,
        frame_id: cloud.frame_id.clone(),
        pose: cloud.pose,
    }
}

/// Buckets points into voxels and averages every channel per voxel.
/// Out-of-range points are skipped.
pub fn voxelize<T: Real>(cloud: &PointCloud<T>, spec: &VoxelGridSpec<T>) -> VoxelGrid<T> {
    let stride = cloud.stride();
    let mut acc: BTreeMap<[usize; 3], (Vec<CompensatedSum<T>>, usize)> = BTreeMap::new();
    for p in cloud.points() {
        let Some(idx) = spec.index_of(p) else { continue };
        let entry = acc
            .entry(idx)
            .or_insert_with(|| (vec![CompensatedSum::new(); stride], 0));
        for (s, &v) in entry.0.iter_mut().zip(p) {
            s.add(v);
        }
        entry.1 += 1;
    }
    let cells = acc
        .into_iter()
        .map(|(idx, (sums, count))| {
            let n = T::from_usize_lossy(count);
            let mean = sums.iter().map(|s| s.value() / n).collect();
            (
                idx,
                VoxelCell {
                    mean,
                    point_count: count,
                },
            )
        })
        .collect();
    VoxelGrid { spec: *spec, cells }
}

/// Maps older frames into the current frame and appends them after the
/// current points. With `add_time_channel`, a trailing channel carries the
/// frame lag (0 for `current`, `k` for `previous[k - 1]`).
pub fn fuse_frames<T: Real>(
    current: &PointCloud<T>,
    previous: &[(PointCloud<T>, RigidTransform<T>)],
    add_time_channel: bool,
) -> Result<PointCloud<T>> {
    for (cloud, _) in previous {
        if cloud.feature_dim != current.feature_dim {
            return Err(Error::FeatureDimMismatch {
                expected: current.feature_dim,
                found: cloud.feature_dim,
            });
        }
    }
    if !add_time_channel {
        let mut out = current.clone();
        for (cloud, to_current) in previous {
            let moved = cloud.map_xyz(|p| to_current.apply_point(p));
            out.data.extend_from_slice(&moved.data);
        }
        return Ok(out);
    }

    let total: usize = current.len() + previous.iter().map(|(c, _)| c.len()).sum::<usize>();
    let mut out = PointCloud {
        data: Vec::with_capacity(total * (current.stride() + 1)),
        feature_dim: current.feature_dim + 1,
        frame_id: current.frame_id.clone(),
        pose: current.pose,
    };
    for p in current.points() {
        out.data.extend_from_slice(p);
        out.data.push(T::zero());
    }
    for (lag, (cloud, to_current)) in previous.iter().enumerate() {
        let lag = T::from_usize_lossy(lag + 1);
        for p in cloud.points() {
            let q = to_current.apply_point([p[0], p[1], p[2]]);
            out.data.extend_from_slice(&q);
            out.data.extend_from_slice(&p[3..]);
            out.data.push(lag);
        }
    }
    Ok(out)
}
