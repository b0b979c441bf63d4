use crate::error::{Error, Result};
use crate::geom::{wrap_finite, Box3D};
use crate::pointcloud::PointCloud;
use crate::scalar::Real;

/// Global transform applied as yaw rotation, then uniform scaling, then a
/// z shift.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TtaTransform<T> {
    yaw: T,
    scale: T,
    z_offset: T,
}

impl<T: Real> TtaTransform<T> {
    pub fn new(yaw: T, scale: T, z_offset: T) -> Result<Self> {
        if !yaw.is_finite() || !z_offset.is_finite() || !scale.is_finite() {
            return Err(Error::NonFinite("tta parameter"));
        }
        if scale <= T::zero() {
            return Err(Error::InvalidParameter(format!(
                "tta scale must be positive, got {scale}"
            )));
        }
        Ok(Self { yaw, scale, z_offset })
    }

    pub fn identity() -> Self {
        Self {
            yaw: T::zero(),
            scale: T::one(),
            z_offset: T::zero(),
        }
    }

    pub fn yaw(&self) -> T {
        self.yaw
    }

    pub fn scale(&self) -> T {
        self.scale
    }

    pub fn z_offset(&self) -> T {
        self.z_offset
    }

    /// The transform undoing `self`, in the same yaw/scale/shift form.
    pub fn inverse(&self) -> Self {
        Self {
            yaw: -self.yaw,
            scale: T::one() / self.scale,
            z_offset: -self.z_offset / self.scale,
        }
    }

    pub fn apply_point(&self, p: [T; 3]) -> [T; 3] {
        let (s, c) = self.yaw.sin_cos();
        let x = c * p[0] - s * p[1];
        let y = s * p[0] + c * p[1];
        [x * self.scale, y * self.scale, p[2] * self.scale + self.z_offset]
    }

    /// Undoes [`TtaTransform::apply_point`] step by step: shift, scale, yaw.
    pub fn invert_point(&self, p: [T; 3]) -> [T; 3] {
        let z = (p[2] - self.z_offset) / self.scale;
        let x = p[0] / self.scale;
        let y = p[1] / self.scale;
        let (s, c) = self.yaw.sin_cos();
        [c * x + s * y, -s * x + c * y, z]
    }
}

/// Cross product of the parameter lists, ordered by yaw, then scale, then
/// z offset.
pub fn tta_set<T: Real>(yaws: &[T], scales: &[T], z_offsets: &[T]) -> Result<Vec<TtaTransform<T>>> {
    if yaws.is_empty() || scales.is_empty() || z_offsets.is_empty() {
        return Err(Error::InvalidParameter("tta parameter lists must be non-empty".into()));
    }
    let mut out = Vec::with_capacity(yaws.len() * scales.len() * z_offsets.len());
    for &yaw in yaws {
        for &scale in scales {
            for &z in z_offsets {
                out.push(TtaTransform::new(yaw, scale, z)?);
            }
        }
    }
    Ok(out)
}

/// Sixteen variants: yaw in {0, -0.13pi, -0.07pi, 0.07pi}, scale in
/// {0.95, 1.05}, z shift in {-0.2, 0.2} m. The identity scale and shift are
/// deliberately absent.
pub fn waymo_tta_set<T: Real>() -> Vec<TtaTransform<T>> {
    let pi = T::PI();
    let yaws = [T::zero(), T::lit(-0.13) * pi, T::lit(-0.07) * pi, T::lit(0.07) * pi];
    tta_set(&yaws, &[T::lit(0.95), T::lit(1.05)], &[T::lit(-0.2), T::lit(0.2)]).expect("non-empty defaults")
}

/// Transforms every point's xyz; extra channels pass through.
pub fn apply_to_cloud<T: Real>(t: &TtaTransform<T>, cloud: &PointCloud<T>) -> PointCloud<T> {
    cloud.map_xyz(|p| t.apply_point(p))
}

pub fn apply_to_box<T: Real>(t: &TtaTransform<T>, b: &Box3D<T>) -> Box3D<T> {
    let [l, w, h] = b.dims();
    Box3D::new(
        t.apply_point(b.center()),
        [l * t.scale, w * t.scale, h * t.scale],
        wrap_finite(b.yaw() + t.yaw),
    )
    .expect("valid transform keeps the box valid")
}

/// Maps a box predicted on the transformed input back to the original frame.
pub fn inverse_to_box<T: Real>(t: &TtaTransform<T>, b: &Box3D<T>) -> Box3D<T> {
    let [l, w, h] = b.dims();
    Box3D::new(
        t.invert_point(b.center()),
        [l / t.scale, w / t.scale, h / t.scale],
        wrap_finite(b.yaw() - t.yaw),
    )
    .expect("valid transform keeps the box valid")
}
