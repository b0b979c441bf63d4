//! Oriented-box geometry.
//!
//! Conventions: yaw is counterclockwise about +z and the box length runs
//! along its local x axis. Angles are kept in `(-pi, pi]`.

mod iou;
mod polygon;

pub use iou::{bev_iou, iou, iou_3d, IouKind};
pub use polygon::{polygon_intersection_area, ConvexPolygon2D};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Maps `theta` into `(-pi, pi]`. Angles already in range are returned
/// bit-for-bit unchanged; `-pi` maps to `+pi`.
pub fn wrap_angle<T: Real>(theta: T) -> Result<T> {
    if !theta.is_finite() {
        return Err(Error::NonFinite("angle"));
    }
    Ok(wrap_finite(theta))
}

pub(crate) fn wrap_finite<T: Real>(theta: T) -> T {
    let pi = T::PI();
    if theta > -pi && theta <= pi {
        return theta;
    }
    let two_pi = pi + pi;
    let mut r = theta - two_pi * (theta / two_pi).floor();
    if r >= two_pi {
        r -= two_pi;
    }
    if r < T::zero() {
        r += two_pi;
    }
    if r > pi {
        r -= two_pi;
    }
    if r <= -pi {
        r = pi;
    }
    r
}

/// Oriented 3D box: center, extents along the local axes and yaw.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Box3D<T> {
    center: [T; 3],
    dims: [T; 3],
    yaw: T,
}

impl<T: Real> Box3D<T> {
    /// Validates the extents and wraps `yaw` into `(-pi, pi]`.
    pub fn new(center: [T; 3], dims: [T; 3], yaw: T) -> Result<Self> {
        if center.iter().chain(dims.iter()).any(|v| !v.is_finite()) || !yaw.is_finite() {
            return Err(Error::InvalidBox("fields must be finite".into()));
        }
        if dims.iter().any(|&d| d <= T::zero()) {
            return Err(Error::InvalidBox(format!("extents must be positive, got {:?}", dims)));
        }
        Ok(Self {
            center,
            dims,
            yaw: wrap_finite(yaw),
        })
    }

    /// Builds a box from `[cx, cy, cz, length, width, height, yaw]`.
    pub fn from_array(v: [T; 7]) -> Result<Self> {
        Self::new([v[0], v[1], v[2]], [v[3], v[4], v[5]], v[6])
    }

    pub fn to_array(&self) -> [T; 7] {
        let [cx, cy, cz] = self.center;
        let [l, w, h] = self.dims;
        [cx, cy, cz, l, w, h, self.yaw]
    }

    pub fn center(&self) -> [T; 3] {
        self.center
    }

    pub fn dims(&self) -> [T; 3] {
        self.dims
    }

    pub fn yaw(&self) -> T {
        self.yaw
    }

    pub fn cx(&self) -> T {
        self.center[0]
    }

    pub fn cy(&self) -> T {
        self.center[1]
    }

    pub fn cz(&self) -> T {
        self.center[2]
    }

    pub fn length(&self) -> T {
        self.dims[0]
    }

    pub fn width(&self) -> T {
        self.dims[1]
    }

    pub fn height(&self) -> T {
        self.dims[2]
    }

    pub fn volume(&self) -> T {
        self.dims[0] * self.dims[1] * self.dims[2]
    }

    pub fn bottom(&self) -> T {
        self.center[2] - self.dims[2] / T::lit(2.0)
    }

    pub fn top(&self) -> T {
        self.center[2] + self.dims[2] / T::lit(2.0)
    }

    /// Same box with a different center.
    pub fn with_center(&self, center: [T; 3]) -> Result<Self> {
        Self::new(center, self.dims, self.yaw)
    }

    /// Same box with a different yaw (wrapped).
    pub fn with_yaw(&self, yaw: T) -> Result<Self> {
        Self::new(self.center, self.dims, yaw)
    }

    /// Footprint in the ground plane, counterclockwise starting at the
    /// local (+l/2, -w/2) corner.
    pub fn corners_bev(&self) -> ConvexPolygon2D<T> {
        let half = T::lit(0.5);
        let (hl, hw) = (self.dims[0] * half, self.dims[1] * half);
        let (s, c) = self.yaw.sin_cos();
        let local = [(hl, -hw), (hl, hw), (-hl, hw), (-hl, -hw)];
        let vertices = local
            .iter()
            .map(|&(x, y)| [self.center[0] + c * x - s * y, self.center[1] + s * x + c * y])
            .collect();
        ConvexPolygon2D::from_vertices_unchecked(vertices)
    }

    /// Expresses a world point in the box frame (origin at the center, x
    /// along the length).
    pub fn to_local(&self, p: [T; 3]) -> [T; 3] {
        let (s, c) = self.yaw.sin_cos();
        let dx = p[0] - self.center[0];
        let dy = p[1] - self.center[1];
        [c * dx + s * dy, -s * dx + c * dy, p[2] - self.center[2]]
    }

    /// Inverse of [`Box3D::to_local`].
    pub fn to_world(&self, p: [T; 3]) -> [T; 3] {
        let (s, c) = self.yaw.sin_cos();
        [
            self.center[0] + c * p[0] - s * p[1],
            self.center[1] + s * p[0] + c * p[1],
            self.center[2] + p[2],
        ]
    }

    /// Strict interior test.
    pub fn contains_strict(&self, p: [T; 3]) -> bool {
        let l = self.to_local(p);
        let half = T::lit(0.5);
        l[0].abs() < self.dims[0] * half && l[1].abs() < self.dims[1] * half && l[2].abs() < self.dims[2] * half
    }
}

/// `box_corners_bev` as a free function.
pub fn box_corners_bev<T: Real>(b: &Box3D<T>) -> ConvexPolygon2D<T> {
    b.corners_bev()
}

/// Proper rigid motion: `p -> rotation * p + translation`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RigidTransform<T> {
    rotation: [[T; 3]; 3],
    translation: [T; 3],
}

const ORTHONORMAL_TOL: f64 = 1e-9;
const MAX_TILT: f64 = 1e-6;

impl<T: Real> RigidTransform<T> {
    /// Validates that `rotation` is orthonormal with determinant +1.
    pub fn new(rotation: [[T; 3]; 3], translation: [T; 3]) -> Result<Self> {
        if rotation
            .iter()
            .flatten()
            .chain(translation.iter())
            .any(|v| !v.is_finite())
        {
            return Err(Error::InvalidTransform("entries must be finite".into()));
        }
        let tol = T::lit(ORTHONORMAL_TOL).max(T::epsilon() * T::lit(16.0));
        for i in 0..3 {
            for j in 0..3 {
                let dot: T = (0..3).map(|k| rotation[k][i] * rotation[k][j]).sum();
                let expected = if i == j { T::one() } else { T::zero() };
                if (dot - expected).abs() > tol {
                    return Err(Error::InvalidTransform("rotation is not orthonormal".into()));
                }
            }
        }
        if (det3(&rotation) - T::one()).abs() > tol {
            return Err(Error::InvalidTransform("rotation determinant is not +1".into()));
        }
        Ok(Self { rotation, translation })
    }

    pub fn identity() -> Self {
        Self::from_yaw_translation(T::zero(), [T::zero(); 3])
    }

    /// Rotation by `yaw` about +z followed by `translation`.
    pub fn from_yaw_translation(yaw: T, translation: [T; 3]) -> Self {
        let (s, c) = yaw.sin_cos();
        let (o, z) = (T::one(), T::zero());
        Self {
            rotation: [[c, -s, z], [s, c, z], [z, z, o]],
            translation,
        }
    }

    pub fn translation_only(translation: [T; 3]) -> Self {
        Self::from_yaw_translation(T::zero(), translation)
    }

    pub fn rotation(&self) -> [[T; 3]; 3] {
        self.rotation
    }

    pub fn translation(&self) -> [T; 3] {
        self.translation
    }

    pub fn apply_point(&self, p: [T; 3]) -> [T; 3] {
        let r = &self.rotation;
        let t = &self.translation;
        [
            r[0][0] * p[0] + r[0][1] * p[1] + r[0][2] * p[2] + t[0],
            r[1][0] * p[0] + r[1][1] * p[1] + r[1][2] * p[2] + t[1],
            r[2][0] * p[0] + r[2][1] * p[1] + r[2][2] * p[2] + t[2],
        ]
    }

    /// `self` after `first`: `p -> self(first(p))`.
    pub fn compose(&self, first: &Self) -> Self {
        let a = &self.rotation;
        let b = &first.rotation;
        let mut rotation = [[T::zero(); 3]; 3];
        for (i, row) in rotation.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = (0..3).map(|k| a[i][k] * b[k][j]).sum();
            }
        }
        let t = self.apply_point(first.translation);
        Self {
            rotation,
            translation: t,
        }
    }

    pub fn inverse(&self) -> Self {
        let r = &self.rotation;
        let mut rotation = [[T::zero(); 3]; 3];
        for (i, row) in rotation.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = r[j][i];
            }
        }
        let t = &self.translation;
        let translation = [
            -(rotation[0][0] * t[0] + rotation[0][1] * t[1] + rotation[0][2] * t[2]),
            -(rotation[1][0] * t[0] + rotation[1][1] * t[1] + rotation[1][2] * t[2]),
            -(rotation[2][0] * t[0] + rotation[2][1] * t[1] + rotation[2][2] * t[2]),
        ];
        Self { rotation, translation }
    }

    /// Angle between the rotated z axis and +z.
    pub fn tilt(&self) -> T {
        self.rotation[2][2].min(T::one()).max(-T::one()).acos()
    }

    /// Rotation angle about z of the planar part.
    pub fn yaw(&self) -> T {
        self.rotation[1][0].atan2(self.rotation[0][0])
    }
}

fn det3<T: Real>(m: &[[T; 3]; 3]) -> T {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

/// Moves a box by a rigid transform. Rotations that tilt the z axis by
/// more than 1e-6 rad are rejected rather than projected.
pub fn transform_box<T: Real>(b: &Box3D<T>, t: &RigidTransform<T>) -> Result<Box3D<T>> {
    let tilt = t.tilt();
    if tilt > T::lit(MAX_TILT) {
        return Err(Error::TiltedRotation {
            angle: tilt.to_f64_lossy(),
            limit: MAX_TILT,
        });
    }
    Box3D::new(t.apply_point(b.center), b.dims, b.yaw + t.yaw())
}
