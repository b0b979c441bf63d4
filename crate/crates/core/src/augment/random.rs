use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::detection::GroundTruthObject;
use crate::error::{Error, Result};
use crate::geom::{wrap_finite, Box3D};
use crate::pointcloud::PointCloud;
use crate::rng;
use crate::scalar::Real;

/// Mirror axis of a random flip.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FlipAxis {
    /// Mirror across the x axis: `y -> -y`, `yaw -> -yaw`.
    X,
    /// Mirror across the y axis: `x -> -x`, `yaw -> pi - yaw`.
    Y,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AugmentParams<T> {
    /// Each listed axis is flipped independently with probability 1/2.
    pub flip_axes: Vec<FlipAxis>,
    pub scale_range: [T; 2],
    pub rotation_range: [T; 2],
    /// Per-axis `[lo, hi]` in meters.
    pub translation_range: [[T; 2]; 3],
    pub seed: u64,
}

impl<T: Real> AugmentParams<T> {
    /// Flip along x or y, scale in [0.95, 1.05], rotation in
    /// [-pi/4, pi/4], translation in [-0.5, 0.5] m per axis.
    pub fn waymo_default(seed: u64) -> Self {
        let quarter = T::FRAC_PI_4();
        let half = T::lit(0.5);
        Self {
            flip_axes: vec![FlipAxis::X, FlipAxis::Y],
            scale_range: [T::lit(0.95), T::lit(1.05)],
            rotation_range: [-quarter, quarter],
            translation_range: [[-half, half]; 3],
            seed,
        }
    }

    /// No flips and zero-width ranges at the identity values.
    pub fn identity(seed: u64) -> Self {
        Self {
            flip_axes: Vec::new(),
            scale_range: [T::one(); 2],
            rotation_range: [T::zero(); 2],
            translation_range: [[T::zero(); 2]; 3],
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ranges = [self.scale_range, self.rotation_range]
            .into_iter()
            .chain(self.translation_range);
        for [lo, hi] in ranges {
            if !lo.is_finite() || !hi.is_finite() {
                return Err(Error::NonFinite("augmentation range"));
            }
            if lo > hi {
                return Err(Error::InvalidParameter(format!("range [{lo}, {hi}] has lo > hi")));
            }
        }
        if self.scale_range[0] <= T::zero() {
            return Err(Error::InvalidParameter("scale range must be positive".into()));
        }
        Ok(())
    }
}

fn uniform<T: Real, R: Rng>(rng: &mut R, [lo, hi]: [T; 2]) -> T {
    let u: f64 = rng.gen();
    lo + (hi - lo) * T::lit(u)
}

fn flip_box<T: Real>(b: &Box3D<T>, axis: FlipAxis) -> Box3D<T> {
    let [cx, cy, cz] = b.center();
    let (center, yaw) = match axis {
        FlipAxis::X => ([cx, -cy, cz], -b.yaw()),
        FlipAxis::Y => ([-cx, cy, cz], T::PI() - b.yaw()),
    };
    Box3D::new(center, b.dims(), wrap_finite(yaw)).expect("flip keeps box valid")
}

/// Mirrors points and boxes across one axis.
pub fn flip_scene<T: Real>(
    cloud: &PointCloud<T>,
    gts: &[GroundTruthObject<T>],
    axis: FlipAxis,
) -> (PointCloud<T>, Vec<GroundTruthObject<T>>) {
    let cloud = cloud.map_xyz(|[x, y, z]| match axis {
        FlipAxis::X => [x, -y, z],
        FlipAxis::Y => [-x, y, z],
    });
    let gts = gts
        .iter()
        .map(|g| GroundTruthObject::new(flip_box(&g.bbox, axis), g.class_id))
        .collect();
    (cloud, gts)
}

/// Applies one randomly drawn global transform (flips, rotation about z,
/// uniform scaling, translation, in that order) to the points and the
/// boxes alike. Deterministic in `params.seed`.
pub fn random_augment<T: Real>(
    cloud: &PointCloud<T>,
    gts: &[GroundTruthObject<T>],
    params: &AugmentParams<T>,
) -> Result<(PointCloud<T>, Vec<GroundTruthObject<T>>)> {
    params.validate()?;
    let mut rng = rng::seeded(params.seed);
    let mut flips = Vec::new();
    for &axis in &params.flip_axes {
        if rng.gen_bool(0.5) {
            flips.push(axis);
        }
    }
    let angle = uniform(&mut rng, params.rotation_range);
    let scale = uniform(&mut rng, params.scale_range);
    let shift = [
        uniform(&mut rng, params.translation_range[0]),
        uniform(&mut rng, params.translation_range[1]),
        uniform(&mut rng, params.translation_range[2]),
    ];

    let (mut cloud, mut gts) = (cloud.clone(), gts.to_vec());
    for axis in flips {
        (cloud, gts) = flip_scene(&cloud, &gts, axis);
    }
    let (s, c) = angle.sin_cos();
    let map = |[x, y, z]: [T; 3]| {
        [
            (c * x - s * y) * scale + shift[0],
            (s * x + c * y) * scale + shift[1],
            z * scale + shift[2],
        ]
    };
    let cloud = cloud.map_xyz(map);
    let gts = gts
        .iter()
        .map(|g| {
            let [l, w, h] = g.bbox.dims();
            let bbox = Box3D::new(
                map(g.bbox.center()),
                [l * scale, w * scale, h * scale],
                wrap_finite(g.bbox.yaw() + angle),
            )?;
            Ok(GroundTruthObject::new(bbox, g.class_id))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((cloud, gts))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scene() -> (PointCloud<f64>, Vec<GroundTruthObject<f64>>) {
        let cloud = PointCloud::from_flat(vec![1.0, 2.0, 0.5, 0.3, -4.0, 0.25, 1.0, 0.9], 1).unwrap();
        let gts = vec![
            GroundTruthObject::new(Box3D::new([1.0, 2.0, 0.5], [4.0, 2.0, 1.5], 0.4).unwrap(), 0),
            GroundTruthObject::new(Box3D::new([-3.0, 1.0, 0.0], [0.8, 0.8, 1.7], -2.9).unwrap(), 1),
        ];
        (cloud, gts)
    }

    #[test]
    fn identity_params_leave_scene_unchanged() {
        let (cloud, gts) = scene();
        let (c2, g2) = random_augment(&cloud, &gts, &AugmentParams::identity(9)).unwrap();
        assert_eq!(c2, cloud);
        assert_eq!(g2, gts);
    }

    #[test]
    fn flips_are_involutions() {
        let (cloud, gts) = scene();
        for axis in [FlipAxis::X, FlipAxis::Y] {
            let (c1, g1) = flip_scene(&cloud, &gts, axis);
            let (c2, g2) = flip_scene(&c1, &g1, axis);
            assert_eq!(c2, cloud);
            for (a, b) in g2.iter().zip(&gts) {
                for (x, y) in a.bbox.to_array().iter().zip(b.bbox.to_array()) {
                    assert!((x - y).abs() < 1e-12);
                }
            }
        }
        let (_, g) = flip_scene(&cloud, &gts, FlipAxis::Y);
        assert!((g[0].bbox.yaw() - (std::f64::consts::PI - 0.4)).abs() < 1e-15);
        assert_eq!(g[0].bbox.cx(), -1.0);
    }

    #[test]
    fn seeded_runs_are_bit_identical() {
        let (cloud, gts) = scene();
        let p = AugmentParams::waymo_default(42);
        let a = random_augment(&cloud, &gts, &p).unwrap();
        let b = random_augment(&cloud, &gts, &p).unwrap();
        assert_eq!(a, b);
        let c = random_augment(&cloud, &gts, &AugmentParams::waymo_default(43)).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn boxes_follow_points() {
        // a point at a box center stays at the augmented box center
        let (_, gts) = scene();
        let cloud = PointCloud::from_xyz(&[gts[0].bbox.center()]);
        for seed in 0..20 {
            let (c, g) = random_augment(&cloud, &gts, &AugmentParams::waymo_default(seed)).unwrap();
            let p = c.point(0);
            let q = g[0].bbox.center();
            assert!((0..3).all(|k| (p[k] - q[k]).abs() < 1e-12));
        }
    }

    #[test]
    fn rejects_inverted_range() {
        let mut p = AugmentParams::<f64>::identity(0);
        p.rotation_range = [1.0, -1.0];
        assert!(random_augment(&PointCloud::new(0), &[], &p).is_err());
    }
}
