use serde::{Deserialize, Serialize};

use super::{polygon_intersection_area, Box3D};
use crate::scalar::Real;

/// Which overlap measure a matching step uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum IouKind {
    /// Footprint overlap in the ground plane.
    #[default]
    #[serde(rename = "bev")]
    Bev,
    /// Volume overlap (BEV intersection times vertical overlap).
    #[serde(rename = "3d")]
    ThreeD,
}

pub fn bev_iou<T: Real>(a: &Box3D<T>, b: &Box3D<T>) -> T {
    let inter = polygon_intersection_area(&a.corners_bev(), &b.corners_bev());
    if inter == T::zero() {
        return T::zero();
    }
    let area_a = a.length() * a.width();
    let area_b = b.length() * b.width();
    ratio(inter, area_a + area_b - inter)
}

pub fn iou_3d<T: Real>(a: &Box3D<T>, b: &Box3D<T>) -> T {
    let z_overlap = a.top().min(b.top()) - a.bottom().max(b.bottom());
    if z_overlap <= T::zero() {
        return T::zero();
    }
    let area = polygon_intersection_area(&a.corners_bev(), &b.corners_bev());
    if area == T::zero() {
        return T::zero();
    }
    let inter = area * z_overlap;
    ratio(inter, a.volume() + b.volume() - inter)
}

pub fn iou<T: Real>(kind: IouKind, a: &Box3D<T>, b: &Box3D<T>) -> T {
    match kind {
        IouKind::Bev => bev_iou(a, b),
        IouKind::ThreeD => iou_3d(a, b),
    }
}

fn ratio<T: Real>(inter: T, union: T) -> T {
    (inter / union).max(T::zero()).min(T::one())
}
