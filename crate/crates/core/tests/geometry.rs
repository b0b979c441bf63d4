mod oracles;

use det3d_core::geom::{bev_iou, iou_3d, polygon_intersection_area, transform_box, Box3D, RigidTransform};
use proptest::prelude::*;

fn arb_box() -> impl Strategy<Value = Box3D<f64>> {
    (
        -3.0..3.0f64,
        -3.0..3.0f64,
        -1.0..1.0f64,
        0.3..5.0f64,
        0.3..3.0f64,
        0.3..2.5f64,
        -3.2..3.2f64,
    )
        .prop_map(|(x, y, z, l, w, h, yaw)| Box3D::new([x, y, z], [l, w, h], yaw).unwrap())
}

proptest! {
    #[test]
    fn iou_invariant_under_planar_rigid_motion(a in arb_box(), b in arb_box(), yaw in -3.2..3.2f64,
        tx in -50.0..50.0f64, ty in -50.0..50.0f64, tz in -2.0..2.0f64) {
        let t = RigidTransform::from_yaw_translation(yaw, [tx, ty, tz]);
        let ta = transform_box(&a, &t).unwrap();
        let tb = transform_box(&b, &t).unwrap();
        prop_assert!((iou_3d(&ta, &tb) - iou_3d(&a, &b)).abs() <= 1e-9);
        prop_assert!((bev_iou(&ta, &tb) - bev_iou(&a, &b)).abs() <= 1e-9);
    }

    #[test]
    fn iou_invariant_under_uniform_scale(a in arb_box(), b in arb_box(), s in 0.1..10.0f64) {
        let scale = |x: &Box3D<f64>| {
            let c = x.center().map(|v| v * s);
            let d = x.dims().map(|v| v * s);
            Box3D::new(c, d, x.yaw()).unwrap()
        };
        prop_assert!((iou_3d(&scale(&a), &scale(&b)) - iou_3d(&a, &b)).abs() <= 1e-9);
        prop_assert!((bev_iou(&scale(&a), &scale(&b)) - bev_iou(&a, &b)).abs() <= 1e-9);
    }

    #[test]
    fn iou_symmetric_and_bounded(a in arb_box(), b in arb_box()) {
        let (ab, ba) = (iou_3d(&a, &b), iou_3d(&b, &a));
        prop_assert_eq!(ab.to_bits(), ba.to_bits());
        prop_assert_eq!(bev_iou(&a, &b).to_bits(), bev_iou(&b, &a).to_bits());
        prop_assert!((0.0..=1.0).contains(&ab));
        prop_assert!(iou_3d(&a, &b) <= 1.0 && bev_iou(&a, &b) <= 1.0);
    }

    #[test]
    fn polygon_self_intersection(a in arb_box()) {
        let p = a.corners_bev();
        prop_assert!((polygon_intersection_area(&p, &p) - p.area()).abs() <= 1e-9);
        prop_assert!((p.area() - a.length() * a.width()).abs() <= 1e-9);
    }

    #[test]
    fn identical_boxes_have_unit_iou(a in arb_box()) {
        prop_assert!((iou_3d(&a, &a) - 1.0).abs() <= 1e-12);
    }
}

#[test]
fn monte_carlo_agreement_sample() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(77);
    for k in 0..50 {
        let mut draw = || -> [f64; 7] {
            [
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-0.5..0.5),
                rng.gen_range(0.5..4.0),
                rng.gen_range(0.5..2.0),
                rng.gen_range(0.5..2.0),
                rng.gen_range(-3.1..3.1),
            ]
        };
        let (ra, rb) = (draw(), draw());
        let a = Box3D::from_array(ra).unwrap();
        let b = Box3D::from_array(rb).unwrap();
        let mc = oracles::monte_carlo_iou_3d(&ra, &rb, 200_000, k);
        assert!(
            (iou_3d(&a, &b) - mc).abs() <= 0.01,
            "pair {k}: {} vs {mc}",
            iou_3d(&a, &b)
        );
    }
}
