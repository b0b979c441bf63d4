mod oracles;

use std::collections::BTreeMap;

use det3d_core::eval::{average_precision, evaluate, EvalConfig, Frame, ScoredMatch};
use det3d_core::geom::Box3D;
use det3d_core::{Detection, GroundTruthObject};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_dataset(seed: u64, frames: usize) -> BTreeMap<String, Frame<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = BTreeMap::new();
    for f in 0..frames {
        let mut frame = Frame::default();
        for k in 0..rng.gen_range(0..5) {
            let class = rng.gen_range(0..2);
            let b = Box3D::new([8.0 * k as f64, 0.0, 0.0], [4.0, 2.0, 1.5], rng.gen_range(-3.0..3.0)).unwrap();
            frame.ground_truths.push(GroundTruthObject::new(b, class));
            if rng.gen_bool(0.7) {
                let jitter = Box3D::new(
                    [b.cx() + rng.gen_range(-0.5..0.5), rng.gen_range(-0.3..0.3), 0.0],
                    b.dims(),
                    b.yaw() + rng.gen_range(-3.0..3.0),
                )
                .unwrap();
                frame.detections.push(Detection::new(jitter, class, rng.gen()).unwrap());
            }
        }
        for _ in 0..rng.gen_range(0..3) {
            let b = Box3D::new([rng.gen_range(-40.0..40.0), 20.0, 0.0], [4.0, 2.0, 1.5], 0.0).unwrap();
            frame
                .detections
                .push(Detection::new(b, rng.gen_range(0..2), rng.gen()).unwrap());
        }
        out.insert(format!("frame_{f:03}"), frame);
    }
    out
}

#[test]
fn aph_never_exceeds_ap() {
    for seed in 0..100 {
        let r = evaluate(&random_dataset(seed, 6), &EvalConfig::default());
        for m in r.per_class.values() {
            if let (Some(ap), Some(aph)) = (m.ap, m.aph) {
                assert!(aph <= ap + 1e-15);
            }
        }
    }
}

#[test]
fn duplicating_frames_keeps_metrics() {
    for seed in 0..30 {
        let data = random_dataset(seed, 5);
        let mut doubled = data.clone();
        for (k, v) in &data {
            doubled.insert(format!("{k}_copy"), v.clone());
        }
        let a = evaluate(&data, &EvalConfig::default());
        let b = evaluate(&doubled, &EvalConfig::default());
        for (class, m) in &a.per_class {
            let n = &b.per_class[class];
            match (m.ap, n.ap) {
                (Some(x), Some(y)) => assert!((x - y).abs() <= 1e-12),
                (x, y) => assert_eq!(x, y),
            }
            match (m.aph, n.aph) {
                (Some(x), Some(y)) => assert!((x - y).abs() <= 1e-12),
                (x, y) => assert_eq!(x, y),
            }
        }
    }
}

fn arb_records() -> impl Strategy<Value = Vec<(f64, bool, f64)>> {
    // coarse scores to exercise ties
    proptest::collection::vec(
        ((0u8..6).prop_map(|s| s as f64 / 5.0), any::<bool>(), 0.0..=1.0f64),
        0..=5,
    )
}

proptest! {
    #[test]
    fn matches_brute_force(recs in arb_records(), extra_gt in 0usize..3) {
        let matched = recs.iter().filter(|r| r.1).count();
        let num_gt = (matched + extra_gt).max(1);
        let num_gt = num_gt.min(3).max(matched);
        prop_assume!(num_gt >= 1);
        let records: Vec<_> = recs.iter().map(|&(score, matched, heading)| ScoredMatch { score, matched, heading }).collect();
        for weighted in [false, true] {
            let got = average_precision(&records, num_gt, weighted).unwrap();
            let expected = oracles::brute_force_ap(&recs, num_gt, weighted);
            prop_assert!((got - expected).abs() <= 1e-12, "{} vs {}", got, expected);
        }
    }

    #[test]
    fn monotone_score_transform_invariance(recs in arb_records()) {
        let matched = recs.iter().filter(|r| r.1).count().max(1);
        let a: Vec<_> = recs.iter().map(|&(score, matched, heading)| ScoredMatch { score, matched, heading }).collect();
        let b: Vec<_> = a.iter().map(|r| ScoredMatch { score: (3.0 * r.score).exp() / 100.0, ..*r }).collect();
        prop_assert_eq!(average_precision(&a, matched, false), average_precision(&b, matched, false));
        prop_assert_eq!(average_precision(&a, matched, true), average_precision(&b, matched, true));
    }
}
