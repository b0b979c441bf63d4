#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use det3d_core::augment::{apply_to_box, waymo_tta_set};
use det3d_core::geom::Box3D;
use det3d_core::{io, Detection64, GroundTruth64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn det3d(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_det3d"))
        .args(args)
        .env("DET3D_LOG", "warn")
        .output()
        .expect("det3d runs")
}

pub fn path_str(p: &Path) -> &str {
    p.to_str().expect("utf-8 path")
}

pub fn write_gts(path: &Path, gts: &[(String, GroundTruth64)]) {
    let mut buf = Vec::new();
    io::write_ground_truths(&mut buf, gts.iter().map(|(f, g)| (f.as_str(), g))).unwrap();
    std::fs::write(path, buf).unwrap();
}

pub fn write_dets(path: &Path, dets: &[(String, Detection64)]) {
    let mut buf = Vec::new();
    io::write_detections(&mut buf, dets.iter().map(|(f, d)| (f.as_str(), d))).unwrap();
    std::fs::write(path, buf).unwrap();
}

/// Ground truth for `frames` frames: a row of well separated objects of
/// two classes.
pub fn synthetic_ground_truth(frames: usize, seed: u64) -> Vec<(String, GroundTruth64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    for f in 0..frames {
        for k in 0..rng.gen_range(2..6) {
            let class = rng.gen_range(0..2u32);
            let dims = if class == 0 { [4.5, 2.0, 1.6] } else { [0.9, 0.9, 1.8] };
            let b = Box3D::new(
                [
                    -30.0 + 12.0 * k as f64,
                    rng.gen_range(-20.0..20.0),
                    rng.gen_range(0.5..1.0),
                ],
                dims,
                rng.gen_range(-3.0..3.0),
            )
            .unwrap();
            out.push((format!("frame_{f:03}"), GroundTruth64::new(b, class)));
        }
    }
    out
}

/// Per-variant detections of one model: noisy copies of the ground truth
/// expressed in each augmented frame, plus a few false positives.
pub fn write_tta_variants(dir: &Path, gts: &[(String, GroundTruth64)], model: &str, seed: u64) -> usize {
    std::fs::create_dir_all(dir).unwrap();
    let transforms = waymo_tta_set::<f64>();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for (idx, t) in transforms.iter().enumerate() {
        let mut dets = Vec::new();
        for (frame, gt) in gts {
            if rng.gen_bool(0.1) {
                continue;
            }
            let b = gt.bbox;
            let noisy = Box3D::new(
                [
                    b.cx() + rng.gen_range(-0.15..0.15),
                    b.cy() + rng.gen_range(-0.15..0.15),
                    b.cz(),
                ],
                [b.length() * rng.gen_range(0.95..1.05), b.width(), b.height()],
                b.yaw() + rng.gen_range(-0.1..0.1),
            )
            .unwrap();
            let d = Detection64::new(apply_to_box(t, &noisy), gt.class_id, rng.gen_range(0.3..1.0))
                .unwrap()
                .with_model(model);
            dets.push((frame.clone(), d));
            if rng.gen_bool(0.2) {
                let fp = Box3D::new([rng.gen_range(-40.0..40.0), 35.0, 0.8], [4.5, 2.0, 1.6], 0.0).unwrap();
                let d = Detection64::new(apply_to_box(t, &fp), gt.class_id, rng.gen_range(0.0..0.5))
                    .unwrap()
                    .with_model(model);
                dets.push((frame.clone(), d));
            }
        }
        write_dets(&dir.join(format!("variant_{idx}.jsonl")), &dets);
    }
    transforms.len()
}

/// `tta` for two models, `ensemble` over both, then `eval`. Returns the
/// produced files.
pub fn run_pipeline(root: &Path, seed: &str) -> Vec<PathBuf> {
    let gts = synthetic_ground_truth(20, 11);
    let gt_path = root.join("gt.jsonl");
    write_gts(&gt_path, &gts);
    let mut fused = Vec::new();
    for (i, model) in ["lidar_a", "lidar_b"].iter().enumerate() {
        let dir = root.join(model);
        write_tta_variants(&dir, &gts, model, 100 + i as u64);
        let out = root.join(format!("{model}_tta.jsonl"));
        let o = det3d(&[
            "tta",
            "--input-dir",
            path_str(&dir),
            "--seed",
            seed,
            "--jobs",
            "4",
            "--output",
            path_str(&out),
        ]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        fused.push(out);
    }
    let ens = root.join("ensemble.jsonl");
    let o = det3d(&[
        "ensemble",
        "--input",
        path_str(&fused[0]),
        "--input",
        path_str(&fused[1]),
        "--seed",
        seed,
        "--output",
        path_str(&ens),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let report = root.join("report.json");
    let o = det3d(&[
        "eval",
        "--detections",
        path_str(&ens),
        "--ground-truth",
        path_str(&gt_path),
        "--seed",
        seed,
        "--output",
        path_str(&report),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let mut files = fused;
    files.push(ens);
    files.push(report);
    files
}
