//! Reference implementations used only by tests. Each one is written
//! from the definition, without calling the library routine it checks.
#![allow(dead_code)]

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Box as `[cx, cy, cz, l, w, h, yaw]`.
pub type RawBox = [f64; 7];

fn inside(b: &RawBox, p: [f64; 3]) -> bool {
    let (s, c) = b[6].sin_cos();
    let dx = p[0] - b[0];
    let dy = p[1] - b[1];
    let lx = c * dx + s * dy;
    let ly = -s * dx + c * dy;
    lx.abs() <= b[3] / 2.0 && ly.abs() <= b[4] / 2.0 && (p[2] - b[2]).abs() <= b[5] / 2.0
}

/// 3D IoU estimated from `n` uniform samples inside `a`.
pub fn monte_carlo_iou_3d(a: &RawBox, b: &RawBox, n: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (s, c) = a[6].sin_cos();
    let mut hits = 0usize;
    for _ in 0..n {
        let lx = (rng.gen::<f64>() - 0.5) * a[3];
        let ly = (rng.gen::<f64>() - 0.5) * a[4];
        let lz = (rng.gen::<f64>() - 0.5) * a[5];
        let p = [a[0] + c * lx - s * ly, a[1] + s * lx + c * ly, a[2] + lz];
        if inside(b, p) {
            hits += 1;
        }
    }
    let va = a[3] * a[4] * a[5];
    let vb = b[3] * b[4] * b[5];
    let inter = va * hits as f64 / n as f64;
    inter / (va + vb - inter)
}

/// Cells and plain-summed means of in-range points, bucketed by
/// `floor((coord - min) / size)`.
pub fn naive_voxelize(
    rows: &[Vec<f64>],
    min: [f64; 3],
    max: [f64; 3],
    size: [f64; 3],
) -> BTreeMap<[usize; 3], (Vec<f64>, usize)> {
    let mut cells: BTreeMap<[usize; 3], (Vec<f64>, usize)> = BTreeMap::new();
    for row in rows {
        if !(0..3).all(|k| row[k] >= min[k] && row[k] < max[k]) {
            continue;
        }
        let idx = [0, 1, 2].map(|k| ((row[k] - min[k]) / size[k]).floor() as usize);
        let e = cells.entry(idx).or_insert_with(|| (vec![0.0; row.len()], 0));
        for (s, v) in e.0.iter_mut().zip(row) {
            *s += v;
        }
        e.1 += 1;
    }
    for (sums, n) in cells.values_mut() {
        for s in sums.iter_mut() {
            *s /= *n as f64;
        }
    }
    cells
}

/// Replays the greedy budgeted assignment: repeatedly take the unvisited
/// candidate whose cheapest cost is smallest, give it the cheapest gt with
/// budget left.
pub fn greedy_replay(cost: &[Vec<f64>], budgets: &[usize]) -> Vec<Option<usize>> {
    let n = cost.len();
    let m = if n == 0 { 0 } else { cost[0].len() };
    let mut left: Vec<usize> = budgets.to_vec();
    let mut visited = vec![false; m];
    let mut out = vec![None; m];
    for _ in 0..m {
        let mut next: Option<(usize, f64)> = None;
        for j in 0..m {
            if visited[j] {
                continue;
            }
            let mut best = f64::INFINITY;
            for row in cost {
                if row[j] < best {
                    best = row[j];
                }
            }
            match next {
                Some((_, b)) if b <= best => {}
                _ => next = Some((j, best)),
            }
        }
        let (j, _) = next.unwrap();
        visited[j] = true;
        let mut pick: Option<usize> = None;
        for i in 0..n {
            if left[i] > 0 && pick.is_none_or(|p| cost[i][j] < cost[p][j]) {
                pick = Some(i);
            }
        }
        if let Some(i) = pick {
            left[i] -= 1;
            out[j] = Some(i);
        }
    }
    out
}

/// `(score, matched, heading)` per prediction.
pub type Rec = (f64, bool, f64);

/// AP from a precision-recall curve built by thresholding at every distinct
/// score.
pub fn brute_force_ap(recs: &[Rec], num_gt: usize, heading_weighted: bool) -> f64 {
    let mut thresholds: Vec<f64> = recs.iter().map(|r| r.0).collect();
    thresholds.sort_by(|a, b| b.partial_cmp(a).unwrap());
    thresholds.dedup();
    let mut pts = Vec::new();
    for t in &thresholds {
        let admitted: Vec<&Rec> = recs.iter().filter(|r| r.0 >= *t).collect();
        let tp = admitted.iter().filter(|r| r.1).count() as f64;
        let credit: f64 = admitted
            .iter()
            .filter(|r| r.1)
            .map(|r| if heading_weighted { r.2 } else { 1.0 })
            .sum();
        pts.push((tp / num_gt as f64, credit / admitted.len() as f64));
    }
    let mut ap = 0.0;
    let mut prev = 0.0;
    for k in 0..pts.len() {
        let best = pts[k..].iter().map(|p| p.1).fold(0.0, f64::max);
        ap += (pts[k].0 - prev) * best;
        prev = pts[k].0;
    }
    ap
}

/// Binary cross-entropy via `ln_1p` on the complementary side.
pub fn bce_reference(prob: f64, label: bool) -> f64 {
    let p = prob.clamp(1e-7, 1.0 - 1e-7);
    if label {
        -p.ln()
    } else {
        -(-p).ln_1p()
    }
}
