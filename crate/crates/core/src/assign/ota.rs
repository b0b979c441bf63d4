use std::cmp::Ordering;

use super::cost::{build_cost_matrix, Candidate, CostMatrix};
use crate::detection::GroundTruthObject;
use crate::error::{Error, Result};
use crate::geom::{iou, IouKind};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Assignment {
    Gt(usize),
    Background,
}

impl Assignment {
    pub fn gt(self) -> Option<usize> {
        match self {
            Assignment::Gt(i) => Some(i),
            Assignment::Background => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AssignmentResult {
    /// One entry per candidate.
    pub assignments: Vec<Assignment>,
    /// Budget `k_i` per ground truth.
    pub budgets: Vec<usize>,
    /// Candidates actually given to each ground truth.
    pub used: Vec<usize>,
}

impl AssignmentResult {
    pub fn num_assigned(&self) -> usize {
        self.used.iter().sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AssignOptions {
    /// Overlap measure summed into the budgets.
    pub budget_iou: IouKind,
}

impl Default for AssignOptions {
    fn default() -> Self {
        Self {
            budget_iou: IouKind::ThreeD,
        }
    }
}

/// `clamp(floor(sum of ious), 1, M)`.
pub fn dynamic_k<T: Real>(ious: &[T]) -> usize {
    let total: T = ious.iter().copied().sum();
    let k = total.floor().to_usize().unwrap_or(0);
    k.max(1).min(ious.len())
}

/// Greedy budgeted assignment.
///
/// Candidates are visited in ascending order of their cheapest cost over
/// all ground truths (ties by candidate index). Each visited candidate takes
/// the cheapest ground truth that still has budget (ties by ground-truth
/// index), or becomes background when every budget is spent.
pub fn ota_assign<T: Real>(cost: &CostMatrix<T>, budgets: &[usize]) -> Result<AssignmentResult> {
    if budgets.len() != cost.rows() {
        return Err(Error::DimensionMismatch {
            expected: cost.rows(),
            found: budgets.len(),
        });
    }
    let n = cost.rows();
    let m = cost.cols();
    let best: Vec<T> = (0..m)
        .map(|j| (0..n).map(|i| cost.get(i, j)).fold(T::infinity(), T::min))
        .collect();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| best[a].partial_cmp(&best[b]).unwrap_or(Ordering::Equal));

    let mut used = vec![0usize; n];
    let mut assignments = vec![Assignment::Background; m];
    for j in order {
        let mut pick: Option<usize> = None;
        for i in 0..n {
            if used[i] >= budgets[i] {
                continue;
            }
            if pick.is_none_or(|p| cost.get(i, j) < cost.get(p, j)) {
                pick = Some(i);
            }
        }
        if let Some(i) = pick {
            used[i] += 1;
            assignments[j] = Assignment::Gt(i);
        }
    }
    Ok(AssignmentResult {
        assignments,
        budgets: budgets.to_vec(),
        used,
    })
}

/// Cost matrix, IoU budgets and greedy assignment in one call.
pub fn assign_targets<T: Real>(
    gts: &[GroundTruthObject<T>],
    candidates: &[Candidate<T>],
    options: &AssignOptions,
) -> Result<(CostMatrix<T>, AssignmentResult)> {
    let cost = build_cost_matrix(gts, candidates)?;
    let budgets: Vec<usize> = gts
        .iter()
        .map(|g| {
            let row: Vec<T> = candidates
                .iter()
                .map(|c| iou(options.budget_iou, &g.bbox, &c.bbox))
                .collect();
            dynamic_k(&row)
        })
        .collect();
    let result = ota_assign(&cost, &budgets)?;
    Ok((cost, result))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::Box3D;

    #[test]
    fn dynamic_k_examples() {
        assert_eq!(dynamic_k(&[0.9, 0.8, 0.35]), 2);
        assert_eq!(dynamic_k(&[0.05, 0.02, 0.01]), 1);
        assert_eq!(dynamic_k(&[1.0f64; 6]), 6);
    }

    #[test]
    fn worked_example() {
        let c = CostMatrix::from_rows(&[vec![0.1, 0.5, 0.9], vec![0.4, 0.2, 0.8]]).unwrap();
        let r = ota_assign(&c, &[1, 1]).unwrap();
        assert_eq!(
            r.assignments,
            vec![Assignment::Gt(0), Assignment::Gt(1), Assignment::Background]
        );
        assert_eq!(r.used, vec![1, 1]);
    }

    #[test]
    fn trivial_cases() {
        let one = CostMatrix::from_rows(&[vec![3.0]]).unwrap();
        assert_eq!(ota_assign(&one, &[1]).unwrap().assignments, vec![Assignment::Gt(0)]);
        let row = CostMatrix::from_rows(&[vec![0.3, 0.1, 0.7, 0.2]]).unwrap();
        let r = ota_assign(&row, &[4]).unwrap();
        assert!(r.assignments.iter().all(|a| *a == Assignment::Gt(0)));
        assert!(ota_assign(&row, &[1, 1]).is_err());
    }

    #[test]
    fn ties_break_by_index() {
        let c = CostMatrix::from_rows(&[vec![0.5, 0.5], vec![0.5, 0.5]]).unwrap();
        let r = ota_assign(&c, &[1, 1]).unwrap();
        assert_eq!(r.assignments, vec![Assignment::Gt(0), Assignment::Gt(1)]);
    }

    #[test]
    fn full_pipeline_budgets() {
        let g = GroundTruthObject::new(Box3D::new([0.0; 3], [4.0, 2.0, 1.5], 0.0).unwrap(), 0);
        let cands: Vec<Candidate<f64>> = (0..5)
            .map(|k| Candidate {
                bbox: g.bbox.with_center([0.1 * k as f64, 0.0, 0.0]).unwrap(),
                class_probs: vec![0.8, 0.1],
                iou_pred: 0.5,
            })
            .collect();
        let (cost, r) = assign_targets(&[g], &cands, &AssignOptions::default()).unwrap();
        assert_eq!(cost.cols(), 5);
        // IoUs 1, .95, .90, .86, .82 sum to 4.53
        assert_eq!(r.budgets, vec![4]);
        assert_eq!(r.num_assigned(), 4);
        assert_eq!(r.assignments[4], Assignment::Background);
    }
}
