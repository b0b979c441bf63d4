mod oracles;

use det3d_core::assign::{bce, dynamic_k, l1_reg, ota_assign, Assignment, CostMatrix};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_instance(rng: &mut ChaCha8Rng) -> (Vec<Vec<f64>>, Vec<usize>) {
    let n = rng.gen_range(1..=3);
    let m = rng.gen_range(1..=6);
    // coarse values so that ties actually occur
    let cost: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..m).map(|_| rng.gen_range(0..8) as f64 * 0.25).collect())
        .collect();
    let budgets = (0..n).map(|_| rng.gen_range(1..=m)).collect();
    (cost, budgets)
}

#[test]
fn ota_matches_replay() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..2000 {
        let (cost, budgets) = random_instance(&mut rng);
        let matrix = CostMatrix::from_rows(&cost).unwrap();
        let got = ota_assign(&matrix, &budgets).unwrap();
        let expected = oracles::greedy_replay(&cost, &budgets);
        assert_eq!(got.assignments.iter().map(|a| a.gt()).collect::<Vec<_>>(), expected);
        for (i, &k) in budgets.iter().enumerate() {
            assert!(got.used[i] <= k);
        }
        let total: usize = budgets.iter().sum();
        assert_eq!(got.num_assigned(), total.min(cost[0].len()));
    }
}

proptest! {
    #[test]
    fn positive_scaling_keeps_assignment(seed in any::<u64>(), factor in 1e-3..1e3f64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (cost, budgets) = random_instance(&mut rng);
        let matrix = CostMatrix::from_rows(&cost).unwrap();
        let a = ota_assign(&matrix, &budgets).unwrap();
        let b = ota_assign(&matrix.scaled(factor).unwrap(), &budgets).unwrap();
        prop_assert_eq!(a.assignments, b.assignments);
    }

    #[test]
    fn dynamic_k_in_range(ious in proptest::collection::vec(0.0..=1.0f64, 1..20)) {
        let k = dynamic_k(&ious);
        prop_assert!(k >= 1 && k <= ious.len());
    }

    #[test]
    fn l1_is_a_metric(a in proptest::array::uniform8(-10.0..10.0f64), b in proptest::array::uniform8(-10.0..10.0f64)) {
        prop_assert_eq!(l1_reg(&a, &b).unwrap(), l1_reg(&b, &a).unwrap());
        prop_assert!(l1_reg(&a, &b).unwrap() >= 0.0);
    }
}

#[test]
fn bce_matches_reference() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..1000 {
        let p: f64 = rng.gen();
        let label: bool = rng.gen();
        assert!((bce(p, label) - oracles::bce_reference(p, label)).abs() <= 1e-12);
    }
    assert!((bce(0.9, false) - (-(0.1f64).ln())).abs() <= 1e-12);
}

#[test]
fn background_when_budget_exhausted() {
    let m = CostMatrix::from_rows(&[vec![0.1, 0.2, 0.3]]).unwrap();
    let r = ota_assign(&m, &[2]).unwrap();
    assert_eq!(
        r.assignments,
        vec![Assignment::Gt(0), Assignment::Gt(0), Assignment::Background]
    );
}
