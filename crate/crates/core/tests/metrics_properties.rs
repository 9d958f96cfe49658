//! Metric invariants on random beliefs and grids.

use bo_pomdp_core::metrics::{gradient_weights, mnll_values, rmse_values, wrmse_values};
use proptest::prelude::*;

fn sample(n: usize) -> impl Strategy<Value = (Vec<f64>, Vec<f64>, Vec<f64>, Vec<[f64; 2]>)> {
    (
        prop::collection::vec(-10.0..10.0f64, n),
        prop::collection::vec(-10.0..10.0f64, n),
        prop::collection::vec(1e-3..5.0f64, n),
        prop::collection::vec((-4.0..4.0f64, -4.0..4.0f64).prop_map(|(a, b)| [a, b]), n),
    )
}

fn any_sample() -> impl Strategy<Value = (Vec<f64>, Vec<f64>, Vec<f64>, Vec<[f64; 2]>)> {
    (1usize..60).prop_flat_map(sample)
}

proptest! {
    #[test]
    fn non_negative_and_bounded((mu, f, _, grad) in any_sample()) {
        let r = rmse_values(&mu, &f);
        let w = wrmse_values(&mu, &f, &grad);
        prop_assert!(r >= 0.0 && w >= 0.0);
        let wmax = gradient_weights(&grad).into_iter().fold(0.0, f64::max);
        prop_assert!(wmax <= 2f64.sqrt() + 1e-12);
        prop_assert!(w <= r * wmax.sqrt() + 1e-12);
        prop_assert_eq!(rmse_values(&f, &f), 0.0);
    }

    #[test]
    fn order_invariance((mu, f, var, grad) in any_sample(), rot in 0usize..60) {
        // any traversal order (row- or column-major) is a permutation
        let n = mu.len();
        let perm: Vec<usize> = (0..n).map(|i| (i * 7 + rot) % n).collect();
        let is_perm = {
            let mut s = perm.clone();
            s.sort();
            s.dedup();
            s.len() == n
        };
        prop_assume!(is_perm);
        let p = |v: &[f64]| perm.iter().map(|&i| v[i]).collect::<Vec<_>>();
        let pg: Vec<[f64; 2]> = perm.iter().map(|&i| grad[i]).collect();
        prop_assert!((rmse_values(&mu, &f) - rmse_values(&p(&mu), &p(&f))).abs() < 1e-9);
        prop_assert!((wrmse_values(&mu, &f, &grad) - wrmse_values(&p(&mu), &p(&f), &pg)).abs() < 1e-9);
        prop_assert!((mnll_values(&mu, &var, &f) - mnll_values(&p(&mu), &p(&var), &p(&f))).abs() < 1e-9);
    }

    #[test]
    fn mnll_improves_with_smaller_errors((mu, f, var, _) in any_sample(), shrink in 0.0..0.99f64) {
        let closer: Vec<f64> = mu.iter().zip(&f).map(|(m, t)| t + shrink * (m - t)).collect();
        prop_assert!(mnll_values(&closer, &var, &f) <= mnll_values(&mu, &var, &f) + 1e-12);
    }
}
