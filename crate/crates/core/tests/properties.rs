mod common;

use proptest::prelude::*;
use svarica::dcov::dist_cov_fast;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn whitened_covariance_is_identity(t in 30usize..200, n in 2usize..6, seed in any::<u64>()) {
        common::check_whitening(t, n, seed)?;
    }

    #[test]
    fn omega_normalization_invariants(n in 2usize..6, seed in any::<u64>()) {
        common::check_omega(n, seed)?;
    }

    #[test]
    fn amari_ignores_permutation_and_scale(n in 2usize..6, seed in any::<u64>()) {
        common::check_amari(n, seed)?;
    }

    #[test]
    fn ma_recursion_matches_impulse_propagation(n in 1usize..5, p in 1usize..4, seed in any::<u64>()) {
        common::check_ma(n, p, seed)?;
    }

    #[test]
    fn local_projection_impact_equals_mixing_column(n in 2usize..4, p in 1usize..3, seed in any::<u64>()) {
        common::check_lp_impact(n, p, seed)?;
    }

    #[test]
    fn fast_dcov_matches_pairwise_oracle(x in prop::collection::vec(-50.0f64..50.0, 2..60), shift in -3.0f64..3.0) {
        let y: Vec<f64> = x.iter().enumerate().map(|(i, v)| (v * shift).sin() + i as f64 * 0.1).collect();
        let fast = dist_cov_fast(&x, &y, 1.0).unwrap();
        let oracle = common::dcov_oracle(&x, &y);
        prop_assert!((fast - oracle).abs() <= 1e-10 * oracle.abs().max(1e-12), "{fast} vs {oracle}");
    }
}
