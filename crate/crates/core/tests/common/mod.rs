//! Property checks and oracles shared by the property tests and the
//! acceptance suite.

#![allow(dead_code)]

use nalgebra::DMatrix;
use proptest::prelude::*;
use proptest::test_runner::TestCaseError;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal, StudentT};

use svarica::ica::{amari_mixing, omega_normalize};
use svarica::irf::LpControls;
use svarica::seed::{derive_seed, rng};
use svarica::svar::design::{self, Noise, Structure};
use svarica::svar::HlSpec;
use svarica::var::ma_coefficients;
use svarica::{amari_distance, fit_var, irf_local_projection, permutation_test, simulate, whiten, DistCovConfig, TimeSeriesMatrix, VarOptions, WhitenVariant};

/// `t × n` heavy-ish data with correlated columns.
pub fn correlated_data(t: usize, n: usize, seed: u64) -> DMatrix<f64> {
    let mut r = rng(seed);
    let st = StudentT::new(4.0).unwrap();
    let raw = DMatrix::from_fn(t, n, |_, _| st.sample(&mut r));
    let mix = DMatrix::from_fn(n, n, |i, j| if i == j { 1.0 } else { r.random_range(-0.8..0.8) });
    raw * mix.transpose()
}

/// Random matrix with a condition number below 1e3, or `None`.
pub fn well_conditioned(n: usize, seed: u64) -> Option<DMatrix<f64>> {
    let mut r = rng(seed);
    let m = DMatrix::from_fn(n, n, |_, _| r.random_range(-2.0..2.0));
    let sv = m.clone().svd(false, false).singular_values;
    (sv.min() > 0.0 && sv.max() / sv.min() < 1e3).then_some(m)
}

/// Random signed permutation-scaling matrix `PΛ`.
pub fn perm_scale(n: usize, seed: u64) -> DMatrix<f64> {
    let mut r = rng(seed);
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(&mut r);
    let mut m = DMatrix::zeros(n, n);
    for (i, &j) in perm.iter().enumerate() {
        let mag: f64 = r.random_range(0.1..10.0);
        m[(i, j)] = if r.random_bool(0.5) { mag } else { -mag };
    }
    m
}

fn covariance_oracle(x: &DMatrix<f64>) -> DMatrix<f64> {
    let (t, n) = x.shape();
    let means: Vec<f64> = (0..n).map(|j| x.column(j).iter().sum::<f64>() / t as f64).collect();
    DMatrix::from_fn(n, n, |a, b| (0..t).map(|s| (x[(s, a)] - means[a]) * (x[(s, b)] - means[b])).sum::<f64>() / t as f64)
}

pub fn whitening_variants(n: usize, seed: u64) -> Vec<WhitenVariant> {
    let mut ordering: Vec<usize> = (0..n).collect();
    ordering.shuffle(&mut rng(seed));
    vec![WhitenVariant::cholesky_natural(n), WhitenVariant::Cholesky { ordering }, WhitenVariant::CovarianceSvd, WhitenVariant::DataSvd]
}

pub fn check_whitening(t: usize, n: usize, seed: u64) -> Result<(), TestCaseError> {
    let e = correlated_data(t, n, seed);
    for v in whitening_variants(n, seed ^ 1) {
        let (w, wh) = whiten(&e, &v).map_err(|err| TestCaseError::fail(err.to_string()))?;
        let dev = (covariance_oracle(&w) - DMatrix::identity(n, n)).amax();
        prop_assert!(dev < 1e-8, "{}: whitened covariance off identity by {dev:e}", v.label());
        let refac = (&wh.factor * wh.factor.transpose() - covariance_oracle(&e)).amax() / covariance_oracle(&e).amax();
        prop_assert!(refac < 1e-8, "{}: P Pᵀ misses the covariance by {refac:e}", v.label());
    }
    Ok(())
}

fn lex_le(a: &[f64], b: &[f64]) -> bool {
    for (x, y) in a.iter().zip(b) {
        if x < y {
            return true;
        }
        if x > y {
            return false;
        }
    }
    true
}

pub fn check_omega(n: usize, seed: u64) -> Result<(), TestCaseError> {
    let Some(w) = well_conditioned(n, seed) else { return Ok(()) };
    let o = omega_normalize(&w).map_err(|e| TestCaseError::fail(e.to_string()))?;
    for i in 0..n {
        let row: Vec<f64> = o.row(i).iter().copied().collect();
        let norm = row.iter().map(|v| v * v).sum::<f64>().sqrt();
        prop_assert!((norm - 1.0).abs() < 1e-12, "row {i} norm {norm}");
        let big = row.iter().copied().fold(0.0f64, |m, v| m.max(v.abs()));
        let first_big = row.iter().find(|v| v.abs() == big).unwrap();
        prop_assert!(*first_big > 0.0, "row {i} max-modulus entry negative");
        if i > 0 {
            let prev: Vec<f64> = o.row(i - 1).iter().copied().collect();
            prop_assert!(lex_le(&prev, &row), "rows {} and {i} out of order", i - 1);
        }
    }
    let again = omega_normalize(&o).unwrap();
    prop_assert!((&again - &o).amax() < 1e-14, "normalization not idempotent");
    let moved = omega_normalize(&(perm_scale(n, seed ^ 7) * &w)).unwrap();
    prop_assert!((&moved - &o).amax() < 1e-10, "PΛW normalizes differently: {:e}", (&moved - &o).amax());
    Ok(())
}

pub fn check_amari(n: usize, seed: u64) -> Result<(), TestCaseError> {
    let (Some(a), Some(other)) = (well_conditioned(n, seed), well_conditioned(n, seed ^ 3)) else { return Ok(()) };
    let pl = perm_scale(n, seed ^ 5);
    let d = amari_distance(&a, &(&pl * &a)).unwrap();
    prop_assert!(d.abs() < 1e-10, "d(A, PΛA) = {d:e}");
    let d = amari_mixing(&(&a * &pl), &a).unwrap();
    prop_assert!(d.abs() < 1e-10, "mixing distance of BPΛ to B = {d:e}");
    let base = amari_mixing(&other, &a).unwrap();
    let perm = pl.map(|v| if v != 0.0 { 1.0 } else { 0.0 });
    let signs = DMatrix::from_diagonal(&nalgebra::DVector::from_fn(n, |i, _| if i % 2 == 0 { -1.0 } else { 1.0 }));
    let moved = amari_mixing(&(&other * &perm * &signs), &a).unwrap();
    prop_assert!((moved - base).abs() < 1e-10, "column permutation or sign changed the distance: {base} vs {moved}");
    prop_assert!(base >= 0.0 && base <= (n as f64 - 1.0) + 1e-12);
    Ok(())
}

/// Stable random lag matrices with companion spectral radius below 0.95.
pub fn stable_lags(n: usize, p: usize, seed: u64) -> Vec<DMatrix<f64>> {
    let mut r = rng(seed);
    loop {
        let lags: Vec<DMatrix<f64>> = (0..p).map(|_| DMatrix::from_fn(n, n, |_, _| r.random_range(-0.5..0.5) / p as f64)).collect();
        if svarica::svar::companion_spectral_radius(&lags) < 0.95 {
            return lags;
        }
    }
}

/// `Ψ_h` by pushing each unit impulse through the recursion `y_t = Σ A_j y_{t−j}`.
pub fn impulse_oracle(lags: &[DMatrix<f64>], b: &DMatrix<f64>, horizon: usize) -> Vec<DMatrix<f64>> {
    let n = b.nrows();
    let mut out = vec![DMatrix::zeros(n, n); horizon + 1];
    for k in 0..n {
        let mut path: Vec<nalgebra::DVector<f64>> = vec![b.column(k).into_owned()];
        for h in 1..=horizon {
            let mut y = nalgebra::DVector::zeros(n);
            for (j, a) in lags.iter().enumerate() {
                if h > j {
                    y += a * &path[h - j - 1];
                }
            }
            path.push(y);
        }
        for (h, y) in path.into_iter().enumerate() {
            out[h].set_column(k, &y);
        }
    }
    out
}

pub fn check_ma(n: usize, p: usize, seed: u64) -> Result<(), TestCaseError> {
    let lags = stable_lags(n, p, seed);
    let b = DMatrix::from_fn(n, n, |i, j| ((i * 7 + j * 3 + seed as usize % 5) as f64).sin());
    let psi = ma_coefficients(&lags, &b, 8);
    let oracle = impulse_oracle(&lags, &b, 8);
    prop_assert!((&psi[0] - &b).amax() == 0.0);
    for h in 0..=8 {
        let err = (&psi[h] - &oracle[h]).amax();
        prop_assert!(err < 1e-12, "Ψ_{h} differs from the impulse oracle by {err:e}");
    }
    Ok(())
}

pub fn check_lp_impact(n: usize, p: usize, seed: u64) -> Result<(), TestCaseError> {
    let Some(w) = well_conditioned(n, seed ^ 11) else { return Ok(()) };
    let lags = stable_lags(n, p, seed);
    let mut r = rng(seed);
    let t = 150;
    let mut y = DMatrix::zeros(t, n);
    for s in 0..t {
        for v in 0..n {
            let mut val: f64 = StandardNormal.sample(&mut r);
            for (j, a) in lags.iter().enumerate() {
                if s > j {
                    val += (0..n).map(|c| a[(v, c)] * y[(s - j - 1, c)]).sum::<f64>();
                }
            }
            y[(s, v)] = val;
        }
    }
    let fit = fit_var(&TimeSeriesMatrix::from_matrix(y.clone(), "y"), VarOptions::new(p), None).unwrap();
    let shocks = &fit.residuals * w.transpose();
    let b = w.clone().try_inverse().unwrap();
    for k in 0..n {
        let table = irf_local_projection(&y, &shocks, k, LpControls::new(p), 0).map_err(|e| TestCaseError::fail(e.to_string()))?;
        let err = (table.responses.row(0).transpose() - b.column(k)).amax();
        prop_assert!(err < 1e-8, "shock {k}: impact response misses B̂ by {err:e}");
    }
    Ok(())
}

/// Fraction of `reps` null permutation tests with `p ≤ 0.1`.
pub fn null_rejection_rate(reps: usize, t: usize, seed: u64) -> f64 {
    let cfg = DistCovConfig::default();
    let st = StudentT::new(5.0).unwrap();
    let hits = (0..reps)
        .filter(|&i| {
            let mut r = rng(derive_seed(seed, &[i as u64]));
            let s = DMatrix::from_fn(t, 3, |_, _| st.sample(&mut r));
            permutation_test(&s, 199, &cfg, derive_seed(seed, &[i as u64, 1])).unwrap().p_value <= 0.1
        })
        .count();
    hits as f64 / reps as f64
}

fn ols_slope(x: &[f64], y: &[f64]) -> f64 {
    let mx = x.iter().sum::<f64>() / x.len() as f64;
    let my = y.iter().sum::<f64>() / y.len() as f64;
    x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum::<f64>() / x.iter().map(|a| (a - mx).powi(2)).sum::<f64>()
}

/// Slopes of log-RMSE against log-T for `Â_{11}` and `Â_{21}` in the damped
/// LT-HL design.
pub fn rate_slopes(reps: usize, seed: u64) -> (f64, f64) {
    let model = design::model(Structure::Lt, Noise::Hl, Some(HlSpec::new(1.1)));
    let lengths = [200usize, 400, 800];
    let (mut l11, mut l21) = (Vec::new(), Vec::new());
    for &t in &lengths {
        let a = &model.effective_matrices(t).0[0];
        let (mut s11, mut s21) = (0.0, 0.0);
        for rep in 0..reps {
            let (y, _) = simulate(&model, t, 200, derive_seed(seed, &[t as u64, rep as u64])).unwrap();
            let fit = fit_var(&y, VarOptions::new(1), None).unwrap();
            s11 += (fit.lags[0][(0, 0)] - a[(0, 0)]).powi(2);
            s21 += (fit.lags[0][(1, 0)] - a[(1, 0)]).powi(2);
        }
        l11.push((s11 / reps as f64).sqrt().ln());
        l21.push((s21 / reps as f64).sqrt().ln());
    }
    let lt: Vec<f64> = lengths.iter().map(|&t| (t as f64).ln()).collect();
    (ols_slope(&lt, &l11), ols_slope(&lt, &l21))
}

/// Pairwise double-centred V-statistic, written out from its definition.
pub fn dcov_oracle(x: &[f64], y: &[f64]) -> f64 {
    let t = x.len();
    let centre = |v: &[f64]| {
        let d = DMatrix::from_fn(t, t, |i, j| (v[i] - v[j]).abs());
        let rows: Vec<f64> = (0..t).map(|i| d.row(i).sum() / t as f64).collect();
        let all = d.sum() / (t * t) as f64;
        DMatrix::from_fn(t, t, |i, j| d[(i, j)] - rows[i] - rows[j] + all)
    };
    centre(x).component_mul(&centre(y)).sum() / (t * t) as f64
}
