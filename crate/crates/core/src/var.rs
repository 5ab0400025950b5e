//! Reduced-form VAR estimation by least squares, moving-average
//! coefficients and the regression-based detrending helpers.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::data::TimeSeriesMatrix;
use crate::error::{param, Error, Result};

/// Designs with a larger singular-value ratio are rejected.
pub const MAX_CONDITION: f64 = 1e12;

/// Least-squares fit of every column of `y` on `x`.
#[derive(Debug, Clone)]
pub struct Ols {
    /// `k × m`, one column per response.
    pub coef: DMatrix<f64>,
    pub residuals: DMatrix<f64>,
    /// Singular-value ratio of the column-scaled design.
    pub condition: f64,
    /// `(X'X)^{-1}` of the unscaled design.
    pub xtx_inv: DMatrix<f64>,
}

/// Solves `min ‖y − x b‖` through the SVD of the column-equilibrated design.
pub fn ols(x: &DMatrix<f64>, y: &DMatrix<f64>) -> Result<Ols> {
    if x.nrows() != y.nrows() {
        return Err(Error::Dimension(format!("design has {} rows, response {}", x.nrows(), y.nrows())));
    }
    let k = x.ncols();
    if x.nrows() <= k {
        return Err(Error::Estimation { reason: format!("{} observations for {k} regressors", x.nrows()), condition: f64::INFINITY });
    }
    let scale: Vec<f64> = (0..k).map(|j| x.column(j).norm()).collect();
    if let Some(j) = scale.iter().position(|&s| s == 0.0) {
        return Err(Error::Estimation { reason: format!("regressor {} is identically zero", j + 1), condition: f64::INFINITY });
    }
    let mut xs = x.clone();
    for (j, s) in scale.iter().enumerate() {
        xs.column_mut(j).unscale_mut(*s);
    }
    let svd = xs.svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    let condition = smax / smin;
    if !(condition < MAX_CONDITION) {
        return Err(Error::Estimation { reason: "regressor matrix is numerically singular".into(), condition });
    }
    let u = svd.u.as_ref().expect("u requested");
    let vt = svd.v_t.as_ref().expect("v_t requested");
    let mut uty = u.transpose() * y;
    for (i, s) in svd.singular_values.iter().enumerate() {
        uty.row_mut(i).unscale_mut(*s);
    }
    let mut coef = vt.transpose() * uty;
    let mut v_sinv2 = vt.transpose();
    for (j, s) in svd.singular_values.iter().enumerate() {
        v_sinv2.column_mut(j).unscale_mut(s * s);
    }
    let mut xtx_inv = v_sinv2 * vt;
    for i in 0..k {
        coef.row_mut(i).unscale_mut(scale[i]);
        for j in 0..k {
            xtx_inv[(i, j)] /= scale[i] * scale[j];
        }
    }
    let residuals = y - x * &coef;
    Ok(Ols { coef, residuals, condition, xtx_inv })
}

/// Column-wise sample covariance with divisor `T` after demeaning.
pub fn sample_covariance(x: &DMatrix<f64>) -> DMatrix<f64> {
    let t = x.nrows() as f64;
    let centered = demean(x);
    let mut c = centered.transpose() * &centered / t;
    c = (&c + c.transpose()) * 0.5;
    c
}

pub fn demean(x: &DMatrix<f64>) -> DMatrix<f64> {
    let mut c = x.clone();
    for mut col in c.column_iter_mut() {
        let m = col.mean();
        col.add_scalar_mut(-m);
    }
    c
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct VarOptions {
    pub p: usize,
    /// Include a constant; switch off only for data that is already demeaned.
    pub intercept: bool,
}

impl VarOptions {
    pub fn new(p: usize) -> Self {
        Self { p, intercept: true }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VarFit {
    pub p: usize,
    pub lags: Vec<DMatrix<f64>>,
    pub intercept: Option<DVector<f64>>,
    /// `n × q` loadings on the exogenous columns.
    pub exog_coeffs: DMatrix<f64>,
    /// `(T − p) × n`.
    pub residuals: DMatrix<f64>,
    /// Residual covariance with divisor `T − p`.
    pub residual_cov: DMatrix<f64>,
    /// `Â(1) = Σ_h Â_h`.
    pub sum_a1: DMatrix<f64>,
    pub condition: f64,
    /// Full regressor matrix used, kept for diagnostics.
    #[serde(skip)]
    pub design: DMatrix<f64>,
}

/// Regressor matrix `[1?, Y_{t-1}, …, Y_{t-p}, exog_t]` for `t = p..T`.
pub fn var_design(y: &DMatrix<f64>, p: usize, intercept: bool, exog: Option<&DMatrix<f64>>) -> DMatrix<f64> {
    let t = y.nrows();
    let n = y.ncols();
    let q = exog.map_or(0, |e| e.ncols());
    let k = usize::from(intercept) + n * p + q;
    let rows = t - p;
    let mut x = DMatrix::zeros(rows, k);
    let mut col = 0;
    if intercept {
        x.column_mut(0).fill(1.0);
        col = 1;
    }
    for h in 1..=p {
        x.view_mut((0, col), (rows, n)).copy_from(&y.rows(p - h, rows));
        col += n;
    }
    if let Some(e) = exog {
        x.view_mut((0, col), (rows, q)).copy_from(&e.rows(p, rows));
    }
    x
}

/// Equation-by-equation least squares for a VAR(p) with optional exogenous columns.
///
/// `exog` rows are aligned with the rows of `y`.
pub fn fit_var(y: &TimeSeriesMatrix, opts: VarOptions, exog: Option<&TimeSeriesMatrix>) -> Result<VarFit> {
    let VarOptions { p, intercept } = opts;
    let (t, n) = (y.len(), y.dim());
    let q = exog.map_or(0, TimeSeriesMatrix::dim);
    if let Some(e) = exog {
        if e.len() != t {
            return Err(Error::Dimension(format!("exogenous series has {} rows, data {t}", e.len())));
        }
    }
    if t <= n * p + q + 1 + p {
        return param(format!("T = {t} is too short for {n} variables, {p} lags and {q} exogenous columns"));
    }
    let x = var_design(&y.values, p, intercept, exog.map(|e| &e.values));
    let target = y.values.rows(p, t - p).into_owned();
    let fit = ols(&x, &target)?;
    let b = fit.coef.transpose();
    let mut col = 0;
    let intercept_hat = intercept.then(|| {
        col = 1;
        b.column(0).into_owned()
    });
    let lags: Vec<DMatrix<f64>> = (0..p).map(|h| b.columns(col + h * n, n).into_owned()).collect();
    let exog_coeffs = b.columns(col + p * n, q).into_owned();
    let sum_a1 = lags.iter().fold(DMatrix::zeros(n, n), |acc, a| acc + a);
    let residual_cov = sample_covariance(&fit.residuals);
    Ok(VarFit {
        p,
        lags,
        intercept: intercept_hat,
        exog_coeffs,
        residual_cov,
        residuals: fit.residuals,
        sum_a1,
        condition: fit.condition,
        design: x,
    })
}

/// `Ψ_0 = B`, `Ψ_h = Φ_h B` with `Φ_0 = I`, `Φ_h = Σ_{j ≤ min(h,p)} A_j Φ_{h−j}`.
pub fn ma_coefficients(lags: &[DMatrix<f64>], b: &DMatrix<f64>, horizon: usize) -> Vec<DMatrix<f64>> {
    let n = b.nrows();
    let mut phi: Vec<DMatrix<f64>> = Vec::with_capacity(horizon + 1);
    phi.push(DMatrix::identity(n, n));
    for h in 1..=horizon {
        let mut acc = DMatrix::zeros(n, n);
        for (j, a) in lags.iter().enumerate().take(h) {
            acc += a * &phi[h - j - 1];
        }
        phi.push(acc);
    }
    phi.iter().map(|f| f * b).collect()
}

/// `cos(jπ(t − 1/2)/T)` for `t = 1..T`, `j = 1..q`.
pub fn cosine_regressors(t: usize, q: usize) -> DMatrix<f64> {
    let tf = t as f64;
    DMatrix::from_fn(t, q, |s, j| ((j + 1) as f64 * std::f64::consts::PI * (s as f64 + 0.5) / tf).cos())
}

/// Residuals of each column on a constant and `q` low-frequency cosines.
pub fn low_frequency_detrend(y: &TimeSeriesMatrix, q: usize) -> Result<TimeSeriesMatrix> {
    let t = y.len();
    if 2 * q >= t {
        return param(format!("{q} cosines need T > {}, got {t}", 2 * q));
    }
    let mut x = DMatrix::zeros(t, q + 1);
    x.column_mut(0).fill(1.0);
    x.columns_mut(1, q).copy_from(&cosine_regressors(t, q));
    let fit = ols(&x, &y.values)?;
    Ok(TimeSeriesMatrix { values: fit.residuals, names: y.names.clone(), dates: y.dates.clone() })
}

/// Residuals of each column of `y` on a constant, `x` and `lags` lags of `x`.
///
/// The first `lags` observations are dropped.
pub fn purge_exogenous(y: &TimeSeriesMatrix, x: &TimeSeriesMatrix, lags: usize) -> Result<TimeSeriesMatrix> {
    let t = y.len();
    if x.len() != t {
        return Err(Error::Dimension(format!("exogenous series has {} rows, data {t}", x.len())));
    }
    if lags >= t {
        return param("more lags than observations");
    }
    let rows = t - lags;
    let m = x.dim();
    let mut design = DMatrix::zeros(rows, 1 + m * (lags + 1));
    design.column_mut(0).fill(1.0);
    for l in 0..=lags {
        design.view_mut((0, 1 + l * m), (rows, m)).copy_from(&x.values.rows(lags - l, rows));
    }
    let fit = ols(&design, &y.values.rows(lags, rows).into_owned())?;
    Ok(y.rows(lags, t).with_values(fit.residuals))
}

impl TimeSeriesMatrix {
    fn with_values(mut self, values: DMatrix<f64>) -> Self {
        self.values = values;
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::Rng;
    use rand_distr::StandardNormal;

    fn noise(t: usize, n: usize, seed: u64) -> DMatrix<f64> {
        let mut r = crate::seed::rng(seed);
        DMatrix::from_fn(t, n, |_, _| r.sample::<f64, _>(StandardNormal))
    }

    #[test]
    fn noiseless_recursion_recovers_lags() {
        let a1 = DMatrix::from_row_slice(2, 2, &[0.5, 0.1, -0.2, 0.3]);
        let a2 = DMatrix::from_row_slice(2, 2, &[0.1, 0.0, 0.05, -0.1]);
        let e = noise(60, 2, 1);
        // Excite with noise for a few steps, then let the system run freely.
        let mut y = DMatrix::zeros(60, 2);
        for t in 0..60 {
            let mut v = if t < 4 { e.row(t).transpose() } else { DVector::zeros(2) };
            if t >= 1 {
                v += &a1 * y.row(t - 1).transpose();
            }
            if t >= 2 {
                v += &a2 * y.row(t - 2).transpose();
            }
            y.set_row(t, &v.transpose());
        }
        let ts = TimeSeriesMatrix::from_matrix(y.rows(2, 16).into_owned(), "y");
        let fit = fit_var(&ts, VarOptions { p: 2, intercept: false }, None).unwrap();
        assert_relative_eq!(fit.lags[0], a1, epsilon = 1e-8);
        assert_relative_eq!(fit.lags[1], a2, epsilon = 1e-8);
        assert_relative_eq!(fit.sum_a1, a1 + a2, epsilon = 1e-8);
    }

    #[test]
    fn residuals_orthogonal_to_regressors() {
        let y = TimeSeriesMatrix::from_matrix(noise(200, 3, 2), "y");
        let ex = TimeSeriesMatrix::from_matrix(noise(200, 2, 3), "x");
        let fit = fit_var(&y, VarOptions::new(2), Some(&ex)).unwrap();
        let g = fit.design.transpose() * &fit.residuals;
        assert!(g.amax() < 1e-8 * fit.design.amax() * 200.0);
        assert_eq!(fit.residuals.nrows(), 198);
        assert_eq!(fit.exog_coeffs.shape(), (3, 2));
        assert_relative_eq!(fit.residual_cov.clone(), fit.residual_cov.transpose(), epsilon = 0.0);
    }

    #[test]
    fn singular_design_reports_condition() {
        let mut v = noise(50, 2, 4);
        let c0 = v.column(0).into_owned();
        v.set_column(1, &(c0 * 2.0));
        let y = TimeSeriesMatrix::from_matrix(v, "y");
        match fit_var(&y, VarOptions::new(1), None) {
            Err(Error::Estimation { condition, .. }) => assert!(condition > MAX_CONDITION),
            other => panic!("expected estimation error, got {other:?}"),
        }
    }

    #[test]
    fn ma_coefficients_basic_cases() {
        let b = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.0, 2.0]);
        let psi = ma_coefficients(&[DMatrix::zeros(2, 2)], &b, 3);
        assert_eq!(psi[0], b);
        assert!(psi[1..].iter().all(|m| m.amax() == 0.0));
        let psi = ma_coefficients(&[DMatrix::from_element(1, 1, 0.5)], &DMatrix::from_element(1, 1, 1.0), 5);
        for (h, m) in psi.iter().enumerate() {
            assert_relative_eq!(m[(0, 0)], 0.5f64.powi(h as i32), epsilon = 1e-15);
        }
    }

    #[test]
    fn detrend_cases() {
        let t = 200;
        let y = TimeSeriesMatrix::from_matrix(DMatrix::from_fn(t, 2, |s, j| s as f64 * 0.0 + 3.0 + j as f64), "y");
        let d = low_frequency_detrend(&y, 0).unwrap();
        assert!(d.values.amax() < 1e-12);
        let c = cosine_regressors(t, 1);
        let y = TimeSeriesMatrix::from_matrix(DMatrix::from_fn(t, 2, |s, _| 5.0 * c[(s, 0)]), "y");
        assert!(low_frequency_detrend(&y, 3).unwrap().values.amax() < 1e-10);
        assert!(low_frequency_detrend(&y, 100).is_err());
    }

    #[test]
    fn purge_cases() {
        let t = 300;
        let x = noise(t, 1, 5);
        let e = noise(t, 1, 6);
        let y = TimeSeriesMatrix::from_matrix(&x * 0.5 + &e, "y");
        let xs = TimeSeriesMatrix::from_matrix(x.clone(), "x");
        let out = purge_exogenous(&y, &xs, 0).unwrap();
        let expect = demean(&e);
        assert!((out.values - expect).amax() < 0.3);
        let same = purge_exogenous(&TimeSeriesMatrix::from_matrix(x, "y"), &xs, 1).unwrap();
        assert!(same.values.amax() < 1e-10);
        assert_eq!(same.len(), t - 1);
    }

    #[test]
    fn frisch_waugh_at_lag_zero() {
        let y = TimeSeriesMatrix::from_matrix(noise(150, 2, 7), "y");
        let x = TimeSeriesMatrix::from_matrix(noise(150, 2, 8), "x");
        let purged = purge_exogenous(&y, &x, 0).unwrap();
        let a = fit_var(&purged, VarOptions::new(0), None).unwrap();
        let b = fit_var(&y, VarOptions::new(0), Some(&x)).unwrap();
        assert_relative_eq!(a.residuals, b.residuals, epsilon = 1e-10);
        let a = fit_var(&purged, VarOptions::new(1), None).unwrap();
        let b = fit_var(&y, VarOptions::new(1), Some(&x)).unwrap();
        assert!((a.residuals - b.residuals).amax() > 1e-6);
    }
}
