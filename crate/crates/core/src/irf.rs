//! Impulse responses to one identified shock.

use std::io::Write;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::data::fmt_num;
use crate::error::{Error, Result};
use crate::ica::IcaResult;
use crate::svar::companion_spectral_radius;
use crate::var::{ma_coefficients, ols};
use crate::whiten::{whiten, WhitenVariant};

pub const DEFAULT_HORIZON: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IrfEstimator {
    VarImplied,
    CholeskiImplied,
    LocalProjection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IrfTable {
    pub estimator: IrfEstimator,
    pub shock: usize,
    /// `(H + 1) × n`, row `h` is the response at horizon `h`.
    pub responses: DMatrix<f64>,
    /// Conventional OLS standard errors, local projections only. The
    /// estimators have non-standard limits, so these are descriptive.
    pub se: Option<DMatrix<f64>>,
    /// Size of the shock in its original units.
    pub shock_scale: f64,
}

impl IrfTable {
    pub fn horizon(&self) -> usize {
        self.responses.nrows() - 1
    }
}

fn check_shock(shock: usize, n: usize) -> Result<()> {
    if shock >= n {
        return Err(Error::Parameter(format!("shock index {shock} out of range for {n} variables")));
    }
    Ok(())
}

fn recursion_table(lags: &[DMatrix<f64>], b: &DMatrix<f64>, shock: usize, horizon: usize, estimator: IrfEstimator) -> Result<IrfTable> {
    let n = b.nrows();
    if !b.is_square() || lags.iter().any(|a| a.shape() != (n, n)) {
        return Err(Error::Dimension("lag and impact matrices must be n × n".into()));
    }
    check_shock(shock, n)?;
    if !lags.is_empty() {
        let rho = companion_spectral_radius(lags);
        if rho >= 1.0 {
            log::warn!("companion spectral radius {rho:.4} is not below one; responses do not decay");
        }
    }
    let psi = ma_coefficients(lags, b, horizon);
    let responses = DMatrix::from_fn(horizon + 1, n, |h, i| psi[h][(i, shock)]);
    Ok(IrfTable { estimator, shock, responses, se: None, shock_scale: 1.0 })
}

/// Column `shock` of `Ψ_h = Φ_h B̂` for `h = 0..=horizon`.
pub fn irf_var_implied(lags: &[DMatrix<f64>], b_hat: &DMatrix<f64>, shock: usize, horizon: usize) -> Result<IrfTable> {
    recursion_table(lags, b_hat, shock, horizon, IrfEstimator::VarImplied)
}

/// Cholesky factor of `residual_cov` with variables taken in `ordering`,
/// returned with rows and columns in the original variable order.
pub fn ordered_cholesky(residual_cov: &DMatrix<f64>, ordering: &[usize]) -> Result<DMatrix<f64>> {
    let n = residual_cov.nrows();
    if !residual_cov.is_square() {
        return Err(Error::Dimension("covariance must be square".into()));
    }
    if ordering.len() != n {
        return Err(Error::Dimension(format!("ordering has {} entries for {n} variables", ordering.len())));
    }
    let mut seen = vec![false; n];
    for &i in ordering {
        if i >= n || std::mem::replace(&mut seen[i], true) {
            return Err(Error::Parameter(format!("ordering {ordering:?} is not a permutation")));
        }
    }
    let permuted = DMatrix::from_fn(n, n, |i, j| residual_cov[(ordering[i], ordering[j])]);
    let min_eigenvalue = permuted.clone().symmetric_eigenvalues().min();
    if !(min_eigenvalue > 0.0) {
        return Err(Error::NotPositiveDefinite { min_eigenvalue });
    }
    let l = permuted.cholesky().ok_or(Error::NotPositiveDefinite { min_eigenvalue })?.l();
    let mut p = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            p[(ordering[i], ordering[j])] = l[(i, j)];
        }
    }
    Ok(p)
}

/// Same recursion as [`irf_var_implied`] with `B` replaced by the ordered
/// Cholesky factor; `shock` indexes variables in the original order.
pub fn irf_choleski(lags: &[DMatrix<f64>], residual_cov: &DMatrix<f64>, ordering: &[usize], shock: usize, horizon: usize) -> Result<IrfTable> {
    let b = ordered_cholesky(residual_cov, ordering)?;
    recursion_table(lags, &b, shock, horizon, IrfEstimator::CholeskiImplied)
}

/// Cholesky IRF computed from residuals instead of a covariance matrix.
pub fn irf_choleski_from_residuals(lags: &[DMatrix<f64>], residuals: &DMatrix<f64>, ordering: &[usize], shock: usize, horizon: usize) -> Result<IrfTable> {
    let (_, w) = whiten(residuals, &WhitenVariant::Cholesky { ordering: ordering.to_vec() })?;
    recursion_table(lags, &w.factor, shock, horizon, IrfEstimator::CholeskiImplied)
}

/// Regressors of the local projections besides the shock itself.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LpControls {
    /// Lags of every variable in `Y`.
    pub lags: usize,
    /// Include the other contemporaneous shocks.
    pub other_shocks: bool,
    pub intercept: bool,
}

impl LpControls {
    pub fn new(lags: usize) -> Self {
        Self { lags, other_shocks: true, intercept: true }
    }
}

/// Local projections of `Y_{t+h}` on `û_{t,shock}` and controls.
///
/// `shocks` row `r` belongs to period `t = controls.lags + r` of `y`, which is
/// the alignment of VAR residuals from a fit with the same lag order.
pub fn irf_local_projection(y: &DMatrix<f64>, shocks: &DMatrix<f64>, shock: usize, controls: LpControls, horizon: usize) -> Result<IrfTable> {
    let (t, n) = y.shape();
    let p = controls.lags;
    let m = shocks.ncols();
    check_shock(shock, m)?;
    if shocks.nrows() + p != t {
        return Err(Error::Dimension(format!("{} shock rows do not align with {t} observations and {p} lags", shocks.nrows())));
    }
    let others: Vec<usize> = if controls.other_shocks { (0..m).filter(|&j| j != shock).collect() } else { Vec::new() };
    let k = 1 + others.len() + n * p + usize::from(controls.intercept);
    if t < p + horizon + k + 1 {
        return Err(Error::Estimation { reason: format!("T = {t} leaves too few observations at horizon {horizon}"), condition: f64::INFINITY });
    }
    let mut responses = DMatrix::zeros(horizon + 1, n);
    let mut se = DMatrix::zeros(horizon + 1, n);
    for h in 0..=horizon {
        let rows = t - p - h;
        let mut x = DMatrix::zeros(rows, k);
        for r in 0..rows {
            let period = p + r;
            let mut c = 0;
            x[(r, c)] = shocks[(r, shock)];
            c += 1;
            for &j in &others {
                x[(r, c)] = shocks[(r, j)];
                c += 1;
            }
            for l in 1..=p {
                for v in 0..n {
                    x[(r, c)] = y[(period - l, v)];
                    c += 1;
                }
            }
            if controls.intercept {
                x[(r, c)] = 1.0;
            }
        }
        let target = y.rows(p + h, rows).into_owned();
        let fit = ols(&x, &target)?;
        let dof = (rows - k) as f64;
        for v in 0..n {
            responses[(h, v)] = fit.coef[(0, v)];
            let s2 = fit.residuals.column(v).norm_squared() / dof;
            se[(h, v)] = (s2 * fit.xtx_inv[(0, 0)]).max(0.0).sqrt();
        }
    }
    Ok(IrfTable { estimator: IrfEstimator::LocalProjection, shock, responses, se: Some(se), shock_scale: 1.0 })
}

fn impact_on(b: f64, target: usize) -> Result<f64> {
    if b == 0.0 || !b.is_finite() {
        return Err(Error::Ambiguous(format!("impact on variable {} is {b}", target + 1)));
    }
    Ok(b)
}

/// Rescales the shock so its impact on `target` is one; the response shape
/// is unchanged.
pub fn unit_effect_rescale(table: &IrfTable, target: usize) -> Result<IrfTable> {
    if target >= table.responses.ncols() {
        return Err(Error::Parameter(format!("target index {target} out of range")));
    }
    let scale = impact_on(table.responses[(0, target)], target)?;
    let mut out = table.clone();
    out.responses /= scale;
    if let Some(se) = out.se.as_mut() {
        *se /= scale.abs();
    }
    out.shock_scale *= scale;
    Ok(out)
}

/// Same rescaling applied to column `shock` of an identification result:
/// the shock is multiplied by `B̂[target, shock]` and the `B̂` column divided
/// by it. Returns the new result and the scale.
pub fn unit_effect_rescale_ica(result: &IcaResult, shock: usize, target: usize) -> Result<(IcaResult, f64)> {
    let n = result.b_hat.nrows();
    check_shock(shock, n)?;
    if target >= n {
        return Err(Error::Parameter(format!("target index {target} out of range")));
    }
    let scale = impact_on(result.b_hat[(target, shock)], target)?;
    let mut out = result.clone();
    out.b_hat.column_mut(shock).unscale_mut(scale);
    out.w_hat.row_mut(shock).scale_mut(scale);
    out.shocks.column_mut(shock).scale_mut(scale);
    Ok((out, scale))
}

/// Writes the responses of variable `response` as `h,var,lp,lp.se,chol`.
pub fn write_table3<W: Write>(w: W, response: usize, var: &IrfTable, lp: &IrfTable, chol: &IrfTable) -> Result<()> {
    let h = var.horizon();
    if lp.horizon() != h || chol.horizon() != h {
        return Err(Error::Dimension("IRF tables have different horizons".into()));
    }
    if response >= var.responses.ncols() {
        return Err(Error::Parameter(format!("response index {response} out of range")));
    }
    let se = lp.se.as_ref().ok_or_else(|| Error::Parameter("local-projection table has no standard errors".into()))?;
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["h", "var", "lp", "lp.se", "chol"])?;
    for i in 0..=h {
        out.write_record([
            i.to_string(),
            fmt_num(var.responses[(i, response)]),
            fmt_num(lp.responses[(i, response)]),
            fmt_num(se[(i, response)]),
            fmt_num(chol.responses[(i, response)]),
        ])?;
    }
    out.flush()?;
    Ok(())
}
