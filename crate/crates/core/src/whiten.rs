//! Second-moment whitening of residuals.
//!
//! All variants use the demeaned sample covariance with divisor `T′` and
//! return `whitened = residuals · P^{-T}` where `P Pᵀ = Σ̂`. The residuals are
//! not recentred, so whitened columns carry the original means.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats::sample_kurtosis;
use crate::var::{demean, sample_covariance};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WhitenVariant {
    /// Cholesky factor of the covariance of the columns taken in `ordering`
    /// (0-based). Output columns stay in the original order.
    Cholesky { ordering: Vec<usize> },
    /// Symmetric square root `U D^{1/2} Uᵀ` of the covariance.
    CovarianceSvd,
    /// Thin SVD of the demeaned data, scaled to unit sample variance.
    DataSvd,
}

impl WhitenVariant {
    pub fn cholesky_natural(n: usize) -> Self {
        WhitenVariant::Cholesky { ordering: (0..n).collect() }
    }

    pub fn label(&self) -> String {
        match self {
            WhitenVariant::Cholesky { ordering } => {
                let o: Vec<String> = ordering.iter().map(|i| (i + 1).to_string()).collect();
                format!("cholesky[{}]", o.join(","))
            }
            WhitenVariant::CovarianceSvd => "covariance_svd".into(),
            WhitenVariant::DataSvd => "data_svd".into(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Whitener {
    pub variant: WhitenVariant,
    /// `P` with `P Pᵀ = Σ̂`.
    pub factor: DMatrix<f64>,
    /// `P^{-1}`.
    pub inverse_factor: DMatrix<f64>,
}

impl Whitener {
    /// Applies the stored transform to new rows.
    pub fn apply(&self, x: &DMatrix<f64>) -> DMatrix<f64> {
        x * self.inverse_factor.transpose()
    }
}

fn check_permutation(ordering: &[usize], n: usize) -> Result<()> {
    let mut seen = vec![false; n];
    if ordering.len() != n {
        return Err(Error::Dimension(format!("ordering has {} entries for {n} columns", ordering.len())));
    }
    for &i in ordering {
        if i >= n || std::mem::replace(&mut seen[i], true) {
            return Err(Error::Parameter(format!("ordering {ordering:?} is not a permutation of 0..{n}")));
        }
    }
    Ok(())
}

fn check_pd(cov: &DMatrix<f64>) -> Result<()> {
    let eig = cov.clone().symmetric_eigenvalues();
    let min = eig.min();
    if !(min > 1e-12 * eig.max().max(f64::MIN_POSITIVE)) {
        return Err(Error::NotPositiveDefinite { min_eigenvalue: min });
    }
    Ok(())
}

/// Whitens `residuals` (`T′ × n`) by `variant`.
pub fn whiten(residuals: &DMatrix<f64>, variant: &WhitenVariant) -> Result<(DMatrix<f64>, Whitener)> {
    let (t, n) = residuals.shape();
    if t <= n {
        return Err(Error::Degenerate(format!("{t} observations for {n} columns")));
    }
    let cov = sample_covariance(residuals);
    check_pd(&cov)?;
    let factor = match variant {
        WhitenVariant::Cholesky { ordering } => {
            check_permutation(ordering, n)?;
            let permuted = DMatrix::from_fn(n, n, |i, j| cov[(ordering[i], ordering[j])]);
            let l = permuted
                .cholesky()
                .ok_or_else(|| Error::NotPositiveDefinite { min_eigenvalue: cov.clone().symmetric_eigenvalues().min() })?
                .l();
            // P = Π L Πᵀ with Π mapping permuted position k to column ordering[k].
            let mut p = DMatrix::zeros(n, n);
            for i in 0..n {
                for j in 0..n {
                    p[(ordering[i], ordering[j])] = l[(i, j)];
                }
            }
            p
        }
        WhitenVariant::CovarianceSvd => {
            let eig = cov.symmetric_eigen();
            let sqrt = eig.eigenvalues.map(f64::sqrt);
            &eig.eigenvectors * DMatrix::from_diagonal(&sqrt) * eig.eigenvectors.transpose()
        }
        WhitenVariant::DataSvd => {
            let svd = demean(residuals).svd(false, true);
            let v = svd.v_t.expect("v_t requested").transpose();
            let d = svd.singular_values / (t as f64).sqrt();
            v * DMatrix::from_diagonal(&d)
        }
    };
    let inverse_factor = factor.clone().try_inverse().ok_or_else(|| Error::Singular("whitening factor".into()))?;
    let whitener = Whitener { variant: variant.clone(), factor, inverse_factor };
    Ok((whitener.apply(residuals), whitener))
}

/// Column indices sorted by descending sample kurtosis, ties by index.
pub fn kurtosis_order(residuals: &DMatrix<f64>) -> Result<Vec<usize>> {
    let k = column_kurtosis(residuals)?;
    let mut idx: Vec<usize> = (0..k.len()).collect();
    idx.sort_by(|&a, &b| k[b].total_cmp(&k[a]).then(a.cmp(&b)));
    Ok(idx)
}

pub fn column_kurtosis(x: &DMatrix<f64>) -> Result<Vec<f64>> {
    let t = x.nrows();
    (0..x.ncols()).map(|j| sample_kurtosis(&x.as_slice()[j * t..(j + 1) * t])).collect()
}

/// `Σ_s x_{s a} x_{s b} / Σ_s x_{s a}²`, the loading of column `b` on column `a`
/// that a Cholesky step with `a` first removes.
pub fn cross_moment_ratio(x: &DMatrix<f64>, a: usize, b: usize) -> f64 {
    let num: f64 = x.column(a).dot(&x.column(b));
    num / x.column(a).norm_squared()
}
