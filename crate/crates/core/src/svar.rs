//! Structural VAR(p) models, their simulation, and the fixed simulation designs.
//!
//! `Y_t = A_1 Y_{t-1} + … + A_p Y_{t-p} + B u_t`. Under the HL regime the
//! first shock has infinite variance and its cross-equation loadings (column
//! 1, rows 2..n of every `A_h` and of `B`) shrink like `T^{-θ}` with
//! `θ = 1/α − 1/2`, where `T` is the length of the sample being generated.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::data::TimeSeriesMatrix;
use crate::distributions::{sample_shock, ShockSpec};
use crate::error::{param, Error, Result};
use crate::seed::derive_seed;

/// Largest admissible condition number of the mixing matrix.
pub const MIXING_CONDITION_CAP: f64 = 1e8;
pub const DEFAULT_BURN_IN: usize = 200;

/// Triangular-array damping of the heavy shock's cross-equation loadings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HlSpec {
    pub alpha: f64,
    /// Undamped `a_{i1}^{(h)}`, indexed `[h][i-2]`; defaults to the model's own entries.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub local_a: Option<Vec<Vec<f64>>>,
    /// Undamped `b_{i1}`, indexed `[i-2]`; defaults to the model's own entries.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub local_b: Option<Vec<f64>>,
}

impl HlSpec {
    pub fn new(alpha: f64) -> Self {
        Self { alpha, local_a: None, local_b: None }
    }

    pub fn theta(&self) -> f64 {
        1.0 / self.alpha - 0.5
    }

    /// `T^{-θ}`.
    pub fn damping(&self, t: usize) -> f64 {
        (t as f64).powf(-self.theta())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SvarModel {
    lags: Vec<DMatrix<f64>>,
    mixing: DMatrix<f64>,
    shocks: Vec<ShockSpec>,
    hl: Option<HlSpec>,
}

/// Spectral radius of the companion matrix of `lags`.
pub fn companion_spectral_radius(lags: &[DMatrix<f64>]) -> f64 {
    if lags.is_empty() {
        return 0.0;
    }
    let n = lags[0].nrows();
    let p = lags.len();
    let mut c = DMatrix::zeros(n * p, n * p);
    for (h, a) in lags.iter().enumerate() {
        c.view_mut((0, h * n), (n, n)).copy_from(a);
    }
    for i in n..n * p {
        c[(i, i - n)] = 1.0;
    }
    c.complex_eigenvalues().iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Ratio of extreme singular values; infinite for a singular matrix.
pub fn condition_number(m: &DMatrix<f64>) -> f64 {
    let sv = m.singular_values();
    let max = sv.max();
    let min = sv.min();
    if min <= 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

impl SvarModel {
    pub fn new(lags: Vec<DMatrix<f64>>, mixing: DMatrix<f64>, shocks: Vec<ShockSpec>, hl: Option<HlSpec>) -> Result<Self> {
        let n = mixing.nrows();
        if n < 2 || mixing.ncols() != n {
            return Err(Error::Dimension(format!("mixing matrix must be n×n with n ≥ 2, got {}×{}", n, mixing.ncols())));
        }
        if lags.is_empty() {
            return param("lag order must be at least 1");
        }
        if let Some(a) = lags.iter().find(|a| a.shape() != (n, n)) {
            return Err(Error::Dimension(format!("lag matrix is {:?}, expected {n}×{n}", a.shape())));
        }
        if shocks.len() != n {
            return Err(Error::Dimension(format!("{} shock specs for {n} variables", shocks.len())));
        }
        for s in &shocks {
            s.validate()?;
        }
        if let Some(hl) = &hl {
            if !(hl.alpha > 1.0 && hl.alpha < 2.0) {
                return param(format!("HL alpha must lie in (1, 2), got {}", hl.alpha));
            }
            if let Some(la) = &hl.local_a {
                if la.len() != lags.len() || la.iter().any(|r| r.len() != n - 1) {
                    return Err(Error::Dimension("hl.local_a must hold p rows of n-1 entries".into()));
                }
            }
            if hl.local_b.as_ref().is_some_and(|b| b.len() != n - 1) {
                return Err(Error::Dimension("hl.local_b must hold n-1 entries".into()));
            }
        }
        let model = Self { lags, mixing, shocks, hl };
        let (a, b) = model.undamped();
        let rho = companion_spectral_radius(&a);
        if rho >= 1.0 {
            return param(format!("lag polynomial is not stable (companion spectral radius {rho:.6})"));
        }
        let cond = condition_number(&b);
        if !(cond < MIXING_CONDITION_CAP) {
            return Err(Error::Singular(format!("mixing matrix condition number {cond:.3e}")));
        }
        Ok(model)
    }

    pub fn n(&self) -> usize {
        self.mixing.nrows()
    }

    pub fn p(&self) -> usize {
        self.lags.len()
    }

    pub fn lags(&self) -> &[DMatrix<f64>] {
        &self.lags
    }

    pub fn mixing(&self) -> &DMatrix<f64> {
        &self.mixing
    }

    pub fn shocks(&self) -> &[ShockSpec] {
        &self.shocks
    }

    pub fn hl(&self) -> Option<&HlSpec> {
        self.hl.as_ref()
    }

    /// Matrices with any `hl.local_*` overrides written in, before damping.
    fn undamped(&self) -> (Vec<DMatrix<f64>>, DMatrix<f64>) {
        let mut a = self.lags.clone();
        let mut b = self.mixing.clone();
        if let Some(hl) = &self.hl {
            if let Some(la) = &hl.local_a {
                for (m, row) in a.iter_mut().zip(la) {
                    for (i, &v) in row.iter().enumerate() {
                        m[(i + 1, 0)] = v;
                    }
                }
            }
            if let Some(lb) = &hl.local_b {
                for (i, &v) in lb.iter().enumerate() {
                    b[(i + 1, 0)] = v;
                }
            }
        }
        (a, b)
    }

    /// Lag and mixing matrices in force for a sample of length `t`.
    pub fn effective_matrices(&self, t: usize) -> (Vec<DMatrix<f64>>, DMatrix<f64>) {
        let Some(hl) = &self.hl else {
            return (self.lags.clone(), self.mixing.clone());
        };
        let (mut a, mut b) = self.undamped();
        let d = hl.damping(t.max(1));
        for m in a.iter_mut().chain(std::iter::once(&mut b)) {
            for i in 1..m.nrows() {
                m[(i, 0)] *= d;
            }
        }
        (a, b)
    }
}

/// Simulates `t` observations after discarding `burn_in` from a zero start.
///
/// Shock `j` is drawn from child stream `j` of `seed`. Returns `(Y, u)`.
pub fn simulate(model: &SvarModel, t: usize, burn_in: usize, seed: u64) -> Result<(TimeSeriesMatrix, TimeSeriesMatrix)> {
    if t == 0 {
        return param("sample length must be at least 1");
    }
    let n = model.n();
    let total = t + burn_in;
    let (a, b) = model.effective_matrices(t);
    let mut u = DMatrix::zeros(total, n);
    for (j, spec) in model.shocks.iter().enumerate() {
        let draws = sample_shock(spec, total, derive_seed(seed, &[j as u64]))?;
        u.column_mut(j).copy_from_slice(&draws);
    }
    let mut y = DMatrix::<f64>::zeros(total, n);
    let mut row = vec![0.0; n];
    for s in 0..total {
        for (i, r) in row.iter_mut().enumerate() {
            let mut acc = 0.0;
            for k in 0..n {
                acc += b[(i, k)] * u[(s, k)];
            }
            for (h, ah) in a.iter().enumerate() {
                if s > h {
                    for k in 0..n {
                        acc += ah[(i, k)] * y[(s - h - 1, k)];
                    }
                }
            }
            *r = acc;
        }
        if row.iter().any(|v| !v.is_finite()) {
            return Err(Error::Simulation { t: s.saturating_sub(burn_in) });
        }
        for (i, &v) in row.iter().enumerate() {
            y[(s, i)] = v;
        }
    }
    let y = TimeSeriesMatrix::from_matrix(y.rows(burn_in, t).into_owned(), "y");
    let u = TimeSeriesMatrix::from_matrix(u.rows(burn_in, t).into_owned(), "u");
    Ok((y, u))
}

/// How rows of an unmixing matrix are scaled in [`normalize_unmixing_rows`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RowNormalization {
    /// Unit Euclidean norm; reproduces the published true `B` matrices.
    #[default]
    UnitNorm,
    /// Each row divided by its sum.
    UnitSum,
}

/// Normalizes the rows of `w_init` and returns `(W, B = W^{-1})`.
pub fn normalize_unmixing_rows(w_init: &DMatrix<f64>, rule: RowNormalization) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    if !w_init.is_square() {
        return Err(Error::Dimension("unmixing matrix must be square".into()));
    }
    let mut w = w_init.clone();
    for i in 0..w.nrows() {
        let s = match rule {
            RowNormalization::UnitNorm => w.row(i).norm(),
            RowNormalization::UnitSum => w.row(i).sum(),
        };
        if s.abs() < 1e-12 * (1.0 + w.row(i).amax()) {
            return Err(Error::Degenerate(format!("row {} cannot be normalized (scale {s:e})", i + 1)));
        }
        w.row_mut(i).unscale_mut(s);
    }
    let b = w.clone().try_inverse().ok_or_else(|| Error::Singular("normalized unmixing matrix".into()))?;
    Ok((w, b))
}

/// The simulation designs: one lag matrix, two mixing structures, two shock sets.
pub mod design {
    use super::*;

    #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
    pub enum Structure {
        /// Mixing matrix not lower triangular.
        Nlt,
        /// Lower-triangular mixing matrix.
        Lt,
    }

    #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
    pub enum Noise {
        /// One stable(1.1) shock and two Student-t shocks.
        Hl,
        /// Three light-tailed shocks.
        Ll,
    }

    impl Structure {
        pub fn label(self) -> &'static str {
            match self {
                Structure::Nlt => "NLT",
                Structure::Lt => "LT",
            }
        }

        /// Mixing matrix before inversion and row normalization.
        ///
        /// The LT matrix is the one whose normalized inverse gives the true
        /// `B = [[1, 0, 0], [0.75, 1.25, 0], [1, 0.208, 1.339]]` of the design.
        pub fn b_init(self) -> DMatrix<f64> {
            match self {
                Structure::Nlt => DMatrix::from_row_slice(3, 3, &[1.0, 3.0, 0.0, 1.0, 1.0, 0.0, 0.0, 0.0, 1.0]),
                Structure::Lt => DMatrix::from_row_slice(3, 3, &[1.0, 0.0, 0.0, 0.75, 1.0, 0.0, 1.0, 1.0 / 6.0, 1.0]),
            }
        }

        /// `(W, B)` after unit-norm row normalization of `b_init^{-1}`.
        pub fn true_wb(self) -> (DMatrix<f64>, DMatrix<f64>) {
            let w_init = self.b_init().try_inverse().expect("design matrices are invertible");
            normalize_unmixing_rows(&w_init, RowNormalization::UnitNorm).expect("design matrices normalize")
        }
    }

    impl Noise {
        pub fn label(self) -> &'static str {
            match self {
                Noise::Hl => "HL",
                Noise::Ll => "LL",
            }
        }

        pub fn shocks(self) -> Vec<ShockSpec> {
            match self {
                Noise::Hl => vec![
                    ShockSpec::Stable { alpha: 1.1, beta_skew: 0.0 },
                    ShockSpec::StudentT { dof: 5.0, standardized: true },
                    ShockSpec::StudentT { dof: 10.0, standardized: true },
                ],
                Noise::Ll => vec![
                    ShockSpec::PearsonMoments { mean: 0.0, variance: 1.0, skewness: 2.0, kurtosis: 20.0 },
                    ShockSpec::PearsonMoments { mean: 0.0, variance: 1.0, skewness: -2.0, kurtosis: 10.0 },
                    ShockSpec::StudentT { dof: 15.0, standardized: true },
                ],
            }
        }
    }

    pub fn lag_matrix() -> DMatrix<f64> {
        DMatrix::from_row_slice(3, 3, &[0.2, 0.0, 0.0, 0.3, 0.6, 0.0, 0.4, 0.3, 0.8])
    }

    /// The design model; `hl` optionally switches on triangular-array damping.
    pub fn model(structure: Structure, noise: Noise, hl: Option<HlSpec>) -> SvarModel {
        let (_, b) = structure.true_wb();
        SvarModel::new(vec![lag_matrix()], b, noise.shocks(), hl).expect("design model is valid")
    }
}

/// On-disk model description (TOML).
///
/// ```toml
/// p = 1
/// n = 3
/// names = ["y1", "y2", "y3"]
/// A = [[[0.2, 0.0, 0.0], [0.3, 0.6, 0.0], [0.4, 0.3, 0.8]]]
/// W_init = [[1.0, -3.0, 0.0], [-1.0, 1.0, 0.0], [0.0, 0.0, 1.0]]
/// normalization = "unit_norm"
///
/// [[shocks]]
/// kind = "stable"
/// alpha = 1.1
/// beta_skew = 0.0
///
/// [hl]
/// alpha = 1.1
/// ```
///
/// Exactly one of `B` and `W_init` must be present; `W_init` is row-normalized
/// and inverted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub names: Option<Vec<String>>,
    #[serde(rename = "A")]
    pub a: Vec<Vec<Vec<f64>>>,
    #[serde(rename = "B", default, skip_serializing_if = "Option::is_none")]
    pub b: Option<Vec<Vec<f64>>>,
    #[serde(rename = "W_init", default, skip_serializing_if = "Option::is_none")]
    pub w_init: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    pub normalization: RowNormalization,
    pub shocks: Vec<ShockSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hl: Option<HlSpec>,
}

fn matrix_from_rows(rows: &[Vec<f64>], what: &str) -> Result<DMatrix<f64>> {
    let r = rows.len();
    let c = rows.first().map_or(0, Vec::len);
    if r == 0 || rows.iter().any(|row| row.len() != c) {
        return Err(Error::Config(format!("{what} must be a non-empty rectangular list of rows")));
    }
    Ok(DMatrix::from_row_iterator(r, c, rows.iter().flatten().copied()))
}

fn matrix_to_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

impl ModelConfig {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        toml::from_str(s).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn from_model(model: &SvarModel) -> Self {
        Self {
            p: Some(model.p()),
            n: Some(model.n()),
            names: None,
            a: model.lags.iter().map(matrix_to_rows).collect(),
            b: Some(matrix_to_rows(&model.mixing)),
            w_init: None,
            normalization: RowNormalization::default(),
            shocks: model.shocks.clone(),
            hl: model.hl.clone(),
        }
    }

    pub fn build(&self) -> Result<SvarModel> {
        let mixing = match (&self.b, &self.w_init) {
            (Some(b), None) => matrix_from_rows(b, "B")?,
            (None, Some(w)) => normalize_unmixing_rows(&matrix_from_rows(w, "W_init")?, self.normalization)?.1,
            _ => return Err(Error::Config("exactly one of B and W_init must be given".into())),
        };
        let lags = self.a.iter().map(|m| matrix_from_rows(m, "A")).collect::<Result<Vec<_>>>()?;
        if self.p.is_some_and(|p| p != lags.len()) {
            return Err(Error::Config(format!("p = {} but {} lag matrices given", self.p.unwrap_or(0), lags.len())));
        }
        if self.n.is_some_and(|n| n != mixing.nrows()) {
            return Err(Error::Config(format!("n = {} but mixing matrix is {}×{}", self.n.unwrap_or(0), mixing.nrows(), mixing.ncols())));
        }
        if self.names.as_ref().is_some_and(|names| names.len() != mixing.nrows()) {
            return Err(Error::Config("names must have one entry per variable".into()));
        }
        SvarModel::new(lags, mixing, self.shocks.clone(), self.hl.clone())
    }
}
