//! Distance-covariance ICA over orthogonal rotations of whitened residuals.
//!
//! After whitening, the unmixing matrix is `W = O P^{-1}` for an orthogonal
//! `O`, parameterized by `n(n−1)/2` Givens angles. The angles minimize the
//! aggregated distance-covariance objective of `S = ẽ Oᵀ` by coordinate
//! descent with a golden-section line search on a shrinking bracket.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

use nalgebra::DMatrix;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dcov::{DistCovConfig, ObjectiveKernel};
use crate::error::{Error, Result};
use crate::seed::child_rng;
use crate::whiten::{column_kurtosis, whiten, WhitenVariant, Whitener};

/// Plane pairs `(0,1), (0,2), …, (0,n−1), (1,2), …` in rotation order.
pub fn givens_pairs(n: usize) -> Vec<(usize, usize)> {
    (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect()
}

/// Rotation angles of an `n × n` orthogonal matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrthogonalParam {
    pub n: usize,
    pub angles: Vec<f64>,
}

impl OrthogonalParam {
    pub fn identity(n: usize) -> Self {
        Self { n, angles: vec![0.0; n * (n - 1) / 2] }
    }

    pub fn new(n: usize, angles: Vec<f64>) -> Result<Self> {
        if angles.len() != n * (n - 1) / 2 {
            return Err(Error::Dimension(format!("{} angles for n = {n}", angles.len())));
        }
        Ok(Self { n, angles })
    }

    /// `O = G_1 G_2 ⋯ G_K` with `G_k` the rotation by `angles[k]` in plane `k`.
    pub fn matrix(&self) -> DMatrix<f64> {
        let mut o = DMatrix::identity(self.n, self.n);
        for (&(i, j), &a) in givens_pairs(self.n).iter().zip(&self.angles) {
            let (s, c) = a.sin_cos();
            // Right-multiply by the plane rotation: mixes columns i and j.
            for r in 0..self.n {
                let (oi, oj) = (o[(r, i)], o[(r, j)]);
                o[(r, i)] = c * oi + s * oj;
                o[(r, j)] = -s * oi + c * oj;
            }
        }
        o
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IcaOptions {
    /// Number of starts: the identity rotation plus `restarts − 1` random ones.
    pub restarts: usize,
    pub max_sweeps: usize,
    /// A sweep improving the objective by less than this ends the search.
    pub tol: f64,
    /// Half-width of the first line-search bracket around each angle.
    pub initial_step: f64,
    /// Bracket multiplier applied after every line search, floored at twice the last move.
    pub shrink: f64,
    /// Smallest bracket half-width.
    pub min_step: f64,
    /// Golden-section stops when the bracket is below this fraction of its start.
    pub line_tol: f64,
    pub seed: u64,
}

impl Default for IcaOptions {
    fn default() -> Self {
        Self {
            restarts: 8,
            max_sweeps: 500,
            tol: 1e-9,
            initial_step: FRAC_PI_4,
            shrink: 0.5,
            min_step: 1e-4,
            line_tol: 1e-2,
            seed: 0,
        }
    }
}

impl IcaOptions {
    pub fn validate(&self) -> Result<()> {
        if self.restarts == 0 || self.max_sweeps == 0 {
            return Err(Error::Parameter("restarts and max_sweeps must be positive".into()));
        }
        if !(self.tol >= 0.0 && self.initial_step > 0.0 && self.min_step > 0.0) {
            return Err(Error::Parameter("tolerances and steps must be positive".into()));
        }
        if !(self.shrink > 0.0 && self.shrink <= 1.0 && self.line_tol > 0.0 && self.line_tol < 1.0) {
            return Err(Error::Parameter("shrink must lie in (0, 1] and line_tol in (0, 1)".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizerReport {
    /// Sweeps used by the winning start.
    pub sweeps: usize,
    /// Objective evaluations over all starts.
    pub evaluations: usize,
    pub restarts: usize,
    /// Index of the winning start; 0 is the identity.
    pub best_restart: usize,
    pub converged: bool,
    /// Objective at each start's initial angles, in start order.
    pub start_objectives: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IcaResult {
    pub whitener: Whitener,
    pub o_hat: DMatrix<f64>,
    pub angles: Vec<f64>,
    /// Unit-norm rows, max-modulus entry positive, ordered by descending shock kurtosis.
    pub w_omega: DMatrix<f64>,
    /// `w_omega^{-1}`.
    pub b_omega: DMatrix<f64>,
    /// `w_omega` with rows scaled so every recovered shock has unit sample variance.
    pub w_hat: DMatrix<f64>,
    /// `w_hat^{-1}`.
    pub b_hat: DMatrix<f64>,
    /// `û = ê · w_hatᵀ`.
    pub shocks: DMatrix<f64>,
    /// Sample kurtosis of each recovered shock, non-increasing.
    pub kurtosis: Vec<f64>,
    pub objective: f64,
    pub report: OptimizerReport,
}

/// Objective of `whitened · O(angles)ᵀ`, reusing buffers across calls.
struct RotatedObjective<'a> {
    whitened: &'a DMatrix<f64>,
    kernel: ObjectiveKernel<f64>,
    buf: Vec<f64>,
    evaluations: usize,
}

impl<'a> RotatedObjective<'a> {
    fn new(whitened: &'a DMatrix<f64>, beta: f64) -> Result<Self> {
        let (t, n) = whitened.shape();
        Ok(Self { whitened, kernel: ObjectiveKernel::new(t, n, beta)?, buf: vec![0.0; t * n], evaluations: 0 })
    }

    fn eval(&mut self, angles: &[f64]) -> Result<f64> {
        let (t, n) = self.whitened.shape();
        let o = OrthogonalParam { n, angles: angles.to_vec() }.matrix();
        let src = self.whitened.as_slice();
        // Column k of S is Σ_m O[k, m] ẽ[:, m].
        for k in 0..n {
            let dst = &mut self.buf[k * t..(k + 1) * t];
            dst.fill(0.0);
            for m in 0..n {
                let w = o[(k, m)];
                for (d, s) in dst.iter_mut().zip(&src[m * t..(m + 1) * t]) {
                    *d += w * s;
                }
            }
        }
        self.evaluations += 1;
        self.kernel.eval(&self.buf)
    }
}

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Golden-section minimum of `f` on `[lo, hi]`, returning `(x, f(x))`.
fn golden_section(mut f: impl FnMut(f64) -> Result<f64>, mut lo: f64, mut hi: f64, tol: f64) -> Result<(f64, f64)> {
    let mut c = hi - INV_PHI * (hi - lo);
    let mut d = lo + INV_PHI * (hi - lo);
    let mut fc = f(c)?;
    let mut fd = f(d)?;
    while hi - lo > tol {
        if fc <= fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - INV_PHI * (hi - lo);
            fc = f(c)?;
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + INV_PHI * (hi - lo);
            fd = f(d)?;
        }
    }
    Ok(if fc <= fd { (c, fc) } else { (d, fd) })
}

struct StartOutcome {
    angles: Vec<f64>,
    value: f64,
    start_value: f64,
    sweeps: usize,
    evaluations: usize,
    converged: bool,
}

fn coordinate_descent(whitened: &DMatrix<f64>, beta: f64, start: Vec<f64>, opts: &IcaOptions) -> Result<StartOutcome> {
    let mut obj = RotatedObjective::new(whitened, beta)?;
    let mut angles = start;
    let mut value = obj.eval(&angles)?;
    let start_value = value;
    let mut steps = vec![opts.initial_step; angles.len()];
    let mut sweeps = 0;
    let mut converged = false;
    while sweeps < opts.max_sweeps {
        sweeps += 1;
        let before = value;
        let sweep_start = angles.clone();
        for k in 0..angles.len() {
            let centre = angles[k];
            let step = steps[k];
            let mut trial = angles.clone();
            let (x, fx) = golden_section(
                |a| {
                    trial[k] = a;
                    obj.eval(&trial)
                },
                centre - step,
                centre + step,
                2.0 * step * opts.line_tol,
            )?;
            let moved = if fx < value {
                angles[k] = x;
                value = fx;
                (x - centre).abs()
            } else {
                0.0
            };
            // Keep the bracket wide enough to follow a drifting minimum.
            steps[k] = (step * opts.shrink).max(2.0 * moved).clamp(opts.min_step, opts.initial_step);
        }
        if before - value < opts.tol {
            converged = true;
            break;
        }
        // Pattern move: extrapolate along the sweep's displacement while it helps.
        let delta: Vec<f64> = angles.iter().zip(&sweep_start).map(|(a, b)| a - b).collect();
        let mut factor = 1.0;
        loop {
            let trial: Vec<f64> = angles.iter().zip(&delta).map(|(a, d)| a + factor * d).collect();
            let f = obj.eval(&trial)?;
            if f >= value {
                break;
            }
            angles = trial;
            value = f;
            factor *= 2.0;
        }
    }
    Ok(StartOutcome { angles, value, start_value, sweeps, evaluations: obj.evaluations, converged })
}

/// Minimizes the aggregated objective over rotations of `whitened`.
///
/// Returns the winning angles, objective value and optimizer report. Starts
/// run in parallel; the lowest objective wins, ties going to the lower start
/// index.
pub fn optimize_rotation(whitened: &DMatrix<f64>, config: &DistCovConfig, opts: &IcaOptions) -> Result<(Vec<f64>, f64, OptimizerReport)> {
    config.validate()?;
    opts.validate()?;
    let n = whitened.ncols();
    let k = n * (n - 1) / 2;
    let starts: Vec<Vec<f64>> = (0..opts.restarts)
        .map(|r| {
            if r == 0 {
                vec![0.0; k]
            } else {
                let mut rng = child_rng(opts.seed, &[r as u64]);
                (0..k).map(|_| rng.random_range(-FRAC_PI_2..FRAC_PI_2)).collect()
            }
        })
        .collect();
    let outcomes: Vec<StartOutcome> = if starts.len() > 1 {
        starts.into_par_iter().map(|s| coordinate_descent(whitened, config.beta, s, opts)).collect::<Result<_>>()?
    } else {
        starts.into_iter().map(|s| coordinate_descent(whitened, config.beta, s, opts)).collect::<Result<_>>()?
    };
    let best = (0..outcomes.len())
        .min_by(|&a, &b| outcomes[a].value.total_cmp(&outcomes[b].value).then(a.cmp(&b)))
        .expect("at least one start");
    let report = OptimizerReport {
        sweeps: outcomes[best].sweeps,
        evaluations: outcomes.iter().map(|o| o.evaluations).sum(),
        restarts: outcomes.len(),
        best_restart: best,
        converged: outcomes[best].converged,
        start_objectives: outcomes.iter().map(|o| o.start_value).collect(),
    };
    let StartOutcome { angles, value, .. } = outcomes.into_iter().nth(best).expect("index in range");
    Ok((angles, value, report))
}

/// Lexicographic `a ≺ b`.
fn lex_cmp(a: &[f64], b: &[f64]) -> std::cmp::Ordering {
    a.iter().zip(b).map(|(x, y)| x.total_cmp(y)).find(|o| o.is_ne()).unwrap_or(std::cmp::Ordering::Equal)
}

/// Scales rows to unit norm with the max-modulus entry positive, then sorts
/// them in ascending lexicographic order.
pub fn omega_normalize(w: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = w.nrows();
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(n);
    for i in 0..n {
        let r = w.row(i);
        let norm = r.norm();
        if !(norm > 0.0) {
            return Err(Error::Singular(format!("row {} of the unmixing matrix is zero", i + 1)));
        }
        let imax = r.iamax_full().1;
        let sign = if r[imax] < 0.0 { -1.0 } else { 1.0 };
        rows.push(r.iter().map(|v| sign * v / norm).collect());
    }
    rows.sort_by(|a, b| lex_cmp(a, b));
    Ok(DMatrix::from_row_iterator(n, w.ncols(), rows.into_iter().flatten()))
}

/// Full identification step: whiten, rotate, normalize, order by kurtosis and
/// rescale to unit-variance shocks.
pub fn estimate_unmixing(residuals: &DMatrix<f64>, variant: &WhitenVariant, config: &DistCovConfig, opts: &IcaOptions) -> Result<IcaResult> {
    let (t, n) = residuals.shape();
    if t <= 10 * n {
        return Err(Error::Degenerate(format!("{t} observations are too few for {n} components")));
    }
    let (whitened, whitener) = whiten(residuals, variant)?;
    let (angles, objective, report) = optimize_rotation(&whitened, config, opts)?;
    let o_hat = OrthogonalParam { n, angles: angles.clone() }.matrix();
    let w_raw = &o_hat * &whitener.inverse_factor;
    let w_sorted = omega_normalize(&w_raw)?;

    let raw_shocks = residuals * w_sorted.transpose();
    let kurt = column_kurtosis(&raw_shocks)?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| kurt[b].total_cmp(&kurt[a]).then(a.cmp(&b)));
    let w_omega = DMatrix::from_fn(n, n, |i, j| w_sorted[(order[i], j)]);
    let kurtosis: Vec<f64> = order.iter().map(|&i| kurt[i]).collect();
    let b_omega = w_omega.clone().try_inverse().ok_or_else(|| Error::Singular("estimated unmixing matrix".into()))?;

    let omega_shocks = residuals * w_omega.transpose();
    let sd: Vec<f64> = (0..n)
        .map(|j| {
            let c = omega_shocks.column(j);
            let m = c.mean();
            (c.iter().map(|v| (v - m).powi(2)).sum::<f64>() / t as f64).sqrt()
        })
        .collect();
    if sd.iter().any(|&s| !(s > 0.0)) {
        return Err(Error::Degenerate("a recovered shock is constant".into()));
    }
    let mut w_hat = w_omega.clone();
    let mut b_hat = b_omega.clone();
    let mut shocks = omega_shocks;
    for j in 0..n {
        w_hat.row_mut(j).unscale_mut(sd[j]);
        b_hat.column_mut(j).scale_mut(sd[j]);
        shocks.column_mut(j).unscale_mut(sd[j]);
    }
    Ok(IcaResult { whitener, o_hat, angles, w_omega, b_omega, w_hat, b_hat, shocks, kurtosis, objective, report })
}

/// Amari distance with `r = A0 · A^{-1}`, on `|r_ij|`.
pub fn amari_distance(a0: &DMatrix<f64>, a: &DMatrix<f64>) -> Result<f64> {
    if !a.is_square() || a0.shape() != a.shape() {
        return Err(Error::Dimension("Amari distance needs two square matrices of equal size".into()));
    }
    let inv = a.clone().try_inverse().ok_or_else(|| Error::Singular("second argument of the Amari distance".into()))?;
    let r = (a0 * inv).abs();
    let p = r.nrows() as f64;
    let mut rows = 0.0;
    for i in 0..r.nrows() {
        let row = r.row(i);
        rows += row.sum() / row.max() - 1.0;
    }
    let mut cols = 0.0;
    for j in 0..r.ncols() {
        let col = r.column(j);
        cols += col.sum() / col.max() - 1.0;
    }
    Ok((rows + cols) / (2.0 * p))
}

/// Amari distance between `|b_hat|ᵀ` and `|b|ᵀ`: blind to signs, invariant to
/// column permutations, and zero iff the columns agree up to permutation and
/// scale.
pub fn amari_mixing(b_hat: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<f64> {
    amari_distance(&b_hat.abs().transpose(), &b.abs().transpose())
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..n {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out
}

/// Reorders and sign-flips the columns of `b_hat` to best match `reference`
/// in Frobenius norm. Returns the aligned matrix and, for each reference
/// column, the source column of `b_hat`. Exhaustive, so limited to `n ≤ 8`.
pub fn align_columns(b_hat: &DMatrix<f64>, reference: &DMatrix<f64>) -> Result<(DMatrix<f64>, Vec<usize>)> {
    let n = reference.ncols();
    if b_hat.shape() != reference.shape() {
        return Err(Error::Dimension("matrices to align differ in shape".into()));
    }
    if n > 8 {
        return Err(Error::Dimension(format!("column alignment is exhaustive and limited to 8 columns, got {n}")));
    }
    // cost[j][k]: squared distance of sign-matched column k to reference column j.
    let cost: Vec<Vec<f64>> = (0..n)
        .map(|j| {
            (0..n)
                .map(|k| {
                    let (r, c) = (reference.column(j), b_hat.column(k));
                    (r - c).norm_squared().min((r + c).norm_squared())
                })
                .collect()
        })
        .collect();
    let best = permutations(n)
        .into_iter()
        .min_by(|a, b| {
            let ca: f64 = a.iter().enumerate().map(|(j, &k)| cost[j][k]).sum();
            let cb: f64 = b.iter().enumerate().map(|(j, &k)| cost[j][k]).sum();
            ca.total_cmp(&cb)
        })
        .expect("at least one permutation");
    let mut out = DMatrix::zeros(reference.nrows(), n);
    for (j, &k) in best.iter().enumerate() {
        let c = b_hat.column(k);
        let sign = if c.dot(&reference.column(j)) < 0.0 { -1.0 } else { 1.0 };
        out.set_column(j, &(c * sign));
    }
    Ok((out, best))
}

/// Sign convention for the disaster shock.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "rule", content = "variable", rename_all = "snake_case")]
pub enum SignRule {
    None,
    /// Impact on this variable (0-based) is negative.
    ImpactNegative(usize),
    /// Impact on this variable (0-based) is positive.
    ImpactPositive(usize),
}

/// Labels the highest-kurtosis component as the disaster shock (index 0) and
/// flips its sign if `rule` demands it.
pub fn label_disaster_shock(mut result: IcaResult, rule: SignRule) -> Result<(usize, IcaResult)> {
    if !result.report.converged {
        return Err(Error::Parameter("cannot label shocks of an unconverged ICA fit".into()));
    }
    let (var, want_positive) = match rule {
        SignRule::None => return Ok((0, result)),
        SignRule::ImpactNegative(v) => (v, false),
        SignRule::ImpactPositive(v) => (v, true),
    };
    if var >= result.b_hat.nrows() {
        return Err(Error::Parameter(format!("variable index {var} out of range")));
    }
    let impact = result.b_hat[(var, 0)];
    if impact == 0.0 {
        return Err(Error::Ambiguous(format!("disaster shock has zero impact on variable {}", var + 1)));
    }
    if (impact > 0.0) != want_positive {
        result.w_omega.row_mut(0).neg_mut();
        result.w_hat.row_mut(0).neg_mut();
        result.b_omega.column_mut(0).neg_mut();
        result.b_hat.column_mut(0).neg_mut();
        result.shocks.column_mut(0).neg_mut();
    }
    Ok((0, result))
}
