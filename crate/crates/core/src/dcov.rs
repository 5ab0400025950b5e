//! Empirical distance covariance and the aggregated mutual-independence
//! objective.
//!
//! With `a_ij = |X_i − X_j|^β` and `b_ij = |Y_i − Y_j|^β` (Euclidean norms),
//! the V-statistic is
//!
//! `mean(a ∘ b) + mean(a) · mean(b) − 2 · mean_{i,j,k}(a_ij b_ik)`,
//!
//! evaluated in `O(T²)` through row sums. Univariate inputs at `β = 1` also
//! have an `O(T log T)` path via sorting and a Fenwick tree.
//!
//! Inputs are column-major slices so the same code serves `f32` and `f64`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{CompensatedSum, Real};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DistCovConfig {
    /// Exponent of the weight function, in `(0, 2)`.
    pub beta: f64,
}

impl Default for DistCovConfig {
    fn default() -> Self {
        Self { beta: 1.0 }
    }
}

impl DistCovConfig {
    pub fn new(beta: f64) -> Result<Self> {
        let c = Self { beta };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if self.beta > 0.0 && self.beta < 2.0 {
            Ok(())
        } else {
            Err(Error::Parameter(format!("beta must lie in (0, 2), got {}", self.beta)))
        }
    }
}

/// Combines the three sums into the statistic and guards the sign.
///
/// `sum_ab = Σ_{i,j} a_ij b_ij`, `sum_a = Σ_{i,j} a_ij`,
/// `cross = Σ_i (Σ_j a_ij)(Σ_k b_ik)`.
#[inline]
fn combine<T: Real>(t: usize, sum_ab: T, sum_a: T, sum_b: T, cross: T) -> Result<T> {
    let tt = T::from_count(t);
    let t2 = tt * tt;
    let s1 = sum_ab / t2;
    let s2 = (sum_a / t2) * (sum_b / t2);
    let s3 = cross / (t2 * tt);
    let v = s1 + s2 - (s3 + s3);
    if v >= T::zero() {
        return Ok(v);
    }
    let scale = (s1 + s2 + s3 + s3).max(T::one());
    if v >= -T::lit(1e-12) * scale {
        Ok(T::zero())
    } else {
        Err(Error::Internal(format!("distance covariance evaluated to {v:?}")))
    }
}

#[inline]
fn pow_beta<T: Real>(norm_sq: T, beta: T) -> T {
    if beta == T::one() {
        norm_sq.sqrt()
    } else {
        norm_sq.powf(beta / T::lit(2.0))
    }
}

/// Distance covariance of column-major `x` (`t × mx`) and `y` (`t × my`).
pub fn dist_cov_columns<T: Real>(x: &[T], mx: usize, y: &[T], my: usize, beta: T) -> Result<T> {
    if mx == 0 || my == 0 || x.len() % mx != 0 || y.len() % my != 0 {
        return Err(Error::Dimension("empty or ragged distance covariance input".into()));
    }
    let t = x.len() / mx;
    if y.len() / my != t {
        return Err(Error::Dimension(format!("{} rows against {}", t, y.len() / my)));
    }
    if t < 2 {
        return Err(Error::Degenerate("distance covariance needs at least 2 observations".into()));
    }
    let mut ra = vec![CompensatedSum::<T>::default(); t];
    let mut rb = vec![CompensatedSum::<T>::default(); t];
    let mut sab = CompensatedSum::<T>::default();
    for i in 0..t {
        for j in i + 1..t {
            let dx = (0..mx).map(|c| x[c * t + i] - x[c * t + j]).fold(T::zero(), |s, d| s + d * d);
            let dy = (0..my).map(|c| y[c * t + i] - y[c * t + j]).fold(T::zero(), |s, d| s + d * d);
            let a = pow_beta(dx, beta);
            let b = pow_beta(dy, beta);
            ra[i].add(a);
            ra[j].add(a);
            rb[i].add(b);
            rb[j].add(b);
            sab.add(a * b);
        }
    }
    let two = T::lit(2.0);
    let mut sa = CompensatedSum::default();
    let mut sb = CompensatedSum::default();
    let mut cross = CompensatedSum::default();
    for i in 0..t {
        let (a, b) = (ra[i].value(), rb[i].value());
        sa.add(a);
        sb.add(b);
        cross.add(a * b);
    }
    combine(t, two * sab.value(), sa.value(), sb.value(), cross.value())
}

/// Distance covariance of the rows of `x` and `y`.
pub fn dist_cov(x: &DMatrix<f64>, y: &DMatrix<f64>, config: &DistCovConfig) -> Result<f64> {
    config.validate()?;
    if x.nrows() != y.nrows() {
        return Err(Error::Dimension(format!("{} rows against {}", x.nrows(), y.nrows())));
    }
    dist_cov_columns(x.as_slice(), x.ncols(), y.as_slice(), y.ncols(), config.beta)
}

/// `[|d0|, ‖(d1, d2)‖, |d1|, |d2|]` for the difference of two rows.
#[inline(always)]
fn pair3<T: Real>(x0: T, x1: T, x2: T, y0: T, y1: T, y2: T) -> [T; 4] {
    let d0 = x0 - y0;
    let d1 = x1 - y1;
    let d2 = x2 - y2;
    [d0.abs(), (d1 * d1 + d2 * d2).sqrt(), d1.abs(), d2.abs()]
}

/// Pair sums for `n = 3`, `β = 1`.
///
/// Two rows per sweep over `j`, so each loaded column value and row-sum slot
/// serves two pairs; four lanes of partial sums keep the loop vectorizable.
fn pairs3_blocked<T: Real>(t: usize, s: &[T], rows: [&mut Vec<T>; 4]) -> [T; 2] {
    const L: usize = 4;
    let (c0, rest) = s.split_at(t);
    let (c1, c2) = rest.split_at(t);
    let [ra0, rb0, ra1, rb1] = rows;
    let zero = T::zero();
    let mut sab = [zero; 2];
    let mut i = 0;
    while i + 1 < t {
        let (x0, x1, x2) = (c0[i], c1[i], c2[i]);
        let (z0, z1, z2) = (c0[i + 1], c1[i + 1], c2[i + 1]);
        let own = pair3(x0, x1, x2, z0, z1, z2);
        sab[0] += own[0] * own[1];
        sab[1] += own[2] * own[3];
        let lo = i + 2;
        let full = (t - lo) / L * L;
        let mut acc = [[zero; L]; 12];
        let it = c0[lo..lo + full]
            .chunks_exact(L)
            .zip(c1[lo..lo + full].chunks_exact(L))
            .zip(c2[lo..lo + full].chunks_exact(L))
            .zip(ra0[lo..lo + full].chunks_exact_mut(L))
            .zip(rb0[lo..lo + full].chunks_exact_mut(L))
            .zip(ra1[lo..lo + full].chunks_exact_mut(L))
            .zip(rb1[lo..lo + full].chunks_exact_mut(L));
        for ((((((y0, y1), y2), p0), q0), p1), q1) in it {
            for l in 0..L {
                let u = pair3(x0, x1, x2, y0[l], y1[l], y2[l]);
                let v = pair3(z0, z1, z2, y0[l], y1[l], y2[l]);
                p0[l] += u[0] + v[0];
                q0[l] += u[1] + v[1];
                p1[l] += u[2] + v[2];
                q1[l] += u[3] + v[3];
                for k in 0..4 {
                    acc[k][l] += u[k];
                    acc[4 + k][l] += v[k];
                }
                acc[8][l] += u[0] * u[1];
                acc[9][l] += u[2] * u[3];
                acc[10][l] += v[0] * v[1];
                acc[11][l] += v[2] * v[3];
            }
        }
        let mut tail = [zero; 12];
        for j in lo + full..t {
            let u = pair3(x0, x1, x2, c0[j], c1[j], c2[j]);
            let v = pair3(z0, z1, z2, c0[j], c1[j], c2[j]);
            ra0[j] += u[0] + v[0];
            rb0[j] += u[1] + v[1];
            ra1[j] += u[2] + v[2];
            rb1[j] += u[3] + v[3];
            for k in 0..4 {
                tail[k] += u[k];
                tail[4 + k] += v[k];
            }
            tail[8] += u[0] * u[1];
            tail[9] += u[2] * u[3];
            tail[10] += v[0] * v[1];
            tail[11] += v[2] * v[3];
        }
        let f = |k: usize| (acc[k][0] + acc[k][1]) + (acc[k][2] + acc[k][3]) + tail[k];
        ra0[i] += f(0) + own[0];
        rb0[i] += f(1) + own[1];
        ra1[i] += f(2) + own[2];
        rb1[i] += f(3) + own[3];
        ra0[i + 1] += f(4) + own[0];
        rb0[i + 1] += f(5) + own[1];
        ra1[i + 1] += f(6) + own[2];
        rb1[i + 1] += f(7) + own[3];
        sab[0] += f(8) + f(10);
        sab[1] += f(9) + f(11);
        i += 2;
    }
    sab
}

struct Fenwick<T> {
    tree: Vec<[T; 4]>,
}

impl<T: Real> Fenwick<T> {
    fn new(n: usize) -> Self {
        Self { tree: vec![[T::zero(); 4]; n + 1] }
    }

    fn add(&mut self, pos: usize, v: [T; 4]) {
        let mut i = pos + 1;
        while i < self.tree.len() {
            for (slot, x) in self.tree[i].iter_mut().zip(v) {
                *slot = *slot + x;
            }
            i += i & i.wrapping_neg();
        }
    }

    /// Sum over positions `< pos`.
    fn prefix(&self, pos: usize) -> [T; 4] {
        let mut acc = [T::zero(); 4];
        let mut i = pos;
        while i > 0 {
            for (slot, x) in acc.iter_mut().zip(self.tree[i]) {
                *slot = *slot + x;
            }
            i -= i & i.wrapping_neg();
        }
        acc
    }
}

fn sorted_order<T: Real>(v: &[T]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&a, &b| v[a].partial_cmp(&v[b]).unwrap_or(std::cmp::Ordering::Equal));
    idx
}

/// `Σ_j |v_i − v_j|` for every `i`, from the sorted order.
fn abs_row_sums<T: Real>(v: &[T], order: &[usize]) -> Vec<T> {
    let t = v.len();
    let total: T = order.iter().map(|&i| v[i]).sum();
    let mut out = vec![T::zero(); t];
    let mut below = T::zero();
    for (r, &i) in order.iter().enumerate() {
        let x = v[i];
        let above = total - below - x;
        out[i] = x * T::from_count(r) - below + above - x * T::from_count(t - r - 1);
        below = below + x;
    }
    out
}

/// Univariate distance covariance at `β = 1` in `O(T log T)`.
///
/// Other exponents fall back to the pairwise evaluation.
pub fn dist_cov_fast<T: Real>(x: &[T], y: &[T], beta: T) -> Result<T> {
    if x.len() != y.len() {
        return Err(Error::Dimension(format!("{} rows against {}", x.len(), y.len())));
    }
    if beta != T::one() {
        return dist_cov_columns(x, 1, y, 1, beta);
    }
    let t = x.len();
    if t < 2 {
        return Err(Error::Degenerate("distance covariance needs at least 2 observations".into()));
    }
    let n = T::from_count(t);
    let mx = x.iter().copied().sum::<T>() / n;
    let my = y.iter().copied().sum::<T>() / n;
    let x: Vec<T> = x.iter().map(|&v| v - mx).collect();
    let y: Vec<T> = y.iter().map(|&v| v - my).collect();

    let ox = sorted_order(&x);
    let oy = sorted_order(&y);
    let ra = abs_row_sums(&x, &ox);
    let rb = abs_row_sums(&y, &oy);
    let mut y_rank = vec![0usize; t];
    for (r, &i) in oy.iter().enumerate() {
        y_rank[i] = r;
    }

    // Σ_{j before i in x order} (x_i − x_j)|y_i − y_j|, split by the side of y_i.
    let mut fen = Fenwick::new(t);
    let mut tot = [T::zero(); 4];
    let mut half = CompensatedSum::default();
    for &i in &ox {
        let (xi, yi) = (x[i], y[i]);
        let lo = fen.prefix(y_rank[i]);
        let hi = [tot[0] - lo[0], tot[1] - lo[1], tot[2] - lo[2], tot[3] - lo[3]];
        let side = |s: [T; 4]| s[0] * xi * yi - xi * s[1] - yi * s[2] + s[3];
        half.add(side(lo) - side(hi));
        let v = [T::one(), y[i], x[i], xi * yi];
        fen.add(y_rank[i], v);
        for (slot, a) in tot.iter_mut().zip(v) {
            *slot = *slot + a;
        }
    }
    let sum_ab = half.value() + half.value();
    let mut sa = CompensatedSum::default();
    let mut sb = CompensatedSum::default();
    let mut cross = CompensatedSum::default();
    for i in 0..t {
        sa.add(ra[i]);
        sb.add(rb[i]);
        cross.add(ra[i] * rb[i]);
    }
    combine(t, sum_ab, sa.value(), sb.value(), cross.value())
}

/// `Σ_{k=1}^{n−1} dcov(S_k, S_{k+1:n})` for the columns of `s`.
pub fn aggregate_objective(s: &DMatrix<f64>, config: &DistCovConfig) -> Result<f64> {
    config.validate()?;
    let mut kernel = ObjectiveKernel::new(s.nrows(), s.ncols(), config.beta)?;
    kernel.eval(s.as_slice())
}

/// Reusable evaluator of the aggregated objective for a fixed shape.
///
/// Makes one pass over the `T(T−1)/2` pairs and accumulates all `n − 1`
/// terms at once; the common `n ∈ {2, 3}`, `β = 1` cases use unrolled loops.
#[derive(Debug, Clone)]
pub struct ObjectiveKernel<T> {
    t: usize,
    n: usize,
    beta: T,
    /// Row sums of `a` and `b` for every term, `2 (n−1)` vectors of length `t`.
    rows: Vec<Vec<T>>,
    /// Scratch for the generic path.
    diff: Vec<T>,
}

impl<T: Real> ObjectiveKernel<T> {
    pub fn new(t: usize, n: usize, beta: T) -> Result<Self> {
        if n < 2 {
            return Err(Error::Dimension(format!("objective needs at least 2 columns, got {n}")));
        }
        if t < 2 {
            return Err(Error::Degenerate("objective needs at least 2 observations".into()));
        }
        if !(beta > T::zero() && beta < T::lit(2.0)) {
            return Err(Error::Parameter(format!("beta must lie in (0, 2), got {beta:?}")));
        }
        Ok(Self { t, n, beta, rows: vec![vec![T::zero(); t]; 2 * (n - 1)], diff: vec![T::zero(); n] })
    }

    pub fn rows(&self) -> usize {
        self.t
    }

    pub fn cols(&self) -> usize {
        self.n
    }

    /// Evaluates the objective on column-major `s` of shape `t × n`.
    pub fn eval(&mut self, s: &[T]) -> Result<T> {
        if s.len() != self.t * self.n {
            return Err(Error::Dimension(format!("expected {}×{} values, got {}", self.t, self.n, s.len())));
        }
        for r in &mut self.rows {
            r.iter_mut().for_each(|v| *v = T::zero());
        }
        let sums = match (self.n, self.beta == T::one()) {
            (2, true) => vec![self.pairs2(s)],
            (3, true) => self.pairs3(s).to_vec(),
            _ => self.pairs_generic(s),
        };
        let mut total = T::zero();
        for (k, sab) in sums.into_iter().enumerate() {
            let (ra, rb) = (&self.rows[2 * k], &self.rows[2 * k + 1]);
            let mut sa = T::zero();
            let mut sb = T::zero();
            let mut cross = T::zero();
            for (&a, &b) in ra.iter().zip(rb) {
                sa = sa + a;
                sb = sb + b;
                cross = cross + a * b;
            }
            total = total + combine(self.t, sab + sab, sa, sb, cross)?;
        }
        Ok(total)
    }

    fn pairs2(&mut self, s: &[T]) -> T {
        let t = self.t;
        let (c0, c1) = s.split_at(t);
        let [ra, rb] = &mut self.rows[..] else { unreachable!() };
        let mut sab = T::zero();
        for i in 0..t {
            let (x0, x1) = (c0[i], c1[i]);
            let m = t - i - 1;
            let (r0, r1) = (&c0[i + 1..], &c1[i + 1..]);
            let (ra_j, rb_j) = (&mut ra[i + 1..], &mut rb[i + 1..]);
            let (r1, ra_j, rb_j) = (&r1[..m], &mut ra_j[..m], &mut rb_j[..m]);
            let mut acc = [[T::zero(); 4]; 3];
            let chunks = m / 4;
            for c in 0..chunks {
                for l in 0..4 {
                    let j = 4 * c + l;
                    let a = (x0 - r0[j]).abs();
                    let b = (x1 - r1[j]).abs();
                    ra_j[j] = ra_j[j] + a;
                    rb_j[j] = rb_j[j] + b;
                    acc[0][l] = acc[0][l] + a;
                    acc[1][l] = acc[1][l] + b;
                    acc[2][l] = acc[2][l] + a * b;
                }
            }
            for j in 4 * chunks..m {
                let a = (x0 - r0[j]).abs();
                let b = (x1 - r1[j]).abs();
                ra_j[j] = ra_j[j] + a;
                rb_j[j] = rb_j[j] + b;
                acc[0][0] = acc[0][0] + a;
                acc[1][0] = acc[1][0] + b;
                acc[2][0] = acc[2][0] + a * b;
            }
            let fold = |v: [T; 4]| (v[0] + v[1]) + (v[2] + v[3]);
            ra[i] = ra[i] + fold(acc[0]);
            rb[i] = rb[i] + fold(acc[1]);
            sab = sab + fold(acc[2]);
        }
        sab
    }

    fn pairs3(&mut self, s: &[T]) -> [T; 2] {
        let [ra0, rb0, ra1, rb1] = &mut self.rows[..] else { unreachable!() };
        pairs3_blocked(self.t, s, [ra0, rb0, ra1, rb1])
    }

    fn pairs_generic(&mut self, s: &[T]) -> Vec<T> {
        let (t, n, beta) = (self.t, self.n, self.beta);
        let mut sab = vec![T::zero(); n - 1];
        for i in 0..t {
            for j in i + 1..t {
                for (c, d) in self.diff.iter_mut().enumerate() {
                    *d = s[c * t + i] - s[c * t + j];
                }
                // Tail sums of squares give the block norms from the back.
                let mut tail = self.diff[n - 1] * self.diff[n - 1];
                for k in (0..n - 1).rev() {
                    let dk = self.diff[k];
                    let a = pow_beta(dk * dk, beta);
                    let b = pow_beta(tail, beta);
                    let (ra, rb) = self.rows.split_at_mut(2 * k + 1);
                    ra[2 * k][i] = ra[2 * k][i] + a;
                    ra[2 * k][j] = ra[2 * k][j] + a;
                    rb[0][i] = rb[0][i] + b;
                    rb[0][j] = rb[0][j] + b;
                    sab[k] = sab[k] + a * b;
                    tail = tail + dk * dk;
                }
            }
        }
        sab
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::Rng;
    use rand_distr::StandardNormal;

    /// Direct triple loop over the defining sums.
    fn naive(x: &DMatrix<f64>, y: &DMatrix<f64>, beta: f64) -> f64 {
        let t = x.nrows();
        let a = |i: usize, j: usize| (x.row(i) - x.row(j)).norm().powf(beta);
        let b = |i: usize, j: usize| (y.row(i) - y.row(j)).norm().powf(beta);
        let (mut s1, mut sa, mut sb, mut s3) = (0.0, 0.0, 0.0, 0.0);
        for i in 0..t {
            for j in 0..t {
                s1 += a(i, j) * b(i, j);
                sa += a(i, j);
                sb += b(i, j);
                for k in 0..t {
                    s3 += a(i, j) * b(i, k);
                }
            }
        }
        let tf = t as f64;
        s1 / tf.powi(2) + sa / tf.powi(2) * sb / tf.powi(2) - 2.0 * s3 / tf.powi(3)
    }

    fn gauss(t: usize, n: usize, seed: u64) -> DMatrix<f64> {
        let mut r = crate::seed::rng(seed);
        DMatrix::from_fn(t, n, |_, _| r.sample::<f64, _>(StandardNormal))
    }

    #[test]
    fn pairwise_matches_triple_loop() {
        for (seed, beta) in [(1, 1.0), (2, 0.5), (3, 1.5)] {
            let x = gauss(17, 2, seed);
            let y = gauss(17, 3, seed + 10);
            let v = dist_cov(&x, &y, &DistCovConfig { beta }).unwrap();
            assert_relative_eq!(v, naive(&x, &y, beta), max_relative = 1e-12);
        }
    }

    #[test]
    fn two_point_hand_value() {
        let x = [0.0, 3.0];
        let y = [1.0, -1.0];
        assert_eq!(dist_cov_columns(&x, 1, &y, 1, 1.0).unwrap(), 3.0 * 2.0 / 4.0);
        assert_eq!(dist_cov_fast(&x, &y, 1.0).unwrap(), 1.5);
    }

    #[test]
    fn constant_input_gives_zero() {
        let x = gauss(30, 1, 4);
        let y = DMatrix::from_element(30, 1, 2.5);
        assert_eq!(dist_cov(&x, &y, &DistCovConfig::default()).unwrap(), 0.0);
        assert_eq!(dist_cov_fast(y.as_slice(), x.as_slice(), 1.0).unwrap(), 0.0);
    }

    #[test]
    fn fast_matches_pairwise() {
        let mut r = crate::seed::rng(5);
        for _ in 0..50 {
            let t = r.random_range(2..60);
            let x = gauss(t, 1, r.random());
            let mut y = gauss(t, 1, r.random());
            y[(0, 0)] = x[(0, 0)] * 3.0;
            let slow = dist_cov(&x, &y, &DistCovConfig::default()).unwrap();
            let fast = dist_cov_fast(x.as_slice(), y.as_slice(), 1.0).unwrap();
            assert!((slow - fast).abs() <= 1e-10 * slow.abs().max(1e-300), "{slow} vs {fast}");
        }
    }

    #[test]
    fn fast_handles_ties() {
        let x = [1.0, 1.0, 2.0, 2.0, 3.0, 1.0];
        let y = [0.0, 5.0, 5.0, 0.0, 1.0, 1.0];
        let slow = dist_cov_columns(&x, 1, &y, 1, 1.0).unwrap();
        assert_relative_eq!(dist_cov_fast(&x, &y, 1.0).unwrap(), slow, max_relative = 1e-12);
    }

    #[test]
    fn f32_instantiation() {
        let x: Vec<f32> = (0..20).map(|i| ((i * 7) % 11) as f32).collect();
        let y: Vec<f32> = (0..20).map(|i| ((i * 3) % 5) as f32 - (i as f32) * 0.1).collect();
        let a = dist_cov_columns(&x, 1, &y, 1, 1.0f32).unwrap();
        let b = dist_cov_fast(&x, &y, 1.0f32).unwrap();
        assert!((a - b).abs() < 1e-4 * a.abs());
    }

    #[test]
    fn kernel_matches_term_sum() {
        for (n, beta) in [(2, 1.0), (3, 1.0), (4, 1.0), (3, 0.7)] {
            for t in [41, 42] {
            let s = gauss(t, n, 6 + n as u64);
            let mut expect = 0.0;
            for k in 0..n - 1 {
                let a = s.columns(k, 1).into_owned();
                let b = s.columns(k + 1, n - k - 1).into_owned();
                expect += dist_cov(&a, &b, &DistCovConfig { beta }).unwrap();
            }
            let got = aggregate_objective(&s, &DistCovConfig { beta }).unwrap();
            assert_relative_eq!(got, expect, max_relative = 1e-11);
            }
        }
    }

    #[test]
    fn dependence_inflates_objective() {
        let mut s = gauss(400, 3, 9);
        let base = aggregate_objective(&s, &DistCovConfig::default()).unwrap();
        let c0 = s.column(0).into_owned();
        s.set_column(2, &c0);
        let dep = aggregate_objective(&s, &DistCovConfig::default()).unwrap();
        assert!(dep > 10.0 * base, "{dep} vs {base}");
    }

    #[test]
    fn rejects_bad_input() {
        let x = gauss(10, 1, 1);
        let y = gauss(11, 1, 1);
        assert!(matches!(dist_cov(&x, &y, &DistCovConfig::default()), Err(Error::Dimension(_))));
        assert!(DistCovConfig::new(2.0).is_err());
        assert!(ObjectiveKernel::<f64>::new(10, 1, 1.0).is_err());
    }
}
