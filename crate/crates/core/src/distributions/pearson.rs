//! The Pearson system: pick the family member matching four moments and draw
//! from it.

use rand::Rng;
use rand_distr::{Beta, Distribution, Gamma, StandardNormal, StudentT};

use crate::error::{param, Result};

const EPS: f64 = 1e-10;

/// Fitted Pearson family member for a standardized (mean 0, variance 1)
/// target; draws are mapped back through `mean + sd * z`.
#[derive(Debug, Clone, PartialEq)]
pub enum PearsonKind {
    /// Type 0.
    Normal,
    /// Types I and II: `low + range * Beta(a, b)`.
    Beta { a: f64, b: f64, low: f64, range: f64 },
    /// Type III: `sign * (G - shape) / sqrt(shape)`, `G ~ Gamma(shape)`.
    Gamma { shape: f64, sign: f64 },
    /// Type IV: density ∝ (1 + y²)^(-m) exp(-nu atan y), `x = lambda + scale y`.
    TypeIv { m: f64, nu: f64, scale: f64, lambda: f64 },
    /// Types V (`p = ∞`) and VI: `sign * (X - loc) / sd` for `X ~ BetaPrime(p, q)`.
    BetaPrime { p: Option<f64>, q: f64, loc: f64, sd: f64, sign: f64 },
    /// Type VII: scaled Student t.
    StudentT { dof: f64, scale: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Pearson {
    pub mean: f64,
    pub sd: f64,
    pub kind: PearsonKind,
}

/// Mean, variance, skewness and (non-excess) kurtosis.
pub type Moments = [f64; 4];

fn standardize_raw(raw: [f64; 4]) -> Moments {
    let [m1, m2, m3, m4] = raw;
    let var = m2 - m1 * m1;
    let c3 = m3 - 3.0 * m1 * m2 + 2.0 * m1.powi(3);
    let c4 = m4 - 4.0 * m1 * m3 + 6.0 * m1 * m1 * m2 - 3.0 * m1.powi(4);
    [m1, var, c3 / var.powf(1.5), c4 / (var * var)]
}

/// Moments of `BetaPrime(p, q)` in closed form (raw moments cancel badly
/// for large `p`).
fn beta_prime_moments(p: f64, q: f64) -> Moments {
    let pq = p * (p + q - 1.0);
    [
        p / (q - 1.0),
        pq / ((q - 2.0) * (q - 1.0).powi(2)),
        2.0 * (2.0 * p + q - 1.0) / (q - 3.0) * ((q - 2.0) / pq).sqrt(),
        3.0 + 6.0 * (pq * (5.0 * q - 11.0) + (q - 1.0).powi(2) * (q - 2.0))
            / (pq * (q - 3.0) * (q - 4.0)),
    ]
}

fn inverse_gamma_moments(q: f64) -> Moments {
    [
        1.0 / (q - 1.0),
        1.0 / ((q - 1.0).powi(2) * (q - 2.0)),
        4.0 * (q - 2.0).sqrt() / (q - 3.0),
        3.0 + (30.0 * q - 66.0) / ((q - 3.0) * (q - 4.0)),
    ]
}

/// Raw moments of the standard type IV variable `y`, from the recursion
/// `(2m - k - 2) E[y^{k+1}] = k E[y^{k-1}] - nu E[y^k]` implied by its
/// differential equation.
fn type_iv_raw(m: f64, nu: f64) -> [f64; 4] {
    let mut e = [1.0, 0.0, 0.0, 0.0, 0.0];
    for k in 0..4 {
        let kf = k as f64;
        let prev = if k == 0 { 0.0 } else { e[k - 1] };
        e[k + 1] = (kf * prev - nu * e[k]) / (2.0 * m - kf - 2.0);
    }
    [e[1], e[2], e[3], e[4]]
}

/// Finds `x` in `[lo, hi]` with `f(x) = 0` for a monotone `f` by bisection.
fn bisect(mut lo: f64, mut hi: f64, f: impl Fn(f64) -> f64) -> f64 {
    let flo = f(lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid);
        if (fm > 0.0) == (flo > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
        if (hi - lo) <= 1e-14 * mid.abs().max(1.0) {
            break;
        }
    }
    0.5 * (lo + hi)
}

fn beta_prime_skew(p: f64, q: f64) -> f64 {
    beta_prime_moments(p, q)[2]
}

impl Pearson {
    /// Selects the Pearson type for the given moments.
    pub fn fit(mean: f64, variance: f64, skewness: f64, kurtosis: f64) -> Result<Self> {
        if !(variance > 0.0) || !variance.is_finite() {
            return param(format!("Pearson variance must be positive, got {variance}"));
        }
        let b1 = skewness * skewness;
        let b2 = kurtosis;
        if !(b2 > b1 + 1.0) {
            return param(format!(
                "infeasible moments: kurtosis {b2} must exceed skewness² + 1 = {}",
                b1 + 1.0
            ));
        }
        let sd = variance.sqrt();
        let sign = if skewness < 0.0 { -1.0 } else { 1.0 };
        let d = 2.0 * b2 - 3.0 * b1 - 6.0;

        let kind = if b1 < EPS && (b2 - 3.0).abs() < EPS {
            PearsonKind::Normal
        } else if b1 < EPS && b2 > 3.0 {
            let dof = 4.0 + 6.0 / (b2 - 3.0);
            PearsonKind::StudentT { dof, scale: ((dof - 2.0) / dof).sqrt() }
        } else if d.abs() < EPS {
            PearsonKind::Gamma { shape: 4.0 / b1, sign }
        } else {
            let kappa = b1 * (b2 + 3.0).powi(2) / (4.0 * (4.0 * b2 - 3.0 * b1) * d);
            if b1 < EPS || kappa < 0.0 {
                Self::fit_beta(skewness, b2)
            } else if kappa < 1.0 - 1e-9 {
                Self::fit_type_iv(skewness, b1, b2)
            } else if kappa <= 1.0 + 1e-9 {
                Self::fit_inverse_gamma(skewness)
            } else {
                Self::fit_beta_prime(skewness, b2)?
            }
        };
        Ok(Pearson { mean, sd, kind })
    }

    fn fit_beta(skew: f64, b2: f64) -> PearsonKind {
        let ex = b2 - 3.0;
        let g2 = skew * skew;
        let nu = 3.0 * (ex - g2 + 2.0) / (1.5 * g2 - ex);
        let (a, b) = if g2 < EPS {
            (nu / 2.0, nu / 2.0)
        } else {
            let root = 1.0 / (1.0 + 16.0 * (nu + 1.0) / ((nu + 2.0).powi(2) * g2)).sqrt();
            let small = 0.5 * nu * (1.0 - root);
            let large = 0.5 * nu * (1.0 + root);
            if skew > 0.0 {
                (small, large)
            } else {
                (large, small)
            }
        };
        let range = 0.5 * ((nu + 2.0).powi(2) * g2 + 16.0 * (1.0 + nu)).sqrt();
        let low = -a / nu * range;
        PearsonKind::Beta { a, b, low, range }
    }

    fn fit_type_iv(skew: f64, b1: f64, b2: f64) -> PearsonKind {
        let r = 6.0 * (b2 - b1 - 1.0) / (2.0 * b2 - 3.0 * b1 - 6.0);
        let m = 1.0 + 0.5 * r;
        let q = 16.0 * (r - 1.0) - b1 * (r - 2.0).powi(2);
        let nu = -r * (r - 2.0) * skew / q.sqrt();
        let scale = q.sqrt() / 4.0;
        // E[y] = -nu / r, so centring the draws needs lambda = scale * nu / r
        let lambda = scale * nu / r;
        PearsonKind::TypeIv { m, nu, scale, lambda }
    }

    fn fit_inverse_gamma(skew: f64) -> PearsonKind {
        let g = skew.abs();
        // skewness 4 sqrt(q-2)/(q-3) decreases in q on (3, inf)
        let q = bisect(3.0 + 1e-9, 1e9, |q| 4.0 * (q - 2.0).sqrt() / (q - 3.0) - g);
        let [m1, var, ..] = inverse_gamma_moments(q);
        PearsonKind::BetaPrime { p: None, q, loc: m1, sd: var.sqrt(), sign: skew.signum() }
    }

    fn fit_beta_prime(skew: f64, b2: f64) -> Result<PearsonKind> {
        let g = skew.abs();
        // For fixed q the skewness falls from +inf (p -> 0) to the inverse
        // gamma value 4 sqrt(q-2)/(q-3) (p -> inf); q_min is where that limit
        // equals the target.
        let q_min = bisect(3.0 + 1e-9, 1e9, |q| 4.0 * (q - 2.0).sqrt() / (q - 3.0) - g).max(4.0);
        let p_for = |q: f64| bisect(1e-9, 1e9, |p| beta_prime_skew(p, q) - g);
        let kurt_at = |q: f64| beta_prime_moments(p_for(q), q)[3];
        let lo = q_min * (1.0 + 1e-6);
        let hi = 1e7;
        let (k_lo, k_hi) = (kurt_at(lo), kurt_at(hi));
        if !((k_lo - b2) * (k_hi - b2) <= 0.0) {
            return param(format!("could not bracket a type VI fit for skewness {skew}, kurtosis {b2}"));
        }
        let q = bisect(lo, hi, |q| kurt_at(q) - b2);
        let p = p_for(q);
        let [m1, var, ..] = beta_prime_moments(p, q);
        Ok(PearsonKind::BetaPrime { p: Some(p), q, loc: m1, sd: var.sqrt(), sign: skew.signum() })
    }

    /// Population moments (mean, variance, skewness, kurtosis) of the fit.
    pub fn moments(&self) -> Moments {
        let std = match &self.kind {
            PearsonKind::Normal => [0.0, 1.0, 0.0, 3.0],
            PearsonKind::StudentT { dof, .. } => [0.0, 1.0, 0.0, 3.0 + 6.0 / (dof - 4.0)],
            PearsonKind::Gamma { shape, sign } => {
                [0.0, 1.0, sign * 2.0 / shape.sqrt(), 3.0 + 6.0 / shape]
            }
            PearsonKind::Beta { a, b, low, range } => {
                let mut raw = [0.0; 4];
                let mut acc = 1.0;
                for k in 1..=4 {
                    let kf = k as f64;
                    acc *= (a + kf - 1.0) / (a + b + kf - 1.0);
                    raw[k - 1] = acc;
                }
                let [m1, var, s, k] = standardize_raw(raw);
                [low + range * m1, range * range * var, s, k]
            }
            PearsonKind::TypeIv { m, nu, scale, lambda } => {
                let [m1, var, s, k] = standardize_raw(type_iv_raw(*m, *nu));
                [lambda + scale * m1, scale * scale * var, s, k]
            }
            PearsonKind::BetaPrime { p, q, sign, .. } => {
                let [_, _, s, k] = match p {
                    Some(p) => beta_prime_moments(*p, *q),
                    None => inverse_gamma_moments(*q),
                };
                [0.0, 1.0, sign * s, k]
            }
        };
        [
            self.mean + self.sd * std[0],
            self.sd * self.sd * std[1],
            std[2],
            std[3],
        ]
    }

    fn standard_draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match &self.kind {
            PearsonKind::Normal => rng.sample(StandardNormal),
            PearsonKind::StudentT { dof, scale } => {
                scale * StudentT::new(*dof).expect("dof > 4").sample(rng)
            }
            PearsonKind::Gamma { shape, sign } => {
                let g = Gamma::new(*shape, 1.0).expect("positive shape").sample(rng);
                sign * (g - shape) / shape.sqrt()
            }
            PearsonKind::Beta { a, b, low, range } => {
                low + range * Beta::new(*a, *b).expect("positive shapes").sample(rng)
            }
            PearsonKind::TypeIv { m, nu, scale, lambda } => {
                let r = 2.0 * m - 2.0;
                let log_g = |t: f64| r * t.cos().ln() - nu * t;
                let peak = log_g((-nu / r).atan());
                let half_pi = std::f64::consts::FRAC_PI_2;
                let theta = loop {
                    let t = rng.random_range(-half_pi..half_pi);
                    let u: f64 = rng.random();
                    if u > 0.0 && u.ln() <= log_g(t) - peak {
                        break t;
                    }
                };
                scale * theta.tan() + lambda
            }
            PearsonKind::BetaPrime { p, q, loc, sd, sign } => {
                let den = Gamma::new(*q, 1.0).expect("positive shape").sample(rng);
                let x = match p {
                    Some(p) => Gamma::new(*p, 1.0).expect("positive shape").sample(rng) / den,
                    None => 1.0 / den,
                };
                sign * (x - loc) / sd
            }
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.mean + self.sd * self.standard_draw(rng)
    }
}
