//! Innovation families for the simulation designs and the LePage-series
//! simulation of stable limits.

mod pearson;

pub use pearson::{Moments, Pearson, PearsonKind};

use rand::Rng;
use rand_distr::{Distribution, Exp1, StandardNormal, StudentT};
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, PI};

use crate::error::{param, Result};
use crate::seed;

/// Distribution of one structural shock.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ShockSpec {
    /// Stable law with unit scale and zero location (`S1` parameterization;
    /// identical to `S0` when `beta_skew = 0`).
    Stable { alpha: f64, beta_skew: f64 },
    /// Pareto with `P(Z > x) = x^{-alpha}` on `[1, ∞)`.
    Pareto { alpha: f64 },
    /// Student t; `standardized` rescales by `sqrt((dof-2)/dof)` to unit variance.
    StudentT {
        dof: f64,
        #[serde(default = "default_true")]
        standardized: bool,
    },
    /// Pearson-system draw matching four moments (kurtosis is non-excess).
    PearsonMoments {
        mean: f64,
        variance: f64,
        skewness: f64,
        kurtosis: f64,
    },
    Gaussian,
}

fn default_true() -> bool {
    true
}

impl ShockSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            ShockSpec::Stable { alpha, beta_skew } => {
                if !(alpha > 0.0 && alpha <= 2.0) {
                    return param(format!("stable alpha must lie in (0, 2], got {alpha}"));
                }
                if !(-1.0..=1.0).contains(&beta_skew) {
                    return param(format!("stable skewness must lie in [-1, 1], got {beta_skew}"));
                }
            }
            ShockSpec::Pareto { alpha } => {
                if !(alpha > 0.0) {
                    return param(format!("pareto alpha must be positive, got {alpha}"));
                }
            }
            ShockSpec::StudentT { dof, standardized } => {
                if !(dof > 0.0) {
                    return param(format!("student t dof must be positive, got {dof}"));
                }
                if standardized && dof <= 2.0 {
                    return param(format!("standardized student t needs dof > 2, got {dof}"));
                }
            }
            ShockSpec::PearsonMoments { mean, variance, skewness, kurtosis } => {
                Pearson::fit(mean, variance, skewness, kurtosis)?;
            }
            ShockSpec::Gaussian => {}
        }
        Ok(())
    }

    /// Population variance when finite.
    pub fn variance(&self) -> Option<f64> {
        match *self {
            ShockSpec::Gaussian => Some(1.0),
            ShockSpec::Stable { alpha, .. } if alpha >= 2.0 => Some(2.0),
            ShockSpec::StudentT { standardized: true, .. } => Some(1.0),
            ShockSpec::StudentT { dof, .. } if dof > 2.0 => Some(dof / (dof - 2.0)),
            ShockSpec::PearsonMoments { variance, .. } => Some(variance),
            ShockSpec::Pareto { alpha } if alpha > 2.0 => {
                Some(alpha / ((alpha - 1.0).powi(2) * (alpha - 2.0)))
            }
            _ => None,
        }
    }
}

/// One draw from a stable law by the Chambers–Mallows–Stuck transform of a
/// uniform angle and a unit exponential.
pub fn stable_draw<R: Rng + ?Sized>(rng: &mut R, alpha: f64, beta: f64) -> f64 {
    let v = loop {
        let v = rng.random_range(-FRAC_PI_2..FRAC_PI_2);
        if v > -FRAC_PI_2 {
            break v;
        }
    };
    let w: f64 = rng.sample(Exp1);
    if (alpha - 1.0).abs() < 1e-12 {
        let shifted = FRAC_PI_2 + beta * v;
        2.0 / PI * (shifted * v.tan() - beta * (FRAC_PI_2 * w * v.cos() / shifted).ln())
    } else {
        let zeta = beta * (PI * alpha / 2.0).tan();
        let b = zeta.atan() / alpha;
        let s = (1.0 + zeta * zeta).powf(1.0 / (2.0 * alpha));
        let av = alpha * (v + b);
        s * av.sin() / v.cos().powf(1.0 / alpha) * ((v - av).cos() / w).powf((1.0 - alpha) / alpha)
    }
}

/// Draws `count` variates from `spec`; deterministic in `(spec, count, seed)`.
pub fn sample_shock(spec: &ShockSpec, count: usize, seed: u64) -> Result<Vec<f64>> {
    if count == 0 {
        return param("sample count must be at least 1");
    }
    spec.validate()?;
    let mut rng = seed::rng(seed);
    let out = match *spec {
        ShockSpec::Stable { alpha, beta_skew } => {
            (0..count).map(|_| stable_draw(&mut rng, alpha, beta_skew)).collect()
        }
        ShockSpec::Pareto { alpha } => (0..count)
            .map(|_| {
                let u: f64 = rng.random();
                (1.0 - u).powf(-1.0 / alpha)
            })
            .collect(),
        ShockSpec::StudentT { dof, standardized } => {
            let dist = StudentT::new(dof).map_err(|e| crate::Error::Parameter(e.to_string()))?;
            let scale = if standardized { ((dof - 2.0) / dof).sqrt() } else { 1.0 };
            (0..count).map(|_| scale * dist.sample(&mut rng)).collect()
        }
        ShockSpec::PearsonMoments { mean, variance, skewness, kurtosis } => {
            let fit = Pearson::fit(mean, variance, skewness, kurtosis)?;
            (0..count).map(|_| fit.sample(&mut rng)).collect()
        }
        ShockSpec::Gaussian => (0..count).map(|_| rng.sample(StandardNormal)).collect(),
    };
    Ok(out)
}

/// LePage-series draws of a positive stable limit.
#[derive(Debug, Clone, PartialEq)]
pub struct StableLimitSample {
    pub alpha: f64,
    pub truncation: usize,
    pub values: Vec<f64>,
}

fn validate_limit_args(alpha: f64, truncation: usize, draws: usize) -> Result<()> {
    if !(alpha > 0.0 && alpha < 2.0) {
        return param(format!("alpha must lie in (0, 2), got {alpha}"));
    }
    if truncation == 0 || draws == 0 {
        return param("truncation and draw count must be positive");
    }
    Ok(())
}

/// Each draw is `Σ_{m=1}^{M} Γ_m^{-1/α}` where `Γ_m` are the partial sums of
/// unit exponentials. The series converges as `M → ∞` only for `α < 1`.
pub fn simulate_stable_limit(alpha: f64, truncation: usize, draws: usize, seed: u64) -> Result<StableLimitSample> {
    validate_limit_args(alpha, truncation, draws)?;
    let mut rng = seed::rng(seed);
    let values = (0..draws)
        .map(|_| {
            let mut gamma = 0.0;
            let mut acc = 0.0;
            for _ in 0..truncation {
                gamma += rng.sample::<f64, _>(Exp1);
                acc += gamma.powf(-1.0 / alpha);
            }
            acc
        })
        .collect();
    Ok(StableLimitSample { alpha, truncation, values })
}

/// Draws of the limit of `κ₄ / T` for IID data with Pareto-like tails of
/// index `alpha`: `Σ Γ_m^{-4/α} / (Σ Γ_m^{-2/α})²` over a shared exponential
/// partial-sum sequence (stable variables of index `α/4` and `α/2`).
pub fn simulate_kurtosis_limit(alpha: f64, truncation: usize, draws: usize, seed: u64) -> Result<StableLimitSample> {
    if !(alpha > 0.0 && alpha < 2.0) {
        return param(format!("alpha must lie in (0, 2), got {alpha}"));
    }
    validate_limit_args(alpha, truncation, draws)?;
    let mut rng = seed::rng(seed);
    let values = (0..draws)
        .map(|_| {
            let mut gamma = 0.0;
            let (mut s2, mut s4) = (0.0, 0.0);
            for _ in 0..truncation {
                gamma += rng.sample::<f64, _>(Exp1);
                let g2 = gamma.powf(-2.0 / alpha);
                s2 += g2;
                s4 += g2 * g2;
            }
            s4 / (s2 * s2)
        })
        .collect();
    Ok(StableLimitSample { alpha, truncation, values })
}
