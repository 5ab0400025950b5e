//! Permutation test of mutual independence based on the aggregated
//! distance-covariance statistic.

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dcov::{DistCovConfig, ObjectiveKernel};
use crate::error::{Error, Result};
use crate::seed::{child_rng, derive_seed};

pub const DEFAULT_PERMUTATIONS: usize = 199;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PermutationTestResult {
    pub statistic: f64,
    pub permuted_statistics: Vec<f64>,
    pub p_value: f64,
    pub permutations: usize,
    pub seed: u64,
}

impl PermutationTestResult {
    /// Number of permuted statistics at or above the observed one.
    pub fn exceedances(&self) -> usize {
        self.permuted_statistics.iter().filter(|&&v| v >= self.statistic).count()
    }
}

fn validate(s: &DMatrix<f64>, np: usize, config: &DistCovConfig) -> Result<()> {
    config.validate()?;
    if np == 0 {
        return Err(Error::Parameter("number of permutations must be positive".into()));
    }
    if s.ncols() < 2 {
        return Err(Error::Dimension(format!("independence test needs at least 2 columns, got {}", s.ncols())));
    }
    if s.nrows() < 20 {
        return Err(Error::Degenerate(format!("independence test needs at least 20 rows, got {}", s.nrows())));
    }
    if s.iter().any(|v| !v.is_finite()) {
        return Err(Error::Parameter("independence test input contains non-finite values".into()));
    }
    Ok(())
}

/// Writes a copy of `s` with every column independently permuted into `buf`.
fn permute_into(s: &DMatrix<f64>, seed: u64, b: usize, idx: &mut [usize], buf: &mut [f64]) {
    let t = s.nrows();
    let mut rng = child_rng(seed, &[b as u64]);
    let src = s.as_slice();
    for j in 0..s.ncols() {
        idx.iter_mut().enumerate().for_each(|(i, v)| *v = i);
        idx.shuffle(&mut rng);
        let col = &src[j * t..(j + 1) * t];
        for (d, &i) in buf[j * t..(j + 1) * t].iter_mut().zip(idx.iter()) {
            *d = col[i];
        }
    }
}

struct Scratch {
    kernel: ObjectiveKernel<f64>,
    idx: Vec<usize>,
    buf: Vec<f64>,
}

impl Scratch {
    fn new(s: &DMatrix<f64>, beta: f64) -> Self {
        let (t, n) = s.shape();
        Self {
            kernel: ObjectiveKernel::new(t, n, beta).expect("validated shape"),
            idx: vec![0; t],
            buf: vec![0.0; t * n],
        }
    }

    fn permuted(&mut self, s: &DMatrix<f64>, seed: u64, b: usize) -> Result<f64> {
        permute_into(s, seed, b, &mut self.idx, &mut self.buf);
        self.kernel.eval(&self.buf)
    }
}

/// Full permutation test with `np` permutations, `p = (k + 1) / (np + 1)`.
///
/// Permutation `b` draws from the child stream `b` of `seed`, so the result
/// does not depend on the thread count.
pub fn permutation_test(s: &DMatrix<f64>, np: usize, config: &DistCovConfig, seed: u64) -> Result<PermutationTestResult> {
    validate(s, np, config)?;
    let mut scratch = Scratch::new(s, config.beta);
    let statistic = scratch.kernel.eval(s.as_slice())?;
    let permuted_statistics: Vec<f64> = (0..np)
        .into_par_iter()
        .map_init(|| Scratch::new(s, config.beta), |sc, b| sc.permuted(s, seed, b))
        .collect::<Result<_>>()?;
    let k = permuted_statistics.iter().filter(|&&v| v >= statistic).count();
    Ok(PermutationTestResult {
        statistic,
        permuted_statistics,
        p_value: (k + 1) as f64 / (np + 1) as f64,
        permutations: np,
        seed,
    })
}

/// Outcome of a test stopped as soon as the decision at `level` was known.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Decision {
    pub reject: bool,
    /// Permutations evaluated before stopping.
    pub evaluated: usize,
}

/// Decides `p ≤ level` for the test of [`permutation_test`] with the same
/// `np` and `seed`, evaluating permutations sequentially and stopping once
/// the remaining ones cannot change the outcome.
pub fn permutation_decision(s: &DMatrix<f64>, np: usize, config: &DistCovConfig, seed: u64, level: f64) -> Result<Decision> {
    validate(s, np, config)?;
    if !(level > 0.0 && level <= 1.0) {
        return Err(Error::Parameter(format!("level must lie in (0, 1], got {level}")));
    }
    // p ≤ level  ⟺  k ≤ k_max.
    let k_max = (level * (np + 1) as f64 + 1e-9).floor() as i64 - 1;
    if k_max < 0 {
        return Ok(Decision { reject: false, evaluated: 0 });
    }
    let k_max = k_max as usize;
    if k_max >= np {
        return Ok(Decision { reject: true, evaluated: 0 });
    }
    let mut scratch = Scratch::new(s, config.beta);
    let statistic = scratch.kernel.eval(s.as_slice())?;
    let mut k = 0;
    for b in 0..np {
        if k > k_max {
            return Ok(Decision { reject: false, evaluated: b });
        }
        if k + (np - b) <= k_max {
            return Ok(Decision { reject: true, evaluated: b });
        }
        if scratch.permuted(s, seed, b)? >= statistic {
            k += 1;
        }
    }
    Ok(Decision { reject: k <= k_max, evaluated: np })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatteryRow {
    pub series: String,
    pub statistic: f64,
    pub p_value: f64,
}

/// Runs one test per named series; series `i` uses the child seed `i` of
/// `seed`.
pub fn test_battery(series: &[(String, DMatrix<f64>)], np: usize, config: &DistCovConfig, seed: u64) -> Result<Vec<BatteryRow>> {
    series
        .iter()
        .enumerate()
        .map(|(i, (name, s))| {
            let r = permutation_test(s, np, config, derive_seed(seed, &[i as u64]))?;
            Ok(BatteryRow { series: name.clone(), statistic: r.statistic, p_value: r.p_value })
        })
        .collect()
}

/// Elementwise square, the series tested for dependence in second moments.
pub fn squared(s: &DMatrix<f64>) -> DMatrix<f64> {
    s.map(|v| v * v)
}
