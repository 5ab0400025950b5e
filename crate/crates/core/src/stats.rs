//! Sample moments, kurtosis and tail-index diagnostics.

use crate::error::{param, Error, Result};
use crate::scalar::{compensated_sum, Real};

pub fn mean<T: Real>(x: &[T]) -> T {
    compensated_sum(x.iter().copied()) / T::from_count(x.len())
}

/// Variance with divisor `T` (not `T - 1`).
pub fn variance<T: Real>(x: &[T]) -> T {
    let m = mean(x);
    compensated_sum(x.iter().map(|&v| (v - m) * (v - m))) / T::from_count(x.len())
}

pub fn skewness<T: Real>(x: &[T]) -> T {
    let m = mean(x);
    let n = T::from_count(x.len());
    let m2 = compensated_sum(x.iter().map(|&v| (v - m).powi(2))) / n;
    let m3 = compensated_sum(x.iter().map(|&v| (v - m).powi(3))) / n;
    m3 / m2.powf(T::lit(1.5))
}

fn ratio_of_moments<T: Real>(x: &[T], center: T) -> Result<T> {
    if x.len() < 4 {
        return param(format!("kurtosis needs at least 4 observations, got {}", x.len()));
    }
    let s2 = compensated_sum(x.iter().map(|&v| (v - center).powi(2)));
    let s4 = compensated_sum(x.iter().map(|&v| (v - center).powi(4)));
    if !(s2 > T::zero()) {
        return Err(Error::Degenerate("zero sample variance".into()));
    }
    Ok(T::from_count(x.len()) * s4 / (s2 * s2))
}

/// Sample kurtosis `T Σ d⁴ / (Σ d²)²` of the demeaned series, so a Gaussian
/// sample gives roughly 3 and the value can never exceed `T`.
pub fn sample_kurtosis<T: Real>(x: &[T]) -> Result<T> {
    ratio_of_moments(x, mean(x))
}

/// Uncentered moment ratio `T Σ x⁴ / (Σ x²)²`.
///
/// This is the statistic whose `1/T`-scaled limit is tabulated for IID
/// Pareto data with infinite mean, where centering at the sample mean is not
/// meaningful.
pub fn moment_ratio_kurtosis<T: Real>(x: &[T]) -> Result<T> {
    ratio_of_moments(x, T::zero())
}

/// Hill estimator of the tail index of `|x|` from the `k` largest order
/// statistics: the inverse of the mean log-ratio of the top `k` values to the
/// `(k+1)`-th.
pub fn hill_tail_index<T: Real>(x: &[T], k: usize) -> Result<T> {
    if k < 2 {
        return param(format!("hill estimator needs k >= 2, got {k}"));
    }
    if k >= x.len() {
        return param(format!("k = {k} must be smaller than the sample size {}", x.len()));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return param("non-finite observation in hill estimator input");
    }
    let mut abs: Vec<T> = x.iter().map(|v| v.abs()).collect();
    abs.sort_by(|a, b| b.partial_cmp(a).expect("finite"));
    let threshold = abs[k];
    if !(threshold > T::zero()) {
        return param("the (k+1)-th largest |x| is zero; reduce k");
    }
    let ln_thr = threshold.ln();
    let h = compensated_sum(abs[..k].iter().map(|v| v.ln() - ln_thr)) / T::from_count(k);
    if !(h > T::zero()) {
        return Err(Error::Degenerate("top order statistics are tied".into()));
    }
    Ok(h.recip())
}

/// Empirical quantile with linear interpolation between order statistics
/// (the `(n-1)p` rule). `sorted` must be ascending.
pub fn quantile_sorted<T: Real>(sorted: &[T], p: f64) -> T {
    assert!(!sorted.is_empty(), "quantile of an empty sample");
    let pos = p.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = T::lit(pos - lo as f64);
    sorted[lo] + (sorted[hi] - sorted[lo]) * frac
}

/// Quantiles of an unsorted sample.
pub fn quantiles<T: Real>(x: &[T], probs: &[f64]) -> Vec<T> {
    let mut v = x.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).expect("finite sample"));
    probs.iter().map(|&p| quantile_sorted(&v, p)).collect()
}

pub fn median<T: Real>(x: &[T]) -> T {
    quantiles(x, &[0.5])[0]
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn two_point_sample_has_unit_kurtosis() {
        let x: Vec<f64> = (0..100).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
        assert_relative_eq!(sample_kurtosis(&x).unwrap(), 1.0, epsilon = 1e-14);
        let xf: Vec<f32> = x.iter().map(|&v| v as f32).collect();
        assert!((sample_kurtosis(&xf).unwrap() - 1.0).abs() < 1e-5);
    }

    #[test]
    fn single_spike_kurtosis_approaches_sample_size() {
        let t = 480;
        let mut x = vec![0.0f64; t];
        for (i, v) in x.iter_mut().enumerate() {
            *v = ((i * 37) % 11) as f64 * 1e-3;
        }
        let mut last = 0.0;
        for s in [1e2, 1e4, 1e6] {
            x[17] = s;
            let k = sample_kurtosis(&x).unwrap();
            assert!(k > last && k < t as f64);
            last = k;
        }
        // with one dominant spike the demeaned ratio tends to T - 2 + 1/(T - 1)
        let tf = t as f64;
        assert_relative_eq!(last, tf - 2.0 + 1.0 / (tf - 1.0), max_relative = 1e-6);
    }

    #[test]
    fn constant_input_is_degenerate() {
        assert!(matches!(sample_kurtosis(&[2.0f64; 10]), Err(Error::Degenerate(_))));
        assert!(sample_kurtosis(&[1.0f64, 2.0]).is_err());
    }

    #[test]
    fn hill_rejects_bad_k_and_zero_threshold() {
        let x = [3.0, 2.0, 1.0, 0.0, 0.0];
        assert!(hill_tail_index(&x, 1).is_err());
        assert!(hill_tail_index(&x, 5).is_err());
        assert!(hill_tail_index(&x, 3).is_err());
        assert!(hill_tail_index(&x, 2).is_ok());
    }

    #[test]
    fn hill_on_exact_geometric_grid() {
        // order statistics e^{k}, e^{k-1}, ..., e^0: mean log-ratio over the
        // top k against e^0 is (k+1)/2
        let k = 9;
        let x: Vec<f64> = (0..=k + 1).map(|i| (i as f64).exp()).collect();
        let est = hill_tail_index(&x, k).unwrap();
        let logs: f64 = (2..=k + 1).map(|i| (i - 1) as f64).sum::<f64>() / k as f64;
        assert_relative_eq!(est, 1.0 / logs, epsilon = 1e-12);
    }

    #[test]
    fn quantile_interpolates() {
        let v = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(quantile_sorted(&v, 0.0), 1.0);
        assert_eq!(quantile_sorted(&v, 1.0), 4.0);
        assert_relative_eq!(quantile_sorted(&v, 0.5), 2.5);
    }
}
