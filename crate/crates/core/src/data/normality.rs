use statrs::distribution::{ContinuousCDF, Normal};

use super::DataError;

const MIN_SAMPLE: usize = 20;

/// Number of equiprobable classes, `ceil(2 n^(2/5))`.
pub fn pearson_classes(n: usize) -> usize {
    (2.0 * (n as f64).powf(0.4)).ceil() as usize
}

/// Pearson chi-square goodness-of-fit statistic against a normal with the
/// sample's mean and standard deviation, divided by its degrees of freedom
/// (classes − 3). Smaller is closer to Gaussian; about 1 for normal data.
pub fn pearson_normality(x: &[f64]) -> Result<f64, DataError> {
    let n = x.len();
    if n < MIN_SAMPLE {
        return Err(DataError::TooFewObservations(n, MIN_SAMPLE));
    }
    let mean = x.iter().sum::<f64>() / n as f64;
    let var = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    let sd = var.sqrt();
    if !(sd > 0.0 && sd.is_finite()) || sd <= mean.abs() * 1e-14 {
        return Err(DataError::ZeroVariance);
    }
    let classes = pearson_classes(n);
    let std_normal = Normal::standard();
    let mut counts = vec![0usize; classes];
    for &v in x {
        let p = std_normal.cdf((v - mean) / sd);
        let c = ((classes as f64 * p).floor() as usize).min(classes - 1);
        counts[c] += 1;
    }
    let expected = n as f64 / classes as f64;
    let chi2: f64 = counts
        .iter()
        .map(|&c| (c as f64 - expected).powi(2) / expected)
        .sum();
    Ok(chi2 / (classes - 3) as f64)
}
