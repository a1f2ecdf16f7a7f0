//! Replication statistics.

use statrs::distribution::{ContinuousCDF, StudentsT};

/// Mean and two-sided 95% Student-t confidence interval of `xs`.
/// A single sample gives a zero-width interval; no samples give `None`.
pub fn mean_ci95(xs: &[f64]) -> Option<(f64, f64, f64)> {
    let n = xs.len();
    if n == 0 {
        return None;
    }
    let mean = xs.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return Some((mean, mean, mean));
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    let t = StudentsT::new(0.0, 1.0, (n - 1) as f64)
        .expect("positive degrees of freedom")
        .inverse_cdf(0.975);
    let half = t * (var / n as f64).sqrt();
    Some((mean, mean - half, mean + half))
}
