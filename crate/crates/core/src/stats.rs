//! Small numeric helpers for experiment summaries.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

/// Least-squares fit `y = intercept + slope * x` with a two-sided 95%
/// confidence interval on the slope.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub points: usize,
}

/// Returns `None` with fewer than 3 points or no spread in `x`.
pub fn ols_slope(points: &[(f64, f64)]) -> Option<SlopeFit> {
    let n = points.len();
    if n < 3 {
        return None;
    }
    let nf = n as f64;
    let mean_x = points.iter().map(|p| p.0).sum::<f64>() / nf;
    let mean_y = points.iter().map(|p| p.1).sum::<f64>() / nf;
    let sxx: f64 = points.iter().map(|p| (p.0 - mean_x).powi(2)).sum();
    if sxx <= 0.0 {
        return None;
    }
    let sxy: f64 = points.iter().map(|p| (p.0 - mean_x) * (p.1 - mean_y)).sum();
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let sse: f64 = points.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    let se = (sse / (nf - 2.0) / sxx).sqrt();
    let t = StudentsT::new(0.0, 1.0, nf - 2.0).expect("dof positive").inverse_cdf(0.975);
    Some(SlopeFit { slope, intercept, ci_low: slope - t * se, ci_high: slope + t * se, points: n })
}

/// OLS on `(ln x, ln y)`; non-positive values are rejected.
pub fn log_log_slope(points: &[(f64, f64)]) -> Option<SlopeFit> {
    if points.iter().any(|&(x, y)| x <= 0.0 || y <= 0.0) {
        return None;
    }
    let logs: Vec<(f64, f64)> = points.iter().map(|&(x, y)| (x.ln(), y.ln())).collect();
    ols_slope(&logs)
}

pub fn mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        0.0
    } else {
        values.iter().sum::<f64>() / values.len() as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_power_law() {
        let pts: Vec<(f64, f64)> = [1.0, 4.0, 16.0, 64.0].iter().map(|&x: &f64| (x, 3.0 * x.sqrt())).collect();
        let fit = log_log_slope(&pts).unwrap();
        assert!((fit.slope - 0.5).abs() < 1e-12);
        assert!((fit.ci_high - fit.ci_low).abs() < 1e-9);
    }

    #[test]
    fn noisy_fit_interval_contains_slope() {
        let pts = [(0.0, 0.1), (1.0, 0.9), (2.0, 2.2), (3.0, 2.9), (4.0, 4.1)];
        let fit = ols_slope(&pts).unwrap();
        assert!(fit.ci_low < fit.slope && fit.slope < fit.ci_high);
        assert!(fit.ci_low < 1.0 && 1.0 < fit.ci_high);
    }

    #[test]
    fn degenerate_inputs() {
        assert!(ols_slope(&[(1.0, 1.0), (2.0, 2.0)]).is_none());
        assert!(ols_slope(&[(1.0, 1.0), (1.0, 2.0), (1.0, 3.0)]).is_none());
        assert!(log_log_slope(&[(0.0, 1.0), (1.0, 1.0), (2.0, 1.0)]).is_none());
    }
}
