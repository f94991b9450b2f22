//! Ordinary least-squares line fits used by the exponent and dimension estimators.

use crate::error::{invalid, Result};

/// `y ≈ slope·x + intercept` with per-point residuals.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    /// `y_k − (slope·x_k + intercept)` in input order.
    pub residuals: Vec<f64>,
    /// Coefficient of determination.
    pub r_squared: f64,
}

impl LinearFit {
    pub fn max_abs_residual(&self) -> f64 {
        self.residuals.iter().fold(0.0, |m, r| m.max(r.abs()))
    }
}

/// Least-squares line through `(x_k, y_k)`; needs two distinct abscissae.
pub fn linear_fit(x: &[f64], y: &[f64]) -> Result<LinearFit> {
    if x.len() != y.len() {
        return invalid(format!("fit needs paired data, got {} and {}", x.len(), y.len()));
    }
    if x.len() < 2 {
        return invalid("fit needs at least two points");
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return invalid("fit data must be finite");
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|b| (b - my) * (b - my)).sum();
    if sxx == 0.0 {
        return invalid("fit abscissae are all equal");
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residuals: Vec<f64> = x
        .iter()
        .zip(y)
        .map(|(a, b)| b - (slope * a + intercept))
        .collect();
    let ss_res: f64 = residuals.iter().map(|r| r * r).sum();
    let r_squared = if syy == 0.0 { 1.0 } else { 1.0 - ss_res / syy };
    Ok(LinearFit {
        slope,
        intercept,
        residuals,
        r_squared,
    })
}
