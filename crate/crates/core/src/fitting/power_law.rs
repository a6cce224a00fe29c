//! Power law `y = a·x^k` by linear regression of `ln y` on `ln x`.

use alloc::vec;
use alloc::vec::Vec;

use super::{rms, sorted_points, FitError, FitReport, FittedValue};
use crate::math::Real;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerLaw {
    pub exponent: f64,
    pub exponent_se: f64,
    pub prefactor: f64,
}

impl PowerLaw {
    pub fn eval(&self, x: f64) -> f64 {
        self.prefactor * x.powf(self.exponent)
    }
}

/// Least-squares slope of `ln y` against `ln x`, with its standard error.
pub fn fit_power_law(points: &[(f64, f64)]) -> Result<(PowerLaw, FitReport), FitError> {
    if points.len() < 3 {
        return Err(FitError::InsufficientData {
            needed: 3,
            got: points.len(),
        });
    }
    let points = sorted_points(points)?;
    if points.iter().any(|p| !(p.0 > 0.0 && p.1 > 0.0)) {
        return Err(FitError::InvalidInput("power-law data must be strictly positive"));
    }
    let logs: Vec<(f64, f64)> = points.iter().map(|p| (p.0.ln(), p.1.ln())).collect();
    let n = logs.len() as f64;
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / n;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = logs.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    if !(sxx > 0.0) {
        return Err(FitError::DegenerateData("all abscissae are equal"));
    }
    let sxy: f64 = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let exponent = sxy / sxx;
    let intercept = my - exponent * mx;
    let log_residuals: Vec<f64> = logs.iter().map(|p| p.1 - intercept - exponent * p.0).collect();
    let s2 = log_residuals.iter().map(|r| r * r).sum::<f64>() / (n - 2.0);
    let exponent_se = (s2 / sxx).sqrt();
    let intercept_se = (s2 * (1.0 / n + mx * mx / sxx)).sqrt();
    let law = PowerLaw {
        exponent,
        exponent_se,
        prefactor: intercept.exp(),
    };
    let report = FitReport {
        parameters: vec![
            FittedValue::new("exponent", "", exponent, exponent_se),
            FittedValue::new("log_prefactor", "", intercept, intercept_se),
        ],
        derived: vec![FittedValue::new(
            "prefactor",
            "",
            law.prefactor,
            law.prefactor * intercept_se,
        )],
        residual_rms: rms(points.iter().map(|p| p.1 - law.eval(p.0))),
        converged: true,
        iterations: 1,
        warnings: Vec::new(),
    };
    Ok((law, report))
}
