//! Nonlinear least-squares fitters.
//!
//! All fitters sort their input first, so the result does not depend on the
//! order of the data points. Uncertainties are 1-σ values from the local
//! quadratic approximation of the residual surface, scaled by the reduced
//! residual variance.

mod double_exp;
mod li;
pub mod lm;
mod odmr;
mod power_law;

use alloc::boxed::Box;
use alloc::string::String;
use alloc::vec::Vec;

pub use double_exp::{fit_double_exponential, DoubleExponential};
pub use li::{fit_li_curve, LiFitOptions};
pub use odmr::{fit_odmr, odmr_model, OdmrFit, OdmrOptions};
pub use power_law::{fit_power_law, PowerLaw};

use crate::model::ModelError;

/// One fitted or derived quantity.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FittedValue {
    pub name: String,
    pub unit: String,
    pub value: f64,
    /// 1-σ uncertainty; infinite when the parameter is not identifiable.
    pub uncertainty: f64,
}

impl FittedValue {
    pub(crate) fn new(name: &str, unit: &str, value: f64, uncertainty: f64) -> Self {
        Self {
            name: name.into(),
            unit: unit.into(),
            value,
            uncertainty,
        }
    }
}

/// Summary of one least-squares fit.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FitReport {
    /// Free parameters, in the fitter's documented order.
    pub parameters: Vec<FittedValue>,
    /// Quantities computed from the free parameters.
    pub derived: Vec<FittedValue>,
    /// Root-mean-square of the unweighted residuals, in data units.
    pub residual_rms: f64,
    pub converged: bool,
    pub iterations: usize,
    pub warnings: Vec<String>,
}

impl FitReport {
    /// Looks up a free or derived value by name.
    pub fn get(&self, name: &str) -> Option<&FittedValue> {
        self.parameters.iter().chain(&self.derived).find(|v| v.name == name)
    }

    /// Value of a free or derived quantity, NaN if absent.
    pub fn value(&self, name: &str) -> f64 {
        self.get(name).map_or(f64::NAN, |v| v.value)
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FitError {
    #[error("need at least {needed} data points, got {got}")]
    InsufficientData { needed: usize, got: usize },
    #[error("data contain non-finite values")]
    NonFiniteData,
    #[error("invalid input: {0}")]
    InvalidInput(&'static str),
    #[error("degenerate data: {0}")]
    DegenerateData(&'static str),
    #[error("fit did not converge within {} iterations", .0.iterations)]
    NotConverged(Box<FitReport>),
    #[error("trace is flat: peak-to-peak {peak_to_peak:e} does not exceed the noise estimate {noise:e}")]
    FlatTrace { peak_to_peak: f64, noise: f64 },
    #[error("fitted contrast {0} outside (0, 1); check the calibration factor and DC power")]
    ContrastOutOfRange(f64),
    #[error("model evaluation failed at the initial guess: {0}")]
    Model(#[from] ModelError),
}

/// Sorts `(x, y)` pairs by `x`, then `y`, rejecting non-finite values.
pub(crate) fn sorted_points(points: &[(f64, f64)]) -> Result<Vec<(f64, f64)>, FitError> {
    if points.iter().any(|(x, y)| !x.is_finite() || !y.is_finite()) {
        return Err(FitError::NonFiniteData);
    }
    let mut v = points.to_vec();
    v.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    Ok(v)
}

pub(crate) fn rms(residuals: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = residuals.fold((0.0, 0usize), |(s, n), r| (s + r * r, n + 1));
    if n == 0 {
        0.0
    } else {
        crate::math::Real::sqrt(sum / n as f64)
    }
}
