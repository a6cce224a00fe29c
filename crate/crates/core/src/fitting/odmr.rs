//! Lock-in ODMR traces: derivative of a Gaussian resonance.
//!
//! ```text
//! s(ν) = A·(ν₀ − ν)/σ² · exp(−(ν − ν₀)²/(2σ²)) + b
//! ```
//!
//! The extrema sit at `ν₀ ∓ σ` and are `2·|A|·e^(−1/2)/σ` apart. Contrast is
//! `κ · peak-to-peak / P_dc`, with `κ` and the DC power supplied by the caller.

use alloc::vec;
use alloc::vec::Vec;

use super::lm::{self, LmOptions};
use super::{rms, sorted_points, FitError, FitReport, FittedValue};
use crate::math::Real;

pub const MIN_POINTS: usize = 20;

/// `2·√(2 ln 2)`, FWHM over standard deviation of a Gaussian.
const FWHM_PER_SIGMA: f64 = 2.354_820_045_030_949_3;

/// Fitted resonance descriptors.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct OdmrFit {
    pub contrast: f64,
    /// Hz.
    pub linewidth_fwhm: f64,
    /// Hz.
    pub center: f64,
    /// `ds/dν` at the center, signal units per Hz.
    pub zero_crossing_slope: f64,
    /// Amplitude `A` of the model, signal units · Hz.
    pub amplitude: f64,
    /// Constant offset `b`, signal units.
    pub offset: f64,
}

impl OdmrFit {
    /// Gaussian standard deviation of the resonance, Hz.
    pub fn sigma(&self) -> f64 {
        self.linewidth_fwhm / FWHM_PER_SIGMA
    }

    pub fn eval(&self, frequency: f64) -> f64 {
        odmr_model(frequency, self.amplitude, self.center, self.sigma(), self.offset)
    }
}

/// Converts the lock-in signal into a contrast.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdmrOptions {
    /// Modulation-depth dependent calibration factor κ.
    pub kappa: f64,
    /// Detected DC power, in the trace's signal units.
    pub dc_power: f64,
    pub lm: LmOptions,
}

impl Default for OdmrOptions {
    fn default() -> Self {
        Self {
            kappa: 1.0,
            dc_power: 1.0,
            lm: LmOptions::default(),
        }
    }
}

/// Derivative-of-Gaussian line shape.
pub fn odmr_model(frequency: f64, amplitude: f64, center: f64, sigma: f64, offset: f64) -> f64 {
    let d = frequency - center;
    amplitude * (-d) / (sigma * sigma) * (-(d * d) / (2.0 * sigma * sigma)).exp() + offset
}

/// Peak-to-peak of the line shape for amplitude `A` and width `σ`.
pub fn peak_to_peak(amplitude: f64, sigma: f64) -> f64 {
    2.0 * amplitude.abs() * (-0.5f64).exp() / sigma
}

/// Noise estimate from second differences, robust to the smooth line shape.
fn noise_estimate(values: &[f64]) -> f64 {
    if values.len() < 3 {
        return 0.0;
    }
    let mut d2: Vec<f64> = values.windows(3).map(|w| (w[0] - 2.0 * w[1] + w[2]).abs()).collect();
    d2.sort_by(f64::total_cmp);
    let median = d2[d2.len() / 2];
    // White noise: Var(d2) = 6 s², and median |N(0,1)| = 0.6745.
    median / (0.674_489_750_196_081_7 * 6.0f64.sqrt())
}

/// Fits a lock-in trace of `(frequency Hz, signal)` pairs.
///
/// The report lists `amplitude`, `center`, `sigma` and `offset`, and derives
/// `linewidth_fwhm`, `contrast` and `zero_crossing_slope`.
pub fn fit_odmr(trace: &[(f64, f64)], options: &OdmrOptions) -> Result<(OdmrFit, FitReport), FitError> {
    if trace.len() < MIN_POINTS {
        return Err(FitError::InsufficientData {
            needed: MIN_POINTS,
            got: trace.len(),
        });
    }
    if !(options.kappa > 0.0 && options.dc_power > 0.0) {
        return Err(FitError::InvalidInput("kappa and dc_power must be positive"));
    }
    let points = sorted_points(trace)?;
    let values: Vec<f64> = points.iter().map(|p| p.1).collect();

    let (mut k_max, mut k_min) = (0, 0);
    for (k, v) in values.iter().enumerate() {
        if *v > values[k_max] {
            k_max = k;
        }
        if *v < values[k_min] {
            k_min = k;
        }
    }
    let p2p = values[k_max] - values[k_min];
    let noise = noise_estimate(&values);
    if !(p2p > 3.0 * noise) || p2p == 0.0 {
        return Err(FitError::FlatTrace {
            peak_to_peak: p2p,
            noise,
        });
    }

    // Start from the extrema: they sit one σ either side of the center.
    let (f_max, f_min) = (points[k_max].0, points[k_min].0);
    let center0 = 0.5 * (f_max + f_min);
    let sigma0 = (0.5 * (f_max - f_min).abs()).max(f64::MIN_POSITIVE);
    let sign = if f_max < f_min { 1.0 } else { -1.0 };
    let amplitude0 = sign * p2p * sigma0 * 0.5f64.exp() / 2.0;
    let median = {
        let mut v = values.clone();
        v.sort_by(f64::total_cmp);
        v[v.len() / 2]
    };
    let offset0 = median;

    // Internal coordinates: frequency offsets in units of sigma0 relative to
    // center0, signals in units of p2p.
    let s_scale = p2p;
    let xs: Vec<f64> = points.iter().map(|p| (p.0 - center0) / sigma0).collect();
    let ys: Vec<f64> = values.iter().map(|v| v / s_scale).collect();
    let a_scale = s_scale * sigma0;
    let eval = |u: &[f64], r: &mut [f64], jac: Option<&mut [f64]>| -> bool {
        let (a, c, s, b) = (u[0], u[1], u[2], u[3]);
        if !(s > 0.0) {
            return false;
        }
        let mut jac = jac;
        for (k, (&x, &y)) in xs.iter().zip(&ys).enumerate() {
            let d = x - c;
            let z = d / s;
            let e = (-0.5 * z * z).exp();
            let f = -a * d / (s * s) * e;
            r[k] = f + b - y;
            if let Some(j) = jac.as_deref_mut() {
                j[4 * k] = -d / (s * s) * e;
                // ∂f/∂c = a/s²·e·(1 − z²)
                j[4 * k + 1] = a / (s * s) * e * (1.0 - z * z);
                // ∂f/∂s = a·d/s³·e·(2 − z²)
                j[4 * k + 2] = a * d / (s * s * s) * e * (2.0 - z * z);
                j[4 * k + 3] = 1.0;
            }
        }
        true
    };
    let u0 = [amplitude0 / a_scale, 0.0, 1.0, offset0 / s_scale];
    let out = lm::minimize(eval, &u0, xs.len(), &options.lm)
        .ok_or(FitError::InvalidInput("model cannot be evaluated at the initial guess"))?;
    let se = out.standard_errors();

    let amplitude = out.x[0] * a_scale;
    let center = center0 + out.x[1] * sigma0;
    let sigma = out.x[2] * sigma0;
    let offset = out.x[3] * s_scale;
    let (amplitude_se, center_se, sigma_se, offset_se) =
        (se[0] * a_scale, se[1] * sigma0, se[2] * sigma0, se[3] * s_scale);

    let linewidth = FWHM_PER_SIGMA * sigma;
    let fitted_p2p = peak_to_peak(amplitude, sigma);
    let contrast = options.kappa * fitted_p2p / options.dc_power;
    let slope = -amplitude / (sigma * sigma);
    // First-order propagation through p2p ∝ |A|/σ and slope ∝ A/σ².
    let rel_a = amplitude_se / amplitude.abs();
    let rel_s = sigma_se / sigma;
    let contrast_se = contrast * (rel_a * rel_a + rel_s * rel_s).sqrt();
    let slope_se = slope.abs() * (rel_a * rel_a + 4.0 * rel_s * rel_s).sqrt();

    let report = FitReport {
        parameters: vec![
            FittedValue::new("amplitude", "signal*Hz", amplitude, amplitude_se),
            FittedValue::new("center", "Hz", center, center_se),
            FittedValue::new("sigma", "Hz", sigma, sigma_se),
            FittedValue::new("offset", "signal", offset, offset_se),
        ],
        derived: vec![
            FittedValue::new("linewidth_fwhm", "Hz", linewidth, FWHM_PER_SIGMA * sigma_se),
            FittedValue::new("contrast", "", contrast, contrast_se),
            FittedValue::new("zero_crossing_slope", "signal/Hz", slope, slope_se),
        ],
        residual_rms: rms(out.residuals.iter().map(|r| r * s_scale)),
        converged: out.converged,
        iterations: out.iterations,
        warnings: Vec::new(),
    };
    if !out.converged {
        return Err(FitError::NotConverged(alloc::boxed::Box::new(report)));
    }
    if !(contrast > 0.0 && contrast < 1.0) {
        return Err(FitError::ContrastOutOfRange(contrast));
    }
    let fit = OdmrFit {
        contrast,
        linewidth_fwhm: linewidth,
        center,
        zero_crossing_slope: slope,
        amplitude,
        offset,
    };
    Ok((fit, report))
}
