//! Fit of the light–current characteristic.
//!
//! Free parameters are the internal efficiency η_i, the spontaneous
//! background P_sp and the bare-cavity threshold density N_th. Moving N_th
//! shifts the transparency density and keeps the gain slope, the losses and
//! the recombination line, so the threshold current moves along that line.

use alloc::vec;
use alloc::vec::Vec;

use super::lm::{self, LmOptions};
use super::{rms, FitError, FitReport, FittedValue};
use crate::constants::ELEMENTARY_CHARGE;
use crate::model::{
    modal_gain, output_power, steady_state, threshold_current, AbsorberParams, DiodeLaserParams, Resonance,
};

/// Fewest points accepted by [`fit_li_curve`].
pub const MIN_POINTS: usize = 10;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct LiFitOptions {
    /// Per-point 1-σ noise in W, aligned with the data. Enables
    /// inverse-variance weighting.
    pub noise: Option<Vec<f64>>,
    /// Starting values `[η_i, P_sp, N_th]` replacing the data-driven guess.
    pub initial: Option<[f64; 3]>,
    pub lm: LmOptions,
}

struct Model<'a> {
    base: &'a DiodeLaserParams,
}

impl Model<'_> {
    fn params(&self, x: &[f64]) -> Option<DiodeLaserParams> {
        self.base
            .with_internal_efficiency(x[0])
            .and_then(|p| p.with_spont_background(x[1]))
            .and_then(|p| p.with_threshold_density(x[2]))
            .ok()
    }

    /// Output power and its gradient with respect to `(η_i, P_sp, N_th)`.
    fn evaluate(&self, p: &DiodeLaserParams, current: f64) -> Option<(f64, [f64; 3])> {
        let absorber = AbsorberParams::transparent();
        let op = steady_state(p, &absorber, current, Resonance::Off).ok()?;
        let c = p.config();
        let (power, n) = (op.intracavity_power, op.carrier_density);
        let b = p.stimulated_denominator();
        let gain = modal_gain(p, n);
        let net_slope = c.confinement * (c.differential_gain - c.fca_cross_section);
        let net = gain - p.calibration_loss() - c.confinement * c.fca_cross_section * n;

        // Implicit differentiation of the two stationarity conditions.
        let f1p = net;
        let f1n = net_slope * power + p.seed_prefactor() * c.spont_slope;
        let f2p = -gain / b;
        let f2n = -c.recomb_slope - c.confinement * c.differential_gain * power / b;
        let det = f1p * f2n - f1n * f2p;
        let d_power = |f1t: f64, f2t: f64| {
            if f1t == 0.0 && f2t == 0.0 {
                0.0
            } else {
                (f2t * f1n - f1t * f2n) / det
            }
        };
        let dp_eta = d_power(0.0, gain * power / (b * c.internal_efficiency));
        let dp_nth = d_power(-net_slope * power, net_slope * power / b);

        let out_per_power = output_power(p, 1.0) - c.spont_background;
        Some((op.output_power, [out_per_power * dp_eta, 1.0, out_per_power * dp_nth]))
    }
}

struct Guess {
    efficiency: f64,
    background: f64,
    threshold_density: f64,
}

fn initial_guess(base: &DiodeLaserParams, data: &[(f64, f64)]) -> Result<Guess, FitError> {
    let n = data.len();
    let mut powers: Vec<f64> = data.iter().map(|d| d.1).collect();
    powers.sort_by(f64::total_cmp);
    let decile = n.div_ceil(10);
    let background = (powers[..decile].iter().sum::<f64>() / decile as f64).max(0.0);

    // Extrapolate the upper linear branch down to the background. The
    // segment is narrowed to the upper half above the estimated threshold a
    // few times; unlike a curvature search this tolerates noisy data.
    let first = data[0].0;
    let top = data[n - 1].0;
    let mut lower = first + 0.7 * (top - first);
    let mut slope = 0.0;
    let mut knee_current = first;
    for _ in 0..4 {
        let mut segment: Vec<(f64, f64)> = data.iter().copied().filter(|d| d.0 >= lower).collect();
        if segment.len() < 2 {
            segment = data[n - 2..].to_vec();
        }
        let (s, intercept) = regression_line(&segment);
        if !(s > 0.0) {
            return Err(FitError::DegenerateData("output does not rise with current"));
        }
        slope = s;
        knee_current = (background - intercept) / s;
        if !(knee_current < top) {
            return Err(FitError::DegenerateData(
                "no points above threshold; internal efficiency is unidentifiable",
            ));
        }
        lower = knee_current.max(first) + 0.5 * (top - knee_current.max(first));
    }
    if data.iter().filter(|d| d.0 > knee_current).count() < 2 {
        return Err(FitError::DegenerateData(
            "no points above threshold; internal efficiency is unidentifiable",
        ));
    }
    let knee_current = knee_current.max(0.0);

    let c = base.config();
    let out_per_power = output_power(base, 1.0) - c.spont_background;
    let g_th = base.calibration_loss() + c.confinement * c.fca_cross_section * base.anchor_density();
    let efficiency =
        (slope / out_per_power * ELEMENTARY_CHARGE * c.active_length * g_th / base.photon_energy()).clamp(0.05, 1.0);

    let recombination = knee_current / (ELEMENTARY_CHARGE * base.active_volume());
    let mut threshold_density = base.anchor_density() + (recombination - c.recomb_at_threshold) / c.recomb_slope;
    if base.with_threshold_density(threshold_density).is_err() {
        threshold_density = base.anchor_density();
    }
    Ok(Guess {
        efficiency,
        background,
        threshold_density,
    })
}

fn regression_line(points: &[(f64, f64)]) -> (f64, f64) {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

/// Fits `(current A, output power W)` data with the laser model.
///
/// All parameters of `fixed` other than the three free ones stay as given.
/// The report lists `internal_efficiency`, `spont_background` and
/// `threshold_density`, and derives `threshold_current`.
pub fn fit_li_curve(
    data: &[(f64, f64)],
    fixed: &DiodeLaserParams,
    options: &LiFitOptions,
) -> Result<FitReport, FitError> {
    if data.len() < MIN_POINTS {
        return Err(FitError::InsufficientData {
            needed: MIN_POINTS,
            got: data.len(),
        });
    }
    if let Some(noise) = &options.noise {
        if noise.len() != data.len() {
            return Err(FitError::InvalidInput("noise column length differs from data"));
        }
        if noise.iter().any(|s| !(*s > 0.0) || !s.is_finite()) {
            return Err(FitError::InvalidInput("noise values must be positive"));
        }
    }
    if data.iter().any(|d| d.0 < 0.0) {
        return Err(FitError::InvalidInput("negative current"));
    }

    // Sort points together with their noise so input order is irrelevant.
    let mut rows: Vec<(f64, f64, f64)> = data
        .iter()
        .enumerate()
        .map(|(k, &(i, p))| (i, p, options.noise.as_ref().map_or(1.0, |s| s[k])))
        .collect();
    if rows.iter().any(|r| !r.0.is_finite() || !r.1.is_finite()) {
        return Err(FitError::NonFiniteData);
    }
    rows.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)).then(a.2.total_cmp(&b.2)));
    let points: Vec<(f64, f64)> = rows.iter().map(|r| (r.0, r.1)).collect();

    // Without a user start, also try a threshold just past the last current:
    // data that never leaves the spontaneous regime fits best there, which
    // the threshold check below then reports as degenerate.
    let starts: Vec<[f64; 3]> = match options.initial {
        Some(x) => vec![x],
        None => {
            let g = initial_guess(fixed, &points)?;
            let mut starts = vec![[g.efficiency, g.background, g.threshold_density]];
            let c = fixed.config();
            let past = 1.1 * points[points.len() - 1].0 / (ELEMENTARY_CHARGE * fixed.active_volume());
            let density = fixed.anchor_density() + (past - c.recomb_at_threshold) / c.recomb_slope;
            if fixed.with_threshold_density(density).is_ok() {
                starts.push([g.efficiency, g.background, density]);
            }
            starts
        }
    };
    let start = starts[0];
    let power_scale = points
        .iter()
        .fold(0.0f64, |m, p| m.max(p.1.abs()))
        .max(f64::MIN_POSITIVE);
    let scale = [
        start[0].abs().max(1e-3),
        if start[1] != 0.0 {
            start[1].abs()
        } else {
            1e-3 * power_scale
        },
        start[2].abs(),
    ];
    // Unweighted fits divide by the power scale, which leaves the minimizer
    // unchanged and keeps the normal equations well scaled.
    let weights: Vec<f64> = rows
        .iter()
        .map(|r| {
            if options.noise.is_some() {
                1.0 / r.2
            } else {
                1.0 / power_scale
            }
        })
        .collect();

    let model = Model { base: fixed };
    let m = points.len();
    let eval = |u: &[f64], r: &mut [f64], jac: Option<&mut [f64]>| -> bool {
        let x = [u[0] * scale[0], u[1] * scale[1], u[2] * scale[2]];
        let Some(p) = model.params(&x) else {
            return false;
        };
        let mut jac = jac;
        for (k, &(current, measured)) in points.iter().enumerate() {
            let Some((value, grad)) = model.evaluate(&p, current) else {
                return false;
            };
            r[k] = (value - measured) * weights[k];
            if let Some(j) = jac.as_deref_mut() {
                for q in 0..3 {
                    j[3 * k + q] = grad[q] * scale[q] * weights[k];
                }
            }
        }
        true
    };
    let mut best: Option<lm::LmOutcome> = None;
    for start in &starts {
        let u0 = [start[0] / scale[0], start[1] / scale[1], start[2] / scale[2]];
        if let Some(out) = lm::minimize(&eval, &u0, m, &options.lm) {
            if best.as_ref().is_none_or(|b| out.cost < b.cost) {
                best = Some(out);
            }
        }
    }
    let out = best.ok_or(FitError::InvalidInput("model cannot be evaluated at the initial guess"))?;

    let x: Vec<f64> = out.x.iter().zip(scale).map(|(u, s)| u * s).collect();
    let se: Vec<f64> = out.standard_errors().iter().zip(scale).map(|(e, s)| e * s).collect();
    let fitted = model
        .params(&x)
        .ok_or(FitError::DegenerateData("fit left the valid parameter range"))?;
    let residual_rms = rms(out.residuals.iter().zip(&weights).map(|(r, w)| r / w));

    let c = fitted.config();
    let volume_charge = ELEMENTARY_CHARGE * fitted.active_volume();
    let ith = threshold_current(&fitted, fitted.calibration_loss())?;
    let ith_sigma = volume_charge * c.recomb_slope * se[2];

    let report = FitReport {
        parameters: vec![
            FittedValue::new("internal_efficiency", "", x[0], se[0]),
            FittedValue::new("spont_background", "W", x[1], se[1]),
            FittedValue::new("threshold_density", "m^-3", x[2], se[2]),
        ],
        derived: vec![FittedValue::new("threshold_current", "A", ith, ith_sigma)],
        residual_rms,
        converged: out.converged,
        iterations: out.iterations,
        warnings: Vec::new(),
    };
    if ith > points[m - 1].0 {
        return Err(FitError::DegenerateData(
            "fitted threshold lies above every current; internal efficiency is unidentifiable",
        ));
    }
    if !out.converged {
        return Err(FitError::NotConverged(alloc::boxed::Box::new(report)));
    }
    Ok(report)
}
