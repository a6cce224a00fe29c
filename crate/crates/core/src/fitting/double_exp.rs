//! Double-exponential interpolation `y(I) = a₁·e^(−I/t₁) + a₂·e^(−I/t₂) + c`.
//!
//! A grid over the two time constants with the linear parameters solved
//! exactly gives the start; Levenberg–Marquardt then polishes all five.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use super::lm::{self, LmOptions};
use super::{rms, sorted_points, FitError, FitReport, FittedValue};
use crate::linalg;
use crate::math::Real;

pub const MIN_POINTS: usize = 6;

/// Time constants closer than this fraction are flagged as unidentifiable.
pub const IDENTIFIABILITY_TOL: f64 = 0.05;

/// Fitted curve, usable as an interpolator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DoubleExponential {
    pub a1: f64,
    pub t1: f64,
    pub a2: f64,
    pub t2: f64,
    pub c: f64,
    /// Abscissa range of the data.
    pub range: (f64, f64),
    // Amplitudes at the start of the range, which stay finite when `I/t` is large.
    a1_ref: f64,
    a2_ref: f64,
}

impl DoubleExponential {
    /// Value at `x`, and whether `x` lies outside the data range.
    pub fn eval(&self, x: f64) -> (f64, bool) {
        let d = x - self.range.0;
        let value = self.a1_ref * (-d / self.t1).exp() + self.a2_ref * (-d / self.t2).exp() + self.c;
        (value, x < self.range.0 || x > self.range.1)
    }
}

fn basis(x: f64, t: f64) -> f64 {
    (-x / t).exp()
}

/// Fits `(x, y)` points; `x` is typically a current in A.
pub fn fit_double_exponential(points: &[(f64, f64)]) -> Result<(DoubleExponential, FitReport), FitError> {
    fit_with(points, &LmOptions::default())
}

pub(crate) fn fit_with(points: &[(f64, f64)], options: &LmOptions) -> Result<(DoubleExponential, FitReport), FitError> {
    if points.len() < MIN_POINTS {
        return Err(FitError::InsufficientData {
            needed: MIN_POINTS,
            got: points.len(),
        });
    }
    let points = sorted_points(points)?;
    let m = points.len();
    let (lo, hi) = (points[0].0, points[m - 1].0);
    let span = hi - lo;
    if !(span > 0.0) {
        return Err(FitError::DegenerateData("all abscissae are equal"));
    }
    let y_scale = points.iter().fold(0.0f64, |a, p| a.max(p.1.abs()));
    let y_scale = if y_scale > 0.0 { y_scale } else { 1.0 };
    let xs: Vec<f64> = points.iter().map(|p| (p.0 - lo) / span).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1 / y_scale).collect();

    // Separable grid search.
    let grid: Vec<f64> = (0..40).map(|k| 0.02 * 1000f64.powf(k as f64 / 39.0)).collect();
    let mut best: Option<(f64, [f64; 5])> = None;
    let mut design = vec![0.0; 3 * m];
    for (i, &t1) in grid.iter().enumerate() {
        for &t2 in &grid[i + 1..] {
            for (k, &x) in xs.iter().enumerate() {
                design[3 * k] = basis(x, t1);
                design[3 * k + 1] = basis(x, t2);
                design[3 * k + 2] = 1.0;
            }
            let Some(coef) = linalg::least_squares(&design, m, 3, &ys) else {
                continue;
            };
            let sse: f64 = xs
                .iter()
                .zip(&ys)
                .map(|(&x, &y)| {
                    let r = coef[0] * basis(x, t1) + coef[1] * basis(x, t2) + coef[2] - y;
                    r * r
                })
                .sum();
            if best.is_none_or(|b| sse < b.0) {
                best = Some((sse, [coef[0], t1.ln(), coef[1], t2.ln(), coef[2]]));
            }
        }
    }
    let (_, u0) = best.ok_or(FitError::DegenerateData("no exponential basis fits the data"))?;

    let eval = |u: &[f64], r: &mut [f64], jac: Option<&mut [f64]>| -> bool {
        let (t1, t2) = (u[1].exp(), u[3].exp());
        let mut jac = jac;
        for (k, (&x, &y)) in xs.iter().zip(&ys).enumerate() {
            let (e1, e2) = (basis(x, t1), basis(x, t2));
            r[k] = u[0] * e1 + u[2] * e2 + u[4] - y;
            if let Some(j) = jac.as_deref_mut() {
                j[5 * k] = e1;
                j[5 * k + 1] = u[0] * e1 * x / t1;
                j[5 * k + 2] = e2;
                j[5 * k + 3] = u[2] * e2 * x / t2;
                j[5 * k + 4] = 1.0;
            }
        }
        true
    };
    let out = lm::minimize(eval, &u0, m, options).ok_or(FitError::DegenerateData(
        "model cannot be evaluated at the grid optimum",
    ))?;
    let se = out.standard_errors();

    // Order the components so that t1 < t2.
    let (mut c1, mut c2) = ((out.x[0], out.x[1], se[0], se[1]), (out.x[2], out.x[3], se[2], se[3]));
    if c1.1 > c2.1 {
        core::mem::swap(&mut c1, &mut c2);
    }
    let component = |(a, log_t, a_se, log_t_se): (f64, f64, f64, f64)| {
        let t = log_t.exp() * span;
        let a_ref = a * y_scale;
        let a0 = a_ref * (lo / t).exp();
        // Uncertainty of the amplitude at I = 0 includes the shift through t.
        let a0_se = (a_se * y_scale * (lo / t).exp()).hypot(a0 * lo / t * log_t_se);
        (a0, t, a0_se, t * log_t_se, a_ref)
    };
    let (a1, t1, a1_se, t1_se, a1_ref) = component(c1);
    let (a2, t2, a2_se, t2_se, a2_ref) = component(c2);
    let c = out.x[4] * y_scale;
    let c_se = se[4] * y_scale;

    let mut warnings = Vec::new();
    if (t2 - t1) <= IDENTIFIABILITY_TOL * t2 {
        warnings.push(String::from(
            "time constants agree within 5%; the two components are not separately identifiable",
        ));
    }
    let curve = DoubleExponential {
        a1,
        t1,
        a2,
        t2,
        c,
        range: (lo, hi),
        a1_ref,
        a2_ref,
    };
    let report = FitReport {
        parameters: vec![
            FittedValue::new("a1", "y", a1, a1_se),
            FittedValue::new("t1", "x", t1, t1_se),
            FittedValue::new("a2", "y", a2, a2_se),
            FittedValue::new("t2", "x", t2, t2_se),
            FittedValue::new("c", "y", c, c_se),
        ],
        derived: Vec::new(),
        residual_rms: rms(out.residuals.iter().map(|r| r * y_scale)),
        converged: out.converged,
        iterations: out.iterations,
        warnings,
    };
    if !out.converged {
        return Err(FitError::NotConverged(alloc::boxed::Box::new(report)));
    }
    Ok((curve, report))
}
