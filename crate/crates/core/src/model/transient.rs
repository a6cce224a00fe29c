//! Adaptive Dormand–Prince 5(4) integration of the rate equations.
//!
//! This is the numerical oracle for the closed-form steady state. The
//! spontaneous-emission line is clamped at zero below the density where it
//! vanishes, so that a start from an empty cavity cannot drive the power
//! negative. Every steady state lies above that density, where the clamp is
//! inactive.

use alloc::vec::Vec;

use super::steady::{carrier_terms, photon_terms, Scales};
use super::{total_loss, AbsorberParams, DiodeLaserParams, ModelError, OperatingPoint, Resonance};
use crate::math::Real;

/// Integrator settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransientOptions {
    /// Relative local error tolerance.
    pub rtol: f64,
    /// Absolute local error tolerance on the normalized state.
    pub atol: f64,
    /// A state is stationary when each equation's net rate is below this
    /// fraction of its largest term.
    pub stationarity_tol: f64,
    /// Stop as soon as the state is stationary. When false the integration
    /// always runs to `t_end`.
    pub stop_when_stationary: bool,
    /// Integrate with this constant step (s) instead of adapting it.
    pub fixed_step: Option<f64>,
    /// Hard cap on the number of steps.
    pub max_steps: usize,
}

impl Default for TransientOptions {
    fn default() -> Self {
        Self {
            rtol: 1e-9,
            atol: 1e-15,
            stationarity_tol: 1e-9,
            stop_when_stationary: true,
            fixed_step: None,
            max_steps: 5_000_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryPoint {
    /// Time, s.
    pub time: f64,
    /// Intracavity power, W.
    pub power: f64,
    /// Carrier density, 1/m³.
    pub density: f64,
}

/// Accepted steps of one integration.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub points: Vec<TrajectoryPoint>,
    /// Whether the last point passed the stationarity test.
    pub stationary: bool,
}

impl Trajectory {
    pub fn last(&self) -> TrajectoryPoint {
        // Construction always pushes the initial state.
        self.points[self.points.len() - 1]
    }
}

struct System<'a> {
    params: &'a DiodeLaserParams,
    alpha: f64,
    current: f64,
    injection: f64,
    n_scale: f64,
    p_scale: f64,
    t_scale: f64,
}

impl System<'_> {
    fn physical(&self, y: [f64; 2]) -> (f64, f64) {
        (y[0] * self.p_scale, y[1] * self.n_scale)
    }

    /// Normalized right-hand side. The state is `(P/P_s, N/N_th)` and time
    /// is measured in `N_th / R(N_th)`.
    fn rhs(&self, y: [f64; 2]) -> [f64; 2] {
        let (p, n) = self.physical(y);
        let params = self.params;
        let c = params.config();
        let net_gain = super::modal_gain(params, n) - self.alpha - c.confinement * c.fca_cross_section * n;
        let seed = params.seed_prefactor() * params.spontaneous(n).max(0.0);
        let dp = params.group_velocity() * (net_gain * p + seed);
        let dn = self.injection
            - params.recombination(n)
            - super::modal_gain(params, n) * p / params.stimulated_denominator();
        [dp * self.t_scale / self.p_scale, dn * self.t_scale / self.n_scale]
    }

    fn is_stationary(&self, y: [f64; 2], tol: f64) -> bool {
        let (p, n) = self.physical(y);
        let mut photon = photon_terms(self.params, self.alpha, p, n);
        if self.params.spontaneous(n) < 0.0 {
            // Clamped seed: the two parts cancel but still set the scale.
            photon[4] = -photon[3];
        }
        let carrier = carrier_terms(self.params, self.current, p, n);
        small(&photon, tol) && small(&carrier, tol)
    }
}

fn small(terms: &[f64], tol: f64) -> bool {
    let sum: f64 = terms.iter().sum();
    let scale = terms.iter().fold(0.0f64, |m, t| m.max(t.abs()));
    sum.abs() <= tol * scale
}

// Dormand–Prince 5(4) tableau. The system is autonomous, so the nodes are unused.
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

fn axpy(y: [f64; 2], h: f64, terms: &[(f64, [f64; 2])]) -> [f64; 2] {
    let mut out = y;
    for &(a, k) in terms {
        out[0] += h * a * k[0];
        out[1] += h * a * k[1];
    }
    out
}

/// One Dormand–Prince step from `y` with derivative `k1`. Returns the fifth
/// order solution, its derivative (FSAL) and the embedded error estimate.
fn dp_step(sys: &System, y: [f64; 2], k1: [f64; 2], h: f64) -> ([f64; 2], [f64; 2], [f64; 2]) {
    let k2 = sys.rhs(axpy(y, h, &[(A21, k1)]));
    let k3 = sys.rhs(axpy(y, h, &[(A31, k1), (A32, k2)]));
    let k4 = sys.rhs(axpy(y, h, &[(A41, k1), (A42, k2), (A43, k3)]));
    let k5 = sys.rhs(axpy(y, h, &[(A51, k1), (A52, k2), (A53, k3), (A54, k4)]));
    let k6 = sys.rhs(axpy(y, h, &[(A61, k1), (A62, k2), (A63, k3), (A64, k4), (A65, k5)]));
    let y_new = axpy(y, h, &[(B1, k1), (B3, k3), (B4, k4), (B5, k5), (B6, k6)]);
    let k7 = sys.rhs(y_new);
    let err = axpy(
        [0.0, 0.0],
        h,
        &[(E1, k1), (E3, k3), (E4, k4), (E5, k5), (E6, k6), (E7, k7)],
    );
    (y_new, k7, err)
}

/// Integrates the rate equations from `initial = (P₀, N₀)` at a constant
/// drive current.
///
/// With the default options integration stops at the first accepted step
/// whose state is stationary, and `NotConverged` is returned if that never
/// happens before `t_end`.
pub fn integrate_transient(
    params: &DiodeLaserParams,
    absorber: &AbsorberParams,
    current: f64,
    resonance: Resonance,
    initial: (f64, f64),
    t_end: f64,
    options: &TransientOptions,
) -> Result<Trajectory, ModelError> {
    if !(current >= 0.0) || !current.is_finite() {
        return Err(ModelError::NegativeCurrent { current });
    }
    if !(t_end > 0.0) || !t_end.is_finite() {
        return Err(ModelError::InvalidIntegration("t_end must be finite and positive"));
    }
    if !(initial.0 >= 0.0 && initial.1 >= 0.0) || !initial.0.is_finite() || !initial.1.is_finite() {
        return Err(ModelError::InvalidIntegration(
            "initial state must be finite and non-negative",
        ));
    }
    if !(options.rtol > 0.0 && options.atol > 0.0 && options.stationarity_tol >= 0.0) {
        return Err(ModelError::InvalidIntegration("tolerances must be positive"));
    }
    if let Some(h) = options.fixed_step {
        if !(h > 0.0) || !h.is_finite() {
            return Err(ModelError::InvalidIntegration("fixed step must be finite and positive"));
        }
    }

    let alpha = total_loss(params, absorber, resonance);
    let scales = Scales::new(params, alpha)?;
    let sys = System {
        params,
        alpha,
        current,
        injection: params.injection_rate(current),
        n_scale: scales.threshold_density,
        p_scale: scales.power_scale,
        t_scale: scales.threshold_density / scales.threshold_recombination,
    };
    let tau_end = t_end / sys.t_scale;

    let mut y = [initial.0 / sys.p_scale, initial.1 / sys.n_scale];
    let mut tau = 0.0;
    let mut points = Vec::new();
    let push = |points: &mut Vec<TrajectoryPoint>, tau: f64, y: [f64; 2]| {
        let (power, density) = sys.physical(y);
        points.push(TrajectoryPoint {
            time: tau * sys.t_scale,
            power,
            density,
        });
    };
    push(&mut points, tau, y);

    let mut stationary = sys.is_stationary(y, options.stationarity_tol);
    if stationary && options.stop_when_stationary {
        return Ok(Trajectory { points, stationary });
    }

    let mut k1 = sys.rhs(y);
    let mut h = match options.fixed_step {
        Some(step) => step / sys.t_scale,
        None => {
            // Photon lifetime in normalized time sets the fastest scale.
            let photon_rate = params.group_velocity() * scales.threshold_gain * sys.t_scale;
            1e-3 / photon_rate.max(1.0)
        }
    };
    let mut steps = 0usize;
    let mut previous_error = 1e-4f64;

    while tau < tau_end {
        if steps >= options.max_steps {
            return Err(ModelError::NotConverged { t_end });
        }
        steps += 1;
        let step = h.min(tau_end - tau);
        let (y_new, k_new, err) = dp_step(&sys, y, k1, step);

        let accepted = if options.fixed_step.is_some() {
            true
        } else {
            let mut norm = 0.0f64;
            for i in 0..2 {
                let sc = options.atol + options.rtol * y[i].abs().max(y_new[i].abs());
                let e = err[i] / sc;
                norm += e * e;
            }
            let norm = (norm / 2.0).sqrt();
            if !norm.is_finite() {
                h *= 0.1;
                continue;
            }
            // PI step-size controller.
            let factor = if norm == 0.0 {
                5.0
            } else {
                (0.9 * norm.powf(-0.7 / 5.0) * previous_error.powf(0.4 / 5.0)).clamp(0.2, 5.0)
            };
            if norm <= 1.0 {
                previous_error = norm.max(1e-4);
                h = step * factor;
                true
            } else {
                h = step * factor.min(1.0);
                false
            }
        };
        if !accepted {
            continue;
        }

        tau += step;
        y = [y_new[0].max(0.0), y_new[1].max(0.0)];
        k1 = if y == y_new { k_new } else { sys.rhs(y) };
        push(&mut points, tau, y);

        stationary = sys.is_stationary(y, options.stationarity_tol);
        if stationary && options.stop_when_stationary {
            return Ok(Trajectory { points, stationary });
        }
    }

    if options.stop_when_stationary && !stationary {
        return Err(ModelError::NotConverged { t_end });
    }
    Ok(Trajectory { points, stationary })
}

/// Integrates from an empty, unpumped cavity until stationary.
pub fn settle(
    params: &DiodeLaserParams,
    absorber: &AbsorberParams,
    current: f64,
    resonance: Resonance,
    t_end: f64,
) -> Result<OperatingPoint, ModelError> {
    let trajectory = integrate_transient(
        params,
        absorber,
        current,
        resonance,
        (0.0, 0.0),
        t_end,
        &TransientOptions::default(),
    )?;
    let last = trajectory.last();
    Ok(OperatingPoint {
        current,
        carrier_density: last.density,
        intracavity_power: last.power,
        output_power: super::output_power(params, last.power),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{steady_state, threshold_current};
    use crate::presets;

    fn rel(a: f64, b: f64) -> f64 {
        if a == b {
            0.0
        } else {
            ((a - b) / b.abs().max(a.abs())).abs()
        }
    }

    #[test]
    fn fixed_point_stays_put() {
        let p = presets::synth1();
        let a = presets::synth1_absorber();
        let ith = threshold_current(&p, p.calibration_loss()).unwrap();
        let op = steady_state(&p, &a, 1.7 * ith, Resonance::On).unwrap();
        let opts = TransientOptions {
            stop_when_stationary: false,
            ..TransientOptions::default()
        };
        let tr = integrate_transient(
            &p,
            &a,
            op.current,
            Resonance::On,
            (op.intracavity_power, op.carrier_density),
            1e-8,
            &opts,
        )
        .unwrap();
        for pt in &tr.points {
            assert!(rel(pt.power, op.intracavity_power) < 1e-9);
            assert!(rel(pt.density, op.carrier_density) < 1e-9);
        }
    }

    #[test]
    fn settles_on_closed_form_above_and_below_threshold() {
        let p = presets::synth1();
        let a = AbsorberParams::transparent();
        let ith = threshold_current(&p, p.calibration_loss()).unwrap();
        // The dark state at zero current is only approached exponentially.
        let glow = steady_state(&p, &a, 0.5 * ith, Resonance::Off)
            .unwrap()
            .intracavity_power;
        for f in [0.0, 0.5, 0.98, 1.0, 1.02, 2.0] {
            let exact = steady_state(&p, &a, f * ith, Resonance::Off).unwrap();
            let sim = settle(&p, &a, f * ith, Resonance::Off, 1e-3).unwrap();
            let dp = (sim.intracavity_power - exact.intracavity_power).abs();
            assert!(
                dp < 1e-6 * exact.intracavity_power + 1e-9 * glow,
                "f = {f}: {sim:?} vs {exact:?}"
            );
            assert!(rel(sim.carrier_density, exact.carrier_density) < 1e-6, "f = {f}");
        }
    }

    #[test]
    fn step_halving_converges() {
        let p = presets::synth1();
        let a = AbsorberParams::transparent();
        let ith = threshold_current(&p, p.calibration_loss()).unwrap();
        let run = |h: f64| {
            let opts = TransientOptions {
                stop_when_stationary: false,
                fixed_step: Some(h),
                ..TransientOptions::default()
            };
            integrate_transient(&p, &a, 2.0 * ith, Resonance::Off, (0.0, 0.0), 2e-8, &opts)
                .unwrap()
                .last()
        };
        let coarse = run(2e-12);
        let fine = run(1e-12);
        assert!(rel(coarse.power, fine.power) < 1e-8);
        assert!(rel(coarse.density, fine.density) < 1e-8);
    }

    #[test]
    fn too_short_horizon_reports_non_convergence() {
        let p = presets::synth1();
        let a = AbsorberParams::transparent();
        let err = settle(&p, &a, 0.05, Resonance::Off, 1e-12).unwrap_err();
        assert!(matches!(err, ModelError::NotConverged { .. }));
    }

    #[test]
    fn rejects_bad_settings() {
        let p = presets::synth1();
        let a = AbsorberParams::transparent();
        let opts = TransientOptions::default();
        assert!(integrate_transient(&p, &a, 0.1, Resonance::Off, (0.0, 0.0), 0.0, &opts).is_err());
        assert!(integrate_transient(&p, &a, 0.1, Resonance::Off, (-1.0, 0.0), 1.0, &opts).is_err());
    }
}
