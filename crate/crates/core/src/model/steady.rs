use super::{
    output_power, threshold_carrier_density, total_loss, AbsorberParams, DiodeLaserParams, ModelError, OperatingPoint,
    Resonance,
};
use crate::math::Real;

/// Dimensionless groups of the linearized steady state at one loss level.
///
/// Densities are measured in units of the threshold density `N_th` and powers
/// in units of `P_s = η_i·d·W·ħω·R(N_th) / G_th`, the slope scale of the
/// above-threshold branch. With `N = N_th·(1 + y)` and `P = P_s·p` the two
/// stationarity conditions become
///
/// ```text
/// μ·y·p + s0 + s1·y = 0
/// j − 1 − ρ·y − (1 + γ_g·y)·p = 0
/// ```
#[derive(Debug, Clone, Copy)]
pub(crate) struct Scales {
    pub threshold_density: f64,
    pub threshold_gain: f64,
    pub threshold_recombination: f64,
    pub power_scale: f64,
    mu: f64,
    rho: f64,
    gamma_g: f64,
    s0: f64,
    s1: f64,
}

impl Scales {
    pub(crate) fn new(params: &DiodeLaserParams, alpha_total: f64) -> Result<Self, ModelError> {
        let c = params.config();
        let n_th = threshold_carrier_density(params, alpha_total)?;
        let g_th = alpha_total + c.confinement * c.fca_cross_section * n_th;
        let r_th = params.recombination(n_th);
        if !(r_th > 0.0) {
            return Err(ModelError::NonPositiveThreshold { density: n_th });
        }
        let power_scale = params.stimulated_denominator() * r_th / g_th;
        let seed = params.seed_prefactor() / (g_th * power_scale);
        Ok(Self {
            threshold_density: n_th,
            threshold_gain: g_th,
            threshold_recombination: r_th,
            power_scale,
            mu: c.confinement * (c.differential_gain - c.fca_cross_section) * n_th / g_th,
            rho: c.recomb_slope * n_th / r_th,
            gamma_g: c.confinement * c.differential_gain * n_th / g_th,
            s0: seed * params.spontaneous(n_th),
            s1: seed * c.spont_slope * n_th,
        })
    }

    /// Solves for `(p, y)` at normalized drive `j = J / R(N_th)`.
    fn solve(&self, j: f64) -> Option<(f64, f64)> {
        let Self {
            mu,
            rho,
            gamma_g,
            s0,
            s1,
            ..
        } = *self;
        let q2 = mu;
        let q1 = -((j - 1.0) * mu - s1 + gamma_g * s0);
        let mut q0 = -((j - 1.0) * s1 + rho * s0);
        // Below rounding resolution q0 is zero; proportional lines hit this
        // exactly at zero drive.
        if q0.abs() <= 4.0 * f64::EPSILON * ((j - 1.0) * s1).abs().max((rho * s0).abs()) {
            q0 = 0.0;
        }
        let disc = q1 * q1 - 4.0 * q2 * q0;
        if !(disc >= 0.0) {
            return None;
        }
        let root = disc.sqrt();
        // Larger root, arranged to avoid cancellation.
        let mut p = if q1 <= 0.0 {
            (-q1 + root) / (2.0 * q2)
        } else {
            -2.0 * q0 / (q1 + root)
        };
        // At zero drive with proportional lines q0 vanishes up to rounding.
        if p < 0.0 && p > -1e-12 {
            p = 0.0;
        }
        if !(p >= 0.0) {
            return None;
        }
        let photon_denominator = mu * p + s1;
        let y = if (s0 != 0.0 || s1 != 0.0) && photon_denominator > 0.0 {
            -s0 / photon_denominator
        } else {
            (j - 1.0 - p) / (rho + gamma_g * p)
        };
        Some((p, y))
    }
}

/// Closed-form steady state of the linearized rate equations.
///
/// Of the two roots of the quadratic in `P` this returns the larger one, the
/// branch that starts at the spontaneous-seed level at zero current and joins
/// the linear above-threshold branch.
pub fn steady_state(
    params: &DiodeLaserParams,
    absorber: &AbsorberParams,
    current: f64,
    resonance: Resonance,
) -> Result<OperatingPoint, ModelError> {
    if !(current >= 0.0) || !current.is_finite() {
        return Err(ModelError::NegativeCurrent { current });
    }
    let alpha = total_loss(params, absorber, resonance);
    let scales = Scales::new(params, alpha)?;
    let j = params.injection_rate(current) / scales.threshold_recombination;
    let (p, y) = scales.solve(j).ok_or(ModelError::NoPhysicalRoot { current })?;
    let carrier_density = scales.threshold_density * (1.0 + y);
    if !(carrier_density > 0.0) {
        return Err(ModelError::NoPhysicalRoot { current });
    }
    let intracavity_power = p * scales.power_scale;
    Ok(OperatingPoint {
        current,
        carrier_density,
        intracavity_power,
        output_power: output_power(params, intracavity_power),
    })
}

/// Stationarity residuals, each divided by the largest term of its equation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Residuals {
    pub photon: f64,
    pub carrier: f64,
}

impl Residuals {
    pub fn max(&self) -> f64 {
        self.photon.abs().max(self.carrier.abs())
    }
}

fn relative(terms: &[f64]) -> f64 {
    let sum: f64 = terms.iter().sum();
    let scale = terms.iter().fold(0.0f64, |m, t| m.max(t.abs()));
    if scale == 0.0 {
        0.0
    } else {
        sum / scale
    }
}

/// Terms of the photon equation (without the common factor `v_g`). The
/// linear spontaneous-emission coefficient contributes its anchor value and
/// its slope term separately, since the two cancel near its zero.
pub(crate) fn photon_terms(params: &DiodeLaserParams, alpha: f64, power: f64, density: f64) -> [f64; 5] {
    let c = params.config();
    let seed = params.seed_prefactor();
    [
        super::modal_gain(params, density) * power,
        -alpha * power,
        -c.confinement * c.fca_cross_section * density * power,
        seed * c.spont_at_threshold,
        seed * c.spont_slope * (density - params.anchor_density()),
    ]
}

/// Terms of the carrier equation, with the recombination line split like
/// the seed term above.
pub(crate) fn carrier_terms(params: &DiodeLaserParams, current: f64, power: f64, density: f64) -> [f64; 4] {
    let c = params.config();
    [
        params.injection_rate(current),
        -c.recomb_at_threshold,
        -c.recomb_slope * (density - params.anchor_density()),
        -super::modal_gain(params, density) * power / params.stimulated_denominator(),
    ]
}

/// Substitutes `(P, N)` into both linearized rate equations.
pub fn stationarity_residuals(
    params: &DiodeLaserParams,
    absorber: &AbsorberParams,
    resonance: Resonance,
    point: &OperatingPoint,
) -> Residuals {
    let alpha = total_loss(params, absorber, resonance);
    let (p, n) = (point.intracavity_power, point.carrier_density);
    Residuals {
        photon: relative(&photon_terms(params, alpha, p, n)),
        carrier: relative(&carrier_terms(params, point.current, p, n)),
    }
}
