//! Lumped single-mode diode laser with an intracavity absorber.
//!
//! The model evolves the average intracavity power `P` and the carrier
//! density `N`:
//!
//! ```text
//! (1/v_g) dP/dt = [Γ·g(N) − α − Γ·σ·N]·P + K·v_g·ħω·Γ·r_sp(N) / l
//!         dN/dt = I/(e·d·W·l) − R(N) − Γ·g(N)·P / (η_i·d·W·ħω)
//! ```
//!
//! with `g(N) = g·(N − N_tr)` and `R`, `r_sp` linear around the anchor
//! density. The external cavity is lumped into one effective length
//! `L_cav`: mirror loss is `−ln(R_f·R_r)/(2·L_cav)` and the absorber adds
//! `Δα·ℓ_abs/L_cav` on resonance.

mod params;
mod steady;
mod transient;

use alloc::vec::Vec;

pub use params::{AbsorberParams, DiodeLaserParams, LaserConfig};
pub use steady::{stationarity_residuals, steady_state, Residuals};
pub use transient::{integrate_transient, settle, Trajectory, TrajectoryPoint, TransientOptions};

use crate::math::Real;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ModelError {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: &'static str },
    #[error("no threshold: net modal gain slope Γ·(g − σ) is not positive")]
    NoThreshold,
    #[error("threshold current is not positive (linearized recombination is negative at N_th = {density:e} m^-3)")]
    NonPositiveThreshold { density: f64 },
    #[error("negative drive current {current:e} A")]
    NegativeCurrent { current: f64 },
    #[error("no physical steady state at I = {current:e} A")]
    NoPhysicalRoot { current: f64 },
    #[error("transient did not become stationary within {t_end:e} s")]
    NotConverged { t_end: f64 },
    #[error("invalid integration setting: {0}")]
    InvalidIntegration(&'static str),
    #[error("at I = {current:e} A: {source}")]
    AtCurrent {
        current: f64,
        #[source]
        source: alloc::boxed::Box<ModelError>,
    },
}

/// Microwave drive relative to the spin resonance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Resonance {
    Off,
    On,
}

/// Steady state of the laser at one drive current.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct OperatingPoint {
    /// Injection current, A.
    pub current: f64,
    /// Carrier density, 1/m³.
    pub carrier_density: f64,
    /// Average intracavity power, W.
    pub intracavity_power: f64,
    /// Power through the front facet including the spontaneous background, W.
    pub output_power: f64,
}

/// Modal gain `Γ·g·(N − N_tr)`, 1/m. Negative below transparency.
pub fn modal_gain(params: &DiodeLaserParams, carrier_density: f64) -> f64 {
    let c = params.config();
    c.confinement * c.differential_gain * (carrier_density - c.transparency_density)
}

/// Total distributed cavity loss, 1/m.
pub fn total_loss(params: &DiodeLaserParams, absorber: &AbsorberParams, resonance: Resonance) -> f64 {
    let absorber_term = match resonance {
        Resonance::On => absorber.single_pass_depth() / params.config().cavity_length,
        Resonance::Off => 0.0,
    };
    params.calibration_loss() + absorber_term
}

/// Carrier density where modal gain balances `alpha_total + Γ·σ·N`.
pub fn threshold_carrier_density(params: &DiodeLaserParams, alpha_total: f64) -> Result<f64, ModelError> {
    params::threshold_density_for(params.config(), alpha_total)
}

/// Threshold current `e·d·W·l·R(N_th)` in the zero-spontaneous limit, A.
pub fn threshold_current(params: &DiodeLaserParams, alpha_total: f64) -> Result<f64, ModelError> {
    let density = threshold_carrier_density(params, alpha_total)?;
    let recombination = params.recombination(density);
    if !(recombination > 0.0) {
        return Err(ModelError::NonPositiveThreshold { density });
    }
    Ok(recombination * crate::constants::ELEMENTARY_CHARGE * params.active_volume())
}

/// Front-facet output power for a given intracavity power, W.
pub fn output_power(params: &DiodeLaserParams, intracavity_power: f64) -> f64 {
    let c = params.config();
    c.spont_background
        - 0.5 * intracavity_power * (c.reflectivity_rear * c.reflectivity_front).ln() * params.front_fraction()
}

/// `(current, output power)` pairs for each drive current.
pub fn characteristic_curve(
    params: &DiodeLaserParams,
    absorber: &AbsorberParams,
    currents: &[f64],
    resonance: Resonance,
) -> Result<Vec<(f64, f64)>, ModelError> {
    currents
        .iter()
        .map(|&current| {
            steady_state(params, absorber, current, resonance)
                .map(|op| (current, op.output_power))
                .map_err(|e| ModelError::AtCurrent {
                    current,
                    source: alloc::boxed::Box::new(e),
                })
        })
        .collect()
}
