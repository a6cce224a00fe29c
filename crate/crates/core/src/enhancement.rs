//! Figures of merit derived from off- and on-resonance laser output.
//!
//! The absorber raises the cavity loss on resonance, so the laser emits
//! less. The ratio of the two output powers is read as an extra optical
//! depth on top of the single-pass value:
//!
//! ```text
//! τ_eff = τ_r + ln(P_off / P_on),   C = 1 − exp(−τ_eff),   ξ = τ_eff / τ_r
//! ```

use crate::constants::{photon_energy, GYROMAGNETIC_RATIO};
use crate::math::Real;
use crate::model::{AbsorberParams, ModelError};

/// Largest contrast accepted by the depth conversions.
pub const MAX_CONTRAST: f64 = 1.0 - 1e-15;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EnhancementError {
    #[error("single-pass contrast {0} outside [0, 1)")]
    InvalidContrast(f64),
    #[error("powers must be positive (off = {off:e} W, on = {on:e} W)")]
    NonPositivePower { off: f64, on: f64 },
    #[error("negative single-pass depth {0}")]
    NegativeDepth(f64),
    #[error("enhancement factor undefined for zero single-pass depth")]
    ZeroReferenceDepth,
    #[error("sensitivity needs positive {0}")]
    NonPositiveInput(&'static str),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Figures of merit at one drive current.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FigureOfMerit {
    /// Drive current, A.
    pub current: f64,
    /// Output power off resonance, W.
    pub output_power_off: f64,
    /// Output power on resonance, W. This is the detected power used for
    /// the shot-noise limit.
    pub output_power_on: f64,
    pub effective_depth: f64,
    pub contrast: f64,
    /// `τ_eff / τ_r`. Defined as 1 when there is no absorption at all.
    pub enhancement: f64,
    /// Shot-noise-limited sensitivity, T/√Hz. `None` when the contrast
    /// vanishes.
    pub snls: Option<f64>,
}

/// Absorber whose single-pass transmission drops by `single_pass_contrast`.
pub fn delta_alpha_from_contrast(
    single_pass_contrast: f64,
    absorber_length: f64,
) -> Result<AbsorberParams, EnhancementError> {
    if !(0.0..1.0).contains(&single_pass_contrast) {
        return Err(EnhancementError::InvalidContrast(single_pass_contrast));
    }
    AbsorberParams::from_depth(depth_from_contrast(single_pass_contrast), absorber_length)
        .map_err(EnhancementError::from)
}

/// `−ln(1 − C)`, with `C` clamped to [`MAX_CONTRAST`].
pub fn depth_from_contrast(contrast: f64) -> f64 {
    -(-contrast.min(MAX_CONTRAST)).ln_1p()
}

/// `τ_r + ln(P_off / P_on)`.
pub fn effective_depth(power_off: f64, power_on: f64, tau_r: f64) -> Result<f64, EnhancementError> {
    if !(power_off > 0.0 && power_on > 0.0) || !power_off.is_finite() || !power_on.is_finite() {
        return Err(EnhancementError::NonPositivePower {
            off: power_off,
            on: power_on,
        });
    }
    if !(tau_r >= 0.0) {
        return Err(EnhancementError::NegativeDepth(tau_r));
    }
    // ln_1p keeps the tiny differences near threshold-free operation exact.
    Ok(tau_r + ((power_off - power_on) / power_on).ln_1p())
}

/// `1 − exp(−τ_eff)`.
pub fn licam_contrast(tau_eff: f64) -> f64 {
    -(-tau_eff).exp_m1()
}

/// `τ_eff / τ_r`.
pub fn enhancement_factor(tau_eff: f64, tau_r: f64) -> Result<f64, EnhancementError> {
    if tau_r == 0.0 {
        return Err(EnhancementError::ZeroReferenceDepth);
    }
    if !(tau_r > 0.0) {
        return Err(EnhancementError::NegativeDepth(tau_r));
    }
    Ok(tau_eff / tau_r)
}

/// Shot-noise-limited sensitivity in T/√Hz for a Gaussian resonance of
/// FWHM `linewidth_fwhm` (Hz) read out with `output_power` (W):
///
/// ```text
/// η = √(e / (8 ln 2)) · Δν / (γ·C) · √(h·c / (λ·P))
/// ```
///
/// `e` is Euler's number and `γ` is [`GYROMAGNETIC_RATIO`].
pub fn snls(contrast: f64, linewidth_fwhm: f64, output_power: f64, wavelength: f64) -> Result<f64, EnhancementError> {
    for (name, v) in [
        ("contrast", contrast),
        ("linewidth", linewidth_fwhm),
        ("output power", output_power),
        ("wavelength", wavelength),
    ] {
        if !(v > 0.0) || !v.is_finite() {
            return Err(EnhancementError::NonPositiveInput(name));
        }
    }
    let prefactor = (core::f64::consts::E / (8.0 * core::f64::consts::LN_2)).sqrt();
    Ok(prefactor / GYROMAGNETIC_RATIO * linewidth_fwhm / contrast * (photon_energy(wavelength) / output_power).sqrt())
}

/// Combines off- and on-resonance output powers into a [`FigureOfMerit`].
pub fn figure_of_merit(
    current: f64,
    power_off: f64,
    power_on: f64,
    tau_r: f64,
    linewidth_fwhm: f64,
    wavelength: f64,
) -> Result<FigureOfMerit, EnhancementError> {
    let effective_depth = effective_depth(power_off, power_on, tau_r)?;
    let contrast = licam_contrast(effective_depth);
    let enhancement = if tau_r == 0.0 {
        1.0
    } else {
        enhancement_factor(effective_depth, tau_r)?
    };
    let snls = if contrast > 0.0 {
        Some(snls(contrast, linewidth_fwhm, power_on, wavelength)?)
    } else {
        None
    };
    Ok(FigureOfMerit {
        current,
        output_power_off: power_off,
        output_power_on: power_on,
        effective_depth,
        contrast,
        enhancement,
        snls,
    })
}
