//! Ready-made parameter sets.
//!
//! [`calibrated`] is a desk-scale stand-in for the experimental laser: an
//! external-cavity diode at 1042 nm with a 0.9 output coupler, tuned so the
//! bare cavity reaches threshold at 116 mA. The spontaneous-emission level
//! `spont_at_threshold` is its one free knob; it sets how sharp the knee is
//! and therefore how large the contrast gets at threshold.
//!
//! In every preset the spontaneous-emission line is proportional to the
//! recombination line, so both vanish at the same density. That makes the
//! unpumped laser dark: at zero current the steady state has `P = 0`.
//!
//! [`synth1`] is an unrelated synthetic laser used throughout the tests.
//! [`randomized`] maps uniform samples onto a family of valid lasers.

use crate::constants::ELEMENTARY_CHARGE;
use crate::math::Real;
use crate::model::{AbsorberParams, DiodeLaserParams, LaserConfig};

/// Single-pass spin contrast used with the calibrated set.
pub const CALIBRATED_SINGLE_PASS_CONTRAST: f64 = 3.8e-5;

/// Absorber path length used with the calibrated set, m.
pub const CALIBRATED_ABSORBER_LENGTH: f64 = 1e-3;

/// Threshold current of the calibrated set, A.
pub const CALIBRATED_THRESHOLD: f64 = 0.116;

/// Spontaneous-emission coefficient at threshold for the calibrated set, 1/m.
pub const CALIBRATED_SPONT_AT_THRESHOLD: f64 = 8e6;

/// Fills in `recomb_at_threshold`, `recomb_slope` and `spont_slope` so the
/// bare cavity has threshold current `threshold`, the recombination line has
/// relative slope `rho = R'·N_th/R_th`, and the spontaneous-emission line
/// through `spont_at_threshold` vanishes where recombination does.
pub fn anchor_lines(mut config: LaserConfig, threshold: f64, rho: f64) -> LaserConfig {
    let volume = config.active_thickness * config.active_width * config.active_length;
    let alpha = config.internal_loss
        - (config.reflectivity_front * config.reflectivity_rear).ln() / (2.0 * config.cavity_length);
    let net = config.confinement * (config.differential_gain - config.fca_cross_section);
    let n_th = (alpha + config.confinement * config.differential_gain * config.transparency_density) / net;
    config.recomb_at_threshold = threshold / (ELEMENTARY_CHARGE * volume);
    config.recomb_slope = rho * config.recomb_at_threshold / n_th;
    config.spont_slope = rho * config.spont_at_threshold / n_th;
    config
}

/// Raw configuration behind [`calibrated`].
pub fn calibrated_config() -> LaserConfig {
    let base = LaserConfig {
        wavelength: 1042e-9,
        group_index: 1.3,
        confinement: 0.01,
        internal_loss: 2.05,
        fca_cross_section: 1e-22,
        active_thickness: 2e-8,
        active_width: 1.2e-5,
        active_length: 2e-3,
        cavity_length: 0.03,
        petermann_k: 1.0,
        internal_efficiency: 0.8,
        differential_gain: 4.7e-22,
        transparency_density: 1e24,
        recomb_at_threshold: 0.0,
        recomb_slope: 0.0,
        spont_at_threshold: CALIBRATED_SPONT_AT_THRESHOLD,
        spont_slope: 0.0,
        reflectivity_front: 0.9,
        reflectivity_rear: 0.95,
        spont_background: 1e-6,
    };
    anchor_lines(base, CALIBRATED_THRESHOLD, 1.5)
}

/// Desk-scale calibration of the experimental laser (threshold 116 mA).
pub fn calibrated() -> DiodeLaserParams {
    DiodeLaserParams::new(calibrated_config()).expect("calibrated preset is valid")
}

/// Absorber with the measured single-pass contrast over 1 mm.
pub fn calibrated_absorber() -> AbsorberParams {
    let depth = -(-CALIBRATED_SINGLE_PASS_CONTRAST).ln_1p();
    AbsorberParams::from_depth(depth, CALIBRATED_ABSORBER_LENGTH).expect("valid depth")
}

/// Raw configuration behind [`synth1`].
pub fn synth1_config() -> LaserConfig {
    let base = LaserConfig {
        wavelength: 1042e-9,
        group_index: 1.5,
        confinement: 0.02,
        internal_loss: 3.0,
        fca_cross_section: 1e-22,
        active_thickness: 1e-8,
        active_width: 4e-6,
        active_length: 1.5e-3,
        cavity_length: 0.02,
        petermann_k: 1.5,
        internal_efficiency: 0.85,
        differential_gain: 6e-22,
        transparency_density: 1.2e24,
        recomb_at_threshold: 0.0,
        recomb_slope: 0.0,
        spont_at_threshold: 2e7,
        spont_slope: 0.0,
        reflectivity_front: 0.8,
        reflectivity_rear: 0.95,
        spont_background: 5e-7,
    };
    anchor_lines(base, 0.05, 1.6)
}

/// Synthetic laser with a 50 mA threshold.
pub fn synth1() -> DiodeLaserParams {
    DiodeLaserParams::new(synth1_config()).expect("synth1 preset is valid")
}

/// Δα = 2 /m over 0.5 mm, a single-pass depth of 1e-3.
pub fn synth1_absorber() -> AbsorberParams {
    AbsorberParams::new(2.0, 5e-4).expect("valid absorber")
}

/// Number of uniform samples consumed by [`randomized`].
pub const RANDOM_DIMENSIONS: usize = 8;

fn lerp(u: f64, lo: f64, hi: f64) -> f64 {
    lo + u.clamp(0.0, 1.0) * (hi - lo)
}

fn log_lerp(u: f64, lo: f64, hi: f64) -> f64 {
    (lerp(u, lo.ln(), hi.ln())).exp()
}

/// Maps samples in `[0, 1]` onto a valid laser.
///
/// Geometry and material constants come from the calibrated set. The
/// samples pick cavity length, both reflectivities, internal loss, threshold
/// current, spontaneous-emission level, recombination slope, and the ratio of
/// threshold to transparency density, from which the differential gain
/// follows.
pub fn randomized(u: [f64; RANDOM_DIMENSIONS]) -> DiodeLaserParams {
    let mut c = calibrated_config();
    c.cavity_length = lerp(u[0], 0.01, 0.05);
    c.reflectivity_front = lerp(u[1], 0.5, 0.95);
    c.reflectivity_rear = lerp(u[2], 0.8, 0.99);
    c.internal_loss = lerp(u[3], 0.5, 5.0);
    let threshold = lerp(u[4], 0.03, 0.15);
    c.spont_at_threshold = log_lerp(u[5], 1e6, 1e8);
    let rho = lerp(u[6], 1.2, 2.0);
    let ratio = lerp(u[7], 1.3, 3.0);

    let alpha = c.internal_loss - (c.reflectivity_front * c.reflectivity_rear).ln() / (2.0 * c.cavity_length);
    let n_th = ratio * c.transparency_density;
    c.differential_gain =
        (alpha + c.confinement * c.fca_cross_section * n_th) / (c.confinement * (n_th - c.transparency_density));
    DiodeLaserParams::new(anchor_lines(c, threshold, rho)).expect("randomized preset is valid")
}
