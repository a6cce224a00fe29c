//! Physical constants (CODATA 2018 exact values where defined).

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Planck constant, J·s.
pub const PLANCK: f64 = 6.626_070_15e-34;

/// Elementary charge, C.
pub const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19;

/// Electron gyromagnetic ratio divided by 2π, in Hz/T.
///
/// Dividing a linewidth in Hz by this value gives tesla directly.
pub const GYROMAGNETIC_RATIO: f64 = 28.024e9;

/// Photon energy `h·c/λ` in joules.
pub fn photon_energy(wavelength: f64) -> f64 {
    PLANCK * SPEED_OF_LIGHT / wavelength
}
