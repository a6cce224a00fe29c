use crate::constants::{photon_energy, ELEMENTARY_CHARGE, SPEED_OF_LIGHT};
use crate::math::Real;

use super::ModelError;

/// Raw description of the lumped single-mode laser cavity, all in SI units.
///
/// This is the unvalidated form read from parameter files. Turn it into a
/// [`DiodeLaserParams`] with [`DiodeLaserParams::new`].
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct LaserConfig {
    /// Emission wavelength, m.
    pub wavelength: f64,
    /// Group index `n_g`; the group velocity is `c / n_g`.
    pub group_index: f64,
    /// Optical confinement factor Γ.
    pub confinement: f64,
    /// Distributed internal loss, 1/m (mirror and absorber terms excluded).
    pub internal_loss: f64,
    /// Free-carrier absorption cross-section σ, m².
    pub fca_cross_section: f64,
    /// Active region thickness d, m.
    pub active_thickness: f64,
    /// Active region width W, m.
    pub active_width: f64,
    /// Active region length l, m.
    pub active_length: f64,
    /// Effective cavity length over which lumped losses are distributed, m.
    pub cavity_length: f64,
    /// Petermann excess-noise factor K.
    pub petermann_k: f64,
    /// Internal quantum efficiency η_i.
    pub internal_efficiency: f64,
    /// Differential gain g, m². Material gain is `g·(N − N_tr)`.
    pub differential_gain: f64,
    /// Transparency carrier density N_tr, 1/m³.
    pub transparency_density: f64,
    /// Recombination rate R at the anchor density, 1/(m³·s).
    pub recomb_at_threshold: f64,
    /// dR/dN at the anchor density, 1/s.
    pub recomb_slope: f64,
    /// Spontaneous emission coefficient r_sp at the anchor density, 1/m.
    pub spont_at_threshold: f64,
    /// dr_sp/dN at the anchor density, m².
    pub spont_slope: f64,
    /// Front (out-coupling) reflectivity R_f.
    pub reflectivity_front: f64,
    /// Rear reflectivity R_r.
    pub reflectivity_rear: f64,
    /// Broadband spontaneous emission reaching the detector, W.
    pub spont_background: f64,
}

/// Validated laser parameters.
///
/// The recombination rate `R(N)` and the spontaneous emission coefficient
/// `r_sp(N)` are straight lines through the *anchor density*, which is the
/// threshold density of the cavity as configured (no absorber). The anchor is
/// fixed at construction: the `with_*` modifiers change gain or mirrors but
/// keep both lines where they are, so a different threshold density moves
/// along them.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct DiodeLaserParams {
    config: LaserConfig,
    anchor_density: f64,
}

fn invalid(name: &'static str, reason: &'static str) -> ModelError {
    ModelError::InvalidParameter { name, reason }
}

fn positive(name: &'static str, value: f64) -> Result<(), ModelError> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(invalid(name, "must be finite and strictly positive"))
    }
}

fn non_negative(name: &'static str, value: f64) -> Result<(), ModelError> {
    if value.is_finite() && value >= 0.0 {
        Ok(())
    } else {
        Err(invalid(name, "must be finite and non-negative"))
    }
}

fn open_unit(name: &'static str, value: f64) -> Result<(), ModelError> {
    if value > 0.0 && value < 1.0 {
        Ok(())
    } else {
        Err(invalid(name, "must lie in (0, 1)"))
    }
}

fn half_open_unit(name: &'static str, value: f64) -> Result<(), ModelError> {
    if value > 0.0 && value <= 1.0 {
        Ok(())
    } else {
        Err(invalid(name, "must lie in (0, 1]"))
    }
}

impl LaserConfig {
    fn validate(&self) -> Result<(), ModelError> {
        positive("wavelength", self.wavelength)?;
        positive("group_index", self.group_index)?;
        half_open_unit("confinement", self.confinement)?;
        positive("internal_loss", self.internal_loss)?;
        non_negative("fca_cross_section", self.fca_cross_section)?;
        positive("active_thickness", self.active_thickness)?;
        positive("active_width", self.active_width)?;
        positive("active_length", self.active_length)?;
        positive("cavity_length", self.cavity_length)?;
        if !(self.petermann_k >= 1.0 && self.petermann_k.is_finite()) {
            return Err(invalid("petermann_k", "must be finite and at least 1"));
        }
        half_open_unit("internal_efficiency", self.internal_efficiency)?;
        positive("differential_gain", self.differential_gain)?;
        positive("transparency_density", self.transparency_density)?;
        positive("recomb_at_threshold", self.recomb_at_threshold)?;
        positive("recomb_slope", self.recomb_slope)?;
        non_negative("spont_at_threshold", self.spont_at_threshold)?;
        non_negative("spont_slope", self.spont_slope)?;
        open_unit("reflectivity_front", self.reflectivity_front)?;
        open_unit("reflectivity_rear", self.reflectivity_rear)?;
        non_negative("spont_background", self.spont_background)?;
        if self.differential_gain <= self.fca_cross_section {
            return Err(ModelError::NoThreshold);
        }
        Ok(())
    }

    fn mirror_loss(&self) -> f64 {
        -(self.reflectivity_front * self.reflectivity_rear).ln() / (2.0 * self.cavity_length)
    }
}

impl DiodeLaserParams {
    /// Validates `config` and fixes the linearization anchor at the threshold
    /// density of the bare cavity.
    pub fn new(config: LaserConfig) -> Result<Self, ModelError> {
        config.validate()?;
        let alpha = config.internal_loss + config.mirror_loss();
        let anchor_density = threshold_density_for(&config, alpha)?;
        let params = Self { config, anchor_density };
        // The recombination line must stay positive down to some positive
        // density, otherwise a vanishing drive current has no physical state.
        if config.recomb_slope * anchor_density <= config.recomb_at_threshold {
            return Err(invalid(
                "recomb_slope",
                "linearized recombination must vanish at a positive density (R' * N_th > R_th)",
            ));
        }
        Ok(params)
    }

    /// Same as [`new`](Self::new) but with an explicit anchor density for the
    /// recombination and spontaneous-emission lines.
    pub fn with_anchor(config: LaserConfig, anchor_density: f64) -> Result<Self, ModelError> {
        config.validate()?;
        positive("anchor_density", anchor_density)?;
        if config.recomb_slope * anchor_density <= config.recomb_at_threshold {
            return Err(invalid(
                "recomb_slope",
                "linearized recombination must vanish at a positive density (R' * N_th > R_th)",
            ));
        }
        Ok(Self { config, anchor_density })
    }

    pub fn config(&self) -> &LaserConfig {
        &self.config
    }

    /// Density at which `recomb_at_threshold` and `spont_at_threshold` apply.
    pub fn anchor_density(&self) -> f64 {
        self.anchor_density
    }

    fn modified(&self, f: impl FnOnce(&mut LaserConfig)) -> Result<Self, ModelError> {
        let mut config = self.config;
        f(&mut config);
        Self::with_anchor(config, self.anchor_density)
    }

    pub fn with_differential_gain(&self, gain: f64) -> Result<Self, ModelError> {
        self.modified(|c| c.differential_gain = gain)
    }

    pub fn with_reflectivity_front(&self, reflectivity: f64) -> Result<Self, ModelError> {
        self.modified(|c| c.reflectivity_front = reflectivity)
    }

    pub fn with_internal_efficiency(&self, efficiency: f64) -> Result<Self, ModelError> {
        self.modified(|c| c.internal_efficiency = efficiency)
    }

    pub fn with_spont_background(&self, power: f64) -> Result<Self, ModelError> {
        self.modified(|c| c.spont_background = power)
    }

    pub fn with_spont_seed(&self, at_anchor: f64, slope: f64) -> Result<Self, ModelError> {
        self.modified(|c| {
            c.spont_at_threshold = at_anchor;
            c.spont_slope = slope;
        })
    }

    /// Shifts the transparency density so that the bare-cavity threshold sits
    /// at `density`, keeping gain slope, losses and the recombination line.
    pub fn with_threshold_density(&self, density: f64) -> Result<Self, ModelError> {
        positive("threshold_density", density)?;
        let c = &self.config;
        let alpha = self.calibration_loss();
        let net = c.confinement * (c.differential_gain - c.fca_cross_section);
        let transparency = (net * density - alpha) / (c.confinement * c.differential_gain);
        self.modified(|c| c.transparency_density = transparency)
    }

    /// Group velocity `c / n_g`, m/s.
    pub fn group_velocity(&self) -> f64 {
        SPEED_OF_LIGHT / self.config.group_index
    }

    /// Photon energy `ħω = h·c/λ`, J.
    pub fn photon_energy(&self) -> f64 {
        photon_energy(self.config.wavelength)
    }

    /// Active volume `d·W·l`, m³.
    pub fn active_volume(&self) -> f64 {
        self.config.active_thickness * self.config.active_width * self.config.active_length
    }

    /// Distributed mirror loss `−ln(R_f·R_r) / (2·L_cav)`, 1/m.
    pub fn mirror_loss(&self) -> f64 {
        self.config.mirror_loss()
    }

    /// Total loss of the cavity without absorber, 1/m.
    pub fn calibration_loss(&self) -> f64 {
        self.config.internal_loss + self.config.mirror_loss()
    }

    /// Linearized recombination rate `R(N)`, 1/(m³·s).
    pub fn recombination(&self, carrier_density: f64) -> f64 {
        line(
            self.config.recomb_at_threshold,
            self.config.recomb_slope * (carrier_density - self.anchor_density),
        )
    }

    /// Linearized spontaneous emission coefficient `r_sp(N)`, 1/m.
    pub fn spontaneous(&self, carrier_density: f64) -> f64 {
        line(
            self.config.spont_at_threshold,
            self.config.spont_slope * (carrier_density - self.anchor_density),
        )
    }

    /// Prefactor of the spontaneous seed term, `K·v_g·ħω·Γ / l`, in J/s.
    pub fn seed_prefactor(&self) -> f64 {
        let c = &self.config;
        c.petermann_k * self.group_velocity() * self.photon_energy() * c.confinement / c.active_length
    }

    /// Conversion from injection current to carrier injection rate,
    /// `1 / (e·d·W·l)`.
    pub fn injection_rate(&self, current: f64) -> f64 {
        current / (ELEMENTARY_CHARGE * self.active_volume())
    }

    /// Denominator of the stimulated term in the carrier equation,
    /// `η_i·d·W·ħω`.
    pub(crate) fn stimulated_denominator(&self) -> f64 {
        let c = &self.config;
        c.internal_efficiency * c.active_thickness * c.active_width * self.photon_energy()
    }

    /// Fraction of `P·(−ln(R_r·R_f)/2)` leaving through the front facet.
    pub fn front_fraction(&self) -> f64 {
        let c = &self.config;
        let (rf, rr) = (c.reflectivity_front, c.reflectivity_rear);
        1.0 / (1.0 + (1.0 - rr) / (1.0 - rf) * (rf / rr).sqrt())
    }
}

pub(crate) fn threshold_density_for(config: &LaserConfig, alpha_total: f64) -> Result<f64, ModelError> {
    let net = config.confinement * (config.differential_gain - config.fca_cross_section);
    if !(net > 0.0) {
        return Err(ModelError::NoThreshold);
    }
    Ok((alpha_total + config.confinement * config.differential_gain * config.transparency_density) / net)
}

/// Intracavity absorber: on-resonant absorption constant and path length.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct AbsorberParams {
    delta_alpha: f64,
    absorber_length: f64,
    single_pass_depth: f64,
}

impl AbsorberParams {
    pub fn new(delta_alpha: f64, absorber_length: f64) -> Result<Self, ModelError> {
        non_negative("delta_alpha", delta_alpha)?;
        positive("absorber_length", absorber_length)?;
        Ok(Self {
            delta_alpha,
            absorber_length,
            single_pass_depth: delta_alpha * absorber_length,
        })
    }

    /// Absorber defined by its single-pass optical depth.
    pub fn from_depth(single_pass_depth: f64, absorber_length: f64) -> Result<Self, ModelError> {
        non_negative("single_pass_depth", single_pass_depth)?;
        positive("absorber_length", absorber_length)?;
        Ok(Self {
            delta_alpha: single_pass_depth / absorber_length,
            absorber_length,
            single_pass_depth,
        })
    }

    /// An absorber that never absorbs.
    pub fn transparent() -> Self {
        Self {
            delta_alpha: 0.0,
            absorber_length: 1.0,
            single_pass_depth: 0.0,
        }
    }

    /// On-resonant absorption constant Δα, 1/m.
    pub fn delta_alpha(&self) -> f64 {
        self.delta_alpha
    }

    /// Geometric path through the absorbing region, m.
    pub fn absorber_length(&self) -> f64 {
        self.absorber_length
    }

    /// Single-pass optical depth `τ_r = Δα·ℓ_abs`.
    pub fn single_pass_depth(&self) -> f64 {
        self.single_pass_depth
    }
}

/// `anchor + offset`, with sums below rounding resolution snapped to zero so
/// that a proportional line vanishes exactly at zero density.
fn line(anchor: f64, offset: f64) -> f64 {
    let v = anchor + offset;
    if v.abs() <= 4.0 * f64::EPSILON * anchor.abs().max(offset.abs()) {
        0.0
    } else {
        v
    }
}
