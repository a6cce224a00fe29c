//! Flat `key = value` configuration files with unit-suffixed numbers.
//!
//! ```text
//! # calibrated laser
//! wavelength = 1042nm
//! threshold_current = 116mA
//! reflectivity_front = 0.9
//! ```
//!
//! Blank lines and `#` comments are ignored. A bare number is read in SI
//! units; a suffix must match the dimension of its key. Unknown and repeated
//! keys are errors, so a misspelled parameter never falls back to a default.

use std::collections::BTreeMap;
use std::path::Path;

use licam_core::model::{AbsorberParams, DiodeLaserParams, LaserConfig};
use licam_core::presets;
use serde::Serialize;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConfigError {
    #[error("{origin}:{line}: expected `key = value`")]
    Syntax { origin: String, line: usize },
    #[error("{origin}:{line}: unknown key `{key}`")]
    UnknownKey { origin: String, line: usize, key: String },
    #[error("{origin}:{line}: key `{key}` given twice")]
    DuplicateKey { origin: String, line: usize, key: String },
    #[error("{origin}: `{key}`: {reason}")]
    BadValue {
        origin: String,
        key: String,
        reason: String,
    },
    #[error("{origin}: missing required key `{key}`")]
    Missing { origin: String, key: String },
    #[error("{origin}: {reason}")]
    Invalid { origin: String, reason: String },
    #[error("cannot read {path}: {reason}")]
    Io { path: String, reason: String },
}

/// Physical dimension a key expects.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dimension {
    Dimensionless,
    Current,
    Power,
    Length,
    InverseLength,
    Area,
    InverseVolume,
    /// 1/s.
    Rate,
    /// 1/(m³·s).
    VolumeRate,
    Frequency,
    Time,
}

impl Dimension {
    fn name(self) -> &'static str {
        match self {
            Dimension::Dimensionless => "dimensionless",
            Dimension::Current => "current",
            Dimension::Power => "power",
            Dimension::Length => "length",
            Dimension::InverseLength => "inverse length",
            Dimension::Area => "area",
            Dimension::InverseVolume => "inverse volume",
            Dimension::Rate => "rate",
            Dimension::VolumeRate => "volume rate",
            Dimension::Frequency => "frequency",
            Dimension::Time => "time",
        }
    }
}

/// Suffix, dimension and power of ten to SI.
const UNITS: &[(&str, Dimension, i32)] = &[
    ("%", Dimension::Dimensionless, -2),
    ("ppm", Dimension::Dimensionless, -6),
    ("A", Dimension::Current, 0),
    ("mA", Dimension::Current, -3),
    ("uA", Dimension::Current, -6),
    ("µA", Dimension::Current, -6),
    ("W", Dimension::Power, 0),
    ("mW", Dimension::Power, -3),
    ("uW", Dimension::Power, -6),
    ("µW", Dimension::Power, -6),
    ("nW", Dimension::Power, -9),
    ("m", Dimension::Length, 0),
    ("cm", Dimension::Length, -2),
    ("mm", Dimension::Length, -3),
    ("um", Dimension::Length, -6),
    ("µm", Dimension::Length, -6),
    ("nm", Dimension::Length, -9),
    ("/m", Dimension::InverseLength, 0),
    ("1/m", Dimension::InverseLength, 0),
    ("m^-1", Dimension::InverseLength, 0),
    ("/cm", Dimension::InverseLength, 2),
    ("1/cm", Dimension::InverseLength, 2),
    ("cm^-1", Dimension::InverseLength, 2),
    ("m^2", Dimension::Area, 0),
    ("m2", Dimension::Area, 0),
    ("cm^2", Dimension::Area, -4),
    ("cm2", Dimension::Area, -4),
    ("m^-3", Dimension::InverseVolume, 0),
    ("/m^3", Dimension::InverseVolume, 0),
    ("cm^-3", Dimension::InverseVolume, 6),
    ("/cm^3", Dimension::InverseVolume, 6),
    ("/s", Dimension::Rate, 0),
    ("1/s", Dimension::Rate, 0),
    ("s^-1", Dimension::Rate, 0),
    ("m^-3/s", Dimension::VolumeRate, 0),
    ("cm^-3/s", Dimension::VolumeRate, 6),
    ("Hz", Dimension::Frequency, 0),
    ("kHz", Dimension::Frequency, 3),
    ("MHz", Dimension::Frequency, 6),
    ("GHz", Dimension::Frequency, 9),
    ("s", Dimension::Time, 0),
    ("ms", Dimension::Time, -3),
    ("us", Dimension::Time, -6),
    ("µs", Dimension::Time, -6),
    ("ns", Dimension::Time, -9),
];

/// Parses `116mA`, `1042 nm`, `3.8e-5` and the like into SI units.
pub fn parse_quantity(text: &str, dimension: Dimension) -> Result<f64, String> {
    let text = text.trim();
    let split = text
        .char_indices()
        .find(|&(i, c)| {
            !(c.is_ascii_digit()
                || c == '.'
                || c == '+'
                || c == '-'
                || ((c == 'e' || c == 'E')
                    && text[i + 1..].starts_with(|n: char| n.is_ascii_digit() || n == '-' || n == '+')))
        })
        .map_or(text.len(), |(i, _)| i);
    let (number, suffix) = text.split_at(split);
    let suffix = suffix.trim();
    let shift = if suffix.is_empty() {
        0
    } else {
        match UNITS.iter().find(|(s, _, _)| *s == suffix) {
            Some((_, d, e)) if *d == dimension => *e,
            Some((_, d, _)) => {
                return Err(format!(
                    "unit `{suffix}` is a {}, expected a {}",
                    d.name(),
                    dimension.name()
                ))
            }
            None => return Err(format!("unknown unit `{suffix}`")),
        }
    };
    // Shift the decimal exponent in the text so `1042nm` rounds exactly like
    // `1042e-9`.
    let (mantissa, exponent) = match number.find(['e', 'E']) {
        Some(k) => (
            &number[..k],
            number[k + 1..]
                .parse::<i32>()
                .map_err(|_| format!("`{text}` is not a number"))?,
        ),
        None => (number, 0),
    };
    if mantissa.is_empty() || mantissa.parse::<f64>().is_err() {
        return Err(format!("`{text}` is not a number"));
    }
    let value: f64 = format!("{mantissa}e{}", exponent.saturating_add(shift))
        .parse()
        .map_err(|_| format!("`{text}` is not a number"))?;
    if !value.is_finite() {
        return Err(format!("`{text}` is not finite"));
    }
    Ok(value)
}

/// Raw entries of one file, with their line numbers.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RawConfig {
    origin: String,
    entries: BTreeMap<String, (usize, String)>,
}

impl RawConfig {
    pub fn parse(text: &str, origin: &str) -> Result<Self, ConfigError> {
        let mut entries = BTreeMap::new();
        for (k, line) in text.lines().enumerate() {
            let line_no = k + 1;
            let content = line.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content.split_once('=').ok_or_else(|| ConfigError::Syntax {
                origin: origin.into(),
                line: line_no,
            })?;
            let (key, value) = (key.trim(), value.trim());
            if key.is_empty() || value.is_empty() {
                return Err(ConfigError::Syntax {
                    origin: origin.into(),
                    line: line_no,
                });
            }
            if entries.insert(key.to_string(), (line_no, value.to_string())).is_some() {
                return Err(ConfigError::DuplicateKey {
                    origin: origin.into(),
                    line: line_no,
                    key: key.into(),
                });
            }
        }
        Ok(Self {
            origin: origin.into(),
            entries,
        })
    }

    pub fn read(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io {
            path: path.display().to_string(),
            reason: e.to_string(),
        })?;
        Self::parse(&text, &path.display().to_string())
    }

    /// Fails on the first key not in `known`.
    fn check_keys(&self, known: &[(&str, Dimension)]) -> Result<(), ConfigError> {
        for (key, (line, _)) in &self.entries {
            if !known.iter().any(|(k, _)| k == key) {
                return Err(ConfigError::UnknownKey {
                    origin: self.origin.clone(),
                    line: *line,
                    key: key.clone(),
                });
            }
        }
        Ok(())
    }

    fn get(&self, key: &str, dimension: Dimension) -> Result<Option<f64>, ConfigError> {
        self.entries
            .get(key)
            .map(|(_, v)| {
                parse_quantity(v, dimension).map_err(|reason| ConfigError::BadValue {
                    origin: self.origin.clone(),
                    key: key.into(),
                    reason,
                })
            })
            .transpose()
    }

    fn require(&self, key: &str, dimension: Dimension) -> Result<f64, ConfigError> {
        self.get(key, dimension)?.ok_or_else(|| ConfigError::Missing {
            origin: self.origin.clone(),
            key: key.into(),
        })
    }

    fn invalid(&self, reason: impl Into<String>) -> ConfigError {
        ConfigError::Invalid {
            origin: self.origin.clone(),
            reason: reason.into(),
        }
    }
}

const LASER_KEYS: &[(&str, Dimension)] = &[
    ("wavelength", Dimension::Length),
    ("group_index", Dimension::Dimensionless),
    ("confinement", Dimension::Dimensionless),
    ("internal_loss", Dimension::InverseLength),
    ("fca_cross_section", Dimension::Area),
    ("active_thickness", Dimension::Length),
    ("active_width", Dimension::Length),
    ("active_length", Dimension::Length),
    ("cavity_length", Dimension::Length),
    ("petermann_k", Dimension::Dimensionless),
    ("internal_efficiency", Dimension::Dimensionless),
    ("differential_gain", Dimension::Area),
    ("transparency_density", Dimension::InverseVolume),
    ("recomb_at_threshold", Dimension::VolumeRate),
    ("recomb_slope", Dimension::Rate),
    ("spont_at_threshold", Dimension::InverseLength),
    ("spont_slope", Dimension::Area),
    ("reflectivity_front", Dimension::Dimensionless),
    ("reflectivity_rear", Dimension::Dimensionless),
    ("spont_background", Dimension::Power),
    ("threshold_current", Dimension::Current),
    ("recomb_relative_slope", Dimension::Dimensionless),
];

/// Laser parameters as read, before validation. The recombination and
/// spontaneous-emission lines are either given explicitly or derived from a
/// target threshold current and a relative recombination slope.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LaserFile {
    pub config: LaserConfig,
    /// Target bare-cavity threshold, A, when the lines are derived.
    pub threshold_current: Option<f64>,
    /// `R'·N_th / R(N_th)`, when the lines are derived.
    pub recomb_relative_slope: Option<f64>,
}

impl LaserFile {
    pub fn from_raw(raw: &RawConfig) -> Result<Self, ConfigError> {
        raw.check_keys(LASER_KEYS)?;
        let req = |k| raw.require(k, dimension_of(LASER_KEYS, k));
        let opt = |k| raw.get(k, dimension_of(LASER_KEYS, k));
        let threshold_current = opt("threshold_current")?;
        let recomb_relative_slope = opt("recomb_relative_slope")?;
        let derived = threshold_current.is_some() || recomb_relative_slope.is_some();
        let explicit = ["recomb_at_threshold", "recomb_slope", "spont_slope"]
            .iter()
            .any(|k| raw.entries.contains_key(*k));
        if derived && explicit {
            return Err(raw.invalid(
                "give either threshold_current with recomb_relative_slope, or the explicit recomb_* and spont_slope lines, not both",
            ));
        }
        let mut config = LaserConfig {
            wavelength: req("wavelength")?,
            group_index: req("group_index")?,
            confinement: req("confinement")?,
            internal_loss: req("internal_loss")?,
            fca_cross_section: req("fca_cross_section")?,
            active_thickness: req("active_thickness")?,
            active_width: req("active_width")?,
            active_length: req("active_length")?,
            cavity_length: req("cavity_length")?,
            petermann_k: req("petermann_k")?,
            internal_efficiency: req("internal_efficiency")?,
            differential_gain: req("differential_gain")?,
            transparency_density: req("transparency_density")?,
            recomb_at_threshold: 0.0,
            recomb_slope: 0.0,
            spont_at_threshold: req("spont_at_threshold")?,
            spont_slope: 0.0,
            reflectivity_front: req("reflectivity_front")?,
            reflectivity_rear: req("reflectivity_rear")?,
            spont_background: req("spont_background")?,
        };
        if derived {
            let threshold =
                threshold_current.ok_or_else(|| raw.invalid("recomb_relative_slope needs threshold_current"))?;
            let rho =
                recomb_relative_slope.ok_or_else(|| raw.invalid("threshold_current needs recomb_relative_slope"))?;
            if !(threshold > 0.0) {
                return Err(raw.invalid("threshold_current must be positive"));
            }
            config = presets::anchor_lines(config, threshold, rho);
        } else {
            config.recomb_at_threshold = req("recomb_at_threshold")?;
            config.recomb_slope = req("recomb_slope")?;
            config.spont_slope = req("spont_slope")?;
        }
        Ok(Self {
            config,
            threshold_current,
            recomb_relative_slope,
        })
    }

    pub fn params(&self) -> Result<DiodeLaserParams, licam_core::ModelError> {
        DiodeLaserParams::new(self.config)
    }
}

const ABSORBER_KEYS: &[(&str, Dimension)] = &[
    ("delta_alpha", Dimension::InverseLength),
    ("single_pass_contrast", Dimension::Dimensionless),
    ("single_pass_depth", Dimension::Dimensionless),
    ("absorber_length", Dimension::Length),
    ("linewidth_fwhm", Dimension::Frequency),
];

/// Absorber and spectroscopic settings. Exactly one of `delta_alpha`,
/// `single_pass_contrast` or `single_pass_depth` fixes the absorption.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AbsorberFile {
    /// 1/m.
    pub delta_alpha: f64,
    /// m.
    pub absorber_length: f64,
    /// ODMR linewidth used in the sensitivity, Hz.
    pub linewidth_fwhm: f64,
}

/// Linewidth used when the absorber file does not set one, Hz.
pub const DEFAULT_LINEWIDTH: f64 = 1.85e6;

impl AbsorberFile {
    pub fn from_raw(raw: &RawConfig) -> Result<Self, ConfigError> {
        raw.check_keys(ABSORBER_KEYS)?;
        let opt = |k| raw.get(k, dimension_of(ABSORBER_KEYS, k));
        let absorber_length = raw.require("absorber_length", Dimension::Length)?;
        if !(absorber_length > 0.0) {
            return Err(raw.invalid("absorber_length must be positive"));
        }
        let depth = match (
            opt("delta_alpha")?,
            opt("single_pass_contrast")?,
            opt("single_pass_depth")?,
        ) {
            (Some(d), None, None) => d * absorber_length,
            (None, Some(c), None) => {
                if !(0.0..1.0).contains(&c) {
                    return Err(raw.invalid("single_pass_contrast must lie in [0, 1)"));
                }
                -(-c).ln_1p()
            }
            (None, None, Some(t)) => t,
            _ => return Err(raw.invalid("set exactly one of delta_alpha, single_pass_contrast, single_pass_depth")),
        };
        let linewidth_fwhm = opt("linewidth_fwhm")?.unwrap_or(DEFAULT_LINEWIDTH);
        if !(linewidth_fwhm > 0.0) {
            return Err(raw.invalid("linewidth_fwhm must be positive"));
        }
        Ok(Self {
            delta_alpha: depth / absorber_length,
            absorber_length,
            linewidth_fwhm,
        })
    }

    pub fn absorber(&self) -> Result<AbsorberParams, licam_core::ModelError> {
        AbsorberParams::new(self.delta_alpha, self.absorber_length)
    }
}

fn dimension_of(keys: &[(&str, Dimension)], key: &str) -> Dimension {
    keys.iter()
        .find(|(k, _)| *k == key)
        .map(|(_, d)| *d)
        .expect("key listed in its table")
}

/// Reads and validates a laser parameter file.
pub fn load_laser(path: &Path) -> Result<LaserFile, ConfigError> {
    LaserFile::from_raw(&RawConfig::read(path)?)
}

/// Reads and validates an absorber file.
pub fn load_absorber(path: &Path) -> Result<AbsorberFile, ConfigError> {
    AbsorberFile::from_raw(&RawConfig::read(path)?)
}

/// Evenly spaced values `start, start + step, …` up to `stop` inclusive,
/// written `start:stop:step` with unit suffixes.
pub fn parse_range(text: &str, dimension: Dimension) -> Result<Vec<f64>, String> {
    let parts: Vec<&str> = text.split(':').collect();
    let [start, stop, step] = parts[..] else {
        return Err(format!("`{text}`: expected start:stop:step"));
    };
    let start = parse_quantity(start, dimension)?;
    let stop = parse_quantity(stop, dimension)?;
    let step = parse_quantity(step, dimension)?;
    if !(step > 0.0) {
        return Err(format!("`{text}`: step must be positive"));
    }
    if !(stop >= start) {
        return Err(format!("`{text}`: range must be ascending"));
    }
    let count = ((stop - start) / step * (1.0 + 1e-12)).floor() as usize;
    if count > 10_000_000 {
        return Err(format!("`{text}`: too many points"));
    }
    Ok((0..=count).map(|k| start + k as f64 * step).collect())
}

/// Sweep axis: `lo:hi:n` (linear), `lo:hi:n:log` (geometric) or a comma list.
pub fn parse_axis(text: &str, dimension: Dimension) -> Result<Vec<f64>, String> {
    let values = if text.contains(':') {
        let parts: Vec<&str> = text.split(':').collect();
        let (lo, hi, n, log) = match parts[..] {
            [lo, hi, n] => (lo, hi, n, false),
            [lo, hi, n, "log"] => (lo, hi, n, true),
            _ => return Err(format!("`{text}`: expected lo:hi:n or lo:hi:n:log")),
        };
        let lo = parse_quantity(lo, dimension)?;
        let hi = parse_quantity(hi, dimension)?;
        let n: usize = n.trim().parse().map_err(|_| format!("`{text}`: bad point count"))?;
        if n == 0 {
            return Err(format!("`{text}`: need at least one point"));
        }
        if log && !(lo > 0.0 && hi > 0.0) {
            return Err(format!("`{text}`: logarithmic axes need positive ends"));
        }
        (0..n)
            .map(|k| {
                let t = if n == 1 { 0.0 } else { k as f64 / (n - 1) as f64 };
                if k == 0 {
                    lo
                } else if k + 1 == n {
                    hi
                } else if log {
                    (lo.ln() + t * (hi.ln() - lo.ln())).exp()
                } else {
                    lo + t * (hi - lo)
                }
            })
            .collect()
    } else {
        text.split(',')
            .map(|v| parse_quantity(v, dimension))
            .collect::<Result<Vec<f64>, String>>()?
    };
    if values.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(format!("`{text}`: values must be strictly ascending"));
    }
    Ok(values)
}

/// `lo,hi` frequency band.
pub fn parse_band(text: &str) -> Result<(f64, f64), String> {
    let (lo, hi) = text
        .split_once(',')
        .ok_or_else(|| format!("`{text}`: expected lo,hi"))?;
    let lo = parse_quantity(lo, Dimension::Frequency)?;
    let hi = parse_quantity(hi, Dimension::Frequency)?;
    if !(hi >= lo) {
        return Err(format!("`{text}`: band must be ascending"));
    }
    Ok((lo, hi))
}
