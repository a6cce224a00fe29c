//! Spectral analysis of detector time series and synthetic fixtures.

use licam_core::constants::GYROMAGNETIC_RATIO;
use licam_core::fitting::odmr_model;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

/// Shortest series [`asd`] accepts.
pub const MIN_ASD_LENGTH: usize = 16;

/// `2·√(2 ln 2)`, FWHM over standard deviation of a Gaussian.
const FWHM_PER_SIGMA: f64 = 2.354_820_045_030_949_3;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SignalError {
    #[error("series has {got} samples, at least {needed} are required")]
    TooShort { needed: usize, got: usize },
    #[error("sample rate must be positive and finite, got {0}")]
    InvalidSampleRate(f64),
    #[error("series contains non-finite values")]
    NonFinite,
    #[error("band [{lo}, {hi}] Hz contains no frequency bins")]
    EmptyBand { lo: f64, hi: f64 },
    #[error("band [{lo}, {hi}] Hz is outside the spectrum ({min} Hz to {max} Hz)")]
    BandOutOfRange { lo: f64, hi: f64, min: f64, max: f64 },
    #[error("zero-crossing slope is zero")]
    ZeroSlope,
    #[error("tone at {frequency} Hz is at or above the Nyquist frequency {nyquist} Hz")]
    AliasedTone { frequency: f64, nyquist: f64 },
    #[error("invalid synthesis input: {0}")]
    InvalidInput(&'static str),
}

/// Uniformly sampled detector readings.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    sample_rate: f64,
    start_time: f64,
    values: Vec<f64>,
}

impl TimeSeries {
    pub fn new(sample_rate: f64, start_time: f64, values: Vec<f64>) -> Result<Self, SignalError> {
        if !(sample_rate > 0.0 && sample_rate.is_finite()) {
            return Err(SignalError::InvalidSampleRate(sample_rate));
        }
        if values.len() < 2 {
            return Err(SignalError::TooShort {
                needed: 2,
                got: values.len(),
            });
        }
        if !start_time.is_finite() || values.iter().any(|v| !v.is_finite()) {
            return Err(SignalError::NonFinite);
        }
        Ok(Self {
            sample_rate,
            start_time,
            values,
        })
    }

    pub fn sample_rate(&self) -> f64 {
        self.sample_rate
    }

    pub fn start_time(&self) -> f64 {
        self.start_time
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn time(&self, k: usize) -> f64 {
        self.start_time + k as f64 / self.sample_rate
    }

    /// Duration covered by the samples, `n / f_s`.
    pub fn duration(&self) -> f64 {
        self.values.len() as f64 / self.sample_rate
    }
}

/// One-sided amplitude spectral density.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralDensity {
    /// Ascending, from the resolution bandwidth up to Nyquist.
    pub frequencies: Vec<f64>,
    /// Signal units per √Hz.
    pub amplitudes: Vec<f64>,
}

impl SpectralDensity {
    /// Bin spacing, Hz.
    pub fn resolution(&self) -> f64 {
        self.frequencies[0]
    }

    /// `∫ S(f) df` over all bins, the variance of the mean-free series.
    pub fn total_power(&self) -> f64 {
        let df = self.resolution();
        self.amplitudes.iter().map(|a| a * a * df).sum()
    }

    /// Index of the largest amplitude.
    pub fn peak_bin(&self) -> usize {
        self.amplitudes
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .map_or(0, |(k, _)| k)
    }

    /// Amplitudes of the bins with `lo ≤ f ≤ hi`.
    pub fn band(&self, lo: f64, hi: f64) -> impl Iterator<Item = f64> + '_ {
        self.frequencies
            .iter()
            .zip(&self.amplitudes)
            .filter(move |(f, _)| **f >= lo && **f <= hi)
            .map(|(_, a)| *a)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Window {
    /// No taper. Keeps the white-noise floor calibration exact.
    #[default]
    Rectangular,
    /// Raised-cosine (Hann) taper for tone measurements.
    Hann,
}

impl Window {
    fn weights(self, n: usize) -> Vec<f64> {
        match self {
            Window::Rectangular => vec![1.0; n],
            Window::Hann => (0..n)
                .map(|k| {
                    let x = std::f64::consts::PI * k as f64 / n as f64;
                    2.0 * x.sin().powi(2)
                })
                .collect(),
        }
    }
}

/// One-sided amplitude spectral density of the mean-free series.
///
/// The power spectral density is normalized by the window's power, so white
/// noise of variance `s²` gives a floor of `√(2 s² / f_s)` and the bins sum
/// to the variance for the rectangular window. The DC bin is dropped.
pub fn asd(series: &TimeSeries, window: Window) -> Result<SpectralDensity, SignalError> {
    let n = series.len();
    if n < MIN_ASD_LENGTH {
        return Err(SignalError::TooShort {
            needed: MIN_ASD_LENGTH,
            got: n,
        });
    }
    let fs = series.sample_rate();
    let mean = series.values().iter().sum::<f64>() / n as f64;
    let weights = window.weights(n);
    let window_power: f64 = weights.iter().map(|w| w * w).sum();
    let mut buffer: Vec<Complex<f64>> = series
        .values()
        .iter()
        .zip(&weights)
        .map(|(v, w)| Complex::new((v - mean) * w, 0.0))
        .collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buffer);

    let half = n / 2;
    let scale = 1.0 / (fs * window_power);
    let (frequencies, amplitudes) = (1..=half)
        .map(|k| {
            // The Nyquist bin of an even-length transform has no mirror.
            let sides = if 2 * k == n { 1.0 } else { 2.0 };
            let psd = sides * buffer[k].norm_sqr() * scale;
            (k as f64 * fs / n as f64, psd.sqrt())
        })
        .unzip();
    Ok(SpectralDensity {
        frequencies,
        amplitudes,
    })
}

/// How the noise floor is summarized over the band.
///
/// Periodogram bins of Gaussian noise have exponentially distributed power,
/// so a plain mean of amplitudes reads low by `√π/2`. Both modes are
/// unbiased for white noise.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Average {
    /// Square root of the mean power density.
    #[default]
    Rms,
    /// Median amplitude scaled by `1/√ln 2`. Resists narrow tones.
    Median,
}

/// Noise floor over a band and the magnetic sensitivity it implies.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseFloor {
    pub band: (f64, f64),
    pub bins: usize,
    /// Signal units per √Hz.
    pub floor: f64,
    /// T per √Hz.
    pub sensitivity: f64,
}

/// Converts the band-averaged signal noise into magnetic noise through the
/// zero-crossing slope (signal units per Hz) and the gyromagnetic ratio
/// (Hz per T).
pub fn noise_floor_sensitivity(
    density: &SpectralDensity,
    slope: f64,
    band: (f64, f64),
    gyro: f64,
    average: Average,
) -> Result<NoiseFloor, SignalError> {
    if slope == 0.0 || !slope.is_finite() {
        return Err(SignalError::ZeroSlope);
    }
    if !(gyro > 0.0 && gyro.is_finite()) {
        return Err(SignalError::InvalidInput("gyromagnetic ratio must be positive"));
    }
    let (lo, hi) = band;
    let min = density.frequencies[0];
    let max = density.frequencies[density.frequencies.len() - 1];
    if !(lo > 0.0 && hi >= lo && lo.is_finite() && hi.is_finite()) || hi > max {
        return Err(SignalError::BandOutOfRange { lo, hi, min, max });
    }
    let mut values: Vec<f64> = density.band(lo, hi).collect();
    if values.is_empty() {
        return Err(SignalError::EmptyBand { lo, hi });
    }
    let floor = match average {
        Average::Rms => (values.iter().map(|a| a * a).sum::<f64>() / values.len() as f64).sqrt(),
        Average::Median => {
            values.sort_by(f64::total_cmp);
            let m = values.len() / 2;
            let median = if values.len() % 2 == 0 {
                0.5 * (values[m - 1] + values[m])
            } else {
                values[m]
            };
            median / std::f64::consts::LN_2.sqrt()
        }
    };
    Ok(NoiseFloor {
        band,
        bins: values.len(),
        floor,
        sensitivity: floor / slope.abs() / gyro,
    })
}

/// [`noise_floor_sensitivity`] with the default gyromagnetic ratio and average.
pub fn sensitivity(density: &SpectralDensity, slope: f64, band: (f64, f64)) -> Result<f64, SignalError> {
    noise_floor_sensitivity(density, slope, band, GYROMAGNETIC_RATIO, Average::Rms).map(|n| n.sensitivity)
}

/// A deterministic sinusoid `amplitude · sin(2π f t)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tone {
    pub frequency: f64,
    pub amplitude: f64,
}

/// White Gaussian noise with one-sided density `floor_density` (units per
/// √Hz) plus the given tones, sampled at `sample_rate` for `duration`.
pub fn synth_time_series(
    floor_density: f64,
    tones: &[Tone],
    sample_rate: f64,
    duration: f64,
    seed: u64,
) -> Result<TimeSeries, SignalError> {
    if !(sample_rate > 0.0 && sample_rate.is_finite()) {
        return Err(SignalError::InvalidSampleRate(sample_rate));
    }
    if !(floor_density >= 0.0 && floor_density.is_finite()) {
        return Err(SignalError::InvalidInput("noise density must be non-negative"));
    }
    if !(duration > 0.0 && duration.is_finite()) {
        return Err(SignalError::InvalidInput("duration must be positive"));
    }
    let nyquist = 0.5 * sample_rate;
    for tone in tones {
        if !(tone.frequency >= 0.0 && tone.amplitude.is_finite()) {
            return Err(SignalError::InvalidInput(
                "tones need a non-negative frequency and finite amplitude",
            ));
        }
        if tone.frequency >= nyquist {
            return Err(SignalError::AliasedTone {
                frequency: tone.frequency,
                nyquist,
            });
        }
    }
    let n = (duration * sample_rate).round() as usize;
    let sigma = floor_density * nyquist.sqrt();
    let normal = Normal::new(0.0, sigma).map_err(|_| SignalError::InvalidInput("noise level"))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values = (0..n)
        .map(|k| {
            let t = k as f64 / sample_rate;
            let deterministic: f64 = tones
                .iter()
                .map(|tone| tone.amplitude * (std::f64::consts::TAU * tone.frequency * t).sin())
                .sum();
            deterministic + normal.sample(&mut rng)
        })
        .collect();
    TimeSeries::new(sample_rate, 0.0, values)
}

/// Settings of a synthetic lock-in ODMR trace.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OdmrSynthesis {
    pub contrast: f64,
    /// Hz.
    pub linewidth_fwhm: f64,
    /// Hz.
    pub center: f64,
    /// Frequency-modulation depth, Hz. Recorded for provenance; the line shape
    /// itself is fixed by the calibration factor.
    pub modulation_depth: f64,
    /// White noise added to each point, signal units.
    pub noise_rms: f64,
    /// Calibration factor κ relating peak-to-peak signal to contrast.
    pub kappa: f64,
    /// Detected DC power in signal units.
    pub dc_power: f64,
    /// Reverses the modulation phase, mirroring the trace about the center.
    pub inverted: bool,
}

impl Default for OdmrSynthesis {
    fn default() -> Self {
        Self {
            contrast: 1e-2,
            linewidth_fwhm: 1.85e6,
            center: 2.7435e9,
            modulation_depth: 4.5e6,
            noise_rms: 0.0,
            kappa: 1.0,
            dc_power: 1.0,
            inverted: false,
        }
    }
}

impl OdmrSynthesis {
    /// Line-shape amplitude whose peak-to-peak equals `C · P_dc / κ`.
    pub fn amplitude(&self) -> f64 {
        let sigma = self.linewidth_fwhm / FWHM_PER_SIGMA;
        let magnitude = self.contrast * self.dc_power / self.kappa * sigma / (2.0 * (-0.5f64).exp());
        if self.inverted {
            -magnitude
        } else {
            magnitude
        }
    }
}

/// Derivative-of-Gaussian lock-in trace on `grid` (Hz), plus seeded noise.
pub fn synth_odmr_trace(settings: &OdmrSynthesis, grid: &[f64], seed: u64) -> Result<Vec<(f64, f64)>, SignalError> {
    let s = settings;
    if grid.is_empty() {
        return Err(SignalError::InvalidInput("frequency grid is empty"));
    }
    if !(s.contrast >= 0.0 && s.contrast < 1.0) {
        return Err(SignalError::InvalidInput("contrast must lie in [0, 1)"));
    }
    if !(s.linewidth_fwhm > 0.0 && s.kappa > 0.0 && s.dc_power > 0.0) {
        return Err(SignalError::InvalidInput(
            "linewidth, kappa and dc power must be positive",
        ));
    }
    if !(s.noise_rms >= 0.0 && s.noise_rms.is_finite()) || !s.center.is_finite() {
        return Err(SignalError::InvalidInput(
            "noise must be non-negative and the center finite",
        ));
    }
    if grid.iter().any(|f| !f.is_finite()) {
        return Err(SignalError::NonFinite);
    }
    let sigma = s.linewidth_fwhm / FWHM_PER_SIGMA;
    let amplitude = s.amplitude();
    let normal = Normal::new(0.0, s.noise_rms).map_err(|_| SignalError::InvalidInput("noise level"))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(grid
        .iter()
        .map(|&f| {
            let clean = odmr_model(f, amplitude, s.center, sigma, 0.0);
            let noise = if s.noise_rms > 0.0 {
                normal.sample(&mut rng)
            } else {
                0.0
            };
            (f, clean + noise)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use licam_core::fitting::{fit_odmr, OdmrOptions};

    fn white(density: f64, fs: f64, duration: f64, seed: u64) -> TimeSeries {
        synth_time_series(density, &[], fs, duration, seed).unwrap()
    }

    #[test]
    fn dc_has_no_ac_content() {
        let s = TimeSeries::new(1e3, 0.0, vec![3.5; 256]).unwrap();
        let d = asd(&s, Window::Rectangular).unwrap();
        assert!(d.amplitudes.iter().all(|a| *a < 1e-12));
    }

    #[test]
    fn frequency_axis() {
        let s = TimeSeries::new(1e4, 0.0, vec![0.0; 10_000]).unwrap();
        let d = asd(&s, Window::Rectangular).unwrap();
        assert_eq!(d.frequencies.len(), 5000);
        assert_eq!(d.frequencies[0], 1.0);
        assert_eq!(*d.frequencies.last().unwrap(), 5000.0);
    }

    #[test]
    fn too_short_rejected() {
        let s = TimeSeries::new(1e3, 0.0, vec![0.0; 15]).unwrap();
        assert_eq!(
            asd(&s, Window::Rectangular),
            Err(SignalError::TooShort { needed: 16, got: 15 })
        );
    }

    #[test]
    fn white_floor_matches_variance() {
        // Unit variance at 10 kHz: floor √(2/10⁴).
        let fs = 1e4;
        let density = (2.0f64 / fs).sqrt();
        let s = white(density, fs, 1.0, 3);
        let var = s.values().iter().map(|v| v * v).sum::<f64>() / s.len() as f64;
        assert!((var - 1.0).abs() < 0.05);
        let d = asd(&s, Window::Rectangular).unwrap();
        for average in [Average::Rms, Average::Median] {
            let floor = noise_floor_sensitivity(&d, 1.0, (1.0, 5000.0), 1.0, average)
                .unwrap()
                .floor;
            assert!((floor / density - 1.0).abs() < 0.05, "{average:?}: {floor}");
        }
        // The plain amplitude mean is Rayleigh-biased by √π/2.
        let mean = d.amplitudes.iter().sum::<f64>() / d.amplitudes.len() as f64;
        assert!((mean / density - 0.5 * std::f64::consts::PI.sqrt()).abs() < 0.05);
    }

    #[test]
    fn parseval_holds() {
        for window in [Window::Rectangular, Window::Hann] {
            for n in [1000usize, 1001] {
                let s = synth_time_series(
                    1e-3,
                    &[Tone {
                        frequency: 37.0,
                        amplitude: 0.2,
                    }],
                    500.0,
                    n as f64 / 500.0,
                    9,
                )
                .unwrap();
                let mean = s.values().iter().sum::<f64>() / n as f64;
                let var = s.values().iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n as f64;
                let d = asd(&s, window).unwrap();
                let rel = (d.total_power() / var - 1.0).abs();
                match window {
                    Window::Rectangular => assert!(rel < 1e-10, "n = {n}: {rel}"),
                    Window::Hann => assert!(rel < 0.01, "n = {n}: {rel}"),
                }
            }
        }
    }

    #[test]
    fn tone_power_at_bin_center() {
        let fs = 1e4;
        let s = synth_time_series(
            0.0,
            &[Tone {
                frequency: 100.0,
                amplitude: 1.0,
            }],
            fs,
            1.0,
            0,
        )
        .unwrap();
        for window in [Window::Rectangular, Window::Hann] {
            let d = asd(&s, window).unwrap();
            let k = d.peak_bin();
            assert_eq!(d.frequencies[k], 100.0);
            let area: f64 = d.band(97.0, 103.0).map(|a| a * a * d.resolution()).sum();
            assert!((area - 0.5).abs() < 1e-9, "{window:?}: {area}");
        }
    }

    #[test]
    fn floor_invariant_under_longer_records() {
        let fs = 2e3;
        let density = 3e-4;
        let floor = |duration: f64| {
            let d = asd(&white(density, fs, duration, 5), Window::Rectangular).unwrap();
            noise_floor_sensitivity(&d, 1.0, (1.0, 900.0), 1.0, Average::Rms)
                .unwrap()
                .floor
        };
        let (a, b) = (floor(1.0), floor(2.0));
        assert!((a / b - 1.0).abs() < 0.05);
    }

    #[test]
    fn sensitivity_is_linear() {
        let d = SpectralDensity {
            frequencies: (1..=100).map(f64::from).collect(),
            amplitudes: vec![2e-6; 100],
        };
        let eta = |slope: f64| {
            noise_floor_sensitivity(&d, slope, (1.0, 50.0), 28e9, Average::Rms)
                .unwrap()
                .sensitivity
        };
        let close = |a: f64, b: f64| (a / b - 1.0).abs() < 1e-14;
        assert!(close(eta(1e-6), 2e-6 / 1e-6 / 28e9));
        assert!(close(eta(2e-6), 0.5 * eta(1e-6)));
        assert_eq!(eta(-1e-6), eta(1e-6));
        let doubled = SpectralDensity {
            amplitudes: vec![4e-6; 100],
            ..d.clone()
        };
        let eta2 = noise_floor_sensitivity(&doubled, 1e-6, (1.0, 50.0), 28e9, Average::Rms)
            .unwrap()
            .sensitivity;
        assert!(close(eta2, 2.0 * eta(1e-6)));
    }

    #[test]
    fn median_ignores_a_tone() {
        let mut amplitudes = vec![1.0; 101];
        amplitudes[50] = 1e3;
        let d = SpectralDensity {
            frequencies: (1..=101).map(f64::from).collect(),
            amplitudes,
        };
        let rms = noise_floor_sensitivity(&d, 1.0, (1.0, 101.0), 1.0, Average::Rms).unwrap();
        let median = noise_floor_sensitivity(&d, 1.0, (1.0, 101.0), 1.0, Average::Median).unwrap();
        assert!(rms.floor > 10.0);
        assert_eq!(median.floor, 1.0 / std::f64::consts::LN_2.sqrt());
    }

    #[test]
    fn band_errors() {
        let d = SpectralDensity {
            frequencies: vec![1.0, 2.0, 3.0],
            amplitudes: vec![1.0; 3],
        };
        let run = |band, slope| noise_floor_sensitivity(&d, slope, band, 1.0, Average::Rms);
        assert_eq!(run((1.0, 2.0), 0.0), Err(SignalError::ZeroSlope));
        assert!(matches!(run((0.0, 2.0), 1.0), Err(SignalError::BandOutOfRange { .. })));
        assert!(matches!(run((1.0, 4.0), 1.0), Err(SignalError::BandOutOfRange { .. })));
        assert!(matches!(run((1.2, 1.8), 1.0), Err(SignalError::EmptyBand { .. })));
        assert_eq!(run((2.0, 2.0), 1.0).unwrap().bins, 1);
    }

    #[test]
    fn synthesis_is_seeded() {
        let tones = [Tone {
            frequency: 50.0,
            amplitude: 0.1,
        }];
        let a = synth_time_series(1e-3, &tones, 1e3, 0.5, 11).unwrap();
        let b = synth_time_series(1e-3, &tones, 1e3, 0.5, 11).unwrap();
        let c = synth_time_series(1e-3, &tones, 1e3, 0.5, 12).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_eq!(a.len(), 500);
    }

    #[test]
    fn aliased_tone_rejected() {
        let tones = [Tone {
            frequency: 500.0,
            amplitude: 1.0,
        }];
        assert_eq!(
            synth_time_series(0.0, &tones, 1e3, 1.0, 0),
            Err(SignalError::AliasedTone {
                frequency: 500.0,
                nyquist: 500.0
            })
        );
    }

    #[test]
    fn single_tone_single_peak() {
        let s = synth_time_series(
            0.0,
            &[Tone {
                frequency: 125.0,
                amplitude: 2.0,
            }],
            1e3,
            1.0,
            0,
        )
        .unwrap();
        let d = asd(&s, Window::Rectangular).unwrap();
        let peak = d.peak_bin();
        assert_eq!(d.frequencies[peak], 125.0);
        let others = d.amplitudes.iter().enumerate().filter(|(k, _)| *k != peak);
        assert!(others.clone().all(|(_, a)| *a < 1e-9 * d.amplitudes[peak]));
    }

    fn grid(center: f64, fwhm: f64) -> Vec<f64> {
        (0..=200)
            .map(|k| center - 4.0 * fwhm + 8.0 * fwhm * f64::from(k) / 200.0)
            .collect()
    }

    #[test]
    fn odmr_round_trip() {
        let s = OdmrSynthesis {
            contrast: 2.5e-2,
            kappa: 1.7,
            dc_power: 0.3,
            ..OdmrSynthesis::default()
        };
        let trace = synth_odmr_trace(&s, &grid(s.center, s.linewidth_fwhm), 0).unwrap();
        let options = OdmrOptions {
            kappa: 1.7,
            dc_power: 0.3,
            ..OdmrOptions::default()
        };
        let (fit, _) = fit_odmr(&trace, &options).unwrap();
        assert!((fit.contrast / s.contrast - 1.0).abs() < 1e-3);
        assert!((fit.linewidth_fwhm / s.linewidth_fwhm - 1.0).abs() < 1e-3);
        assert!((fit.center - s.center).abs() < 1e-3 * s.linewidth_fwhm);
    }

    #[test]
    fn odmr_zero_crossing_and_symmetry() {
        let s = OdmrSynthesis::default();
        let g = grid(s.center, s.linewidth_fwhm);
        let trace = synth_odmr_trace(&s, &[s.center], 0).unwrap();
        assert_eq!(trace[0].1, 0.0);
        let flipped = OdmrSynthesis { inverted: true, ..s };
        let a = synth_odmr_trace(&s, &g, 0).unwrap();
        let b = synth_odmr_trace(&flipped, &g, 0).unwrap();
        for ((_, x), (_, y)) in a.iter().zip(&b) {
            assert_eq!(*x, -*y);
        }
        // Odd about the center: the mirrored grid point carries the opposite sign.
        let n = a.len();
        for k in 0..n {
            assert!((a[k].1 + a[n - 1 - k].1).abs() < 1e-9 * s.amplitude().abs() / s.linewidth_fwhm);
        }
    }

    #[test]
    fn zero_contrast_is_flat() {
        let s = OdmrSynthesis {
            contrast: 0.0,
            ..OdmrSynthesis::default()
        };
        let trace = synth_odmr_trace(&s, &grid(s.center, s.linewidth_fwhm), 1).unwrap();
        assert!(trace.iter().all(|p| p.1 == 0.0));
    }
}
