//! Command-line front end.
//!
//! Exit codes: 0 success, 2 input or configuration error, 3 the algorithm
//! did not converge, 4 a domain violation (e.g. a band beyond Nyquist).

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use licam_core::fitting::{fit_li_curve, fit_odmr, LiFitOptions, OdmrOptions};
use licam_core::model::{characteristic_curve, AbsorberParams, Resonance};
use licam_core::sweep::{optimize_over_current, scan_current, scan_for_limit, sweep_cell, CurrentScan, Optimum};
use licam_core::{FitError, Regime, ScanConfig, SweepCell, SweepError};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::config::{self, AbsorberFile, Dimension, LaserFile};
use crate::io::{self, CsvText, Envelope};
use crate::signal::{self, Average, OdmrSynthesis, Tone, Window};

/// Why a command failed; selects the exit status.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Failure {
    Input(String),
    NotConverged(String),
    Domain(String),
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Input(_) => 2,
            Failure::NotConverged(_) => 3,
            Failure::Domain(_) => 4,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            Failure::Input(m) | Failure::NotConverged(m) | Failure::Domain(m) => m,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.message())
    }
}

fn input(e: impl std::fmt::Display) -> Failure {
    Failure::Input(e.to_string())
}

#[derive(Debug, Parser)]
#[command(
    name = "licam-lab",
    version,
    about = "Laser intracavity absorption magnetometry toolkit"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit η_i, P_sp and N_th to a measured L-I curve.
    FitLi(FitLiArgs),
    /// Scan figures of merit over drive current.
    Simulate(SimulateArgs),
    /// Optimum sensitivity over a (g, R_f) grid.
    Sweep(SweepArgs),
    /// Fit a lock-in ODMR trace.
    FitOdmr(FitOdmrArgs),
    /// Noise floor and magnetic sensitivity of a time series.
    Sensitivity(SensitivityArgs),
    /// Generate synthetic data: li-curve, odmr-trace or timeseries.
    Synth(SynthArgs),
}

fn current(s: &str) -> Result<f64, String> {
    config::parse_quantity(s, Dimension::Current)
}

fn frequency(s: &str) -> Result<f64, String> {
    config::parse_quantity(s, Dimension::Frequency)
}

fn time(s: &str) -> Result<f64, String> {
    config::parse_quantity(s, Dimension::Time)
}

fn plain(s: &str) -> Result<f64, String> {
    config::parse_quantity(s, Dimension::Dimensionless)
}

/// A parsed list of values given as one flag.
#[derive(Debug, Clone, PartialEq)]
pub struct Values(pub Vec<f64>);

fn current_range(s: &str) -> Result<Values, String> {
    config::parse_range(s, Dimension::Current).map(Values)
}

fn frequency_range(s: &str) -> Result<Values, String> {
    config::parse_range(s, Dimension::Frequency).map(Values)
}

fn gain_axis(s: &str) -> Result<Values, String> {
    config::parse_axis(s, Dimension::Area).map(Values)
}

fn reflectivity_axis(s: &str) -> Result<Values, String> {
    config::parse_axis(s, Dimension::Dimensionless).map(Values)
}

fn tone(s: &str) -> Result<Tone, String> {
    let (f, a) = s
        .split_once(',')
        .ok_or_else(|| format!("`{s}`: expected frequency,amplitude"))?;
    Ok(Tone {
        frequency: frequency(f)?,
        amplitude: plain(a)?,
    })
}

#[derive(Debug, Args)]
pub struct FitLiArgs {
    /// CSV with header `i_a,p_w` and an optional `sigma_w` noise column.
    #[arg(long)]
    pub data: PathBuf,
    /// Laser parameter file; everything except η_i, P_sp and N_th stays fixed.
    #[arg(long)]
    pub params: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub params: PathBuf,
    #[arg(long)]
    pub absorber: PathBuf,
    /// Explicit grid `start:stop:step`. Without it a uniform grid refined
    /// around threshold runs up to the current limit.
    #[arg(long, value_parser = current_range)]
    pub currents: Option<Values>,
    #[arg(long, value_parser = current, default_value = "200mA")]
    pub current_limit: f64,
    /// Scan CSV; the summary goes to the same name with a `.json` extension.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub params: PathBuf,
    #[arg(long)]
    pub absorber: PathBuf,
    /// Differential gain axis in m²: `lo:hi:n`, `lo:hi:n:log` or a list.
    #[arg(long, value_parser = gain_axis)]
    pub grid_g: Values,
    /// Front reflectivity axis, same forms as `--grid-g`.
    #[arg(long, value_parser = reflectivity_axis)]
    pub grid_rf: Values,
    #[arg(long, value_parser = current, default_value = "200mA")]
    pub current_limit: f64,
    /// Grid CSV; the manifest goes to the same name with a `.json` extension.
    #[arg(long)]
    pub out: PathBuf,
    /// Worker threads; 0 uses all cores.
    #[arg(long, env = "LICAM_LAB_THREADS", default_value_t = 0)]
    pub threads: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct FitOdmrArgs {
    /// CSV with header `f_hz,signal`.
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Calibration factor κ between peak-to-peak signal and contrast.
    #[arg(long, value_parser = plain, default_value = "1")]
    pub kappa: f64,
    /// Detected DC power in the trace's signal units.
    #[arg(long, value_parser = plain, default_value = "1")]
    pub dc_power: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct SensitivityArgs {
    /// CSV with header `t_s,signal`, uniformly sampled.
    #[arg(long)]
    pub data: PathBuf,
    /// ODMR zero-crossing slope, signal units per Hz.
    #[arg(long, value_parser = plain, allow_hyphen_values = true)]
    pub slope: f64,
    #[arg(long, value_parser = config::parse_band, default_value = "1,1000")]
    pub band: (f64, f64),
    #[arg(long, value_enum, default_value_t = Window::Rectangular)]
    pub window: Window,
    #[arg(long, value_enum, default_value_t = Average::Rms)]
    pub average: Average,
    /// Tags the record as taken on or off the spin resonance.
    #[arg(long, value_enum, default_value_t = Tag::On)]
    pub resonance: Tag,
    /// Sensitivity JSON; the ASD goes to the same name with a `.csv` extension.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Tag {
    On,
    Off,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// li-curve, odmr-trace or timeseries.
    pub kind: String,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Laser parameter file (li-curve).
    #[arg(long)]
    pub params: Option<PathBuf>,
    /// Drive currents (li-curve).
    #[arg(long, value_parser = current_range, default_value = "2mA:200mA:2mA")]
    pub currents: Values,
    /// Noise: relative to each power for li-curve, absolute signal units for
    /// odmr-trace.
    #[arg(long, value_parser = plain, default_value = "0")]
    pub noise: f64,
    #[arg(long, value_parser = plain, default_value = "1e-2")]
    pub contrast: f64,
    #[arg(long, value_parser = frequency, default_value = "1.85MHz")]
    pub linewidth: f64,
    #[arg(long, value_parser = frequency, default_value = "2.7435GHz")]
    pub center: f64,
    #[arg(long, value_parser = frequency, default_value = "4.5MHz")]
    pub modulation_depth: f64,
    #[arg(long, value_parser = plain, default_value = "1")]
    pub kappa: f64,
    #[arg(long, value_parser = plain, default_value = "1")]
    pub dc_power: f64,
    /// Reverse the modulation phase (odmr-trace).
    #[arg(long)]
    pub invert: bool,
    /// Frequency grid (odmr-trace); defaults to ±5 linewidths, 401 points.
    #[arg(long, value_parser = frequency_range)]
    pub freqs: Option<Values>,
    /// White-noise density, signal units per √Hz (timeseries).
    #[arg(long, value_parser = plain, default_value = "1e-6")]
    pub floor: f64,
    /// `frequency,amplitude`; repeatable (timeseries).
    #[arg(long, value_parser = tone)]
    pub tone: Vec<Tone>,
    #[arg(long, value_parser = frequency, default_value = "10kHz")]
    pub sample_rate: f64,
    #[arg(long, value_parser = time, default_value = "1s")]
    pub duration: f64,
}

pub fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::FitLi(a) => fit_li(&a),
        Command::Simulate(a) => simulate(&a),
        Command::Sweep(a) => sweep(&a),
        Command::FitOdmr(a) => fit_odmr_cmd(&a),
        Command::Sensitivity(a) => sensitivity(&a),
        Command::Synth(a) => synth(&a),
    }
}

fn load_laser(path: &Path) -> Result<LaserFile, Failure> {
    config::load_laser(path).map_err(input)
}

fn load_absorber(path: &Path) -> Result<AbsorberFile, Failure> {
    config::load_absorber(path).map_err(input)
}

fn digests(paths: &[&Path]) -> Result<Vec<io::InputDigest>, Failure> {
    paths.iter().map(|p| io::digest(p).map_err(input)).collect()
}

fn write(path: &Path, contents: impl AsRef<[u8]>) -> Result<(), Failure> {
    io::write_atomic(path, contents.as_ref()).map_err(input)
}

fn fit_failure(e: FitError) -> Failure {
    match e {
        FitError::InsufficientData { .. } | FitError::NonFiniteData | FitError::InvalidInput(_) => input(e),
        FitError::DegenerateData(_) | FitError::NotConverged(_) | FitError::FlatTrace { .. } => {
            Failure::NotConverged(e.to_string())
        }
        FitError::ContrastOutOfRange(_) | FitError::Model(_) => Failure::Domain(e.to_string()),
    }
}

fn fit_li(a: &FitLiArgs) -> Result<(), Failure> {
    let laser = load_laser(&a.params)?;
    let params = laser.params().map_err(input)?;
    let table = io::read_csv(&a.data, &["i_a", "p_w"], &["sigma_w"]).map_err(input)?;
    let noise = (table.header.len() == 3).then(|| table.column(2).collect::<Vec<f64>>());
    let options = LiFitOptions {
        noise,
        ..LiFitOptions::default()
    };
    let config = json!({
        "data": a.data.display().to_string(),
        "params": a.params.display().to_string(),
        "laser": laser,
        "weighted": options.noise.is_some(),
        "out": a.out.display().to_string(),
    });
    let inputs = digests(&[&a.data, &a.params])?;
    let (report, failure) = match fit_li_curve(&table.pairs(), &params, &options) {
        Ok(r) => (r, None),
        Err(FitError::NotConverged(r)) => {
            let message = format!("fit did not converge within {} iterations", r.iterations);
            (*r, Some(Failure::NotConverged(message)))
        }
        Err(e) => return Err(fit_failure(e)),
    };
    write(
        &a.out,
        Envelope::new("fit-li", a.seed, config, inputs, &report).to_json(),
    )?;
    failure.map_or(Ok(()), Err)
}

fn fit_odmr_cmd(a: &FitOdmrArgs) -> Result<(), Failure> {
    let table = io::read_csv(&a.data, &["f_hz", "signal"], &[]).map_err(input)?;
    let options = OdmrOptions {
        kappa: a.kappa,
        dc_power: a.dc_power,
        ..OdmrOptions::default()
    };
    let config = json!({
        "data": a.data.display().to_string(),
        "kappa": a.kappa,
        "dc_power": a.dc_power,
        "out": a.out.display().to_string(),
    });
    let inputs = digests(&[&a.data])?;
    match fit_odmr(&table.pairs(), &options) {
        Ok((fit, report)) => {
            let result = json!({ "fit": fit, "report": report });
            write(
                &a.out,
                Envelope::new("fit-odmr", a.seed, config, inputs, result).to_json(),
            )
        }
        Err(FitError::NotConverged(report)) => {
            let message = format!("fit did not converge within {} iterations", report.iterations);
            let result = json!({ "fit": null, "report": report });
            write(
                &a.out,
                Envelope::new("fit-odmr", a.seed, config, inputs, result).to_json(),
            )?;
            Err(Failure::NotConverged(message))
        }
        Err(e) => Err(fit_failure(e)),
    }
}

#[derive(Debug, Serialize)]
struct Located {
    current: f64,
    value: f64,
}

#[derive(Debug, Serialize)]
struct ScanSummary {
    threshold_current: f64,
    threshold_current_on: f64,
    points: usize,
    failed_points: usize,
    peak_enhancement: Option<Located>,
    best_snls: Option<Located>,
    /// Optimum within the largest scanned current.
    optimum: Option<Optimum>,
    optimum_error: Option<String>,
}

fn summarize(scan: &CurrentScan, limit: f64) -> ScanSummary {
    let (optimum, optimum_error) = match optimize_over_current(scan, limit) {
        Ok(o) => (Some(o), None),
        Err(e) => (None, Some(e.to_string())),
    };
    ScanSummary {
        threshold_current: scan.threshold_current,
        threshold_current_on: scan.threshold_current_on,
        points: scan.currents.len(),
        failed_points: scan.points.iter().filter(|p| p.is_err()).count(),
        peak_enhancement: scan
            .peak_enhancement()
            .map(|(current, value)| Located { current, value }),
        best_snls: scan.best_snls(limit).and_then(|f| {
            f.snls.map(|value| Located {
                current: f.current,
                value,
            })
        }),
        optimum,
        optimum_error,
    }
}

/// The current-scan CSV shared by `simulate` and the tests.
pub fn scan_csv(scan: &CurrentScan) -> CsvText {
    let mut csv = CsvText::new(&[
        "i_a",
        "p_off_w",
        "p_on_w",
        "tau_eff",
        "contrast",
        "xi",
        "snls_t_per_sqrthz",
        "status",
    ]);
    for (current, point) in scan.currents.iter().zip(&scan.points) {
        match point {
            Ok(f) => csv.row(&[
                io::number(f.current),
                io::number(f.output_power_off),
                io::number(f.output_power_on),
                io::number(f.effective_depth),
                io::number(f.contrast),
                io::number(f.enhancement),
                io::maybe(f.snls),
                "ok".to_string(),
            ]),
            Err(e) => {
                let mut row = vec![io::number(*current)];
                row.extend(std::iter::repeat_n(String::new(), 6));
                row.push(e.to_string());
                csv.row(&row);
            }
        }
    }
    csv
}

fn simulate(a: &SimulateArgs) -> Result<(), Failure> {
    let laser = load_laser(&a.params)?;
    let absorber_file = load_absorber(&a.absorber)?;
    let params = laser.params().map_err(input)?;
    let absorber = absorber_file.absorber().map_err(input)?;
    let scan_config = ScanConfig {
        linewidth_fwhm: absorber_file.linewidth_fwhm,
        ..ScanConfig::default()
    };
    let (scan, limit) = match &a.currents {
        Some(Values(currents)) => {
            let limit = *currents.last().expect("ranges are non-empty");
            (
                scan_current(&params, &absorber, currents, scan_config.linewidth_fwhm),
                limit,
            )
        }
        None => (
            scan_for_limit(&params, &absorber, a.current_limit, &scan_config),
            a.current_limit,
        ),
    };
    let scan = scan.map_err(sweep_failure)?;
    let config = json!({
        "params": a.params.display().to_string(),
        "laser": laser,
        "absorber_file": a.absorber.display().to_string(),
        "absorber": absorber_file,
        "currents": a.currents.as_ref().map(|_| "explicit").unwrap_or("refined"),
        "current_limit": limit,
        "scan": scan_config,
        "out": a.out.display().to_string(),
    });
    println!("{}", serde_json::to_string_pretty(&config).expect("config serializes"));
    let inputs = digests(&[&a.params, &a.absorber])?;
    let summary = summarize(&scan, limit);
    write(&a.out, scan_csv(&scan).into_bytes())?;
    let envelope = Envelope::new("simulate", a.seed, config, inputs, summary);
    write(&io::companion(&a.out, "json"), envelope.to_json())
}

fn sweep_failure(e: SweepError) -> Failure {
    match e {
        SweepError::Model(_) | SweepError::Enhancement(_) => Failure::Domain(e.to_string()),
        _ => input(e),
    }
}

/// The sweep-grid CSV.
pub fn sweep_csv(cells: &[SweepCell]) -> CsvText {
    let mut csv = CsvText::new(&[
        "g_m2",
        "rf",
        "delta_alpha_per_m",
        "i_opt_a",
        "snls_t_per_sqrthz",
        "xi",
        "regime",
        "status",
    ]);
    for c in cells {
        csv.row(&[
            io::number(c.differential_gain),
            io::number(c.reflectivity_front),
            io::number(c.delta_alpha),
            io::maybe(c.optimum_current),
            io::maybe(c.optimum_snls),
            io::maybe(c.optimum_enhancement),
            c.regime.map(Regime::label).unwrap_or_default().to_string(),
            c.status().to_string(),
        ]);
    }
    csv
}

/// Smallest gain that reaches threshold, per reflectivity column.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundaryPoint {
    pub reflectivity_front: f64,
    pub lowest_lasing_gain: Option<f64>,
}

/// The `g(R_f)` boundary below which cells never reach threshold.
pub fn lasing_boundary(cells: &[SweepCell], g_values: &[f64], rf_values: &[f64]) -> Vec<BoundaryPoint> {
    rf_values
        .iter()
        .enumerate()
        .map(|(j, &rf)| BoundaryPoint {
            reflectivity_front: rf,
            lowest_lasing_gain: (0..g_values.len())
                .map(|i| &cells[i * rf_values.len() + j])
                .find(|c| matches!(c.regime, Some(r) if r != Regime::BelowThreshold))
                .map(|c| c.differential_gain),
        })
        .collect()
}

/// Evaluates every cell, in parallel when `threads != 1`, keeping row-major
/// order regardless of completion order.
pub fn run_sweep(
    base: &licam_core::DiodeLaserParams,
    g_values: &[f64],
    rf_values: &[f64],
    absorber: &AbsorberParams,
    limit: f64,
    scan: &ScanConfig,
    threads: usize,
) -> Result<Vec<SweepCell>, Failure> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| input(format!("cannot start {threads} worker threads: {e}")))?;
    let n = rf_values.len();
    Ok(pool.install(|| {
        (0..g_values.len() * n)
            .into_par_iter()
            .map(|k| sweep_cell(base, g_values[k / n], rf_values[k % n], absorber, limit, scan))
            .collect()
    }))
}

fn sweep(a: &SweepArgs) -> Result<(), Failure> {
    let laser = load_laser(&a.params)?;
    let absorber_file = load_absorber(&a.absorber)?;
    let params = laser.params().map_err(input)?;
    let absorber = absorber_file.absorber().map_err(input)?;
    let (grid_g, grid_rf) = (&a.grid_g.0, &a.grid_rf.0);
    if grid_g.iter().any(|g| !(*g > 0.0)) {
        return Err(input("differential gains must be positive"));
    }
    if grid_rf.iter().any(|r| !(*r > 0.0 && *r < 1.0)) {
        return Err(input("front reflectivities must lie in (0, 1)"));
    }
    if !(a.current_limit > 0.0) {
        return Err(input("current limit must be positive"));
    }
    let scan = ScanConfig {
        linewidth_fwhm: absorber_file.linewidth_fwhm,
        ..ScanConfig::default()
    };
    let start = Instant::now();
    let cells = run_sweep(&params, grid_g, grid_rf, &absorber, a.current_limit, &scan, a.threads)?;
    let seconds = start.elapsed().as_secs_f64();

    let config = json!({
        "params": a.params.display().to_string(),
        "laser": laser,
        "absorber_file": a.absorber.display().to_string(),
        "absorber": absorber_file,
        "grid_g": grid_g,
        "grid_rf": grid_rf,
        "current_limit": a.current_limit,
        "scan": scan,
        "threads": a.threads,
        "out": a.out.display().to_string(),
    });
    let counts: serde_json::Map<String, serde_json::Value> = Regime::ALL
        .iter()
        .map(|r| {
            (
                r.label().to_string(),
                json!(cells.iter().filter(|c| c.regime == Some(*r)).count()),
            )
        })
        .chain([(
            "failed".to_string(),
            json!(cells.iter().filter(|c| c.error.is_some()).count()),
        )])
        .collect();
    let result = json!({
        "cells": cells.len(),
        "delta_alpha": absorber.delta_alpha(),
        "regimes": counts,
        "boundary": lasing_boundary(&cells, grid_g, grid_rf),
        "elapsed_seconds": seconds,
    });
    let inputs = digests(&[&a.params, &a.absorber])?;
    write(&a.out, sweep_csv(&cells).into_bytes())?;
    write(
        &io::companion(&a.out, "json"),
        Envelope::new("sweep", a.seed, config, inputs, result).to_json(),
    )
}

/// Rejects time stamps that deviate from uniform spacing by more than 1 ppm.
fn uniform_rate(times: &[f64]) -> Result<f64, Failure> {
    if times.len() < 2 {
        return Err(input("time series needs at least two samples"));
    }
    let span = times[times.len() - 1] - times[0];
    let dt = span / (times.len() - 1) as f64;
    if !(dt > 0.0) {
        return Err(input("time stamps must increase"));
    }
    for (k, w) in times.windows(2).enumerate() {
        if ((w[1] - w[0]) / dt - 1.0).abs() > 1e-6 {
            return Err(input(format!(
                "non-uniform sampling at row {}: step {:e} s vs mean {dt:e} s",
                k + 2,
                w[1] - w[0]
            )));
        }
    }
    Ok(1.0 / dt)
}

fn sensitivity(a: &SensitivityArgs) -> Result<(), Failure> {
    let table = io::read_csv(&a.data, &["t_s", "signal"], &[]).map_err(input)?;
    let times: Vec<f64> = table.column(0).collect();
    let rate = uniform_rate(&times)?;
    let series = signal::TimeSeries::new(rate, times[0], table.column(1).collect()).map_err(input)?;
    let density = signal::asd(&series, a.window).map_err(input)?;
    let (lo, hi) = a.band;
    let nyquist = 0.5 * rate;
    if !(lo > 0.0) {
        return Err(Failure::Domain(format!(
            "band starts at {lo} Hz; zero frequency is excluded"
        )));
    }
    if hi > nyquist * (1.0 + 1e-9) {
        return Err(Failure::Domain(format!(
            "band ends at {hi} Hz, beyond Nyquist {nyquist} Hz"
        )));
    }
    let floor = signal::noise_floor_sensitivity(
        &density,
        a.slope,
        a.band,
        licam_core::constants::GYROMAGNETIC_RATIO,
        a.average,
    )
    .map_err(|e| match e {
        signal::SignalError::ZeroSlope => input(e),
        _ => Failure::Domain(e.to_string()),
    })?;

    let mut csv = CsvText::new(&["f_hz", "asd"]);
    for (f, v) in density.frequencies.iter().zip(&density.amplitudes) {
        csv.row(&[io::number(*f), io::number(*v)]);
    }
    let config = json!({
        "data": a.data.display().to_string(),
        "slope": a.slope,
        "band": [lo, hi],
        "window": a.window,
        "average": a.average,
        "gyromagnetic_ratio": licam_core::constants::GYROMAGNETIC_RATIO,
        "resonance": a.resonance,
        "out": a.out.display().to_string(),
    });
    let result = json!({
        "band": [lo, hi],
        "bins": floor.bins,
        "sample_rate": rate,
        "samples": series.len(),
        "resonance": a.resonance,
        "noise_floor": floor.floor,
        "sensitivity_t_per_sqrthz": floor.sensitivity,
    });
    let inputs = digests(&[&a.data])?;
    write(&io::companion(&a.out, "csv"), csv.into_bytes())?;
    write(
        &a.out,
        Envelope::new("sensitivity", a.seed, config, inputs, result).to_json(),
    )
}

fn synth(a: &SynthArgs) -> Result<(), Failure> {
    let csv = match a.kind.as_str() {
        "li-curve" => synth_li(a)?,
        "odmr-trace" => synth_odmr(a)?,
        "timeseries" => synth_series(a)?,
        other => {
            return Err(input(format!(
                "unknown synth kind `{other}`; expected li-curve, odmr-trace or timeseries"
            )))
        }
    };
    write(&a.out, csv.into_bytes())
}

fn synth_li(a: &SynthArgs) -> Result<CsvText, Failure> {
    let path = a.params.as_ref().ok_or_else(|| input("li-curve needs --params"))?;
    let params = load_laser(path)?.params().map_err(input)?;
    if !(a.noise >= 0.0) {
        return Err(input("noise must be non-negative"));
    }
    let curve = characteristic_curve(&params, &AbsorberParams::transparent(), &a.currents.0, Resonance::Off)
        .map_err(|e| Failure::Domain(e.to_string()))?;
    let unit = Normal::new(0.0, 1.0).expect("unit normal");
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let mut csv = CsvText::new(&["i_a", "p_w"]);
    for (i, p) in curve {
        let noisy = if a.noise > 0.0 {
            p * (1.0 + a.noise * unit.sample(&mut rng))
        } else {
            p
        };
        csv.row(&[io::number(i), io::number(noisy)]);
    }
    Ok(csv)
}

fn synth_odmr(a: &SynthArgs) -> Result<CsvText, Failure> {
    let settings = OdmrSynthesis {
        contrast: a.contrast,
        linewidth_fwhm: a.linewidth,
        center: a.center,
        modulation_depth: a.modulation_depth,
        noise_rms: a.noise,
        kappa: a.kappa,
        dc_power: a.dc_power,
        inverted: a.invert,
    };
    let grid = match &a.freqs {
        Some(Values(g)) => g.clone(),
        None => (0..=400)
            .map(|k| a.center - 5.0 * a.linewidth + 10.0 * a.linewidth * f64::from(k) / 400.0)
            .collect(),
    };
    let trace = signal::synth_odmr_trace(&settings, &grid, a.seed).map_err(input)?;
    let mut csv = CsvText::new(&["f_hz", "signal"]);
    for (f, s) in trace {
        csv.row(&[io::number(f), io::number(s)]);
    }
    Ok(csv)
}

fn synth_series(a: &SynthArgs) -> Result<CsvText, Failure> {
    let series = signal::synth_time_series(a.floor, &a.tone, a.sample_rate, a.duration, a.seed).map_err(input)?;
    let mut csv = CsvText::new(&["t_s", "signal"]);
    for (k, v) in series.values().iter().enumerate() {
        csv.row(&[io::number(series.time(k)), io::number(*v)]);
    }
    Ok(csv)
}
