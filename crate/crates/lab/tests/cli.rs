mod common;

use std::path::Path;

use common::*;

fn temp() -> tempfile::TempDir {
    tempfile::tempdir().expect("temp dir")
}

fn copy_config(dir: &Path, name: &str) {
    std::fs::copy(config(name), dir.join(name)).expect("copy config");
}

fn entries(dir: &Path) -> Vec<String> {
    let mut names: Vec<String> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    names.sort();
    names
}

/// Compares `produced` with the checked-in golden file, or replaces the
/// golden file when `LICAM_BLESS=1`.
#[track_caller]
fn golden(produced: &Path, name: &str) {
    let text = read(produced);
    let path = data(name);
    if std::env::var("LICAM_BLESS").as_deref() == Ok("1") {
        std::fs::write(&path, &text).expect("bless golden");
        return;
    }
    let expected = read(&path);
    assert!(
        text == expected,
        "{name} differs from the golden file; rerun with LICAM_BLESS=1 after review"
    );
}

// ---- synth ----

#[test]
fn synth_is_deterministic() {
    let d = temp();
    copy_config(d.path(), "calibrated.params");
    for kind in ["li-curve", "odmr-trace", "timeseries"] {
        for out in ["a.csv", "b.csv"] {
            ok(&run(
                d.path(),
                &[
                    "synth",
                    kind,
                    "--params",
                    "calibrated.params",
                    "--noise",
                    "1e-2",
                    "--seed",
                    "7",
                    "--out",
                    out,
                ],
            ));
        }
        assert_eq!(read(d.path().join("a.csv")), read(d.path().join("b.csv")), "{kind}");
    }
    ok(&run(
        d.path(),
        &["synth", "timeseries", "--seed", "8", "--out", "c.csv"],
    ));
    assert_ne!(read(d.path().join("a.csv")), read(d.path().join("c.csv")));
}

#[test]
fn synth_li_curve_columns() {
    let d = temp();
    copy_config(d.path(), "synth1.params");
    ok(&run(
        d.path(),
        &["synth", "li-curve", "--params", "synth1.params", "--out", "li.csv"],
    ));
    let rows = csv_rows(d.path().join("li.csv"));
    assert_eq!(rows[0], ["i_a", "p_w"]);
    assert_eq!(rows.len(), 101);
}

#[test]
fn synth_odmr_zero_contrast_is_flat() {
    let d = temp();
    ok(&run(
        d.path(),
        &["synth", "odmr-trace", "--contrast", "0", "--out", "o.csv"],
    ));
    let rows = csv_rows(d.path().join("o.csv"));
    assert_eq!(rows[0], ["f_hz", "signal"]);
    assert!(numbers(&rows, "signal").iter().all(|s| *s == 0.0));
}

#[test]
fn synth_unknown_kind() {
    let d = temp();
    let out = run(d.path(), &["synth", "spectrum", "--out", "x.csv"]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("spectrum"));
    assert!(entries(d.path()).is_empty());
}

// ---- fit-li ----

#[test]
fn fit_li_golden() {
    let d = temp();
    copy_config(d.path(), "calibrated.params");
    ok(&run(
        d.path(),
        &[
            "synth",
            "li-curve",
            "--params",
            "calibrated.params",
            "--currents",
            "2mA:200mA:2mA",
            "--noise",
            "5e-3",
            "--seed",
            "11",
            "--out",
            "li_curve.csv",
        ],
    ));
    golden(&d.path().join("li_curve.csv"), "li_curve.csv");
    std::fs::copy(data("li_curve.csv"), d.path().join("li_curve.csv")).unwrap();
    ok(&run(
        d.path(),
        &[
            "fit-li",
            "--data",
            "li_curve.csv",
            "--params",
            "calibrated.params",
            "--seed",
            "11",
            "--out",
            "fit.json",
        ],
    ));
    golden(&d.path().join("fit.json"), "li_fit.golden.json");

    let v = json(d.path().join("fit.json"));
    assert_eq!(v["seed"], 11);
    assert_eq!(v["command"], "fit-li");
    assert_eq!(v["result"]["converged"], true);
    assert_eq!(v["inputs"].as_array().unwrap().len(), 2);
    let ith = v["result"]["derived"]
        .as_array()
        .unwrap()
        .iter()
        .find(|p| p["name"] == "threshold_current")
        .expect("derived threshold current")["value"]
        .as_f64()
        .unwrap();
    assert!((ith / 0.116 - 1.0).abs() < 0.01, "{ith}");
}

#[test]
fn fit_li_empty_csv() {
    let d = temp();
    copy_config(d.path(), "calibrated.params");
    std::fs::write(d.path().join("empty.csv"), "").unwrap();
    let out = run(
        d.path(),
        &[
            "fit-li",
            "--data",
            "empty.csv",
            "--params",
            "calibrated.params",
            "--out",
            "f.json",
        ],
    );
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("i_a,p_w"), "{}", stderr(&out));
    assert!(!d.path().join("f.json").exists());
}

#[test]
fn fit_li_below_threshold_only() {
    let d = temp();
    copy_config(d.path(), "calibrated.params");
    ok(&run(
        d.path(),
        &[
            "synth",
            "li-curve",
            "--params",
            "calibrated.params",
            "--currents",
            "2mA:100mA:2mA",
            "--out",
            "low.csv",
        ],
    ));
    let out = run(
        d.path(),
        &[
            "fit-li",
            "--data",
            "low.csv",
            "--params",
            "calibrated.params",
            "--out",
            "f.json",
        ],
    );
    assert_eq!(code(&out), 3);
    assert!(stderr(&out).contains("degenerate data"), "{}", stderr(&out));
}

#[test]
fn fit_li_too_few_rows() {
    let d = temp();
    copy_config(d.path(), "calibrated.params");
    std::fs::write(d.path().join("few.csv"), "i_a,p_w\n0.12,1e-3\n0.13,2e-3\n").unwrap();
    let out = run(
        d.path(),
        &[
            "fit-li",
            "--data",
            "few.csv",
            "--params",
            "calibrated.params",
            "--out",
            "f.json",
        ],
    );
    assert_eq!(code(&out), 2);
}

// ---- fit-odmr ----

#[test]
fn fit_odmr_golden() {
    let d = temp();
    ok(&run(
        d.path(),
        &[
            "synth",
            "odmr-trace",
            "--noise",
            "2e-4",
            "--seed",
            "5",
            "--out",
            "odmr_trace.csv",
        ],
    ));
    golden(&d.path().join("odmr_trace.csv"), "odmr_trace.csv");
    std::fs::copy(data("odmr_trace.csv"), d.path().join("odmr_trace.csv")).unwrap();
    ok(&run(
        d.path(),
        &[
            "fit-odmr",
            "--data",
            "odmr_trace.csv",
            "--seed",
            "5",
            "--out",
            "fit.json",
        ],
    ));
    golden(&d.path().join("fit.json"), "odmr_fit.golden.json");

    let fit = &json(d.path().join("fit.json"))["result"]["fit"];
    let center = fit["center"].as_f64().unwrap();
    let width = fit["linewidth_fwhm"].as_f64().unwrap();
    assert!((center - 2.7435e9).abs() < 0.1 * width, "{center}");
    assert!(fit["zero_crossing_slope"].as_f64().unwrap() != 0.0);
}

#[test]
fn fit_odmr_constant_trace() {
    let d = temp();
    let mut text = String::from("f_hz,signal\n");
    for k in 0..100 {
        text.push_str(&format!("{},0.25\n", 2.74e9 + 1e5 * k as f64));
    }
    std::fs::write(d.path().join("flat.csv"), text).unwrap();
    let out = run(d.path(), &["fit-odmr", "--data", "flat.csv", "--out", "f.json"]);
    assert_eq!(code(&out), 3, "{}", stderr(&out));
}

#[test]
fn fit_odmr_wrong_header() {
    let d = temp();
    std::fs::write(d.path().join("t.csv"), "t_s,signal\n0,1\n").unwrap();
    let out = run(d.path(), &["fit-odmr", "--data", "t.csv", "--out", "f.json"]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("f_hz,signal"));
}

// ---- simulate ----

#[test]
fn simulate_transparent_absorber() {
    let d = temp();
    copy_config(d.path(), "calibrated.params");
    std::fs::write(
        d.path().join("none.absorber"),
        "delta_alpha = 0/m\nabsorber_length = 1mm\n",
    )
    .unwrap();
    ok(&run(
        d.path(),
        &[
            "simulate",
            "--params",
            "calibrated.params",
            "--absorber",
            "none.absorber",
            "--currents",
            "10mA:200mA:10mA",
            "--out",
            "scan.csv",
        ],
    ));
    let rows = csv_rows(d.path().join("scan.csv"));
    assert_eq!(
        rows[0],
        [
            "i_a",
            "p_off_w",
            "p_on_w",
            "tau_eff",
            "contrast",
            "xi",
            "snls_t_per_sqrthz",
            "status"
        ]
    );
    assert!(numbers(&rows, "contrast").iter().all(|c| *c == 0.0));
    assert!(numbers(&rows, "xi").iter().all(|x| *x == 1.0));
    assert!(column(&rows, "status").iter().all(|s| s == "ok"));
}

#[test]
fn simulate_peak_at_threshold() {
    let d = temp();
    copy_config(d.path(), "synth1.params");
    copy_config(d.path(), "synth1.absorber");
    let out = run(
        d.path(),
        &[
            "simulate",
            "--params",
            "synth1.params",
            "--absorber",
            "synth1.absorber",
            "--currents",
            "0:100mA:1mA",
            "--out",
            "scan.csv",
        ],
    );
    ok(&out);
    let summary = json(d.path().join("scan.json"));
    let r = &summary["result"];
    let ith = r["threshold_current"].as_f64().unwrap();
    let peak = r["peak_enhancement"]["current"].as_f64().unwrap();
    assert!((ith - 0.05).abs() < 1e-9, "{ith}");
    assert!((peak - ith).abs() <= 1e-3 + 1e-12, "peak {peak} vs threshold {ith}");
    assert_eq!(csv_rows(d.path().join("scan.csv")).len(), 102);
}

#[test]
fn simulate_echoes_resolved_config() {
    let d = temp();
    copy_config(d.path(), "calibrated.params");
    copy_config(d.path(), "calibrated.absorber");
    let out = run(
        d.path(),
        &[
            "simulate",
            "--params",
            "calibrated.params",
            "--absorber",
            "calibrated.absorber",
            "--out",
            "s.csv",
        ],
    );
    ok(&out);
    let echoed: serde_json::Value = serde_json::from_slice(&out.stdout).expect("stdout is JSON");
    assert_eq!(echoed["current_limit"], 0.2);
    assert_eq!(echoed["currents"], "refined");
    assert!(echoed["scan"]["coarse_points"].as_u64().is_some(), "{echoed}");
    assert!(echoed["laser"].is_object());
    let saved = json(d.path().join("s.json"));
    assert_eq!(saved["config"], echoed);
    assert_eq!(saved["inputs"].as_array().unwrap().len(), 2);
}

#[test]
fn simulate_bad_config() {
    let d = temp();
    copy_config(d.path(), "calibrated.absorber");
    std::fs::write(d.path().join("bad.params"), "wavelenght = 1042nm\n").unwrap();
    let out = run(
        d.path(),
        &[
            "simulate",
            "--params",
            "bad.params",
            "--absorber",
            "calibrated.absorber",
            "--out",
            "s.csv",
        ],
    );
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("wavelenght"));
    assert!(!d.path().join("s.csv").exists());
}

#[test]
fn simulate_rejects_descending_range() {
    let d = temp();
    copy_config(d.path(), "calibrated.params");
    copy_config(d.path(), "calibrated.absorber");
    let out = run(
        d.path(),
        &[
            "simulate",
            "--params",
            "calibrated.params",
            "--absorber",
            "calibrated.absorber",
            "--currents",
            "100mA:10mA:1mA",
            "--out",
            "s.csv",
        ],
    );
    assert_eq!(code(&out), 2);
}

// ---- sweep ----

#[test]
fn sweep_single_cell_matches_simulate() {
    let d = temp();
    copy_config(d.path(), "synth1.params");
    copy_config(d.path(), "synth1.absorber");
    let base = [
        "--params",
        "synth1.params",
        "--absorber",
        "synth1.absorber",
        "--current-limit",
        "150mA",
    ];
    let mut args = vec!["simulate"];
    args.extend(base);
    args.extend(["--out", "scan.csv"]);
    ok(&run(d.path(), &args));
    let mut args = vec!["sweep"];
    args.extend(base);
    args.extend(["--grid-g", "6e-22", "--grid-rf", "0.8", "--out", "grid.csv"]);
    ok(&run(d.path(), &args));

    let optimum = &json(d.path().join("scan.json"))["result"]["optimum"];
    let rows = csv_rows(d.path().join("grid.csv"));
    assert_eq!(rows.len(), 2);
    assert_eq!(numbers(&rows, "i_opt_a")[0], optimum["current"].as_f64().unwrap());
    assert_eq!(
        numbers(&rows, "snls_t_per_sqrthz")[0],
        optimum["snls"].as_f64().unwrap()
    );
    assert_eq!(numbers(&rows, "xi")[0], optimum["enhancement"].as_f64().unwrap());
    assert_eq!(column(&rows, "regime")[0], optimum["regime"].as_str().unwrap());
}

#[test]
fn sweep_regimes_and_manifest() {
    let d = temp();
    copy_config(d.path(), "calibrated.params");
    copy_config(d.path(), "calibrated.absorber");
    ok(&run(
        d.path(),
        &[
            "sweep",
            "--params",
            "calibrated.params",
            "--absorber",
            "calibrated.absorber",
            "--grid-g",
            "1.5e-22:3e-21:6:log",
            "--grid-rf",
            "0.5:0.98:5",
            "--seed",
            "3",
            "--out",
            "grid.csv",
        ],
    ));
    let rows = csv_rows(d.path().join("grid.csv"));
    assert_eq!(rows.len(), 31);
    assert_eq!(
        rows[0],
        [
            "g_m2",
            "rf",
            "delta_alpha_per_m",
            "i_opt_a",
            "snls_t_per_sqrthz",
            "xi",
            "regime",
            "status"
        ]
    );
    let labels = ["below_threshold", "at_threshold", "at_current_limit"];
    assert!(column(&rows, "regime").iter().all(|r| labels.contains(&r.as_str())));
    let manifest = json(d.path().join("grid.json"));
    assert_eq!(manifest["seed"], 3);
    assert_eq!(manifest["result"]["cells"], 30);
    assert_eq!(manifest["config"]["grid_g"].as_array().unwrap().len(), 6);
    assert_eq!(manifest["config"]["current_limit"], 0.2);
    assert!(manifest["result"]["elapsed_seconds"].as_f64().unwrap() >= 0.0);
    assert!(manifest["result"]["delta_alpha"].as_f64().unwrap() > 0.0);
}

#[test]
fn sweep_threads_from_env_and_deterministic() {
    let d = temp();
    copy_config(d.path(), "calibrated.params");
    copy_config(d.path(), "calibrated.absorber");
    let args = |out: &'static str| {
        vec![
            "sweep",
            "--params",
            "calibrated.params",
            "--absorber",
            "calibrated.absorber",
            "--grid-g",
            "2e-22:2e-21:5:log",
            "--grid-rf",
            "0.6:0.95:4",
            "--out",
            out,
        ]
    };
    let binary = env!("CARGO_BIN_EXE_licam-lab");
    for (threads, out) in [("1", "one.csv"), ("4", "four.csv")] {
        let status = std::process::Command::new(binary)
            .args(args(out))
            .current_dir(d.path())
            .env("LICAM_LAB_THREADS", threads)
            .output()
            .unwrap();
        ok(&status);
        let manifest = json(d.path().join(out).with_extension("json"));
        assert_eq!(manifest["config"]["threads"], threads.parse::<u64>().unwrap());
    }
    // The flag wins over the environment.
    let mut flagged = args("flag.csv");
    flagged.extend(["--threads", "2"]);
    let status = std::process::Command::new(binary)
        .args(flagged)
        .current_dir(d.path())
        .env("LICAM_LAB_THREADS", "3")
        .output()
        .unwrap();
    ok(&status);
    assert_eq!(json(d.path().join("flag.json"))["config"]["threads"], 2);

    let one = read(d.path().join("one.csv"));
    assert_eq!(one, read(d.path().join("four.csv")));
    assert_eq!(one, read(d.path().join("flag.csv")));
}

#[test]
fn sweep_rejects_bad_grid() {
    let d = temp();
    copy_config(d.path(), "calibrated.params");
    copy_config(d.path(), "calibrated.absorber");
    let out = run(
        d.path(),
        &[
            "sweep",
            "--params",
            "calibrated.params",
            "--absorber",
            "calibrated.absorber",
            "--grid-g",
            "1e-21",
            "--grid-rf",
            "0.5,1.2",
            "--out",
            "g.csv",
        ],
    );
    assert_eq!(code(&out), 2);
}

// ---- sensitivity ----

fn timeseries(dir: &Path, extra: &[&str]) {
    let mut args = vec![
        "synth",
        "timeseries",
        "--floor",
        "1e-6",
        "--seed",
        "21",
        "--out",
        "ts.csv",
    ];
    args.extend(extra);
    ok(&run(dir, &args));
}

#[test]
fn sensitivity_recovers_known_floor() {
    let d = temp();
    timeseries(d.path(), &["--tone", "100,1e-4"]);
    let slope: f64 = -2.5e-9;
    let out = run(
        d.path(),
        &[
            "sensitivity",
            "--data",
            "ts.csv",
            "--slope",
            "-2.5e-9",
            "--band",
            "1,1000",
            "--out",
            "s.json",
        ],
    );
    ok(&out);
    let v = json(d.path().join("s.json"));
    let r = &v["result"];
    assert_eq!(r["band"], serde_json::json!([1.0, 1000.0]));
    assert_eq!(r["sample_rate"].as_f64().unwrap(), 1e4);
    assert_eq!(r["samples"], 10_000);

    // A 100 Hz tone sits in the band; the median floor ignores it.
    let out = run(
        d.path(),
        &[
            "sensitivity",
            "--data",
            "ts.csv",
            "--slope",
            "-2.5e-9",
            "--average",
            "median",
            "--out",
            "m.json",
        ],
    );
    ok(&out);
    let eta = json(d.path().join("m.json"))["result"]["sensitivity_t_per_sqrthz"]
        .as_f64()
        .unwrap();
    let truth = 1e-6 / (slope.abs() * 28.024e9);
    assert!((eta / truth - 1.0).abs() < 0.05, "{eta} vs {truth}");

    let asd = csv_rows(d.path().join("s.csv"));
    assert_eq!(asd[0], ["f_hz", "asd"]);
    assert_eq!(asd.len(), 5001);
}

#[test]
fn sensitivity_white_floor_rms() {
    let d = temp();
    timeseries(d.path(), &[]);
    ok(&run(
        d.path(),
        &["sensitivity", "--data", "ts.csv", "--slope", "1e-9", "--out", "s.json"],
    ));
    let r = &json(d.path().join("s.json"))["result"];
    let floor = r["noise_floor"].as_f64().unwrap();
    assert!((floor / 1e-6 - 1.0).abs() < 0.05, "{floor}");
    let eta = r["sensitivity_t_per_sqrthz"].as_f64().unwrap();
    assert!((eta / (1e-6 / (1e-9 * 28.024e9)) - 1.0).abs() < 0.05);
}

#[test]
fn sensitivity_band_errors() {
    let d = temp();
    timeseries(d.path(), &[]);
    for band in ["0,100", "1,6000"] {
        let out = run(
            d.path(),
            &[
                "sensitivity",
                "--data",
                "ts.csv",
                "--slope",
                "1e-9",
                "--band",
                band,
                "--out",
                "s.json",
            ],
        );
        assert_eq!(code(&out), 4, "band {band}: {}", stderr(&out));
    }
    assert!(!d.path().join("s.json").exists());
}

#[test]
fn sensitivity_non_uniform_sampling() {
    let d = temp();
    let mut text = String::from("t_s,signal\n");
    for k in 0..1000 {
        let t = if k == 500 { 0.05005 } else { k as f64 * 1e-4 };
        text.push_str(&format!("{t},{}\n", (k as f64).sin()));
    }
    std::fs::write(d.path().join("ts.csv"), text).unwrap();
    let out = run(
        d.path(),
        &["sensitivity", "--data", "ts.csv", "--slope", "1e-9", "--out", "s.json"],
    );
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("non-uniform"));
}

#[test]
fn sensitivity_zero_slope() {
    let d = temp();
    timeseries(d.path(), &[]);
    let out = run(
        d.path(),
        &["sensitivity", "--data", "ts.csv", "--slope", "0", "--out", "s.json"],
    );
    assert_eq!(code(&out), 2);
}

// ---- general ----

#[test]
fn no_temporary_files_remain() {
    let d = temp();
    copy_config(d.path(), "calibrated.params");
    copy_config(d.path(), "calibrated.absorber");
    ok(&run(
        d.path(),
        &["synth", "timeseries", "--duration", "0.2s", "--out", "ts.csv"],
    ));
    ok(&run(
        d.path(),
        &["sensitivity", "--data", "ts.csv", "--slope", "1e-9", "--out", "s.json"],
    ));
    ok(&run(
        d.path(),
        &[
            "simulate",
            "--params",
            "calibrated.params",
            "--absorber",
            "calibrated.absorber",
            "--currents",
            "50mA:150mA:5mA",
            "--out",
            "scan.csv",
        ],
    ));
    assert_eq!(
        entries(d.path()),
        [
            "calibrated.absorber",
            "calibrated.params",
            "s.csv",
            "s.json",
            "scan.csv",
            "scan.json",
            "ts.csv"
        ]
    );
}

#[test]
fn missing_input_file() {
    let d = temp();
    let out = run(d.path(), &["fit-odmr", "--data", "absent.csv", "--out", "f.json"]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("absent.csv"));
}

#[test]
fn usage_errors_exit_2() {
    let d = temp();
    assert_eq!(code(&run(d.path(), &["simulate"])), 2);
    assert_eq!(code(&run(d.path(), &["frobnicate"])), 2);
    assert_eq!(
        code(&run(
            d.path(),
            &["synth", "li-curve", "--currents", "1x:2:1", "--out", "a.csv"]
        )),
        2
    );
}
