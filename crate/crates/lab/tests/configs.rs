mod common;

use common::config;
use licam_core::model::threshold_current;
use licam_core::presets;
use licam_lab::config::{load_absorber, load_laser};

#[test]
fn calibrated_file_matches_preset() {
    let file = load_laser(&config("calibrated.params")).unwrap();
    assert_eq!(file.config, presets::calibrated_config());
    let absorber = load_absorber(&config("calibrated.absorber"))
        .unwrap()
        .absorber()
        .unwrap();
    let preset = presets::calibrated_absorber();
    assert!((absorber.single_pass_depth() / preset.single_pass_depth() - 1.0).abs() < 1e-15);
}

#[test]
fn synth1_file_matches_preset() {
    let file = load_laser(&config("synth1.params")).unwrap();
    assert_eq!(file.config, presets::synth1_config());
    let absorber = load_absorber(&config("synth1.absorber")).unwrap().absorber().unwrap();
    assert_eq!(absorber, presets::synth1_absorber());
}

#[test]
fn placeholder_loads_and_lases() {
    let params = load_laser(&config("prospective-placeholder.params"))
        .unwrap()
        .params()
        .unwrap();
    let ith = threshold_current(&params, params.calibration_loss()).unwrap();
    assert!((ith - 0.06).abs() < 1e-12);
    load_absorber(&config("prospective-placeholder.absorber")).unwrap();
}
