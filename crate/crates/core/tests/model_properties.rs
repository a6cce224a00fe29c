use licam_core::model::{
    characteristic_curve, integrate_transient, modal_gain, stationarity_residuals, steady_state,
    threshold_carrier_density, threshold_current, total_loss, AbsorberParams, Resonance, TransientOptions,
};
use licam_core::presets::{self, RANDOM_DIMENSIONS};
use proptest::prelude::*;

fn unit_samples() -> impl Strategy<Value = [f64; RANDOM_DIMENSIONS]> {
    proptest::array::uniform8(0.0f64..=1.0)
}

fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        ((a - b) / a.abs().max(b.abs())).abs()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn closed_form_is_stationary(u in unit_samples(), depth in 0.0f64..5e-3, f in 0.0f64..2.0) {
        let p = presets::randomized(u);
        let a = AbsorberParams::from_depth(depth, 1e-3).unwrap();
        let ith = threshold_current(&p, p.calibration_loss()).unwrap();
        for res in [Resonance::Off, Resonance::On] {
            let op = steady_state(&p, &a, f * ith, res).unwrap();
            prop_assert!(op.intracavity_power >= 0.0);
            prop_assert!(stationarity_residuals(&p, &a, res, &op).max() < 1e-10);
        }
    }

    #[test]
    fn threshold_balances_gain_and_loss(u in unit_samples(), depth in 0.0f64..1e-2) {
        let p = presets::randomized(u);
        let a = AbsorberParams::from_depth(depth, 1e-3).unwrap();
        let alpha = total_loss(&p, &a, Resonance::On);
        let n = threshold_carrier_density(&p, alpha).unwrap();
        let c = p.config();
        let residual = modal_gain(&p, n) - alpha - c.confinement * c.fca_cross_section * n;
        prop_assert!(residual.abs() <= 8.0 * f64::EPSILON * modal_gain(&p, n));
    }

    #[test]
    fn absorption_lowers_power(u in unit_samples(), depth in 1e-6f64..1e-2, f in 0.01f64..2.0) {
        let p = presets::randomized(u);
        let a = AbsorberParams::from_depth(depth, 1e-3).unwrap();
        let i = f * threshold_current(&p, p.calibration_loss()).unwrap();
        let off = steady_state(&p, &a, i, Resonance::Off).unwrap();
        let on = steady_state(&p, &a, i, Resonance::On).unwrap();
        prop_assert!(on.intracavity_power < off.intracavity_power);
    }

    #[test]
    fn gain_clamps(u in unit_samples(), f in 1.2f64..3.0) {
        let p = presets::randomized(u);
        let a = AbsorberParams::transparent();
        let i = f * threshold_current(&p, p.calibration_loss()).unwrap();
        let n1 = steady_state(&p, &a, i, Resonance::Off).unwrap().carrier_density;
        let n2 = steady_state(&p, &a, 1.5 * i, Resonance::Off).unwrap().carrier_density;
        prop_assert!(rel(n1, n2) < 0.01);
    }

    #[test]
    fn characteristic_is_monotone(u in unit_samples()) {
        let p = presets::randomized(u);
        let ith = threshold_current(&p, p.calibration_loss()).unwrap();
        let currents: Vec<f64> = (0..=100).map(|k| 2.0 * ith * k as f64 / 100.0).collect();
        let curve = characteristic_curve(&p, &presets::calibrated_absorber(), &currents, Resonance::On).unwrap();
        prop_assert!(curve.windows(2).all(|w| w[1].1 >= w[0].1));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn transient_agrees_with_closed_form(u in unit_samples(), f in 0.0f64..2.0) {
        let p = presets::randomized(u);
        let a = presets::calibrated_absorber();
        let i = f * threshold_current(&p, p.calibration_loss()).unwrap();
        let exact = steady_state(&p, &a, i, Resonance::On).unwrap();
        let sim = integrate_transient(&p, &a, i, Resonance::On, (0.0, 0.0), 1e-3, &TransientOptions::default())
            .unwrap()
            .last();
        prop_assert!(rel(sim.power, exact.intracavity_power) < 1e-6, "{} vs {}", sim.power, exact.intracavity_power);
        prop_assert!(rel(sim.density, exact.carrier_density) < 1e-6);
    }
}

#[test]
fn dark_at_zero_current() {
    for p in [presets::synth1(), presets::calibrated()] {
        let op = steady_state(&p, &presets::calibrated_absorber(), 0.0, Resonance::On).unwrap();
        assert_eq!(op.intracavity_power, 0.0);
        assert_eq!(op.output_power, p.config().spont_background);
    }
}

#[test]
fn synth1_slope_is_linear_above_threshold() {
    let p = presets::synth1();
    let a = AbsorberParams::transparent();
    let ith = threshold_current(&p, p.calibration_loss()).unwrap();
    let currents: Vec<f64> = (0..=200).map(|k| 2.0 * ith * k as f64 / 200.0).collect();
    let curve = characteristic_curve(&p, &a, &currents, Resonance::Off).unwrap();
    // Upper 30 % of the curve.
    let upper = &curve[140..];
    let slopes: Vec<f64> = upper
        .windows(2)
        .map(|w| (w[1].1 - w[0].1) / (w[1].0 - w[0].0))
        .collect();
    let mean = slopes.iter().sum::<f64>() / slopes.len() as f64;
    assert!(slopes.iter().all(|s| rel(*s, mean) < 0.01));
}

#[test]
fn transient_from_empty_cavity_at_twice_threshold() {
    let p = presets::synth1();
    let a = presets::synth1_absorber();
    let ith = threshold_current(&p, p.calibration_loss()).unwrap();
    for res in [Resonance::Off, Resonance::On] {
        let exact = steady_state(&p, &a, 2.0 * ith, res).unwrap();
        let tr = integrate_transient(&p, &a, 2.0 * ith, res, (0.0, 0.0), 1e-3, &TransientOptions::default()).unwrap();
        assert!(tr.stationary);
        assert!(rel(tr.last().power, exact.intracavity_power) < 1e-6);
        assert!(rel(tr.last().density, exact.carrier_density) < 1e-6);
    }
}
