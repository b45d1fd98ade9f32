use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, FRAC_PI_4};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use steering_core::circuits::{prepare_mixed_family, prepare_pure_family};
use steering_core::delta::{ion_bound, optimize_delta, Family, IonStateModel, OptimizerConfig};
use steering_core::lhs::{lhs_probabilities, SteeringScenario};
use steering_core::quantum::{conditional_state, MeasurementSetting, TwoQubitState};
use steering_core::sampling::random_stochastic_ensemble;

#[test]
fn circuits_reproduce_conditional_states() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let settings = [MeasurementSetting::z(), MeasurementSetting::x()];
    for _ in 0..50 {
        let theta = rng.gen_range(0.0..=FRAC_PI_2);
        let pairs = [
            (TwoQubitState::pure_family(theta).unwrap(), prepare_pure_family(theta).unwrap()),
            (TwoQubitState::mixed_family(theta).unwrap(), prepare_mixed_family(theta).unwrap()),
        ];
        for (want, got) in &pairs {
            for s in &settings {
                for a in 0..2 {
                    let d = conditional_state(want, s, a).matrix() - conditional_state(got, s, a).matrix();
                    assert!(d.iter().all(|z| z.norm() < 1e-12), "theta = {theta}");
                }
            }
        }
    }
}

#[test]
fn bell_point_matches_closed_form() {
    let r = optimize_delta(FRAC_PI_4, Family::Pure, &OptimizerConfig::default()).unwrap();
    let exact = (1.0 - FRAC_1_SQRT_2) / 4.0;
    assert!((r.delta - exact).abs() < 1e-6, "{} vs {exact}", r.delta);
    assert!(r.converged);
}

#[test]
fn fifth_hidden_state_does_not_help() {
    let four = OptimizerConfig::default();
    let five = OptimizerConfig {
        hidden_states: 5,
        ..four
    };
    for theta in [0.3, 0.6, 1.0] {
        let a = optimize_delta(theta, Family::Pure, &four).unwrap().delta;
        let b = optimize_delta(theta, Family::Pure, &five).unwrap().delta;
        assert!((a - b).abs() < 1e-6, "theta = {theta}: {a} vs {b}");
    }
}

#[test]
fn lhs_probabilities_match_bloch_formula() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for i in 0..1000 {
        let theta = rng.gen_range(0.0..=FRAC_PI_2);
        let scenario = if i % 2 == 0 {
            SteeringScenario::pure_family(theta)
        } else {
            SteeringScenario::mixed_family()
        };
        let n = rng.gen_range(1..=5);
        let model = random_stochastic_ensemble(&mut rng, n, 2, i % 3 == 0);
        let got = lhs_probabilities(&model, &scenario).unwrap();
        for (t, p) in scenario.tests().iter().zip(&got) {
            let want: f64 = model
                .entries()
                .iter()
                .enumerate()
                .map(|(k, e)| {
                    let r = model.response(t.setting, k, t.outcome);
                    e.weight * r * (1.0 + e.state.bloch().dot(&t.projector.bloch())) / 2.0
                })
                .sum();
            assert!((p - want).abs() < 1e-12);
        }
    }
}

#[test]
fn maximally_mixed_state_has_no_bound() {
    let r = ion_bound(IonStateModel::Werner { visibility: 0.0 }, &OptimizerConfig::default()).unwrap();
    assert!(r.candidates[0].delta < 1e-6, "{}", r.candidates[0].delta);
}

#[test]
fn werner_bound_grows_with_visibility() {
    let cfg = OptimizerConfig::default();
    let deltas: Vec<f64> = [0.6, 0.8, 1.0]
        .iter()
        .map(|&v| ion_bound(IonStateModel::Werner { visibility: v }, &cfg).unwrap().candidates[0].delta)
        .collect();
    assert!(deltas[0] < deltas[1] && deltas[1] < deltas[2], "{deltas:?}");
}
