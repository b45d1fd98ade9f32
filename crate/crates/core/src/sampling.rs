//! Random states and models for property checks and oracles.

use nalgebra::{Matrix4, Vector3};
use rand::Rng;

use crate::lhs::{HiddenState, HiddenStateEnsemble};
use crate::quantum::{MeasurementSetting, QubitState, TwoQubitState};
use crate::C64;

/// Uniformly distributed point on the unit sphere.
pub fn random_unit_vector<R: Rng + ?Sized>(rng: &mut R) -> Vector3<f64> {
    loop {
        let v = Vector3::new(
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
        );
        let n = v.norm();
        if n > 1e-3 && n <= 1.0 {
            return v / n;
        }
    }
}

pub fn random_pure_state<R: Rng + ?Sized>(rng: &mut R) -> QubitState {
    QubitState::from_bloch(random_unit_vector(rng)).expect("unit vector")
}

/// Uniform in the Bloch ball.
pub fn random_mixed_state<R: Rng + ?Sized>(rng: &mut R) -> QubitState {
    let r: f64 = rng.gen::<f64>().cbrt();
    QubitState::from_bloch(random_unit_vector(rng) * r).expect("inside the ball")
}

pub fn random_setting<R: Rng + ?Sized>(rng: &mut R) -> MeasurementSetting {
    MeasurementSetting::new(random_unit_vector(rng), "random").expect("unit axis")
}

/// Random full-rank two-qubit density matrix `G G^dagger / Tr`.
pub fn random_two_qubit_state<R: Rng + ?Sized>(rng: &mut R) -> TwoQubitState {
    let g = Matrix4::from_fn(|_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
    let m = g * g.adjoint();
    let tr = m.trace();
    let mut m = m / tr;
    m = (m + m.adjoint()) * C64::new(0.5, 0.0);
    TwoQubitState::new(m).expect("Ginibre matrix is a valid state")
}

/// Random weights on the simplex, bounded away from zero.
pub fn random_weights<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|_| rng.gen_range(0.05..1.0)).collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|w| w / total).collect()
}

/// Ensemble with generic stochastic responses.
pub fn random_stochastic_ensemble<R: Rng + ?Sized>(
    rng: &mut R,
    n_entries: usize,
    n_settings: usize,
    pure: bool,
) -> HiddenStateEnsemble {
    let weights = random_weights(rng, n_entries);
    let entries = weights
        .into_iter()
        .map(|weight| HiddenState {
            weight,
            state: if pure {
                random_pure_state(rng)
            } else {
                random_mixed_state(rng)
            },
        })
        .collect();
    let response = (0..n_settings)
        .map(|_| {
            (0..n_entries)
                .map(|_| match rng.gen_range(0..6) {
                    0 => 0.0,
                    1 => 1.0,
                    _ => rng.gen::<f64>(),
                })
                .collect()
        })
        .collect();
    HiddenStateEnsemble::new(entries, response).expect("valid random ensemble")
}

/// Ensemble whose responses are all exactly 0 or 1.
pub fn random_deterministic_ensemble<R: Rng + ?Sized>(
    rng: &mut R,
    n_entries: usize,
    n_settings: usize,
) -> HiddenStateEnsemble {
    let weights = random_weights(rng, n_entries);
    let entries = weights
        .into_iter()
        .map(|weight| HiddenState {
            weight,
            state: random_mixed_state(rng),
        })
        .collect();
    let response = (0..n_settings)
        .map(|_| {
            (0..n_entries)
                .map(|_| if rng.gen_bool(0.5) { 1.0 } else { 0.0 })
                .collect()
        })
        .collect();
    HiddenStateEnsemble::new(entries, response).expect("valid random ensemble")
}

/// A separable state `sum_k p_k sigma_k (x) rho_k` together with the LHS
/// model it induces for the given settings: hidden state `rho_k`, weight
/// `p_k`, response `Tr[P_0 sigma_k]`.
pub fn random_separable_with_model<R: Rng + ?Sized>(
    rng: &mut R,
    n_terms: usize,
    settings: &[MeasurementSetting],
) -> (TwoQubitState, HiddenStateEnsemble) {
    let weights = random_weights(rng, n_terms);
    let alice: Vec<QubitState> = (0..n_terms).map(|_| random_mixed_state(rng)).collect();
    let bob: Vec<QubitState> = (0..n_terms).map(|_| random_mixed_state(rng)).collect();

    let mut m = Matrix4::zeros();
    for k in 0..n_terms {
        m += crate::quantum::kron(&alice[k].matrix(), &bob[k].matrix()) * C64::new(weights[k], 0.0);
    }
    m = (m + m.adjoint()) * C64::new(0.5, 0.0);
    let state = TwoQubitState::new(m).expect("separable state is valid");

    let entries = weights
        .iter()
        .zip(&bob)
        .map(|(&weight, &state)| HiddenState { weight, state })
        .collect();
    let response = settings
        .iter()
        .map(|s| {
            alice
                .iter()
                .map(|a| (1.0 + a.bloch().dot(&s.axis())) / 2.0)
                .map(|p| p.clamp(0.0, 1.0))
                .collect()
        })
        .collect();
    let model = HiddenStateEnsemble::new(entries, response).expect("valid induced model");
    (state, model)
}
