//! Local-hidden-state (LHS) models.
//!
//! An ensemble `{p_xi rho_xi}` together with a response table
//! `p(a = 0 | A, xi)` predicts Bob's conditional states as
//! `sum_xi p(a | A, xi) p_xi rho_xi`. Deterministic models (responses in
//! `{0, 1}`) are the normal form: every model decomposes into one, and a
//! deterministic model for `N` settings collapses to at most `2^N` hidden
//! states by replacing each group of equal response strings with its
//! weighted Bloch centroid.

use std::collections::BTreeMap;

use nalgebra::{Matrix2, Vector3};
use serde::{Deserialize, Serialize};

use crate::quantum::{
    conditional_state, project_probability, MeasurementSetting, QubitState,
    TwoQubitState, UnnormalizedQubitState,
};
use crate::{Error, Result, C64};

/// Tolerance on the total weight of an ensemble.
pub const WEIGHT_TOL: f64 = 1e-12;

/// Entries lighter than this are dropped by [`deterministic_decomposition`].
pub const PRUNE_WEIGHT: f64 = 1e-15;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HiddenState {
    pub weight: f64,
    #[serde(rename = "bloch")]
    pub state: QubitState,
}

#[derive(Deserialize)]
struct RawEnsemble {
    entries: Vec<HiddenState>,
    response: Vec<Vec<f64>>,
}

/// Weighted hidden states plus the stochastic response map.
///
/// `response[s][k]` is the probability that Alice announces outcome `0` for
/// setting `s` when the hidden variable is `k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawEnsemble")]
pub struct HiddenStateEnsemble {
    entries: Vec<HiddenState>,
    response: Vec<Vec<f64>>,
}

impl TryFrom<RawEnsemble> for HiddenStateEnsemble {
    type Error = Error;

    fn try_from(raw: RawEnsemble) -> Result<Self> {
        Self::new(raw.entries, raw.response)
    }
}

impl HiddenStateEnsemble {
    pub fn new(entries: Vec<HiddenState>, response: Vec<Vec<f64>>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::InvalidEnsemble("no hidden states".into()));
        }
        if let Some(e) = entries.iter().find(|e| !(e.weight > 0.0)) {
            return Err(Error::InvalidEnsemble(format!(
                "non-positive weight {}",
                e.weight
            )));
        }
        let total: f64 = entries.iter().map(|e| e.weight).sum();
        if (total - 1.0).abs() > WEIGHT_TOL {
            return Err(Error::InvalidEnsemble(format!("weights sum to {total}")));
        }
        for (s, row) in response.iter().enumerate() {
            if row.len() != entries.len() {
                return Err(Error::DimensionMismatch(format!(
                    "response row {s} has {} values for {} hidden states",
                    row.len(),
                    entries.len()
                )));
            }
            if let Some(p) = row.iter().find(|p| !(0.0..=1.0).contains(*p)) {
                return Err(Error::InvalidEnsemble(format!(
                    "response probability {p} outside [0, 1]"
                )));
            }
        }
        Ok(Self { entries, response })
    }

    pub fn entries(&self) -> &[HiddenState] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn n_settings(&self) -> usize {
        self.response.len()
    }

    pub fn response_table(&self) -> &[Vec<f64>] {
        &self.response
    }

    /// `p(outcome | setting, entry)`.
    pub fn response(&self, setting: usize, entry: usize, outcome: u8) -> f64 {
        let p0 = self.response[setting][entry];
        if outcome == 0 {
            p0
        } else {
            1.0 - p0
        }
    }

    pub fn is_deterministic(&self) -> bool {
        self.response
            .iter()
            .flatten()
            .all(|&p| p == 0.0 || p == 1.0)
    }

    /// `sum_xi p(outcome | setting, xi) p_xi rho_xi`.
    pub fn conditional_state(&self, setting: usize, outcome: u8) -> Matrix2<C64> {
        self.entries
            .iter()
            .enumerate()
            .fold(Matrix2::zeros(), |acc, (k, e)| {
                acc + e.state.matrix() * C64::new(self.response(setting, k, outcome) * e.weight, 0.0)
            })
    }

    /// Bob's reduced state `sum_xi p_xi rho_xi`.
    pub fn average_state(&self) -> Matrix2<C64> {
        self.entries.iter().fold(Matrix2::zeros(), |acc, e| {
            acc + e.state.matrix() * C64::new(e.weight, 0.0)
        })
    }
}

/// Alice's outcomes for all `N` settings packed into an integer; setting `i`
/// (0-based) sits at bit `N - 1 - i`, so the value plus one is the index
/// `m_a = sum_i 2^(N-i) a_i + 1` of the 1-based convention.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ResponseString {
    bits: u32,
    n_settings: u8,
}

impl ResponseString {
    pub fn new(bits: u32, n_settings: usize) -> Self {
        assert!(n_settings <= 31, "at most 31 settings are supported");
        assert!(bits < (1 << n_settings), "bit string longer than {n_settings}");
        Self {
            bits,
            n_settings: n_settings as u8,
        }
    }

    pub fn from_outcomes(outcomes: &[u8]) -> Self {
        let bits = outcomes
            .iter()
            .fold(0u32, |acc, &a| (acc << 1) | u32::from(a & 1));
        Self::new(bits, outcomes.len())
    }

    pub fn outcome(&self, setting: usize) -> u8 {
        ((self.bits >> (self.n_settings as usize - 1 - setting)) & 1) as u8
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn n_settings(&self) -> usize {
        self.n_settings as usize
    }

    /// All `2^N` strings in increasing order.
    pub fn all(n_settings: usize) -> impl Iterator<Item = Self> {
        (0..1u32 << n_settings).map(move |b| Self::new(b, n_settings))
    }
}

/// LHS model whose response map is deterministic; each hidden state carries
/// the string of outcomes Alice announces for it.
#[derive(Debug, Clone, PartialEq)]
pub struct DeterministicEnsemble {
    entries: Vec<HiddenState>,
    strings: Vec<ResponseString>,
    n_settings: usize,
}

impl DeterministicEnsemble {
    pub fn new(
        entries: Vec<HiddenState>,
        strings: Vec<ResponseString>,
        n_settings: usize,
    ) -> Result<Self> {
        if entries.len() != strings.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} hidden states but {} response strings",
                entries.len(),
                strings.len()
            )));
        }
        if let Some(s) = strings.iter().find(|s| s.n_settings() != n_settings) {
            return Err(Error::DimensionMismatch(format!(
                "response string for {} settings in a {n_settings}-setting model",
                s.n_settings()
            )));
        }
        Ok(Self {
            entries,
            strings,
            n_settings,
        })
    }

    /// Converts an ensemble whose responses are exactly 0 or 1.
    pub fn from_ensemble(model: &HiddenStateEnsemble) -> Result<Self> {
        if !model.is_deterministic() {
            return Err(Error::InvalidEnsemble(
                "response map is not deterministic".into(),
            ));
        }
        let n = model.n_settings();
        let strings = (0..model.len())
            .map(|k| {
                let outcomes: Vec<u8> = (0..n)
                    .map(|s| if model.response[s][k] == 1.0 { 0 } else { 1 })
                    .collect();
                ResponseString::from_outcomes(&outcomes)
            })
            .collect();
        Self::new(model.entries.clone(), strings, n)
    }

    pub fn entries(&self) -> &[HiddenState] {
        &self.entries
    }

    pub fn strings(&self) -> &[ResponseString] {
        &self.strings
    }

    pub fn n_settings(&self) -> usize {
        self.n_settings
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Indices of the hidden states in `H^A_a`, those answering `outcome` to `setting`.
    pub fn contributing(&self, setting: usize, outcome: u8) -> impl Iterator<Item = usize> + '_ {
        self.strings
            .iter()
            .enumerate()
            .filter(move |(_, s)| s.outcome(setting) == outcome)
            .map(|(k, _)| k)
    }

    pub fn conditional_state(&self, setting: usize, outcome: u8) -> Matrix2<C64> {
        self.contributing(setting, outcome)
            .fold(Matrix2::zeros(), |acc, k| {
                let e = &self.entries[k];
                acc + e.state.matrix() * C64::new(e.weight, 0.0)
            })
    }

    /// The same model written as a response table of zeros and ones.
    pub fn to_ensemble(&self) -> Result<HiddenStateEnsemble> {
        let response = (0..self.n_settings)
            .map(|s| {
                self.strings
                    .iter()
                    .map(|r| if r.outcome(s) == 0 { 1.0 } else { 0.0 })
                    .collect()
            })
            .collect();
        HiddenStateEnsemble::new(self.entries.clone(), response)
    }
}

/// Splits every hidden state with a non-deterministic response into `2^N`
/// copies of itself, one per outcome string, weighted by
/// `prod_i p(a_i | A_i, k) p_k`. Deterministic entries map to a single copy.
pub fn deterministic_decomposition(model: &HiddenStateEnsemble) -> DeterministicEnsemble {
    let n = model.n_settings();
    let mut entries = Vec::new();
    let mut strings = Vec::new();
    for (k, e) in model.entries.iter().enumerate() {
        let deterministic = (0..n).all(|s| {
            let p = model.response[s][k];
            p == 0.0 || p == 1.0
        });
        if deterministic {
            let outcomes: Vec<u8> = (0..n)
                .map(|s| if model.response[s][k] == 1.0 { 0 } else { 1 })
                .collect();
            entries.push(*e);
            strings.push(ResponseString::from_outcomes(&outcomes));
            continue;
        }
        for string in ResponseString::all(n) {
            let weight = (0..n).fold(e.weight, |w, s| w * model.response(s, k, string.outcome(s)));
            if weight > PRUNE_WEIGHT {
                entries.push(HiddenState {
                    weight,
                    state: e.state,
                });
                strings.push(string);
            }
        }
    }
    DeterministicEnsemble {
        entries,
        strings,
        n_settings: n,
    }
}

/// Merges hidden states sharing a response string into their weighted Bloch
/// centroid. The output holds at most `2^N` entries, ordered by string.
pub fn reduce_to_2n(model: &DeterministicEnsemble) -> DeterministicEnsemble {
    let mut groups: BTreeMap<ResponseString, Vec<&HiddenState>> = BTreeMap::new();
    for (e, s) in model.entries.iter().zip(&model.strings) {
        groups.entry(*s).or_default().push(e);
    }
    let mut entries = Vec::with_capacity(groups.len());
    let mut strings = Vec::with_capacity(groups.len());
    for (s, members) in groups {
        if let [single] = members[..] {
            entries.push(*single);
            strings.push(s);
            continue;
        }
        let weight: f64 = members.iter().map(|e| e.weight).sum();
        let moment: Vector3<f64> = members.iter().map(|e| e.state.bloch() * e.weight).sum();
        let mut centroid = moment / weight;
        // Convex combinations stay in the ball; trim rounding overshoot.
        let norm = centroid.norm();
        if norm > 1.0 {
            centroid /= norm;
        }
        entries.push(HiddenState {
            weight,
            state: QubitState::from_bloch(centroid).expect("centroid lies in the Bloch ball"),
        });
        strings.push(s);
    }
    DeterministicEnsemble {
        entries,
        strings,
        n_settings: model.n_settings,
    }
}

/// Alice's settings and Bob's projective tests. Each test pairs a setting
/// and an outcome of Alice with a pure state Bob projects onto; the QM and
/// LHS probabilities of the steering test are indexed by these tests.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SteeringScenario {
    settings: Vec<MeasurementSetting>,
    tests: Vec<SteeringTest>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SteeringTest {
    pub setting: usize,
    pub outcome: u8,
    pub projector: QubitState,
}

impl SteeringScenario {
    pub fn new(settings: Vec<MeasurementSetting>, tests: Vec<SteeringTest>) -> Result<Self> {
        for t in &tests {
            if t.setting >= settings.len() {
                return Err(Error::DimensionMismatch(format!(
                    "test refers to setting {} of {}",
                    t.setting,
                    settings.len()
                )));
            }
            if t.outcome > 1 {
                return Err(Error::InvalidParameter(format!("outcome {}", t.outcome)));
            }
            if !t.projector.is_pure() {
                return Err(Error::InvalidParameter(
                    "test projector must be a pure state".into(),
                ));
            }
        }
        Ok(Self { settings, tests })
    }

    /// Tests for `cos(theta)|00> + sin(theta)|11>` with settings `z`, `x`:
    /// `|1>` after `z, 0`; `|0>` after `z, 1`; `|psi_perp>` after `x, 0`;
    /// `|phi_perp>` after `x, 1`.
    pub fn pure_family(theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        let re = |x: f64| C64::new(x, 0.0);
        let psi_perp = QubitState::from_ket(re(s), re(-c)).expect("unit ket");
        let phi_perp = QubitState::from_ket(re(s), re(c)).expect("unit ket");
        Self::two_setting(QubitState::one(), QubitState::zero(), psi_perp, phi_perp)
    }

    /// Tests for the Bell-diagonal mixed family: `|1>`, `|0>`, `|->`, `|+>`.
    pub fn mixed_family() -> Self {
        Self::two_setting(
            QubitState::one(),
            QubitState::zero(),
            QubitState::minus(),
            QubitState::plus(),
        )
    }

    fn two_setting(z0: QubitState, z1: QubitState, x0: QubitState, x1: QubitState) -> Self {
        let t = |setting, outcome, projector| SteeringTest {
            setting,
            outcome,
            projector,
        };
        Self {
            settings: vec![MeasurementSetting::z(), MeasurementSetting::x()],
            tests: vec![t(0, 0, z0), t(0, 1, z1), t(1, 0, x0), t(1, 1, x1)],
        }
    }

    pub fn settings(&self) -> &[MeasurementSetting] {
        &self.settings
    }

    pub fn tests(&self) -> &[SteeringTest] {
        &self.tests
    }

    /// `P^QM_i = Tr[test_i * rho~^{A_i, a_i}]`.
    pub fn qm_probabilities(&self, state: &TwoQubitState) -> Vec<f64> {
        self.tests
            .iter()
            .map(|t| {
                let cond = conditional_state(state, &self.settings[t.setting], t.outcome);
                project_probability(&cond, &t.projector)
            })
            .collect()
    }
}

/// `P^LHS_i = Tr[test_i * sum_xi p(a_i | A_i, xi) p_xi rho_xi]`.
pub fn lhs_probabilities(
    model: &HiddenStateEnsemble,
    scenario: &SteeringScenario,
) -> Result<Vec<f64>> {
    if model.n_settings() != scenario.settings.len() {
        return Err(Error::DimensionMismatch(format!(
            "model has responses for {} settings, scenario has {}",
            model.n_settings(),
            scenario.settings.len()
        )));
    }
    Ok(scenario
        .tests
        .iter()
        .map(|t| {
            let cond = model.conditional_state(t.setting, t.outcome);
            (t.projector.matrix() * cond).trace().re
        })
        .collect())
}

/// Violations of the centre-of-mass equations for one `(setting, outcome)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MassCenterResidual {
    pub setting: usize,
    pub outcome: u8,
    /// `|P^A_a - sum_{H^A_a} p_xi|`
    pub scalar: f64,
    /// `|P^A_a r^A_a - sum_{H^A_a} p_xi r_xi|`
    pub vector: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MassCenterReport {
    pub residuals: Vec<MassCenterResidual>,
}

impl MassCenterReport {
    pub fn max(&self) -> f64 {
        self.residuals
            .iter()
            .map(|r| r.scalar.max(r.vector))
            .fold(0.0, f64::max)
    }

    pub fn residual(&self, setting: usize, outcome: u8) -> Option<&MassCenterResidual> {
        self.residuals
            .iter()
            .find(|r| r.setting == setting && r.outcome == outcome)
    }
}

/// Checks whether a deterministic model reproduces the state's conditional
/// states, phrased as total mass and centre of mass of each group `H^A_a`.
pub fn mass_center_check(
    model: &DeterministicEnsemble,
    state: &TwoQubitState,
    scenario: &SteeringScenario,
) -> Result<MassCenterReport> {
    if model.n_settings() != scenario.settings.len() {
        return Err(Error::DimensionMismatch(format!(
            "model has {} settings, scenario has {}",
            model.n_settings(),
            scenario.settings.len()
        )));
    }
    let mut residuals = Vec::new();
    for (s, setting) in scenario.settings.iter().enumerate() {
        for a in 0..2u8 {
            let cond = conditional_state(state, setting, a);
            let (mass, moment) = model.contributing(s, a).fold(
                (0.0, Vector3::zeros()),
                |(m, r), k| {
                    let e = &model.entries[k];
                    (m + e.weight, r + e.state.bloch() * e.weight)
                },
            );
            residuals.push(MassCenterResidual {
                setting: s,
                outcome: a,
                scalar: (cond.norm() - mass).abs(),
                vector: (cond.scaled_bloch() - moment).norm(),
            });
        }
    }
    Ok(MassCenterReport { residuals })
}

/// Largest entrywise difference between the model's and the state's
/// unnormalized conditional states over all settings and outcomes.
pub fn conditional_state_mismatch(
    model: &DeterministicEnsemble,
    state: &TwoQubitState,
    settings: &[MeasurementSetting],
) -> f64 {
    let mut worst: f64 = 0.0;
    for (s, setting) in settings.iter().enumerate() {
        for a in 0..2u8 {
            let cond: UnnormalizedQubitState = conditional_state(state, setting, a);
            let diff = model.conditional_state(s, a) - cond.matrix();
            worst = diff.iter().map(|z| z.norm()).fold(worst, f64::max);
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::*;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::FRAC_PI_4;

    fn max_diff(a: &Matrix2<C64>, b: &Matrix2<C64>) -> f64 {
        (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    #[test]
    fn single_state_model_on_bell_scenario() {
        // One hidden state |0><0| with p(0|z) = 1 and p(0|x) = 1/2.
        let model = HiddenStateEnsemble::new(
            vec![HiddenState {
                weight: 1.0,
                state: QubitState::zero(),
            }],
            vec![vec![1.0], vec![0.5]],
        )
        .unwrap();
        let p = lhs_probabilities(&model, &SteeringScenario::pure_family(FRAC_PI_4)).unwrap();
        assert_abs_diff_eq!(p[0], 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(p[1], 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(p[2], 0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(p[3], 0.25, epsilon = 1e-15);
    }

    #[test]
    fn orthogonal_tests_give_zero() {
        let model = HiddenStateEnsemble::new(
            vec![HiddenState {
                weight: 1.0,
                state: QubitState::zero(),
            }],
            vec![vec![0.3], vec![0.8]],
        )
        .unwrap();
        let one = QubitState::one();
        let t = |setting, outcome| SteeringTest {
            setting,
            outcome,
            projector: one,
        };
        let scenario = SteeringScenario::new(
            vec![MeasurementSetting::z(), MeasurementSetting::x()],
            vec![t(0, 0), t(0, 1), t(1, 0), t(1, 1)],
        )
        .unwrap();
        let p = lhs_probabilities(&model, &scenario).unwrap();
        assert!(p.iter().all(|&x| x.abs() < 1e-15));
    }

    #[test]
    fn uniform_two_state_model_with_z_response() {
        let model = HiddenStateEnsemble::new(
            vec![
                HiddenState {
                    weight: 0.5,
                    state: QubitState::zero(),
                },
                HiddenState {
                    weight: 0.5,
                    state: QubitState::one(),
                },
            ],
            vec![vec![1.0, 0.0], vec![0.5, 0.5]],
        )
        .unwrap();
        let p = lhs_probabilities(&model, &SteeringScenario::pure_family(0.4)).unwrap();
        assert_abs_diff_eq!(p[0], 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(p[1], 0.0, epsilon = 1e-15);
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let model = HiddenStateEnsemble::new(
            vec![HiddenState {
                weight: 1.0,
                state: QubitState::zero(),
            }],
            vec![vec![1.0]],
        )
        .unwrap();
        assert!(matches!(
            lhs_probabilities(&model, &SteeringScenario::mixed_family()),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn invalid_ensembles_are_rejected() {
        let e = |w| HiddenState {
            weight: w,
            state: QubitState::zero(),
        };
        assert!(HiddenStateEnsemble::new(vec![e(0.5), e(0.4)], vec![]).is_err());
        assert!(HiddenStateEnsemble::new(vec![e(1.0), e(0.0)], vec![]).is_err());
        assert!(HiddenStateEnsemble::new(vec![e(1.0)], vec![vec![1.5]]).is_err());
        assert!(HiddenStateEnsemble::new(vec![e(1.0)], vec![vec![0.5, 0.5]]).is_err());
    }

    #[test]
    fn decomposition_of_one_stochastic_state() {
        let (p, q, w) = (0.3, 0.8, 1.0);
        let model = HiddenStateEnsemble::new(
            vec![HiddenState {
                weight: w,
                state: QubitState::plus(),
            }],
            vec![vec![p], vec![q]],
        )
        .unwrap();
        let d = deterministic_decomposition(&model);
        assert_eq!(d.len(), 4);
        let expect = [p * q, p * (1.0 - q), (1.0 - p) * q, (1.0 - p) * (1.0 - q)];
        for (k, e) in d.entries().iter().enumerate() {
            assert_eq!(d.strings()[k].bits(), k as u32);
            assert_abs_diff_eq!(e.weight, expect[k] * w, epsilon = 1e-15);
            assert_eq!(e.state, QubitState::plus());
        }
        // p(a|A,k) p_k rho_k = sum_m p(a|A,k^(m)) p_k^(m) rho_k^(m)
        for s in 0..2 {
            for a in 0..2u8 {
                assert!(max_diff(&model.conditional_state(s, a), &d.conditional_state(s, a)) < 1e-15);
            }
        }
    }

    #[test]
    fn decomposition_fixes_deterministic_models() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let model = random_deterministic_ensemble(&mut rng, 7, 2);
        let d = deterministic_decomposition(&model);
        assert_eq!(d, DeterministicEnsemble::from_ensemble(&model).unwrap());
        assert_eq!(d.to_ensemble().unwrap(), model);
    }

    #[test]
    fn zero_weight_terms_are_pruned() {
        let model = HiddenStateEnsemble::new(
            vec![HiddenState {
                weight: 1.0,
                state: QubitState::zero(),
            }],
            vec![vec![1.0], vec![0.5]],
        )
        .unwrap();
        let d = deterministic_decomposition(&model);
        assert_eq!(d.len(), 2);
        assert!(d.strings().iter().all(|s| s.outcome(0) == 0));
    }

    #[test]
    fn reduction_merges_opposite_vectors() {
        let entries = vec![
            HiddenState {
                weight: 0.5,
                state: QubitState::zero(),
            },
            HiddenState {
                weight: 0.5,
                state: QubitState::one(),
            },
        ];
        let s = ResponseString::from_outcomes(&[0, 1]);
        let d = DeterministicEnsemble::new(entries, vec![s, s], 2).unwrap();
        let r = reduce_to_2n(&d);
        assert_eq!(r.len(), 1);
        assert_abs_diff_eq!(r.entries()[0].weight, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(r.entries()[0].state.bloch().norm(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn reduction_keeps_distinct_strings() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let entries: Vec<HiddenState> = random_weights(&mut rng, 4)
            .into_iter()
            .map(|weight| HiddenState {
                weight,
                state: random_pure_state(&mut rng),
            })
            .collect();
        let strings = ResponseString::all(2).collect();
        let d = DeterministicEnsemble::new(entries, strings, 2).unwrap();
        assert_eq!(reduce_to_2n(&d), d);
    }

    #[test]
    fn reduction_of_twenty_entries_preserves_probabilities() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let model = random_deterministic_ensemble(&mut rng, 20, 2);
        let d = DeterministicEnsemble::from_ensemble(&model).unwrap();
        let r = reduce_to_2n(&d);
        assert!(r.len() <= 4);
        let scenario = SteeringScenario::pure_family(0.7);
        let before = lhs_probabilities(&model, &scenario).unwrap();
        let after = lhs_probabilities(&r.to_ensemble().unwrap(), &scenario).unwrap();
        for (b, a) in before.iter().zip(&after) {
            assert_abs_diff_eq!(b, a, epsilon = 1e-12);
        }
    }

    #[test]
    fn response_string_indexing() {
        let s = ResponseString::from_outcomes(&[1, 0, 1]);
        assert_eq!(s.bits(), 0b101);
        assert_eq!(s.outcome(0), 1);
        assert_eq!(s.outcome(1), 0);
        assert_eq!(s.outcome(2), 1);
        assert_eq!(ResponseString::all(2).count(), 4);
    }

    #[test]
    fn separable_product_state_has_exact_dlhs() {
        let state = TwoQubitState::pure_family(0.0).unwrap();
        let d = DeterministicEnsemble::new(
            vec![HiddenState {
                weight: 1.0,
                state: QubitState::zero(),
            }],
            vec![ResponseString::from_outcomes(&[0, 0])],
            2,
        )
        .unwrap();
        // Alice's x outcome is random for |00>, so a single string cannot
        // reproduce it; split the hidden state over x outcomes instead.
        let model = HiddenStateEnsemble::new(
            vec![HiddenState {
                weight: 1.0,
                state: QubitState::zero(),
            }],
            vec![vec![1.0], vec![0.5]],
        )
        .unwrap();
        let exact = deterministic_decomposition(&model);
        let scenario = SteeringScenario::pure_family(0.0);
        let report = mass_center_check(&exact, &state, &scenario).unwrap();
        assert!(report.max() < 1e-15);
        assert!(mass_center_check(&d, &state, &scenario).unwrap().max() > 0.4);
    }

    #[test]
    fn perturbed_weight_shows_up_in_scalar_residual() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let scenario = SteeringScenario::mixed_family();
        let (state, model) = random_separable_with_model(&mut rng, 3, scenario.settings());
        let d = reduce_to_2n(&deterministic_decomposition(&model));
        assert!(mass_center_check(&d, &state, &scenario).unwrap().max() < 1e-12);

        let mut entries = d.entries().to_vec();
        entries[0].weight += 0.01;
        let string = d.strings()[0];
        let bumped = DeterministicEnsemble::new(entries, d.strings().to_vec(), 2).unwrap();
        let report = mass_center_check(&bumped, &state, &scenario).unwrap();
        for s in 0..2 {
            let a = string.outcome(s);
            assert_abs_diff_eq!(report.residual(s, a).unwrap().scalar, 0.01, epsilon = 1e-12);
            assert!(report.residual(s, 1 - a).unwrap().scalar < 1e-12);
        }
    }

    #[test]
    fn ensemble_json_shape() {
        let model = HiddenStateEnsemble::new(
            vec![HiddenState {
                weight: 1.0,
                state: QubitState::zero(),
            }],
            vec![vec![1.0], vec![0.5]],
        )
        .unwrap();
        let json = serde_json::to_string(&model).unwrap();
        assert_eq!(
            json,
            r#"{"entries":[{"weight":1.0,"bloch":[0.0,0.0,1.0]}],"response":[[1.0],[0.5]]}"#
        );
        let back: HiddenStateEnsemble = serde_json::from_str(&json).unwrap();
        assert_eq!(back, model);
        let bad = r#"{"entries":[{"weight":0.5,"bloch":[0.0,0.0,1.0]}],"response":[]}"#;
        assert!(serde_json::from_str::<HiddenStateEnsemble>(bad).is_err());
    }
}
