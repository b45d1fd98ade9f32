//! The LHS probability bound
//!
//! `Delta = min_LHS max_i |P^LHS_i - P^QM_i|`
//!
//! computed by minimizing the `l_n` norm `(sum_i v_i^n)^(1/n)` of the gap
//! vector over ensembles of pure hidden states with a fixed deterministic
//! response assignment (one hidden state per response string), and then
//! reading off the exact maximum gap at the minimizer.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};
use std::fmt;
use std::io::Write;
use std::str::FromStr;
use std::time::Instant;

use nalgebra::Vector3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::lhs::{lhs_probabilities, HiddenState, HiddenStateEnsemble, ResponseString, SteeringScenario};
use crate::nelder_mead::{Minimum, NelderMead};
use crate::quantum::{QubitState, TwoQubitState};
use crate::{Error, Result};

/// Exponent of the `l_n` relaxation used unless configured otherwise.
pub const DEFAULT_EXPONENT: u32 = 46;

/// Bound reported for the trapped-ion Bell state of fidelity 99.3%; the
/// underlying density matrix was never specified.
pub const REPORTED_ION_DELTA: f64 = 0.0732;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    /// `cos(theta)|00> + sin(theta)|11>`
    Pure,
    /// `cos^2(theta)|psi+><psi+| + sin^2(theta)|phi+><phi+|`
    Mixed,
}

impl Family {
    pub fn state(self, theta: f64) -> Result<TwoQubitState> {
        match self {
            Family::Pure => TwoQubitState::pure_family(theta),
            Family::Mixed => TwoQubitState::mixed_family(theta),
        }
    }

    pub fn scenario(self, theta: f64) -> SteeringScenario {
        match self {
            Family::Pure => SteeringScenario::pure_family(theta),
            Family::Mixed => SteeringScenario::mixed_family(),
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Family::Pure => "pure",
            Family::Mixed => "mixed",
        })
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pure" => Ok(Family::Pure),
            "mixed" => Ok(Family::Mixed),
            other => Err(Error::InvalidParameter(format!(
                "unknown family `{other}` (expected pure or mixed)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    pub n_exponent: u32,
    pub restarts: usize,
    /// Simplex convergence threshold on the relaxed objective.
    pub tol: f64,
    pub max_evals: usize,
    /// Pure hidden states in the parametrization; strings are assigned
    /// cyclically, so 4 covers every string for two settings.
    pub hidden_states: usize,
    /// Extra simplex restarts from the best point of each run.
    pub polish_rounds: usize,
    pub seed: u64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            n_exponent: DEFAULT_EXPONENT,
            restarts: 200,
            tol: 1e-14,
            max_evals: 20_000,
            hidden_states: 4,
            polish_rounds: 3,
            seed: 0,
        }
    }
}

impl OptimizerConfig {
    fn validate(&self) -> Result<()> {
        if self.n_exponent < 2 || self.n_exponent % 2 != 0 {
            return Err(Error::InvalidParameter(format!(
                "exponent n = {} must be an even integer >= 2",
                self.n_exponent
            )));
        }
        if self.restarts == 0 {
            return Err(Error::InvalidParameter("restarts must be positive".into()));
        }
        if self.hidden_states == 0 {
            return Err(Error::InvalidParameter(
                "at least one hidden state is required".into(),
            ));
        }
        if !(self.tol > 0.0) {
            return Err(Error::InvalidParameter(format!("tolerance {}", self.tol)));
        }
        Ok(())
    }
}

/// How optimizer parameters map onto an ensemble of pure hidden states.
///
/// Parameters are `k` polar angles, `k` azimuths and `k - 1` hyperspherical
/// angles `b_j` giving weights `cos^2 b_1`, `sin^2 b_1 cos^2 b_2`, ...,
/// `prod_j sin^2 b_j`, which always lie on the probability simplex.
#[derive(Debug, Clone, PartialEq)]
pub struct HiddenStateLayout {
    strings: Vec<ResponseString>,
    n_settings: usize,
}

impl HiddenStateLayout {
    /// `k` hidden states with strings `0, 1, ..., 2^N - 1, 0, 1, ...`.
    pub fn cyclic(k: usize, n_settings: usize) -> Self {
        let m = 1u32 << n_settings;
        let strings = (0..k)
            .map(|i| ResponseString::new(i as u32 % m, n_settings))
            .collect();
        Self {
            strings,
            n_settings,
        }
    }

    pub fn strings(&self) -> &[ResponseString] {
        &self.strings
    }

    pub fn len(&self) -> usize {
        self.strings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.strings.is_empty()
    }

    pub fn dim(&self) -> usize {
        3 * self.len() - 1
    }

    pub fn weights(&self, params: &[f64]) -> Vec<f64> {
        let k = self.len();
        let mut weights = Vec::with_capacity(k);
        let mut remaining = 1.0;
        for &b in &params[2 * k..3 * k - 1] {
            let (s, c) = b.sin_cos();
            weights.push(remaining * c * c);
            remaining *= s * s;
        }
        weights.push(remaining);
        weights
    }

    pub fn blochs(&self, params: &[f64]) -> Vec<Vector3<f64>> {
        let k = self.len();
        (0..k)
            .map(|i| QubitState::from_angles(params[i], params[k + i]).bloch())
            .collect()
    }

    /// The ensemble described by `params`; zero-weight states are dropped.
    pub fn model(&self, params: &[f64]) -> HiddenStateEnsemble {
        let weights = self.weights(params);
        let blochs = self.blochs(params);
        let keep: Vec<usize> = (0..self.len()).filter(|&i| weights[i] > 0.0).collect();
        let entries = keep
            .iter()
            .map(|&i| HiddenState {
                weight: weights[i],
                state: QubitState::from_bloch(blochs[i]).expect("unit vector"),
            })
            .collect();
        let response = (0..self.n_settings)
            .map(|s| {
                keep.iter()
                    .map(|&i| if self.strings[i].outcome(s) == 0 { 1.0 } else { 0.0 })
                    .collect()
            })
            .collect();
        HiddenStateEnsemble::new(entries, response).expect("parametrized ensemble is valid")
    }
}

/// `(sum_i v_i^n)^(1/n)`, scaled by the largest entry so high exponents neither
/// underflow nor overflow.
pub fn smoothed_max(gaps: &[f64], n: u32) -> f64 {
    let m = gaps.iter().fold(0.0f64, |a, &v| a.max(v.abs()));
    if m == 0.0 {
        return 0.0;
    }
    let s: f64 = gaps.iter().map(|v| (v.abs() / m).powi(n as i32)).sum();
    m * s.powf(1.0 / n as f64)
}

/// One instance of the minimax problem: target probabilities, tests and the
/// hidden-state layout being optimized.
#[derive(Debug, Clone)]
pub struct DeltaProblem {
    scenario: SteeringScenario,
    qm: Vec<f64>,
    layout: HiddenStateLayout,
    test_vectors: Vec<Vector3<f64>>,
    // members[t][i]: does hidden state i answer the outcome test t conditions on?
    members: Vec<Vec<bool>>,
}

impl DeltaProblem {
    pub fn new(state: &TwoQubitState, scenario: SteeringScenario, hidden_states: usize) -> Self {
        let qm = scenario.qm_probabilities(state);
        let layout = HiddenStateLayout::cyclic(hidden_states, scenario.settings().len());
        let test_vectors = scenario.tests().iter().map(|t| t.projector.bloch()).collect();
        let members = scenario
            .tests()
            .iter()
            .map(|t| {
                layout
                    .strings
                    .iter()
                    .map(|s| s.outcome(t.setting) == t.outcome)
                    .collect()
            })
            .collect();
        Self {
            scenario,
            qm,
            layout,
            test_vectors,
            members,
        }
    }

    pub fn for_family(theta: f64, family: Family, hidden_states: usize) -> Result<Self> {
        Ok(Self::new(
            &family.state(theta)?,
            family.scenario(theta),
            hidden_states,
        ))
    }

    pub fn scenario(&self) -> &SteeringScenario {
        &self.scenario
    }

    pub fn qm_probabilities(&self) -> &[f64] {
        &self.qm
    }

    pub fn layout(&self) -> &HiddenStateLayout {
        &self.layout
    }

    /// `v_i = |P^LHS_i - P^QM_i|`, evaluated in Bloch form.
    pub fn gaps(&self, params: &[f64]) -> Vec<f64> {
        let weights = self.layout.weights(params);
        let blochs = self.layout.blochs(params);
        self.test_vectors
            .iter()
            .zip(&self.members)
            .zip(&self.qm)
            .map(|((t, members), q)| {
                let p: f64 = members
                    .iter()
                    .zip(&weights)
                    .zip(&blochs)
                    .filter(|((&m, _), _)| m)
                    .map(|((_, w), r)| w * (1.0 + r.dot(t)) / 2.0)
                    .sum();
                (p - q).abs()
            })
            .collect()
    }

    /// `F_n = sum_i v_i^n`.
    pub fn objective(&self, params: &[f64], n: u32) -> f64 {
        self.gaps(params).iter().map(|v| v.powi(n as i32)).sum()
    }

    /// `(F_n)^(1/n)`.
    pub fn smoothed(&self, params: &[f64], n: u32) -> f64 {
        smoothed_max(&self.gaps(params), n)
    }
}

/// `F_n` for the given parameters.
pub fn objective_fn(params: &[f64], problem: &DeltaProblem, n: u32) -> f64 {
    problem.objective(params, n)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeltaReport {
    pub theta: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub family: Option<Family>,
    pub delta: f64,
    /// `(F_n)^(1/n)` at the minimizer, for diagnostics only.
    pub smoothed: f64,
    pub optimal_model: HiddenStateEnsemble,
    pub n_exponent: u32,
    pub restarts: usize,
    pub per_test_gaps: Vec<f64>,
    pub qm_probabilities: Vec<f64>,
    pub lhs_probabilities: Vec<f64>,
    pub oracle_delta: Option<f64>,
    pub converged: bool,
    pub evaluations: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_time: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SteeringVerdict {
    pub delta: f64,
    pub epsilon: f64,
    pub steerable_detectable: bool,
}

impl SteeringVerdict {
    /// Steering is certified when the bound exceeds the experimental precision.
    pub fn new(delta: f64, epsilon: f64) -> Self {
        Self {
            delta,
            epsilon,
            steerable_detectable: delta > epsilon,
        }
    }
}

struct RestartOutcome {
    minimum: Minimum,
    delta: f64,
    smoothed: f64,
    evals: usize,
}

fn run_restart(problem: &DeltaProblem, config: &OptimizerConfig, index: usize) -> RestartOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(index as u64);
    let k = problem.layout.len();
    let x0: Vec<f64> = (0..problem.layout.dim())
        .map(|i| {
            if i < k {
                rng.gen_range(0.0..PI)
            } else if i < 2 * k {
                rng.gen_range(0.0..2.0 * PI)
            } else {
                rng.gen_range(0.0..FRAC_PI_2)
            }
        })
        .collect();

    let nm = NelderMead {
        initial_step: 0.3,
        f_tol: config.tol,
        x_tol: 1e-9,
        max_evals: config.max_evals,
    };
    let n = config.n_exponent;
    let f = |x: &[f64]| problem.smoothed(x, n);
    let mut best = nm.minimize(f, &x0);
    let mut evals = best.evals;
    for _ in 0..config.polish_rounds {
        let again = nm.minimize(f, &best.x);
        evals += again.evals;
        if again.value < best.value {
            best = again;
        } else {
            best.converged |= again.converged;
            break;
        }
    }
    let gaps = problem.gaps(&best.x);
    RestartOutcome {
        delta: gaps.iter().cloned().fold(0.0, f64::max),
        smoothed: best.value,
        minimum: best,
        evals,
    }
}

/// Multistart minimization of `(F_n)^(1/n)`. Restarts run in parallel with
/// independent random streams; the winner is the smallest exact maximum gap,
/// then the smallest relaxed value, then the lowest restart index.
pub fn optimize(problem: &DeltaProblem, theta: f64, config: &OptimizerConfig) -> Result<DeltaReport> {
    config.validate()?;
    let start = Instant::now();
    let outcomes: Vec<RestartOutcome> = (0..config.restarts)
        .into_par_iter()
        .map(|i| run_restart(problem, config, i))
        .collect();
    let evaluations = outcomes.iter().map(|o| o.evals).sum();
    let best = outcomes
        .into_iter()
        .enumerate()
        .min_by(|(i, a), (j, b)| {
            a.delta
                .total_cmp(&b.delta)
                .then(a.smoothed.total_cmp(&b.smoothed))
                .then(i.cmp(j))
        })
        .map(|(_, o)| o)
        .expect("at least one restart");

    let model = problem.layout.model(&best.minimum.x);
    let lhs = lhs_probabilities(&model, &problem.scenario)?;
    let gaps: Vec<f64> = lhs
        .iter()
        .zip(&problem.qm)
        .map(|(p, q)| (p - q).abs())
        .collect();
    let delta = gaps.iter().cloned().fold(0.0, f64::max);
    log::debug!(
        "theta={theta:.6} delta={delta:.9} smoothed={:.9} evals={evaluations}",
        best.smoothed
    );
    Ok(DeltaReport {
        theta,
        family: None,
        delta,
        smoothed: best.smoothed,
        optimal_model: model,
        n_exponent: config.n_exponent,
        restarts: config.restarts,
        per_test_gaps: gaps,
        qm_probabilities: problem.qm.clone(),
        lhs_probabilities: lhs,
        oracle_delta: None,
        converged: best.minimum.converged,
        evaluations,
        wall_time: Some(start.elapsed().as_secs_f64()),
    })
}

/// Δ for a member of one of the two state families, tested with that
/// family's projectors.
pub fn optimize_delta(theta: f64, family: Family, config: &OptimizerConfig) -> Result<DeltaReport> {
    let problem = DeltaProblem::for_family(theta, family, config.hidden_states)?;
    let mut report = optimize(&problem, theta, config)?;
    report.family = Some(family);
    Ok(report)
}

/// Δ for an arbitrary state under the given tests.
pub fn optimize_state(
    state: &TwoQubitState,
    scenario: &SteeringScenario,
    theta: f64,
    config: &OptimizerConfig,
) -> Result<DeltaReport> {
    let problem = DeltaProblem::new(state, scenario.clone(), config.hidden_states);
    optimize(&problem, theta, config)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleConfig {
    /// Grid points per angle: polar step `pi/R`, azimuth step `2 pi/R`, and
    /// weights on the simplex lattice with denominator `R`.
    pub resolution: usize,
    pub samples: usize,
    /// Number of best samples refined by grid-local descent.
    pub descents: usize,
    pub seed: u64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self {
            resolution: 24,
            samples: 1_000_000,
            descents: 32,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleResult {
    pub delta: f64,
    pub model: HiddenStateEnsemble,
    pub evaluations: usize,
}

#[derive(Clone, PartialEq, Eq)]
struct GridPoint {
    dirs: Vec<usize>,
    weights: Vec<u32>,
}

struct Grid<'a> {
    resolution: usize,
    n_dirs: usize,
    // table[d][t] = Tr[test_t rho_d] for grid direction d
    table: Vec<Vec<f64>>,
    members: Vec<Vec<bool>>,
    qm: &'a [f64],
}

impl Grid<'_> {
    fn direction(&self, d: usize) -> QubitState {
        let r = self.resolution;
        let (k, j) = (d / r, d % r);
        QubitState::from_angles(k as f64 * PI / r as f64, j as f64 * 2.0 * PI / r as f64)
    }

    fn value(&self, p: &GridPoint) -> f64 {
        let scale = 1.0 / self.resolution as f64;
        self.members
            .iter()
            .enumerate()
            .map(|(t, members)| {
                let prob: f64 = members
                    .iter()
                    .enumerate()
                    .filter(|(_, &m)| m)
                    .map(|(i, _)| p.weights[i] as f64 * scale * self.table[p.dirs[i]][t])
                    .sum();
                (prob - self.qm[t]).abs()
            })
            .fold(0.0, f64::max)
    }

    fn random_point<R: Rng>(&self, rng: &mut R, k: usize) -> GridPoint {
        let dirs = (0..k).map(|_| rng.gen_range(0..self.n_dirs)).collect();
        let r = self.resolution as u32;
        let mut cuts: Vec<u32> = (0..k - 1).map(|_| rng.gen_range(0..=r)).collect();
        cuts.sort_unstable();
        let mut weights = Vec::with_capacity(k);
        let mut prev = 0;
        for c in cuts {
            weights.push(c - prev);
            prev = c;
        }
        weights.push(r - prev);
        GridPoint { dirs, weights }
    }

    fn neighbours(&self, p: &GridPoint) -> Vec<GridPoint> {
        let r = self.resolution;
        let k = p.dirs.len();
        let mut out = Vec::new();
        for i in 0..k {
            let (pk, aj) = (p.dirs[i] / r, p.dirs[i] % r);
            let moves = [
                (pk.checked_sub(1), Some(aj)),
                (if pk < r { Some(pk + 1) } else { None }, Some(aj)),
                (Some(pk), Some((aj + r - 1) % r)),
                (Some(pk), Some((aj + 1) % r)),
            ];
            for (nk, nj) in moves {
                if let (Some(nk), Some(nj)) = (nk, nj) {
                    let mut q = p.clone();
                    q.dirs[i] = nk * r + nj;
                    out.push(q);
                }
            }
        }
        for from in 0..k {
            for to in 0..k {
                if from != to && p.weights[from] > 0 {
                    let mut q = p.clone();
                    q.weights[from] -= 1;
                    q.weights[to] += 1;
                    out.push(q);
                }
            }
        }
        out
    }
}

/// Coarse upper bound on Δ from a grid of hidden-state ensembles: random
/// sampling of the grid followed by grid-local descent on the exact maximum
/// gap. Independent of the simplex optimizer and of the relaxation; each
/// probability comes from a 2x2 matrix trace.
pub fn grid_oracle(
    state: &TwoQubitState,
    scenario: &SteeringScenario,
    config: &OracleConfig,
) -> Result<OracleResult> {
    if config.resolution < 2 || config.samples == 0 {
        return Err(Error::InvalidParameter(
            "oracle needs resolution >= 2 and at least one sample".into(),
        ));
    }
    let qm = scenario.qm_probabilities(state);
    let n_settings = scenario.settings().len();
    let strings: Vec<ResponseString> = ResponseString::all(n_settings).collect();
    let k = strings.len();
    let r = config.resolution;
    let n_dirs = (r + 1) * r;

    let mut grid = Grid {
        resolution: r,
        n_dirs,
        table: Vec::new(),
        members: scenario
            .tests()
            .iter()
            .map(|t| strings.iter().map(|s| s.outcome(t.setting) == t.outcome).collect())
            .collect(),
        qm: &qm,
    };
    grid.table = (0..n_dirs)
        .map(|d| {
            let rho = grid.direction(d).matrix();
            scenario
                .tests()
                .iter()
                .map(|t| (t.projector.matrix() * rho).trace().re)
                .collect()
        })
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let keep = config.descents.max(1);
    let mut top: Vec<(f64, GridPoint)> = Vec::with_capacity(keep + 1);
    let mut evaluations = 0;
    for _ in 0..config.samples {
        let p = grid.random_point(&mut rng, k);
        let v = grid.value(&p);
        evaluations += 1;
        if top.len() < keep || v < top[top.len() - 1].0 {
            let pos = top.partition_point(|(u, _)| *u <= v);
            if !top.iter().any(|(_, q)| *q == p) {
                top.insert(pos, (v, p));
                top.truncate(keep);
            }
        }
    }

    let mut best: Option<(f64, GridPoint)> = None;
    for (mut value, mut point) in top {
        loop {
            let mut improved = false;
            for q in grid.neighbours(&point) {
                let v = grid.value(&q);
                evaluations += 1;
                if v < value {
                    value = v;
                    point = q;
                    improved = true;
                }
            }
            if !improved {
                break;
            }
        }
        if best.as_ref().map_or(true, |(b, _)| value < *b) {
            best = Some((value, point));
        }
    }
    let (_, point) = best.expect("at least one sample");

    let entries: Vec<(usize, HiddenState)> = (0..k)
        .filter(|&i| point.weights[i] > 0)
        .map(|i| {
            (
                i,
                HiddenState {
                    weight: point.weights[i] as f64 / r as f64,
                    state: grid.direction(point.dirs[i]),
                },
            )
        })
        .collect();
    let response = (0..n_settings)
        .map(|s| {
            entries
                .iter()
                .map(|(i, _)| if strings[*i].outcome(s) == 0 { 1.0 } else { 0.0 })
                .collect()
        })
        .collect();
    let model = HiddenStateEnsemble::new(entries.into_iter().map(|(_, e)| e).collect(), response)?;
    let lhs = lhs_probabilities(&model, scenario)?;
    let delta = lhs
        .iter()
        .zip(&qm)
        .map(|(p, q)| (p - q).abs())
        .fold(0.0, f64::max);
    Ok(OracleResult {
        delta,
        model,
        evaluations,
    })
}

pub fn grid_oracle_family(theta: f64, family: Family, config: &OracleConfig) -> Result<OracleResult> {
    grid_oracle(&family.state(theta)?, &family.scenario(theta), config)
}

/// `points` equally spaced angles in `[lo, hi]`; a single point sits at `lo`.
pub fn theta_grid(points: usize, lo: f64, hi: f64) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..points)
            .map(|i| lo + (hi - lo) * i as f64 / (points - 1) as f64)
            .collect(),
    }
}

/// One Δ report per angle, optionally cross-checked by the grid oracle.
pub fn sweep(
    family: Family,
    thetas: &[f64],
    config: &OptimizerConfig,
    oracle: Option<&OracleConfig>,
) -> Result<Vec<DeltaReport>> {
    if thetas.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidParameter(
            "theta grid must be strictly increasing".into(),
        ));
    }
    thetas
        .iter()
        .map(|&theta| {
            let mut report = optimize_delta(theta, family, config)?;
            if let Some(oc) = oracle {
                report.oracle_delta = Some(grid_oracle_family(theta, family, oc)?.delta);
            }
            Ok(report)
        })
        .collect()
}

/// Twelve significant digits.
pub fn format_value(x: f64) -> String {
    format!("{x:.11e}")
}

/// CSV with columns `theta,delta,oracle_delta,n,restarts,converged`.
pub fn write_sweep_csv<W: Write>(reports: &[DeltaReport], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["theta", "delta", "oracle_delta", "n", "restarts", "converged"])?;
    for r in reports {
        w.write_record([
            format_value(r.theta),
            format_value(r.delta),
            r.oracle_delta.map(format_value).unwrap_or_default(),
            r.n_exponent.to_string(),
            r.restarts.to_string(),
            r.converged.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergencePoint {
    pub theta: f64,
    pub n: u32,
    pub delta: f64,
    pub smoothed: f64,
}

/// Δ as a function of the relaxation exponent.
pub fn convergence_study(
    theta: f64,
    family: Family,
    n_values: &[u32],
    config: &OptimizerConfig,
) -> Result<Vec<ConvergencePoint>> {
    n_values
        .iter()
        .map(|&n| {
            let cfg = OptimizerConfig {
                n_exponent: n,
                ..*config
            };
            let r = optimize_delta(theta, family, &cfg)?;
            Ok(ConvergencePoint {
                theta,
                n,
                delta: r.delta,
                smoothed: r.smoothed,
            })
        })
        .collect()
}

/// CSV with columns `theta,n,delta`.
pub fn write_convergence_csv<W: Write>(points: &[ConvergencePoint], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["theta", "n", "delta"])?;
    for p in points {
        w.write_record([format_value(p.theta), p.n.to_string(), format_value(p.delta)])?;
    }
    w.flush()?;
    Ok(())
}

/// Candidate density matrices for a noisy trapped-ion Bell state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "kebab-case")]
pub enum IonStateModel {
    /// `V|psi+><psi+| + (1 - V) 1/4`.
    Werner { visibility: f64 },
    /// Several noise models, each tuned to the given Bell-state fidelity.
    FidelitySearch { fidelity: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IonCandidate {
    pub name: String,
    pub parameter: f64,
    pub bell_fidelity: f64,
    pub delta: f64,
    pub per_test_gaps: Vec<f64>,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IonBoundReport {
    pub model: IonStateModel,
    pub candidates: Vec<IonCandidate>,
    pub reference_delta: f64,
    pub reference_note: String,
}

fn ion_candidates(model: IonStateModel) -> Result<Vec<(String, f64, TwoQubitState)>> {
    match model {
        IonStateModel::Werner { visibility } => Ok(vec![(
            "werner".into(),
            visibility,
            TwoQubitState::werner(visibility)?,
        )]),
        IonStateModel::FidelitySearch { fidelity } => {
            if !(0.5..=1.0).contains(&fidelity) {
                return Err(Error::InvalidParameter(format!(
                    "fidelity {fidelity} outside [0.5, 1]"
                )));
            }
            let bell = TwoQubitState::bell_psi_plus();
            let visibility = (4.0 * fidelity - 1.0) / 3.0;
            // (1 + sin 2t)/2 = F on the branch t <= pi/4
            let tilt = (2.0 * fidelity - 1.0).asin() / 2.0;
            let bit_flip = fidelity.sqrt().acos();
            Ok(vec![
                ("werner".into(), visibility, TwoQubitState::werner(visibility)?),
                ("pure-tilt".into(), tilt, TwoQubitState::pure_family(tilt)?),
                ("bit-flip".into(), bit_flip, TwoQubitState::mixed_family(bit_flip)?),
                (
                    "phase-flip".into(),
                    fidelity,
                    TwoQubitState::mixture(fidelity, &bell, &TwoQubitState::bell_psi_minus())?,
                ),
            ])
        }
    }
}

/// Δ for candidate models of the ion-trap Bell state, all tested with the
/// Bell-state projectors.
pub fn ion_bound(model: IonStateModel, config: &OptimizerConfig) -> Result<IonBoundReport> {
    let scenario = SteeringScenario::pure_family(FRAC_PI_4);
    let candidates = ion_candidates(model)?
        .into_iter()
        .map(|(name, parameter, state)| {
            let r = optimize_state(&state, &scenario, FRAC_PI_4, config)?;
            Ok(IonCandidate {
                name,
                parameter,
                bell_fidelity: state.bell_fidelity(),
                delta: r.delta,
                per_test_gaps: r.per_test_gaps,
                converged: r.converged,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(IonBoundReport {
        model,
        candidates,
        reference_delta: REPORTED_ION_DELTA,
        reference_note: "published value; underlying state model unspecified".into(),
    })
}
