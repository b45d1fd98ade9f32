//! Ideal-gate preparation of the logical two-qubit states.
//!
//! Qubits are ordered A, B, C with A the most significant bit of the basis
//! index, matching the two-qubit convention used elsewhere.

use nalgebra::{DMatrix, DVector, Matrix2, Matrix4, Vector2};
use serde::{Deserialize, Serialize};

use crate::quantum::{QubitState, TwoQubitState};
use crate::{Error, Result, C64};

const UNITARY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Gate {
    /// `[[cos t, sin t], [sin t, -cos t]]` on one qubit.
    UTheta { theta: f64, qubit: usize },
    Hadamard { qubit: usize },
    Cnot { control: usize, target: usize },
}

/// `U_theta`, a real reflection: symmetric, unitary and self-inverse.
pub fn u_theta(theta: f64) -> Matrix2<C64> {
    let (s, c) = theta.sin_cos();
    Matrix2::new(
        C64::new(c, 0.0),
        C64::new(s, 0.0),
        C64::new(s, 0.0),
        C64::new(-c, 0.0),
    )
}

pub fn hadamard() -> Matrix2<C64> {
    u_theta(std::f64::consts::FRAC_PI_4)
}

impl Gate {
    fn qubits(&self) -> Vec<usize> {
        match *self {
            Gate::UTheta { qubit, .. } | Gate::Hadamard { qubit } => vec![qubit],
            Gate::Cnot { control, target } => vec![control, target],
        }
    }

    /// Full `2^n x 2^n` matrix of the gate.
    pub fn matrix(&self, n_qubits: usize) -> DMatrix<C64> {
        let dim = 1usize << n_qubits;
        let bit = |q: usize| 1usize << (n_qubits - 1 - q);
        match *self {
            Gate::UTheta { qubit, .. } | Gate::Hadamard { qubit } => {
                let u = match *self {
                    Gate::UTheta { theta, .. } => u_theta(theta),
                    _ => hadamard(),
                };
                let b = bit(qubit);
                DMatrix::from_fn(dim, dim, |r, c| {
                    if r & !b != c & !b {
                        C64::new(0.0, 0.0)
                    } else {
                        u[((r & b != 0) as usize, (c & b != 0) as usize)]
                    }
                })
            }
            Gate::Cnot { control, target } => {
                let (cb, tb) = (bit(control), bit(target));
                DMatrix::from_fn(dim, dim, |r, c| {
                    let image = if c & cb != 0 { c ^ tb } else { c };
                    C64::new((r == image) as u8 as f64, 0.0)
                })
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Circuit {
    n_qubits: usize,
    gates: Vec<Gate>,
}

impl Circuit {
    pub fn new(n_qubits: usize, gates: Vec<Gate>) -> Result<Self> {
        if !(2..=3).contains(&n_qubits) {
            return Err(Error::InvalidCircuit(format!(
                "{n_qubits} qubits (expected 2 or 3)"
            )));
        }
        for g in &gates {
            let qs = g.qubits();
            if qs.iter().any(|&q| q >= n_qubits) {
                return Err(Error::InvalidCircuit(format!("{g:?} out of range")));
            }
            if qs.len() == 2 && qs[0] == qs[1] {
                return Err(Error::InvalidCircuit(format!("{g:?} acts twice on one qubit")));
            }
            let m = g.matrix(n_qubits);
            let dev = (m.adjoint() * &m - DMatrix::identity(m.nrows(), m.ncols())).norm();
            if dev > UNITARY_TOL {
                return Err(Error::InvalidCircuit(format!("{g:?} not unitary ({dev:e})")));
            }
        }
        Ok(Self { n_qubits, gates })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }
}

/// Computational basis state from a label such as `"00"` or `"010"`.
pub fn basis_state(label: &str) -> Result<DVector<C64>> {
    let n = label.len();
    if n == 0 || !label.chars().all(|c| c == '0' || c == '1') {
        return Err(Error::InvalidCircuit(format!("bad basis label `{label}`")));
    }
    let index = usize::from_str_radix(label, 2).expect("binary digits");
    let mut v = DVector::from_element(1 << n, C64::new(0.0, 0.0));
    v[index] = C64::new(1.0, 0.0);
    Ok(v)
}

/// Applies the gates in order to a computational basis state.
pub fn simulate(circuit: &Circuit, initial: &str) -> Result<DVector<C64>> {
    if initial.len() != circuit.n_qubits {
        return Err(Error::InvalidCircuit(format!(
            "initial label `{initial}` does not match {} qubits",
            circuit.n_qubits
        )));
    }
    let mut state = basis_state(initial)?;
    for g in &circuit.gates {
        state = g.matrix(circuit.n_qubits) * state;
    }
    Ok(state)
}

/// Reduced state of qubits A and B of a three-qubit pure state.
pub fn trace_out_ancilla(state: &DVector<C64>) -> Result<TwoQubitState> {
    if state.len() != 8 {
        return Err(Error::DimensionMismatch(format!(
            "expected 8 amplitudes, got {}",
            state.len()
        )));
    }
    let norm = state.norm();
    if (norm - 1.0).abs() > UNITARY_TOL {
        return Err(Error::BadTrace(norm * norm));
    }
    let m = Matrix4::from_fn(|r, c| {
        (0..2)
            .map(|k| state[2 * r + k] * state[2 * c + k].conj())
            .sum::<C64>()
    });
    TwoQubitState::new(m)
}

/// Two-qubit state from a two-qubit circuit output.
pub fn two_qubit_state(state: &DVector<C64>) -> Result<TwoQubitState> {
    if state.len() != 4 {
        return Err(Error::DimensionMismatch(format!(
            "expected 4 amplitudes, got {}",
            state.len()
        )));
    }
    TwoQubitState::from_ket(&nalgebra::Vector4::from_iterator(state.iter().cloned()))
}

/// `U_theta` on A, then CNOT(A -> B); from `|00>` this yields
/// `cos t|00> + sin t|11>`.
pub fn pure_family_circuit(theta: f64) -> Circuit {
    Circuit::new(
        2,
        vec![
            Gate::UTheta { theta, qubit: 0 },
            Gate::Cnot { control: 0, target: 1 },
        ],
    )
    .expect("valid circuit")
}

/// H on A, `U_theta` on C, CNOT(A -> B), CNOT(C -> B); from `|000>` this
/// yields `cos t|psi+>|0> + sin t|phi+>|1>`.
pub fn mixed_family_circuit(theta: f64) -> Circuit {
    Circuit::new(
        3,
        vec![
            Gate::Hadamard { qubit: 0 },
            Gate::UTheta { theta, qubit: 2 },
            Gate::Cnot { control: 0, target: 1 },
            Gate::Cnot { control: 2, target: 1 },
        ],
    )
    .expect("valid circuit")
}

pub fn prepare_pure_family(theta: f64) -> Result<TwoQubitState> {
    two_qubit_state(&simulate(&pure_family_circuit(theta), "00")?)
}

pub fn prepare_mixed_family(theta: f64) -> Result<TwoQubitState> {
    trace_out_ancilla(&simulate(&mixed_family_circuit(theta), "000")?)
}

/// Bob's four test states.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BobTests {
    pub zero: QubitState,
    pub one: QubitState,
    /// `sin t|0> - cos t|1>`
    pub psi_perp: QubitState,
    /// `sin t|0> + cos t|1>`
    pub phi_perp: QubitState,
}

/// `|<a|b>|` for normalized kets, i.e. overlap up to a global phase.
fn overlap(a: &Vector2<C64>, b: &Vector2<C64>) -> f64 {
    a.dotc(b).norm()
}

/// The test states, each checked against its preparation `U_(+-theta)|1>`.
pub fn bob_test_states(theta: f64) -> Result<BobTests> {
    if !(0.0..=std::f64::consts::FRAC_PI_2).contains(&theta) {
        return Err(Error::AngleOutOfRange(theta));
    }
    let (s, c) = theta.sin_cos();
    let one = Vector2::new(C64::new(0.0, 0.0), C64::new(1.0, 0.0));
    let psi_perp = Vector2::new(C64::new(s, 0.0), C64::new(-c, 0.0));
    let phi_perp = Vector2::new(C64::new(s, 0.0), C64::new(c, 0.0));
    for (u, target) in [(u_theta(theta), &psi_perp), (u_theta(-theta), &phi_perp)] {
        let prepared = u * one;
        let dev = (1.0 - overlap(&prepared, target)).abs();
        if dev > UNITARY_TOL {
            return Err(Error::InvalidCircuit(format!(
                "U|1> misses its test state by {dev:e}"
            )));
        }
    }
    Ok(BobTests {
        zero: QubitState::zero(),
        one: QubitState::one(),
        psi_perp: QubitState::from_ket(psi_perp[0], psi_perp[1])?,
        phi_perp: QubitState::from_ket(phi_perp[0], phi_perp[1])?,
    })
}
