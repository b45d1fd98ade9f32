//! Small dense quantum-state algebra.
//!
//! Basis ordering is `|00>, |01>, |10>, |11>` with Alice's qubit as the most
//! significant one. `|0>` is the `+1` eigenstate of `sigma_z`.

use std::f64::consts::FRAC_PI_2;

use nalgebra::{Matrix2, Matrix4, Vector3, Vector4};
use serde::{Deserialize, Serialize};

use crate::{Error, Result, C64};

/// Numerical tolerance for the physicality checks on states.
pub const STATE_TOL: f64 = 1e-12;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);
const I: C64 = C64::new(0.0, 1.0);

/// The Pauli matrices `(sigma_x, sigma_y, sigma_z)`.
pub fn pauli() -> [Matrix2<C64>; 3] {
    [
        Matrix2::new(ZERO, ONE, ONE, ZERO),
        Matrix2::new(ZERO, -I, I, ZERO),
        Matrix2::new(ONE, ZERO, ZERO, -ONE),
    ]
}

/// Kronecker product of two 2x2 matrices.
pub fn kron(a: &Matrix2<C64>, b: &Matrix2<C64>) -> Matrix4<C64> {
    Matrix4::from_fn(|r, c| a[(r / 2, c / 2)] * b[(r % 2, c % 2)])
}

/// Partial trace over the first (Alice's) qubit.
pub fn trace_out_first(m: &Matrix4<C64>) -> Matrix2<C64> {
    Matrix2::from_fn(|r, c| m[(r, c)] + m[(r + 2, c + 2)])
}

/// Partial trace over the second (Bob's) qubit.
pub fn trace_out_second(m: &Matrix4<C64>) -> Matrix2<C64> {
    Matrix2::from_fn(|r, c| m[(2 * r, 2 * c)] + m[(2 * r + 1, 2 * c + 1)])
}

/// Bloch vector `s` of a Hermitian 2x2 matrix written as `(t*1 + s.sigma)/2`.
pub fn bloch_components(m: &Matrix2<C64>) -> Vector3<f64> {
    Vector3::new(
        m[(0, 1)].re + m[(1, 0)].re,
        m[(1, 0)].im - m[(0, 1)].im,
        m[(0, 0)].re - m[(1, 1)].re,
    )
}

/// `(trace * 1 + s.sigma) / 2`.
pub fn matrix_from_bloch(trace: f64, s: &Vector3<f64>) -> Matrix2<C64> {
    Matrix2::new(
        C64::new((trace + s.z) / 2.0, 0.0),
        C64::new(s.x / 2.0, -s.y / 2.0),
        C64::new(s.x / 2.0, s.y / 2.0),
        C64::new((trace - s.z) / 2.0, 0.0),
    )
}

fn hermitian_deviation<const N: usize>(
    m: &nalgebra::SMatrix<C64, N, N>,
) -> f64 {
    (m - m.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn check_angle(theta: f64) -> Result<()> {
    if !(-STATE_TOL..=FRAC_PI_2 + STATE_TOL).contains(&theta) {
        return Err(Error::AngleOutOfRange(theta));
    }
    Ok(())
}

/// A single-qubit density operator stored as its Bloch vector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 3]", into = "[f64; 3]")]
pub struct QubitState {
    bloch: Vector3<f64>,
}

impl QubitState {
    pub fn from_bloch(bloch: Vector3<f64>) -> Result<Self> {
        let norm = bloch.norm();
        if !norm.is_finite() || norm > 1.0 + STATE_TOL {
            return Err(Error::Unphysical(norm));
        }
        Ok(Self { bloch })
    }

    /// Pure state on the Bloch sphere at polar angle `polar` and azimuth `azimuth`.
    pub fn from_angles(polar: f64, azimuth: f64) -> Self {
        let (sp, cp) = polar.sin_cos();
        let (sa, ca) = azimuth.sin_cos();
        Self {
            bloch: Vector3::new(sp * ca, sp * sa, cp),
        }
    }

    /// Pure state `alpha|0> + beta|1>`; the amplitudes are normalized first.
    pub fn from_ket(alpha: C64, beta: C64) -> Result<Self> {
        let norm_sqr = alpha.norm_sqr() + beta.norm_sqr();
        if norm_sqr == 0.0 {
            return Err(Error::ZeroVector);
        }
        let cross = alpha.conj() * beta;
        let bloch = Vector3::new(
            2.0 * cross.re,
            2.0 * cross.im,
            alpha.norm_sqr() - beta.norm_sqr(),
        ) / norm_sqr;
        Ok(Self { bloch })
    }

    pub fn from_matrix(m: &Matrix2<C64>) -> Result<Self> {
        let dev = hermitian_deviation(m);
        let scale = m.norm().max(1.0);
        if dev > STATE_TOL * scale {
            return Err(Error::NotHermitian(dev));
        }
        let tr = m.trace().re;
        if (tr - 1.0).abs() > STATE_TOL {
            return Err(Error::BadTrace(tr));
        }
        Self::from_bloch(bloch_components(m))
    }

    pub fn zero() -> Self {
        Self { bloch: Vector3::z() }
    }

    pub fn one() -> Self {
        Self { bloch: -Vector3::z() }
    }

    pub fn plus() -> Self {
        Self { bloch: Vector3::x() }
    }

    pub fn minus() -> Self {
        Self { bloch: -Vector3::x() }
    }

    pub fn maximally_mixed() -> Self {
        Self { bloch: Vector3::zeros() }
    }

    pub fn bloch(&self) -> Vector3<f64> {
        self.bloch
    }

    /// The density matrix `(1 + r.sigma)/2`.
    pub fn matrix(&self) -> Matrix2<C64> {
        matrix_from_bloch(1.0, &self.bloch)
    }

    pub fn is_pure(&self) -> bool {
        (self.bloch.norm() - 1.0).abs() <= STATE_TOL
    }
}

impl TryFrom<[f64; 3]> for QubitState {
    type Error = Error;

    fn try_from(v: [f64; 3]) -> Result<Self> {
        Self::from_bloch(Vector3::from(v))
    }
}

impl From<QubitState> for [f64; 3] {
    fn from(s: QubitState) -> Self {
        s.bloch.into()
    }
}

/// Density operator of two qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoQubitState {
    matrix: Matrix4<C64>,
}

impl TwoQubitState {
    /// Validates Hermiticity, unit trace and positivity.
    pub fn new(matrix: Matrix4<C64>) -> Result<Self> {
        let scale = matrix.norm().max(1.0);
        let dev = hermitian_deviation(&matrix);
        if dev > STATE_TOL * scale {
            return Err(Error::NotHermitian(dev));
        }
        let tr = matrix.trace().re;
        if (tr - 1.0).abs() > STATE_TOL {
            return Err(Error::BadTrace(tr));
        }
        let lowest = matrix.symmetric_eigenvalues().min();
        if lowest < -STATE_TOL * scale {
            return Err(Error::NotPositive(lowest));
        }
        Ok(Self { matrix })
    }

    /// Projector onto the normalized ket.
    pub fn from_ket(ket: &Vector4<C64>) -> Result<Self> {
        let norm = ket.norm();
        if norm == 0.0 {
            return Err(Error::ZeroVector);
        }
        let v = ket / C64::new(norm, 0.0);
        Ok(Self {
            matrix: v * v.adjoint(),
        })
    }

    /// `cos(theta)|00> + sin(theta)|11>`.
    pub fn pure_family(theta: f64) -> Result<Self> {
        check_angle(theta)?;
        let (s, c) = theta.sin_cos();
        Self::from_ket(&Vector4::new(
            C64::new(c, 0.0),
            ZERO,
            ZERO,
            C64::new(s, 0.0),
        ))
    }

    /// `cos^2(theta)|psi+><psi+| + sin^2(theta)|phi+><phi+|`.
    pub fn mixed_family(theta: f64) -> Result<Self> {
        check_angle(theta)?;
        let (s, c) = theta.sin_cos();
        let psi = Self::bell_psi_plus().matrix;
        let phi = Self::bell_phi_plus().matrix;
        Ok(Self {
            matrix: psi * C64::new(c * c, 0.0) + phi * C64::new(s * s, 0.0),
        })
    }

    /// `(|00> + |11>)/sqrt(2)`.
    pub fn bell_psi_plus() -> Self {
        let h = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        Self::from_ket(&Vector4::new(h, ZERO, ZERO, h)).expect("nonzero ket")
    }

    /// `(|00> - |11>)/sqrt(2)`.
    pub fn bell_psi_minus() -> Self {
        let h = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        Self::from_ket(&Vector4::new(h, ZERO, ZERO, -h)).expect("nonzero ket")
    }

    /// `(|01> + |10>)/sqrt(2)`.
    pub fn bell_phi_plus() -> Self {
        let h = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        Self::from_ket(&Vector4::new(ZERO, h, h, ZERO)).expect("nonzero ket")
    }

    pub fn maximally_mixed() -> Self {
        Self {
            matrix: Matrix4::identity() * C64::new(0.25, 0.0),
        }
    }

    /// Werner state `V|psi+><psi+| + (1 - V) 1/4`, valid for `V` in `[-1/3, 1]`.
    pub fn werner(visibility: f64) -> Result<Self> {
        let m = Self::bell_psi_plus().matrix * C64::new(visibility, 0.0)
            + Matrix4::identity() * C64::new((1.0 - visibility) / 4.0, 0.0);
        Self::new(m)
    }

    /// Convex combination `p * a + (1 - p) * b`.
    pub fn mixture(p: f64, a: &Self, b: &Self) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidParameter(format!(
                "mixing weight {p} outside [0, 1]"
            )));
        }
        Ok(Self {
            matrix: a.matrix * C64::new(p, 0.0) + b.matrix * C64::new(1.0 - p, 0.0),
        })
    }

    pub fn matrix(&self) -> &Matrix4<C64> {
        &self.matrix
    }

    /// Bob's reduced state `Tr_A[rho]`.
    pub fn reduced_bob(&self) -> Matrix2<C64> {
        trace_out_first(&self.matrix)
    }

    pub fn reduced_alice(&self) -> Matrix2<C64> {
        trace_out_second(&self.matrix)
    }

    /// Overlap `<psi+|rho|psi+>`.
    pub fn bell_fidelity(&self) -> f64 {
        (Self::bell_psi_plus().matrix * self.matrix).trace().re
    }
}

/// Projective measurement along a unit axis; outcome `a` projects on
/// `(1 + (-1)^a n.sigma)/2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasurementSetting {
    axis: Vector3<f64>,
    label: String,
}

impl MeasurementSetting {
    pub fn new(axis: Vector3<f64>, label: impl Into<String>) -> Result<Self> {
        let norm = axis.norm();
        if (norm - 1.0).abs() > STATE_TOL {
            return Err(Error::NonUnitAxis(norm));
        }
        Ok(Self {
            axis,
            label: label.into(),
        })
    }

    pub fn z() -> Self {
        Self {
            axis: Vector3::z(),
            label: "z".into(),
        }
    }

    pub fn x() -> Self {
        Self {
            axis: Vector3::x(),
            label: "x".into(),
        }
    }

    pub fn axis(&self) -> Vector3<f64> {
        self.axis
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Projector for outcome `0` or `1`.
    pub fn projector(&self, outcome: u8) -> Matrix2<C64> {
        assert!(outcome < 2, "outcome must be a bit, got {outcome}");
        let sign = if outcome == 0 { 1.0 } else { -1.0 };
        matrix_from_bloch(1.0, &(self.axis * sign))
    }
}

/// Bob's conditional state before normalization; its trace is the probability
/// of Alice's outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct UnnormalizedQubitState {
    matrix: Matrix2<C64>,
    norm: f64,
}

impl UnnormalizedQubitState {
    pub fn new(matrix: Matrix2<C64>) -> Result<Self> {
        let dev = hermitian_deviation(&matrix);
        if dev > STATE_TOL * matrix.norm().max(1.0) {
            return Err(Error::NotHermitian(dev));
        }
        let norm = matrix.trace().re;
        let lowest = matrix.symmetric_eigenvalues().min();
        if lowest < -STATE_TOL {
            return Err(Error::NotPositive(lowest));
        }
        Ok(Self { matrix, norm })
    }

    pub fn matrix(&self) -> &Matrix2<C64> {
        &self.matrix
    }

    /// Outcome probability (the trace).
    pub fn norm(&self) -> f64 {
        self.norm
    }

    /// `s` in `(P*1 + s.sigma)/2`; equals `P` times the normalized Bloch vector.
    pub fn scaled_bloch(&self) -> Vector3<f64> {
        bloch_components(&self.matrix)
    }

    /// The normalized state, or `None` for a zero-probability outcome.
    pub fn normalized(&self) -> Option<QubitState> {
        if self.norm <= STATE_TOL {
            return None;
        }
        QubitState::from_bloch(self.scaled_bloch() / self.norm).ok()
    }
}

/// `Tr_A[(P_outcome (x) 1) rho]`.
pub fn conditional_state(
    state: &TwoQubitState,
    setting: &MeasurementSetting,
    outcome: u8,
) -> UnnormalizedQubitState {
    let lifted = kron(&setting.projector(outcome), &Matrix2::identity());
    let mut matrix = trace_out_first(&(lifted * state.matrix));
    // Tr_A[(P (x) 1) rho] is Hermitian; drop the rounding asymmetry.
    matrix = (matrix + matrix.adjoint()) * C64::new(0.5, 0.0);
    let norm = matrix.trace().re;
    UnnormalizedQubitState { matrix, norm }
}

/// `Tr[test * state]`, the probability of passing Bob's projective test.
pub fn project_probability(state: &UnnormalizedQubitState, test: &QubitState) -> f64 {
    (test.matrix() * state.matrix).trace().re
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{FRAC_PI_4, FRAC_PI_6};

    fn close2(a: &Matrix2<C64>, b: &Matrix2<C64>, tol: f64) -> bool {
        (a - b).iter().all(|z| z.norm() <= tol)
    }

    fn close4(a: &Matrix4<C64>, b: &Matrix4<C64>, tol: f64) -> bool {
        (a - b).iter().all(|z| z.norm() <= tol)
    }

    fn re(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    #[test]
    fn pure_family_endpoints() {
        let s = TwoQubitState::pure_family(0.0).unwrap();
        let mut expect = Matrix4::zeros();
        expect[(0, 0)] = ONE;
        assert!(close4(s.matrix(), &expect, 1e-15));

        let bell = TwoQubitState::pure_family(FRAC_PI_4).unwrap();
        for &(r, c) in &[(0, 0), (0, 3), (3, 0), (3, 3)] {
            assert_abs_diff_eq!(bell.matrix()[(r, c)].re, 0.5, epsilon = 1e-15);
        }
        assert!(close4(
            bell.matrix(),
            TwoQubitState::bell_psi_plus().matrix(),
            1e-15
        ));
    }

    #[test]
    fn pure_family_at_pi_over_6() {
        let s = TwoQubitState::pure_family(FRAC_PI_6).unwrap();
        let m = s.matrix();
        assert_abs_diff_eq!(m[(0, 0)].re, 0.75, epsilon = 1e-15);
        assert_abs_diff_eq!(m[(1, 1)].re, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(m[(2, 2)].re, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(m[(3, 3)].re, 0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(m[(0, 3)].re, 3f64.sqrt() / 4.0, epsilon = 1e-15);
        assert_abs_diff_eq!(m[(3, 0)].re, 3f64.sqrt() / 4.0, epsilon = 1e-15);
    }

    #[test]
    fn mixed_family_values() {
        let s0 = TwoQubitState::mixed_family(0.0).unwrap();
        assert!(close4(s0.matrix(), TwoQubitState::bell_psi_plus().matrix(), 1e-15));
        let s1 = TwoQubitState::mixed_family(FRAC_PI_2).unwrap();
        assert!(close4(s1.matrix(), TwoQubitState::bell_phi_plus().matrix(), 1e-15));

        let [sx, _, _] = pauli();
        let expect = (Matrix4::identity() + kron(&sx, &sx)) * re(0.25);
        let s = TwoQubitState::mixed_family(FRAC_PI_4).unwrap();
        assert!(close4(s.matrix(), &expect, 1e-15));
    }

    #[test]
    fn out_of_range_angle_is_rejected() {
        assert_eq!(
            TwoQubitState::pure_family(-0.1),
            Err(Error::AngleOutOfRange(-0.1))
        );
        assert!(TwoQubitState::mixed_family(2.0).is_err());
    }

    #[test]
    fn invalid_two_qubit_matrices_are_rejected() {
        let mut m = Matrix4::identity() * re(0.25);
        m[(0, 1)] = re(0.1);
        assert!(matches!(TwoQubitState::new(m), Err(Error::NotHermitian(_))));

        let m = Matrix4::identity() * re(0.3);
        assert!(matches!(TwoQubitState::new(m), Err(Error::BadTrace(_))));

        let m = Matrix4::from_diagonal(&Vector4::new(re(1.2), re(-0.2), ZERO, ZERO));
        assert!(matches!(TwoQubitState::new(m), Err(Error::NotPositive(_))));
    }

    #[test]
    fn conditional_states_of_pure_family() {
        let theta: f64 = 0.37;
        let (s, c) = theta.sin_cos();
        let state = TwoQubitState::pure_family(theta).unwrap();

        let z0 = conditional_state(&state, &MeasurementSetting::z(), 0);
        let expect = QubitState::zero().matrix() * re(c * c);
        assert!(close2(z0.matrix(), &expect, 1e-15));
        assert_abs_diff_eq!(z0.norm(), c * c, epsilon = 1e-15);

        let z1 = conditional_state(&state, &MeasurementSetting::z(), 1);
        let expect = QubitState::one().matrix() * re(s * s);
        assert!(close2(z1.matrix(), &expect, 1e-15));

        let x0 = conditional_state(&state, &MeasurementSetting::x(), 0);
        let psi = QubitState::from_ket(re(c), re(s)).unwrap();
        assert!(close2(x0.matrix(), &(psi.matrix() * re(0.5)), 1e-15));

        let x1 = conditional_state(&state, &MeasurementSetting::x(), 1);
        let phi = QubitState::from_ket(re(c), re(-s)).unwrap();
        assert!(close2(x1.matrix(), &(phi.matrix() * re(0.5)), 1e-15));
    }

    #[test]
    fn maximally_mixed_has_no_correlations() {
        let state = TwoQubitState::maximally_mixed();
        let axis = Vector3::new(1.0, 2.0, -0.5).normalize();
        let setting = MeasurementSetting::new(axis, "n").unwrap();
        for a in 0..2 {
            let cond = conditional_state(&state, &setting, a);
            let expect = Matrix2::identity() * re(0.25);
            assert!(close2(cond.matrix(), &expect, 1e-15));
            assert_abs_diff_eq!(cond.norm(), 0.5, epsilon = 1e-15);
        }
    }

    #[test]
    fn projective_probabilities() {
        let theta: f64 = 0.9;
        let c = theta.cos();
        let state = TwoQubitState::pure_family(theta).unwrap();
        let z0 = conditional_state(&state, &MeasurementSetting::z(), 0);
        assert_abs_diff_eq!(project_probability(&z0, &QubitState::one()), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(project_probability(&z0, &QubitState::zero()), c * c, epsilon = 1e-15);

        let mixed = TwoQubitState::mixed_family(theta).unwrap();
        let z0 = conditional_state(&mixed, &MeasurementSetting::z(), 0);
        let s = theta.sin();
        assert_abs_diff_eq!(
            project_probability(&z0, &QubitState::one()),
            s * s / 2.0,
            epsilon = 1e-15
        );

        let iso = UnnormalizedQubitState::new(Matrix2::identity() * re(0.25)).unwrap();
        let test = QubitState::from_angles(1.1, -2.3);
        assert_abs_diff_eq!(project_probability(&iso, &test), 0.25, epsilon = 1e-15);
    }

    #[test]
    fn bloch_matrix_round_trip() {
        let s = QubitState::from_bloch(Vector3::new(0.3, -0.4, 0.5)).unwrap();
        let back = QubitState::from_matrix(&s.matrix()).unwrap();
        assert_abs_diff_eq!((back.bloch() - s.bloch()).norm(), 0.0, epsilon = 1e-15);

        let ket = QubitState::from_ket(C64::new(0.6, 0.0), C64::new(0.0, 0.8)).unwrap();
        assert!(ket.is_pure());
        assert_abs_diff_eq!(ket.bloch().y, 0.96, epsilon = 1e-15);
    }

    #[test]
    fn unphysical_bloch_vectors_are_rejected() {
        assert!(matches!(
            QubitState::from_bloch(Vector3::new(1.0, 0.1, 0.0)),
            Err(Error::Unphysical(_))
        ));
        assert_eq!(
            QubitState::from_ket(ZERO, ZERO),
            Err(Error::ZeroVector)
        );
        assert!(matches!(
            MeasurementSetting::new(Vector3::new(0.0, 0.0, 2.0), "bad"),
            Err(Error::NonUnitAxis(_))
        ));
    }

    #[test]
    fn projectors_are_complete_and_idempotent() {
        let s = MeasurementSetting::new(Vector3::new(0.6, 0.0, 0.8), "n").unwrap();
        let p0 = s.projector(0);
        let p1 = s.projector(1);
        assert!(close2(&(p0 + p1), &Matrix2::identity(), 1e-15));
        assert!(close2(&(p0 * p0), &p0, 1e-15));
        assert!(close2(&(p1 * p1), &p1, 1e-15));
    }

    #[test]
    fn qubit_state_serializes_as_array() {
        let s = QubitState::from_bloch(Vector3::new(0.0, 0.5, 0.0)).unwrap();
        assert_eq!(serde_json::to_string(&s).unwrap(), "[0.0,0.5,0.0]");
        let back: QubitState = serde_json::from_str("[0.0,0.5,0.0]").unwrap();
        assert_eq!(back, s);
        assert!(serde_json::from_str::<QubitState>("[2.0,0.0,0.0]").is_err());
    }
}
