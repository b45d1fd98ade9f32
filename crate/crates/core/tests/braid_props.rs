use nalgebra::Matrix2;
use proptest::prelude::*;
use steering_core::braid::{
    brute_force_search, phase_distance, strict_distance, BraidGenerator, BraidWord, GateTarget,
    Metric,
};
use steering_core::C64;

fn word(codes: &[u8]) -> BraidWord {
    BraidWord::new(codes.iter().map(|&c| BraidGenerator::from_code(c)).collect())
}

fn codes(max: usize) -> impl Strategy<Value = Vec<u8>> {
    prop::collection::vec(0u8..4, 0..max)
}

fn max_abs(m: &Matrix2<C64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn op_norm(m: &Matrix2<C64>) -> f64 {
    m.svd(false, false).singular_values.max()
}

/// min over a fine phase grid, refined around the best point.
fn phase_oracle(m: &Matrix2<C64>, t: &Matrix2<C64>) -> f64 {
    let f = |phi: f64| op_norm(&(m * C64::from_polar(1.0, phi) - t));
    let n = 4096;
    let step = std::f64::consts::TAU / n as f64;
    let (mut best_phi, mut best) = (0.0, f64::INFINITY);
    for i in 0..n {
        let phi = i as f64 * step;
        let v = f(phi);
        if v < best {
            best = v;
            best_phi = phi;
        }
    }
    let (mut lo, mut hi) = (best_phi - step, best_phi + step);
    for _ in 0..200 {
        let a = lo + (hi - lo) / 3.0;
        let b = hi - (hi - lo) / 3.0;
        if f(a) < f(b) {
            hi = b;
        } else {
            lo = a;
        }
    }
    best.min(f((lo + hi) / 2.0))
}

proptest! {
    #[test]
    fn word_matrix_is_a_homomorphism(a in codes(16), b in codes(16)) {
        let (wa, wb) = (word(&a), word(&b));
        let joined = wa.concat(&wb);
        prop_assert!(max_abs(&(joined.matrix() - wa.matrix() * wb.matrix())) < 1e-12);
    }

    #[test]
    fn long_words_stay_unitary(a in codes(200)) {
        let m = *word(&a).matrix();
        prop_assert!(max_abs(&(m * m.adjoint() - Matrix2::identity())) < 1e-10);
    }

    #[test]
    fn phase_distance_is_a_pseudometric(a in codes(12), b in codes(12), c in codes(12)) {
        let (x, y, z) = (*word(&a).matrix(), *word(&b).matrix(), *word(&c).matrix());
        let d = phase_distance;
        prop_assert!((d(&x, &y) - d(&y, &x)).abs() < 1e-12);
        prop_assert!(d(&x, &z) <= d(&x, &y) + d(&y, &z) + 1e-12);
        prop_assert!(d(&x, &x) < 1e-7);
        prop_assert!(d(&x, &y) <= strict_distance(&x, &y) + 1e-12);
    }

    #[test]
    fn distances_match_numerical_oracles(a in codes(10), b in codes(10)) {
        let (x, y) = (*word(&a).matrix(), *word(&b).matrix());
        prop_assert!((strict_distance(&x, &y) - op_norm(&(x - y))).abs() < 1e-10);
        prop_assert!((phase_distance(&x, &y) - phase_oracle(&x, &y)).abs() < 1e-7);
    }
}

#[test]
fn search_results_report_both_distances() {
    let target = GateTarget::u_theta(0.3);
    for metric in [Metric::PhaseInvariant, Metric::Strict] {
        let r = brute_force_search(&target, 8, metric);
        let m = *r.word.matrix();
        assert!((r.distance_phase - phase_oracle(&m, &target.matrix)).abs() < 1e-7);
        assert!((r.distance_strict - op_norm(&(m - target.matrix))).abs() < 1e-10);
        assert!(r.distance_phase <= r.distance_strict + 1e-12);
    }
}
