mod common;

use common::{max_abs_diff, params, qubit_hamiltonian};
use proptest::prelude::*;
use qle_core::linalg::ComplexMatrix;
use qle_core::model::{initial_state, outcome_probs, w_matrix};
use std::f64::consts::{PI, TAU};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn global_energy_shift_is_unobservable(h in qubit_hamiltonian(), c in -5.0f64..5.0, p in params(10.0)) {
        let a = outcome_probs(&h, &p).unwrap();
        let b = outcome_probs(&h.shift(c), &p).unwrap();
        prop_assert!(max_abs_diff(a.probs(), b.probs()) <= 1e-10);
    }

    #[test]
    fn doubling_energy_equals_doubling_time(h in qubit_hamiltonian(), p in params(5.0)) {
        let a = outcome_probs(&h.scale(2.0), &p).unwrap();
        let b = outcome_probs(&h, &p.at_time(2.0 * p.t)).unwrap();
        prop_assert!(max_abs_diff(a.probs(), b.probs()) <= 1e-10);
    }

    #[test]
    fn measurement_rotation_is_a_reflection(theta in 0.0..PI, phi in 0.0..TAU) {
        let w = w_matrix(theta, phi);
        let id = ComplexMatrix::identity(2);
        prop_assert!((&w * &w.adjoint()).max_abs_diff(&id) <= 1e-10);
        prop_assert!(w.max_abs_diff(&w.adjoint()) <= 1e-10);
        prop_assert!((&w * &w).max_abs_diff(&id) <= 1e-10);
    }

    #[test]
    fn probe_is_normalized(alpha in -100.0f64..100.0, beta in -100.0f64..100.0) {
        let psi = initial_state(alpha, beta);
        let norm: f64 = psi.amplitudes().iter().map(|z| z.norm_sqr()).sum();
        prop_assert!((norm - 1.0).abs() <= 1e-12);
    }
}
