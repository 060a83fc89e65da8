mod common;

use common::{hermitian, hermitian_any_dim};
use num_complex::Complex64;
use proptest::prelude::*;
use qle_core::linalg::{
    hermitian_eig, mat_exp_hamiltonian, spectral_norm, von_neumann_entropy, ComplexMatrix, HermitianMatrix,
};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn evolution_is_unitary(h in hermitian_any_dim(), t in -10.0f64..10.0) {
        let u = mat_exp_hamiltonian(&h, t).unwrap();
        let uu = &u * &u.adjoint();
        prop_assert!(uu.max_abs_diff(&ComplexMatrix::identity(h.dim())) <= 1e-10);
    }

    #[test]
    fn evolution_composes(h in hermitian_any_dim(), t1 in -5.0f64..5.0, t2 in -5.0f64..5.0) {
        let lhs = &mat_exp_hamiltonian(&h, t1).unwrap() * &mat_exp_hamiltonian(&h, t2).unwrap();
        let rhs = mat_exp_hamiltonian(&h, t1 + t2).unwrap();
        prop_assert!(lhs.max_abs_diff(&rhs) <= 1e-9);
    }

    #[test]
    fn eigendecomposition_reconstructs(h in hermitian_any_dim()) {
        let eig = hermitian_eig(&h).unwrap();
        prop_assert!(eig.reconstruct().max_abs_diff(h.as_matrix()) <= 1e-9);
        prop_assert!(eig.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn spectral_norm_scales(h in hermitian_any_dim(), re in -4.0f64..4.0, im in -4.0f64..4.0) {
        let c = Complex64::new(re, im);
        let m = h.as_matrix();
        let scaled = spectral_norm(&m.scale(c)).unwrap();
        prop_assert!((scaled - c.norm() * spectral_norm(m).unwrap()).abs() <= 1e-10 * (1.0 + scaled));
    }

    #[test]
    fn entropy_is_basis_invariant(a in hermitian(3), g in hermitian(3), t in -3.0f64..3.0) {
        // ρ = A² / Tr A² is a generic full-rank-or-less density matrix.
        let a2 = a.as_matrix() * a.as_matrix();
        let tr = a2.trace().re;
        prop_assume!(tr > 1e-6);
        let rho = HermitianMatrix::new(a2.scale(Complex64::new(1.0 / tr, 0.0))).unwrap();
        let u = mat_exp_hamiltonian(&g, t).unwrap();
        let rotated = &(&u * rho.as_matrix()) * &u.adjoint();
        let rotated = HermitianMatrix::new(rotated).unwrap();
        let s = von_neumann_entropy(&rho).unwrap();
        prop_assert!((von_neumann_entropy(&rotated).unwrap() - s).abs() <= 1e-9);
    }
}
