#![allow(dead_code)]

use num_complex::Complex64;
use proptest::prelude::*;
use qle_core::linalg::{ComplexMatrix, HermitianMatrix};
use qle_core::model::ControlParams;
use std::f64::consts::{PI, TAU};

/// Hermitian matrix of dimension `dim` with real and imaginary parts in `[-3, 3]`.
pub fn hermitian(dim: usize) -> impl Strategy<Value = HermitianMatrix> {
    prop::collection::vec(-3.0f64..3.0, dim * dim * 2).prop_map(move |xs| {
        let mut m = ComplexMatrix::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = Complex64::new(xs[2 * (i * dim + i)], 0.0);
            for j in (i + 1)..dim {
                let z = Complex64::new(xs[2 * (i * dim + j)], xs[2 * (i * dim + j) + 1]);
                m[(i, j)] = z;
                m[(j, i)] = z.conj();
            }
        }
        HermitianMatrix::new(m).unwrap()
    })
}

pub fn hermitian_any_dim() -> impl Strategy<Value = HermitianMatrix> {
    (1usize..=4).prop_flat_map(hermitian)
}

pub fn qubit_hamiltonian() -> impl Strategy<Value = HermitianMatrix> {
    hermitian(2)
}

pub fn params(t_max: f64) -> impl Strategy<Value = ControlParams> {
    (0.0..PI, 0.0..TAU, 0.0..PI, 0.0..TAU, 0.0..t_max).prop_map(|(alpha, beta, theta, phi, t)| ControlParams {
        alpha,
        beta,
        theta,
        phi,
        t,
    })
}

/// Probability vector of length `n` with strictly positive entries.
pub fn simplex(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.01f64..1.0, n).prop_map(|xs| {
        let s: f64 = xs.iter().sum();
        xs.into_iter().map(|x| x / s).collect()
    })
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}
