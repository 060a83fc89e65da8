//! Bayesian Hamiltonian learning over a finite set of candidate Hamiltonians.
//!
//! Each learning iteration prepares a single-qubit probe, evolves it under the
//! unknown Hamiltonian, rotates, and measures in the computational basis; the
//! outcome updates a posterior over the candidates. Controls for each query come
//! either from a fixed configuration with particle-guess-heuristic timing, from an
//! exhaustive grid, or from simulated annealing on the conditional entropy
//! `H(F|Y)` of the next outcome, which maximizes the mutual information between
//! outcome and hypothesis.
//!
//! Module map:
//! - [`linalg`]: dense complex matrices, Hermitian eigensolver, `e^{-iHt}`, entropies.
//! - [`model`]: hypothesis sets, control parameters, outcome probabilities.
//! - [`info`]: joint tables, conditional entropy, mutual information, dense cq-state oracle.
//! - [`bayes`]: posterior updates, particle guess heuristic, stopping rule.
//! - [`optimizer`]: simulated annealing and grid search over the controls.
//! - [`harness`]: runs, suites, seed splitting, CSV/JSON output.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bayes;
pub mod error;
pub mod harness;
pub mod info;
pub mod linalg;
pub mod model;
pub mod optimizer;

pub use error::{QleError, Result};
