//! Posterior weights over hypotheses, the particle guess heuristic for the
//! evolution time, and run termination.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{QleError, Result};
use crate::linalg::hermitian_spectral_norm;
use crate::model::HypothesisSet;

/// Posterior mass at or below this is treated as an impossible observation.
pub const EVIDENCE_FLOOR: f64 = 1e-300;
/// Default confidence threshold for success.
pub const DEFAULT_THRESHOLD: f64 = 0.99;
/// Strict confidence threshold.
pub const STRICT_THRESHOLD: f64 = 0.9999;
/// Default iteration cap standing in for "never converges".
pub const DEFAULT_CAP: usize = 1000;

const PGH_MAX_ATTEMPTS: usize = 1000;
const PGH_MIN_NORM: f64 = 1e-9;

/// A probability vector over the hypotheses.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightVector(Vec<f64>);

impl WeightVector {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        crate::model::check_simplex(&weights)?;
        Ok(Self(weights))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Index of the largest weight (first one on ties).
    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (i, &w) in self.0.iter().enumerate() {
            if w > self.0[best] {
                best = i;
            }
        }
        best
    }
}

/// Outcome of a learning run so far.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum RunStatus {
    Running,
    Success { iterations: usize },
    WrongConvergence { iterations: usize, wrong_index: usize },
    Exhausted { cap: usize },
}

impl RunStatus {
    pub fn is_running(&self) -> bool {
        matches!(self, RunStatus::Running)
    }

    pub fn is_success(&self) -> bool {
        matches!(self, RunStatus::Success { .. })
    }

    pub fn name(&self) -> &'static str {
        match self {
            RunStatus::Running => "running",
            RunStatus::Success { .. } => "success",
            RunStatus::WrongConvergence { .. } => "wrong_convergence",
            RunStatus::Exhausted { .. } => "exhausted",
        }
    }
}

/// Starting weights: the set's prior, which defaults to uniform.
pub fn init_weights(set: &HypothesisSet) -> WeightVector {
    WeightVector(set.prior().to_vec())
}

/// `w_j ← w_j L_j / Σ_i w_i L_i`.
pub fn bayes_update(w: &WeightVector, likelihoods: &[f64]) -> Result<WeightVector> {
    if likelihoods.len() != w.len() {
        return Err(QleError::Shape(format!(
            "{} likelihoods for {} weights",
            likelihoods.len(),
            w.len()
        )));
    }
    if let Some(bad) = likelihoods.iter().find(|l| !(**l >= 0.0) || !l.is_finite()) {
        return Err(QleError::InvalidProbabilities(format!("likelihood {bad}")));
    }
    let unnormalized: Vec<f64> = w.0.iter().zip(likelihoods).map(|(w, l)| w * l).collect();
    let evidence: f64 = unnormalized.iter().sum();
    if evidence <= EVIDENCE_FLOOR {
        return Err(QleError::DegenerateEvidence(evidence));
    }
    Ok(WeightVector(unnormalized.into_iter().map(|x| x / evidence).collect()))
}

/// Draws an index with probability proportional to `weights`.
fn draw_index<R: Rng + ?Sized>(weights: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.gen();
    let mut cumulative = 0.0;
    for (i, &w) in weights.iter().enumerate() {
        cumulative += w;
        if u < cumulative {
            return i;
        }
    }
    weights.iter().rposition(|&w| w > 0.0).unwrap_or(0)
}

/// Particle guess heuristic: `t = 1 / ‖H_i - H_j‖₂` for `i ≠ j` drawn independently
/// from the current weights.
///
/// After [`PGH_MAX_ATTEMPTS`] rejected draws the time falls back to the live pair
/// with the largest `w_i · w_j` (lowest indices on ties).
pub fn pgh_time<R: Rng + ?Sized>(set: &HypothesisSet, w: &WeightVector, rng: &mut R) -> Result<f64> {
    let norm = |i: usize, j: usize| -> Result<f64> {
        let h = set.hypotheses();
        hermitian_spectral_norm(&h[i].hamiltonian().sub(h[j].hamiltonian()))
    };
    for _ in 0..PGH_MAX_ATTEMPTS {
        let i = draw_index(w.as_slice(), rng);
        let j = draw_index(w.as_slice(), rng);
        if i == j {
            continue;
        }
        let d = norm(i, j)?;
        if d > PGH_MIN_NORM {
            return Ok(1.0 / d);
        }
    }

    let weights = w.as_slice();
    let mut best: Option<(f64, f64)> = None;
    for i in 0..weights.len() {
        for j in (i + 1)..weights.len() {
            let mass = weights[i] * weights[j];
            if mass <= 0.0 {
                continue;
            }
            let d = norm(i, j)?;
            if d > PGH_MIN_NORM && best.is_none_or(|(m, _)| mass > m) {
                best = Some((mass, 1.0 / d));
            }
        }
    }
    best.map(|(_, t)| t).ok_or(QleError::PghFailure)
}

/// Termination rule for a run whose true hypothesis is `true_index`.
pub fn check_status(w: &WeightVector, true_index: usize, threshold: f64, iteration: usize, cap: usize) -> RunStatus {
    let weights = w.as_slice();
    if weights[true_index] > threshold {
        return RunStatus::Success { iterations: iteration };
    }
    if let Some(wrong) = weights
        .iter()
        .enumerate()
        .position(|(i, &x)| i != true_index && x > threshold)
    {
        return RunStatus::WrongConvergence {
            iterations: iteration,
            wrong_index: wrong,
        };
    }
    if iteration >= cap {
        return RunStatus::Exhausted { cap };
    }
    RunStatus::Running
}
