//! Single-query measurement model: parameterized probe state, time evolution under
//! each candidate Hamiltonian, measurement-basis rotation, and computational-basis
//! readout.

use std::f64::consts::{PI, TAU};
use std::path::Path;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{QleError, Result};
use crate::linalg::{hermitian_eig, ComplexMatrix, EigenDecomposition, HermitianMatrix, StateVector};

/// Two hypotheses are treated as indistinguishable when `H_i - H_j` is within this
/// distance (max-entry) of a multiple of the identity.
pub const DEGENERACY_TOL: f64 = 1e-8;
/// Tolerance used when checking that a probability vector sums to one.
pub const SIMPLEX_TOL: f64 = 1e-9;
/// Eigenvalue gaps at or below this value are treated as degeneracies.
const GAP_TOL: f64 = 1e-9;

/// A labeled candidate Hamiltonian together with its cached spectral decomposition.
#[derive(Clone, Debug)]
pub struct Hypothesis {
    label: String,
    hamiltonian: HermitianMatrix,
    spectrum: EigenDecomposition,
}

impl Hypothesis {
    pub fn new(label: impl Into<String>, hamiltonian: HermitianMatrix) -> Result<Self> {
        let spectrum = hermitian_eig(&hamiltonian)?;
        Ok(Self {
            label: label.into(),
            hamiltonian,
            spectrum,
        })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn hamiltonian(&self) -> &HermitianMatrix {
        &self.hamiltonian
    }

    pub fn spectrum(&self) -> &EigenDecomposition {
        &self.spectrum
    }

    /// `e^{-iHt}|ψ⟩` from the cached eigenbasis.
    pub fn evolve(&self, psi: &[Complex64], t: f64) -> Vec<Complex64> {
        let v = &self.spectrum.eigenvectors;
        let n = psi.len();
        let coeffs: Vec<Complex64> = (0..n)
            .map(|k| {
                let proj: Complex64 = (0..n).map(|j| v[(j, k)].conj() * psi[j]).sum();
                proj * Complex64::from_polar(1.0, -self.spectrum.eigenvalues[k] * t)
            })
            .collect();
        v.apply(&coeffs)
    }

    /// Outcome distribution of `W e^{-iHt} |ψ₁⟩` in the computational basis.
    pub fn outcome_probs(&self, params: &ControlParams) -> OutcomeDistribution {
        let probe = Probe::new(params, self.hamiltonian.dim());
        self.outcome_probs_for(&probe, params.t)
    }

    pub(crate) fn outcome_probs_for(&self, probe: &Probe, t: f64) -> OutcomeDistribution {
        let evolved = self.evolve(probe.psi.amplitudes(), t);
        let amps = probe.w.apply(&evolved);
        OutcomeDistribution::from_unnormalized(amps.iter().map(|z| z.norm_sqr()).collect())
    }
}

/// Probe state and measurement rotation for one choice of angles, shared across
/// hypotheses.
#[derive(Clone, Debug)]
pub(crate) struct Probe {
    pub psi: StateVector,
    pub w: ComplexMatrix,
}

impl Probe {
    pub fn new(params: &ControlParams, dim: usize) -> Self {
        assert_eq!(dim, 2, "the parameterized probe is defined for a single qubit");
        Self {
            psi: initial_state(params.alpha, params.beta),
            w: w_matrix(params.theta, params.phi),
        }
    }
}

/// Ordered candidate Hamiltonians with a prior over them.
#[derive(Clone, Debug)]
pub struct HypothesisSet {
    hypotheses: Vec<Hypothesis>,
    prior: Vec<f64>,
}

/// A pair of hypotheses that generate identical dynamics.
#[derive(Clone, Debug, PartialEq)]
pub struct DegeneratePair {
    pub first: usize,
    pub second: usize,
    pub shift: f64,
}

impl HypothesisSet {
    /// Builds a set with a uniform prior.
    pub fn new(hypotheses: Vec<(String, HermitianMatrix)>) -> Result<Self> {
        let n = hypotheses.len();
        Self::with_prior(hypotheses, vec![1.0 / n.max(1) as f64; n])
    }

    pub fn with_prior(hypotheses: Vec<(String, HermitianMatrix)>, prior: Vec<f64>) -> Result<Self> {
        if hypotheses.len() < 2 {
            return Err(QleError::InvalidParameter(format!(
                "a hypothesis set needs at least two candidates, got {}",
                hypotheses.len()
            )));
        }
        let dim = hypotheses[0].1.dim();
        if let Some((label, h)) = hypotheses.iter().find(|(_, h)| h.dim() != dim) {
            return Err(QleError::Shape(format!(
                "hypothesis {label:?} has dimension {}, expected {dim}",
                h.dim()
            )));
        }
        if prior.len() != hypotheses.len() {
            return Err(QleError::InvalidProbabilities(format!(
                "prior has {} entries for {} hypotheses",
                prior.len(),
                hypotheses.len()
            )));
        }
        check_simplex(&prior)?;

        let matrices: Vec<&HermitianMatrix> = hypotheses.iter().map(|(_, h)| h).collect();
        if let Err(pairs) = validate_hypothesis_set(&matrices) {
            let p = &pairs[0];
            return Err(QleError::DegenerateHypotheses {
                first: hypotheses[p.first].0.clone(),
                second: hypotheses[p.second].0.clone(),
                shift: p.shift,
            });
        }
        let hypotheses = hypotheses
            .into_iter()
            .map(|(label, h)| Hypothesis::new(label, h))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { hypotheses, prior })
    }

    pub fn len(&self) -> usize {
        self.hypotheses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.hypotheses.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.hypotheses[0].hamiltonian.dim()
    }

    pub fn hypotheses(&self) -> &[Hypothesis] {
        &self.hypotheses
    }

    pub fn get(&self, index: usize) -> Option<&Hypothesis> {
        self.hypotheses.get(index)
    }

    pub fn prior(&self) -> &[f64] {
        &self.prior
    }

    pub fn labels(&self) -> Vec<&str> {
        self.hypotheses.iter().map(|h| h.label()).collect()
    }

    /// Smallest nonzero eigenvalue gap found in any single hypothesis.
    pub fn min_energy_gap(&self) -> Option<f64> {
        self.hypotheses
            .iter()
            .flat_map(|h| {
                h.spectrum
                    .eigenvalues
                    .windows(2)
                    .map(|w| w[1] - w[0])
                    .filter(|&g| g > GAP_TOL)
                    .collect::<Vec<_>>()
            })
            .min_by(f64::total_cmp)
    }

    /// Upper end of the evolution-time range, `2π / Δ_min`.
    pub fn max_time(&self) -> f64 {
        match self.min_energy_gap() {
            Some(gap) => TAU / gap,
            None => TAU,
        }
    }

    pub fn from_json_str(text: &str) -> std::result::Result<Self, String> {
        let file: HypothesisFile = serde_json::from_str(text).map_err(|e| e.to_string())?;
        file.into_set().map_err(|e| e.to_string())
    }

    /// Loads the hypothesis-set JSON format:
    /// `{"hypotheses":[{"label": "...", "matrix": [[[re, im], ...], ...]}, ...], "prior": [...]}`.
    pub fn load_json(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| QleError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json_str(&text).map_err(|message| QleError::Format {
            path: path.to_path_buf(),
            message,
        })
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        let hypotheses = self
            .hypotheses
            .iter()
            .map(|h| HypothesisEntry {
                label: h.label.clone(),
                matrix: h
                    .hamiltonian
                    .as_matrix()
                    .rows()
                    .into_iter()
                    .map(|row| row.into_iter().map(|z| [z.re, z.im]).collect())
                    .collect(),
            })
            .collect();
        serde_json::to_value(HypothesisFile {
            hypotheses,
            prior: Some(self.prior.clone()),
        })
        .expect("hypothesis set serializes")
    }
}

#[derive(Serialize, Deserialize)]
struct HypothesisEntry {
    label: String,
    matrix: Vec<Vec<[f64; 2]>>,
}

#[derive(Serialize, Deserialize)]
struct HypothesisFile {
    hypotheses: Vec<HypothesisEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    prior: Option<Vec<f64>>,
}

impl HypothesisFile {
    fn into_set(self) -> Result<HypothesisSet> {
        let hypotheses = self
            .hypotheses
            .into_iter()
            .map(|entry| {
                let rows: Vec<Vec<Complex64>> = entry
                    .matrix
                    .iter()
                    .map(|row| row.iter().map(|&[re, im]| Complex64::new(re, im)).collect())
                    .collect();
                let m = ComplexMatrix::from_rows(&rows)?;
                Ok((entry.label, HermitianMatrix::new(m)?))
            })
            .collect::<Result<Vec<_>>>()?;
        match self.prior {
            Some(prior) => HypothesisSet::with_prior(hypotheses, prior),
            None => HypothesisSet::new(hypotheses),
        }
    }
}

pub(crate) fn check_simplex(p: &[f64]) -> Result<()> {
    if let Some(bad) = p.iter().find(|x| !x.is_finite() || **x < 0.0) {
        return Err(QleError::InvalidProbabilities(format!(
            "entry {bad} is not a probability"
        )));
    }
    let total: f64 = p.iter().sum();
    if !((total - 1.0).abs() <= SIMPLEX_TOL) {
        return Err(QleError::InvalidProbabilities(format!("entries sum to {total}")));
    }
    Ok(())
}

/// Reports every pair `(i, j)` whose difference is a multiple of the identity
/// within [`DEGENERACY_TOL`].
pub fn validate_hypothesis_set(matrices: &[&HermitianMatrix]) -> std::result::Result<(), Vec<DegeneratePair>> {
    let mut pairs = Vec::new();
    for i in 0..matrices.len() {
        for j in (i + 1)..matrices.len() {
            let diff = matrices[j].sub(matrices[i]);
            let dim = diff.dim();
            let shift = diff.as_matrix().trace().re / dim as f64;
            let residual = diff.shift(-shift);
            if residual.as_matrix().max_abs() <= DEGENERACY_TOL {
                pairs.push(DegeneratePair {
                    first: i,
                    second: j,
                    shift,
                });
            }
        }
    }
    if pairs.is_empty() {
        Ok(())
    } else {
        Err(pairs)
    }
}

/// The five per-query controls: probe orientation `(alpha, beta)`, measurement
/// rotation `(theta, phi)` and evolution time `t`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ControlParams {
    pub alpha: f64,
    pub beta: f64,
    pub theta: f64,
    pub phi: f64,
    pub t: f64,
}

/// Wraps `x` into `[0, period)`.
pub fn wrap_into(x: f64, period: f64) -> f64 {
    let w = x.rem_euclid(period);
    if w >= period {
        0.0
    } else {
        w
    }
}

impl ControlParams {
    /// Wraps every angle into its canonical half-open range and `t` into `[0, t_max)`.
    pub fn canonical(alpha: f64, beta: f64, theta: f64, phi: f64, t: f64, t_max: f64) -> Result<Self> {
        let mut p = Self::with_time(alpha, beta, theta, phi, 0.0)?;
        if !t.is_finite() || !(t_max > 0.0) {
            return Err(QleError::InvalidParameter(format!("time {t} with range {t_max}")));
        }
        p.t = wrap_into(t, t_max);
        Ok(p)
    }

    /// Wraps the angles but keeps `t` as given (it must be finite and non-negative).
    /// Used for externally chosen times such as the particle guess heuristic.
    pub fn with_time(alpha: f64, beta: f64, theta: f64, phi: f64, t: f64) -> Result<Self> {
        for (name, v) in [
            ("alpha", alpha),
            ("beta", beta),
            ("theta", theta),
            ("phi", phi),
            ("t", t),
        ] {
            if !v.is_finite() {
                return Err(QleError::InvalidParameter(format!("{name} = {v} is not finite")));
            }
        }
        if t < 0.0 {
            return Err(QleError::InvalidParameter(format!("negative evolution time {t}")));
        }
        Ok(Self {
            alpha: wrap_into(alpha, PI),
            beta: wrap_into(beta, TAU),
            theta: wrap_into(theta, PI),
            phi: wrap_into(phi, TAU),
            t,
        })
    }

    /// Same angles, different time.
    pub fn at_time(mut self, t: f64) -> Self {
        self.t = t;
        self
    }
}

/// Probabilities of the computational-basis outcomes.
#[derive(Clone, Debug, PartialEq)]
pub struct OutcomeDistribution {
    probs: Vec<f64>,
}

impl OutcomeDistribution {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        check_simplex(&probs)?;
        Ok(Self { probs })
    }

    fn from_unnormalized(probs: Vec<f64>) -> Self {
        let total: f64 = probs.iter().sum();
        Self {
            probs: probs.into_iter().map(|p| p / total).collect(),
        }
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }
}

/// `|ψ₁⟩ = cos α |0⟩ + e^{iβ} sin α |1⟩`.
pub fn initial_state(alpha: f64, beta: f64) -> StateVector {
    let (s, c) = alpha.sin_cos();
    StateVector::normalized(vec![Complex64::new(c, 0.0), Complex64::from_polar(1.0, beta) * s])
        .expect("cos²α + sin²α = 1")
}

/// Measurement rotation
/// `[[cos(θ/2), e^{-iφ} sin(θ/2)], [e^{iφ} sin(θ/2), -cos(θ/2)]]`.
pub fn w_matrix(theta: f64, phi: f64) -> ComplexMatrix {
    let (s, c) = (0.5 * theta).sin_cos();
    ComplexMatrix::from_row_major(vec![
        Complex64::new(c, 0.0),
        Complex64::from_polar(s, -phi),
        Complex64::from_polar(s, phi),
        Complex64::new(-c, 0.0),
    ])
    .expect("2x2")
}

/// `p(a) = |⟨a| W e^{-iHt} |ψ₁⟩|²`.
pub fn outcome_probs(h: &HermitianMatrix, params: &ControlParams) -> Result<OutcomeDistribution> {
    let u = crate::linalg::mat_exp_hamiltonian(h, params.t)?;
    let psi = initial_state(params.alpha, params.beta);
    let w = w_matrix(params.theta, params.phi);
    let amps = w.apply(&u.apply(psi.amplitudes()));
    Ok(OutcomeDistribution::from_unnormalized(
        amps.iter().map(|z| z.norm_sqr()).collect(),
    ))
}

/// Inverse-CDF draw over the stored outcome order.
pub fn sample_outcome<R: Rng + ?Sized>(dist: &OutcomeDistribution, rng: &mut R) -> usize {
    let u: f64 = rng.gen();
    let mut cumulative = 0.0;
    for (a, &p) in dist.probs.iter().enumerate() {
        cumulative += p;
        if u < cumulative {
            return a;
        }
    }
    // u landed in the rounding gap above the last partial sum
    dist.probs.iter().rposition(|&p| p > 0.0).unwrap_or(0)
}
