//! Information-theoretic quantities for one query.
//!
//! The production path works on the classical joint table `p(f, a)`. The dense
//! classical-quantum state ρ_FY is materialized only by [`mi_via_density_matrices`],
//! which recomputes the mutual information from von Neumann entropies as an
//! independent check.

use num_complex::Complex64;

use crate::error::{QleError, Result};
use crate::linalg::{shannon_entropy, von_neumann_entropy, xlog2x, ComplexMatrix, HermitianMatrix, StateVector};
use crate::model::{check_simplex, ControlParams, HypothesisSet, Probe};

/// Largest ρ_FY dimension the dense oracle will materialize.
pub const ORACLE_MAX_DIM: usize = 64;

/// Joint hypothesis/outcome table, `table[f][a] = w_f · p_f(a)`.
#[derive(Clone, Debug, PartialEq)]
pub struct JointDistribution {
    table: Vec<Vec<f64>>,
}

impl JointDistribution {
    /// Wraps a table after checking non-negativity and total mass.
    pub fn from_table(table: Vec<Vec<f64>>) -> Result<Self> {
        let width = table.first().map(Vec::len).unwrap_or(0);
        if width == 0 || table.iter().any(|row| row.len() != width) {
            return Err(QleError::Shape("joint table must be rectangular and non-empty".into()));
        }
        let flat: Vec<f64> = table.iter().flatten().copied().collect();
        check_simplex(&flat)?;
        Ok(Self { table })
    }

    pub fn table(&self) -> &[Vec<f64>] {
        &self.table
    }

    pub fn hypothesis_marginal(&self) -> Vec<f64> {
        self.table.iter().map(|row| row.iter().sum()).collect()
    }

    pub fn outcome_marginal(&self) -> Vec<f64> {
        let width = self.table[0].len();
        (0..width).map(|a| self.table.iter().map(|row| row[a]).sum()).collect()
    }

    /// Same table with outcome columns reordered, `new[.][k] = old[.][perm[k]]`.
    pub fn permute_outcomes(&self, perm: &[usize]) -> Self {
        Self {
            table: self
                .table
                .iter()
                .map(|row| perm.iter().map(|&k| row[k]).collect())
                .collect(),
        }
    }
}

/// `table[f][a] = weights[f] · p_f(a)` under `params`.
pub fn joint_distribution(set: &HypothesisSet, weights: &[f64], params: &ControlParams) -> JointDistribution {
    assert_eq!(weights.len(), set.len(), "one weight per hypothesis");
    let probe = Probe::new(params, set.dim());
    let table = set
        .hypotheses()
        .iter()
        .zip(weights)
        .map(|(h, &w)| {
            if w == 0.0 {
                return vec![0.0; set.dim()];
            }
            h.outcome_probs_for(&probe, params.t)
                .probs()
                .iter()
                .map(|p| w * p)
                .collect()
        })
        .collect();
    JointDistribution { table }
}

/// `H(F|Y) = Σ_a q_a H(F | Y = a)` in bits. Empty outcome columns contribute zero.
pub fn conditional_entropy_cost(joint: &JointDistribution) -> f64 {
    // Σ_a q_a H(F|a) = -Σ_{f,a} p(f,a) log p(f,a) + Σ_a q_a log q_a
    let q = joint.outcome_marginal();
    let joint_term: f64 = joint.table.iter().flatten().map(|&p| xlog2x(p)).sum();
    let marginal_term: f64 = q.iter().map(|&x| xlog2x(x)).sum();
    (marginal_term - joint_term).max(0.0)
}

/// `I(F;Y) = H(F) - H(F|Y)` in bits.
pub fn mutual_information(joint: &JointDistribution) -> f64 {
    (shannon_entropy(&joint.hypothesis_marginal()) - conditional_entropy_cost(joint)).max(0.0)
}

/// Classical-quantum state `Σ_f p_f |f⟩⟨f| ⊗ |φ_f⟩⟨φ_f|` in block form.
#[derive(Clone, Debug)]
pub struct CqState {
    pub prior: Vec<f64>,
    pub conditional_states: Vec<StateVector>,
}

impl CqState {
    pub fn new(prior: Vec<f64>, conditional_states: Vec<StateVector>) -> Result<Self> {
        check_simplex(&prior)?;
        if prior.len() != conditional_states.len() || prior.is_empty() {
            return Err(QleError::Shape("one conditional state per prior entry".into()));
        }
        let dim = conditional_states[0].dim();
        if conditional_states.iter().any(|s| s.dim() != dim) {
            return Err(QleError::Shape("conditional states differ in dimension".into()));
        }
        Ok(Self {
            prior,
            conditional_states,
        })
    }

    pub fn register_dim(&self) -> usize {
        self.conditional_states[0].dim()
    }

    /// Dense `ρ_FY` with the hypothesis register as the outer tensor factor.
    pub fn density_matrix(&self) -> Result<HermitianMatrix> {
        let d = self.register_dim();
        let total = self.prior.len() * d;
        if total > ORACLE_MAX_DIM {
            return Err(QleError::OracleTooLarge(total));
        }
        let mut rho = ComplexMatrix::zeros(total);
        for (f, (p, phi)) in self.prior.iter().zip(&self.conditional_states).enumerate() {
            let amps = phi.amplitudes();
            for i in 0..d {
                for j in 0..d {
                    rho[(f * d + i, f * d + j)] = amps[i] * amps[j].conj() * *p;
                }
            }
        }
        HermitianMatrix::new(rho)
    }
}

/// `conditional_states[f] = W · e^{-iH_f t} · |ψ₁⟩`.
pub fn build_cq_state(set: &HypothesisSet, weights: &[f64], params: &ControlParams) -> Result<CqState> {
    if weights.len() != set.len() {
        return Err(QleError::Shape(format!(
            "{} weights for {} hypotheses",
            weights.len(),
            set.len()
        )));
    }
    let probe = Probe::new(params, set.dim());
    let states = set
        .hypotheses()
        .iter()
        .map(|h| StateVector::normalized(probe.w.apply(&h.evolve(probe.psi.amplitudes(), params.t))))
        .collect::<Result<Vec<_>>>()?;
    CqState::new(weights.to_vec(), states)
}

/// Entropic quantities of a dense classical-quantum state, all in bits.
#[derive(Clone, Copy, Debug)]
pub struct CqEntropies {
    /// `S(ρ_Y)` with `ρ_Y = Tr_F ρ_FY`.
    pub marginal: f64,
    /// `S(ρ_FY)`.
    pub joint: f64,
    /// `S(ρ_FY | Z)`: average entropy of the hypothesis register after measuring Y
    /// in the computational basis.
    pub post_measurement: f64,
    /// Basis-dependent discord `S(ρ_Y) - S(ρ_FY) + S(ρ_FY | Z)`.
    pub discord: f64,
    /// `S(ρ_Y) - discord`.
    pub mutual_information: f64,
}

/// Computes every entropy from dense density matrices and eigenvalues.
pub fn cq_entropies(cq: &CqState) -> Result<CqEntropies> {
    let rho = cq.density_matrix()?;
    let rho = rho.as_matrix();
    let d = cq.register_dim();
    let n = cq.prior.len();

    let mut rho_y = ComplexMatrix::zeros(d);
    for f in 0..n {
        for i in 0..d {
            for j in 0..d {
                rho_y[(i, j)] += rho[(f * d + i, f * d + j)];
            }
        }
    }
    let marginal = von_neumann_entropy(&HermitianMatrix::new(rho_y)?)?;
    let joint = von_neumann_entropy(&HermitianMatrix::new(rho.clone())?)?;

    let mut post_measurement = 0.0;
    for a in 0..d {
        let mut block = ComplexMatrix::zeros(n);
        for f in 0..n {
            for g in 0..n {
                block[(f, g)] = rho[(f * d + a, g * d + a)];
            }
        }
        let q = block.trace().re;
        if q <= 0.0 {
            continue;
        }
        let conditional = HermitianMatrix::new(block.scale(Complex64::new(1.0 / q, 0.0)))?;
        post_measurement += q * von_neumann_entropy(&conditional)?;
    }

    let discord = marginal - joint + post_measurement;
    Ok(CqEntropies {
        marginal,
        joint,
        post_measurement,
        discord,
        mutual_information: marginal - discord,
    })
}

/// `I(F;Y) = S(ρ_Y) - D_Y(ρ_FY; Z)` evaluated on the dense state.
pub fn mi_via_density_matrices(cq: &CqState) -> Result<f64> {
    Ok(cq_entropies(cq)?.mutual_information)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::pauli;
    use std::f64::consts::FRAC_PI_2;

    fn joint(rows: &[&[f64]]) -> JointDistribution {
        JointDistribution::from_table(rows.iter().map(|r| r.to_vec()).collect()).unwrap()
    }

    fn xz_set() -> HypothesisSet {
        HypothesisSet::new(vec![("x".into(), pauli::x()), ("z".into(), pauli::z())]).unwrap()
    }

    fn half_pi() -> ControlParams {
        ControlParams::with_time(0.0, 0.0, 0.0, 0.0, FRAC_PI_2).unwrap()
    }

    /// Direct evaluation of Σ_a q_a H(F | Y = a).
    fn conditional_entropy_direct(t: &[Vec<f64>]) -> f64 {
        let width = t[0].len();
        (0..width)
            .map(|a| {
                let column: Vec<f64> = t.iter().map(|row| row[a]).collect();
                let q: f64 = column.iter().sum();
                if q == 0.0 {
                    0.0
                } else {
                    q * shannon_entropy(&column.iter().map(|x| x / q).collect::<Vec<_>>())
                }
            })
            .sum()
    }

    #[test]
    fn joint_examples() {
        let j = joint_distribution(&xz_set(), &[0.5, 0.5], &half_pi());
        let t = j.table();
        assert!(t[0][0].abs() < 1e-15 && (t[0][1] - 0.5).abs() < 1e-15);
        assert!((t[1][0] - 0.5).abs() < 1e-15 && t[1][1].abs() < 1e-15);

        let p = ControlParams::with_time(0.3, 1.0, 2.0, 0.5, 0.7).unwrap();
        let j = joint_distribution(&xz_set(), &[1.0, 0.0], &p);
        assert!((j.table()[0].iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert_eq!(j.table()[1], vec![0.0, 0.0]);
    }

    #[test]
    fn conditional_entropy_examples() {
        assert_eq!(conditional_entropy_cost(&joint(&[&[0.5, 0.0], &[0.0, 0.5]])), 0.0);
        assert!((conditional_entropy_cost(&joint(&[&[0.25, 0.25], &[0.25, 0.25]])) - 1.0).abs() < 1e-15);

        let mixed = joint(&[&[0.5, 0.0], &[0.25, 0.25]]);
        let direct = conditional_entropy_direct(mixed.table());
        let expected = 0.75 * shannon_entropy(&[2.0 / 3.0, 1.0 / 3.0]);
        assert!((direct - expected).abs() < 1e-15);
        assert!((expected - 0.688_721_875_540_867).abs() < 1e-12);
        assert!((conditional_entropy_cost(&mixed) - direct).abs() < 1e-12);
    }

    #[test]
    fn mutual_information_examples() {
        assert!((mutual_information(&joint(&[&[0.5, 0.0], &[0.0, 0.5]])) - 1.0).abs() < 1e-15);
        assert!(mutual_information(&joint(&[&[0.25, 0.25], &[0.25, 0.25]])).abs() < 1e-15);

        let mixed = joint(&[&[0.5, 0.0], &[0.25, 0.25]]);
        let h_y = shannon_entropy(&[0.75, 0.25]);
        // I = H(Y) - H(Y|F) must agree with H(F) - H(F|Y).
        let h_y_given_f = 0.5 * shannon_entropy(&[1.0, 0.0]) + 0.5 * shannon_entropy(&[0.5, 0.5]);
        assert!((mutual_information(&mixed) - (h_y - h_y_given_f)).abs() < 1e-12);
        assert!((mutual_information(&mixed) - 0.311_278_124_459_132_8).abs() < 1e-12);
    }

    #[test]
    fn empty_columns_do_not_produce_nan() {
        let j = joint(&[&[0.5, 0.0, 0.0], &[0.5, 0.0, 0.0]]);
        assert!((conditional_entropy_cost(&j) - 1.0).abs() < 1e-15);
        assert_eq!(mutual_information(&j), 0.0);
    }

    #[test]
    fn cq_state_examples() {
        let p = ControlParams::with_time(0.0, 0.0, 0.0, 0.0, 0.0).unwrap();
        let cq = build_cq_state(&xz_set(), &[1.0, 0.0], &p).unwrap();
        // t = 0 and θ = 0: W = σz acting on |0⟩.
        let expected = StateVector::basis(2, 0);
        assert!((cq.conditional_states[0].overlap(&expected) - 1.0).abs() < 1e-15);

        let cq = build_cq_state(&xz_set(), &[0.5, 0.5], &half_pi()).unwrap();
        assert!((cq.conditional_states[0].overlap(&StateVector::basis(2, 1)) - 1.0).abs() < 1e-12);
        assert!((cq.conditional_states[1].overlap(&StateVector::basis(2, 0)) - 1.0).abs() < 1e-12);
        assert_eq!(cq.prior, vec![0.5, 0.5]);
    }

    #[test]
    fn dense_oracle_examples() {
        let cq = build_cq_state(&xz_set(), &[0.5, 0.5], &half_pi()).unwrap();
        assert!((mi_via_density_matrices(&cq).unwrap() - 1.0).abs() < 1e-12);

        let p = ControlParams::with_time(0.3, 1.0, 2.0, 0.5, 0.7).unwrap();
        let cq = build_cq_state(&xz_set(), &[1.0, 0.0], &p).unwrap();
        assert!(mi_via_density_matrices(&cq).unwrap().abs() < 1e-12);
    }

    #[test]
    fn dense_oracle_rejects_large_states() {
        let states = vec![StateVector::basis(2, 0); 33];
        let cq = CqState::new(vec![1.0 / 33.0; 33], states).unwrap();
        assert!(matches!(
            mi_via_density_matrices(&cq),
            Err(QleError::OracleTooLarge(66))
        ));
    }
}
