//! Dense complex linear algebra for small Hermitian and unitary systems.
//!
//! Everything here works on `dim × dim` row-major matrices of [`Complex64`].
//! Hermitian eigenproblems use a closed form for `dim == 2` and cyclic complex
//! Jacobi rotations otherwise, so results are reproducible bit-for-bit without
//! an external LAPACK.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex64;

use crate::error::{QleError, Result};

/// Tolerance on `|M[i][j] - conj(M[j][i])|` accepted when ingesting a Hermitian matrix.
pub const HERMITIAN_TOL: f64 = 1e-9;
/// Tolerance on the squared norm of a state vector.
pub const NORM_TOL: f64 = 1e-10;
/// Negative eigenvalues of a density matrix below `-DENSITY_TOL` are rejected.
pub const DENSITY_TOL: f64 = 1e-9;

const JACOBI_MAX_SWEEPS: usize = 100;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Square complex matrix stored row-major.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    dim: usize,
    entries: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn zeros(dim: usize) -> Self {
        assert!(dim >= 1, "matrix dimension must be positive");
        Self {
            dim,
            entries: vec![ZERO; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_diagonal(diag: &[Complex64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    /// Builds a matrix from row-major entries; fails unless `entries.len()` is a
    /// positive perfect square.
    pub fn from_row_major(entries: Vec<Complex64>) -> Result<Self> {
        let dim = (entries.len() as f64).sqrt().round() as usize;
        if dim == 0 || dim * dim != entries.len() {
            return Err(QleError::Shape(format!(
                "{} entries do not form a square matrix",
                entries.len()
            )));
        }
        Ok(Self { dim, entries })
    }

    pub fn from_rows(rows: &[Vec<Complex64>]) -> Result<Self> {
        let dim = rows.len();
        if dim == 0 {
            return Err(QleError::Shape("empty matrix".into()));
        }
        let mut entries = Vec::with_capacity(dim * dim);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != dim {
                return Err(QleError::Shape(format!(
                    "row {i} has {} entries, expected {dim}",
                    row.len()
                )));
            }
            entries.extend_from_slice(row);
        }
        Ok(Self { dim, entries })
    }

    /// Convenience constructor for real-valued matrices.
    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        let rows: Vec<Vec<Complex64>> = rows
            .iter()
            .map(|r| r.iter().map(|&x| Complex64::new(x, 0.0)).collect())
            .collect();
        Self::from_rows(&rows)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn rows(&self) -> Vec<Vec<Complex64>> {
        self.entries.chunks(self.dim).map(<[_]>::to_vec).collect()
    }

    pub fn adjoint(&self) -> Self {
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out[(j, i)] = self[(i, j)].conj();
            }
        }
        out
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self {
            dim: self.dim,
            entries: self.entries.iter().map(|&z| z * c).collect(),
        }
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self[(i, i)]).sum()
    }

    pub fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(v.len(), self.dim, "dimension mismatch in matrix-vector product");
        self.entries
            .chunks(self.dim)
            .map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// Largest entrywise modulus.
    pub fn max_abs(&self) -> f64 {
        self.entries.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// `max |self - other|` entrywise.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.dim, other.dim);
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Largest deviation from Hermiticity, `max |M[i][j] - conj(M[j][i])|`.
    pub fn hermiticity_defect(&self) -> f64 {
        let n = self.dim;
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        worst
    }

    /// Kronecker product `self ⊗ other`.
    pub fn kron(&self, other: &Self) -> Self {
        let (n, m) = (self.dim, other.dim);
        let mut out = Self::zeros(n * m);
        for i in 0..n {
            for j in 0..n {
                let a = self[(i, j)];
                if a == ZERO {
                    continue;
                }
                for k in 0..m {
                    for l in 0..m {
                        out[(i * m + k, j * m + l)] = a * other[(k, l)];
                    }
                }
            }
        }
        out
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.entries[i * self.dim + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.entries[i * self.dim + j]
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch in matrix product");
        let n = self.dim;
        let mut out = ComplexMatrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self[(i, k)];
                if a == ZERO {
                    continue;
                }
                for j in 0..n {
                    out[(i, j)] += a * rhs[(k, j)];
                }
            }
        }
        out
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim);
        ComplexMatrix {
            dim: self.dim,
            entries: self.entries.iter().zip(&rhs.entries).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim);
        ComplexMatrix {
            dim: self.dim,
            entries: self.entries.iter().zip(&rhs.entries).map(|(a, b)| a - b).collect(),
        }
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.entries.chunks(self.dim)).finish()
    }
}

/// A Hermitian matrix, exactly symmetrized on construction.
#[derive(Clone, PartialEq, Debug)]
pub struct HermitianMatrix(ComplexMatrix);

impl HermitianMatrix {
    /// Accepts `m` if it is Hermitian within [`HERMITIAN_TOL`] and stores `(m + m†) / 2`.
    pub fn new(m: ComplexMatrix) -> Result<Self> {
        let defect = m.hermiticity_defect();
        if !(defect <= HERMITIAN_TOL) {
            return Err(QleError::NotHermitian(defect));
        }
        let n = m.dim();
        let mut sym = m.clone();
        for i in 0..n {
            sym[(i, i)] = Complex64::new(m[(i, i)].re, 0.0);
            for j in (i + 1)..n {
                let z = (m[(i, j)] + m[(j, i)].conj()) * 0.5;
                sym[(i, j)] = z;
                sym[(j, i)] = z.conj();
            }
        }
        Ok(Self(sym))
    }

    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        Self::new(ComplexMatrix::from_real_rows(rows)?)
    }

    pub fn identity(dim: usize) -> Self {
        Self(ComplexMatrix::identity(dim))
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    pub fn as_matrix(&self) -> &ComplexMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.0
    }

    pub fn scale(&self, c: f64) -> Self {
        Self(self.0.scale(Complex64::new(c, 0.0)))
    }

    pub fn add(&self, other: &Self) -> Self {
        Self(&self.0 + &other.0)
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self(&self.0 - &other.0)
    }

    /// `self + c·𝟙`.
    pub fn shift(&self, c: f64) -> Self {
        let mut m = self.0.clone();
        for i in 0..m.dim() {
            m[(i, i)] += c;
        }
        Self(m)
    }
}

/// Pauli matrices and friends.
pub mod pauli {
    use super::*;

    pub fn x() -> HermitianMatrix {
        HermitianMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]).unwrap()
    }

    pub fn y() -> HermitianMatrix {
        let m = ComplexMatrix::from_rows(&[
            vec![ZERO, Complex64::new(0.0, -1.0)],
            vec![Complex64::new(0.0, 1.0), ZERO],
        ])
        .unwrap();
        HermitianMatrix::new(m).unwrap()
    }

    pub fn z() -> HermitianMatrix {
        HermitianMatrix::from_real_rows(&[&[1.0, 0.0], &[0.0, -1.0]]).unwrap()
    }
}

/// Normalized pure state.
#[derive(Clone, PartialEq, Debug)]
pub struct StateVector(Vec<Complex64>);

impl StateVector {
    pub fn new(amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(QleError::Shape("empty state vector".into()));
        }
        let norm_sq: f64 = amplitudes.iter().map(|z| z.norm_sqr()).sum();
        if !((norm_sq - 1.0).abs() <= NORM_TOL) {
            return Err(QleError::NotNormalized(norm_sq));
        }
        Ok(Self(amplitudes))
    }

    /// Normalizes `amplitudes`; fails on the zero vector.
    pub fn normalized(amplitudes: Vec<Complex64>) -> Result<Self> {
        let norm = amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(QleError::NotNormalized(norm * norm));
        }
        Ok(Self(amplitudes.into_iter().map(|z| z / norm).collect()))
    }

    pub fn basis(dim: usize, index: usize) -> Self {
        let mut v = vec![ZERO; dim];
        v[index] = ONE;
        Self(v)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.0
    }

    /// `U|ψ⟩` for a unitary `U`; renormalizes to absorb rounding.
    pub fn evolve(&self, u: &ComplexMatrix) -> Self {
        let out = u.apply(&self.0);
        let norm = out.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        Self(out.into_iter().map(|z| z / norm).collect())
    }

    /// `|ψ⟩⟨ψ|`.
    pub fn projector(&self) -> HermitianMatrix {
        let n = self.dim();
        let mut m = ComplexMatrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = self.0[i] * self.0[j].conj();
            }
        }
        HermitianMatrix::new(m).expect("outer product is Hermitian")
    }

    /// `|⟨self|other⟩|`.
    pub fn overlap(&self, other: &Self) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| a.conj() * b)
            .sum::<Complex64>()
            .norm()
    }
}

/// Eigenvalues in ascending order with matching eigenvector columns.
#[derive(Clone, Debug)]
pub struct EigenDecomposition {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: ComplexMatrix,
}

impl EigenDecomposition {
    /// `V · diag(f(λ)) · V†`.
    pub fn map_spectrum(&self, f: impl Fn(f64) -> Complex64) -> ComplexMatrix {
        let n = self.eigenvalues.len();
        let v = &self.eigenvectors;
        let d: Vec<Complex64> = self.eigenvalues.iter().map(|&l| f(l)).collect();
        let mut out = ComplexMatrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                let mut acc = ZERO;
                for k in 0..n {
                    acc += v[(i, k)] * d[k] * v[(j, k)].conj();
                }
                out[(i, j)] = acc;
            }
        }
        out
    }

    pub fn reconstruct(&self) -> ComplexMatrix {
        self.map_spectrum(|l| Complex64::new(l, 0.0))
    }
}

/// Eigendecomposition of a Hermitian matrix.
///
/// Eigenvalues come back ascending. Each eigenvector column is phase-normalized so
/// that its largest-magnitude component (first one on ties) is real and positive,
/// which makes the output deterministic for degenerate spectra too.
pub fn hermitian_eig(m: &HermitianMatrix) -> Result<EigenDecomposition> {
    let a = m.as_matrix();
    let mut eig = if a.dim() == 2 { eig_2x2(a) } else { jacobi_eig(a)? };
    normalize_phases(&mut eig.eigenvectors);
    Ok(eig)
}

fn eig_2x2(m: &ComplexMatrix) -> EigenDecomposition {
    let a = m[(0, 0)].re;
    let d = m[(1, 1)].re;
    let b = m[(0, 1)];
    let mean = 0.5 * (a + d);
    let half_diff = 0.5 * (a - d);
    let r = half_diff.hypot(b.norm());
    if r == 0.0 {
        return EigenDecomposition {
            eigenvalues: vec![mean, mean],
            eigenvectors: ComplexMatrix::identity(2),
        };
    }
    // M - mean·𝟙 = r (n·σ); eigenvectors of n·σ from its Bloch angles.
    let nz = (half_diff / r).clamp(-1.0, 1.0);
    let cos_half = ((1.0 + nz) * 0.5).sqrt();
    let sin_half = ((1.0 - nz) * 0.5).sqrt();
    let phase = if b.norm() > 0.0 { b.conj() / b.norm() } else { ONE };
    let plus = [Complex64::new(cos_half, 0.0), phase * sin_half];
    let minus = [-phase.conj() * sin_half, Complex64::new(cos_half, 0.0)];
    let eigenvectors = ComplexMatrix::from_row_major(vec![minus[0], plus[0], minus[1], plus[1]]).expect("2x2");
    EigenDecomposition {
        eigenvalues: vec![mean - r, mean + r],
        eigenvectors,
    }
}

fn off_diagonal_norm(a: &ComplexMatrix) -> f64 {
    let n = a.dim();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a[(i, j)].norm_sqr();
            }
        }
    }
    s.sqrt()
}

fn jacobi_eig(m: &ComplexMatrix) -> Result<EigenDecomposition> {
    let n = m.dim();
    let mut a = m.clone();
    let mut v = ComplexMatrix::identity(n);
    let scale = m.max_abs().max(f64::MIN_POSITIVE);
    let target = f64::EPSILON * scale * (n as f64);

    let mut converged = n == 1;
    for _ in 0..JACOBI_MAX_SWEEPS {
        if off_diagonal_norm(&a) <= target {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                let mag = apq.norm();
                if mag <= f64::MIN_POSITIVE {
                    continue;
                }
                let phase = apq / mag;
                let tau = (a[(q, q)].re - a[(p, p)].re) / (2.0 * mag);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // J acts on the (p, q) plane:
                // [[c, s·e^{iφ}], [-s·e^{-iφ}, c]], A ← J† A J, V ← V J.
                let jpq = phase * s;
                let jqp = -phase.conj() * s;
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = akp * c + akq * jqp;
                    a[(k, q)] = akp * jpq + akq * c;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = apk * c + aqk * jqp.conj();
                    a[(q, k)] = apk * jpq.conj() + aqk * c;
                }
                a[(p, q)] = ZERO;
                a[(q, p)] = ZERO;
                a[(p, p)] = Complex64::new(a[(p, p)].re, 0.0);
                a[(q, q)] = Complex64::new(a[(q, q)].re, 0.0);
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = vkp * c + vkq * jqp;
                    v[(k, q)] = vkp * jpq + vkq * c;
                }
            }
        }
    }
    if !converged && off_diagonal_norm(&a) > target {
        return Err(QleError::EigenNotConverged {
            sweeps: JACOBI_MAX_SWEEPS,
            residual: off_diagonal_norm(&a),
        });
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.total_cmp(&a[(j, j)].re));
    let eigenvalues = order.iter().map(|&i| a[(i, i)].re).collect();
    let mut sorted = ComplexMatrix::zeros(n);
    for (col, &src) in order.iter().enumerate() {
        for row in 0..n {
            sorted[(row, col)] = v[(row, src)];
        }
    }
    Ok(EigenDecomposition {
        eigenvalues,
        eigenvectors: sorted,
    })
}

fn normalize_phases(v: &mut ComplexMatrix) {
    let n = v.dim();
    for col in 0..n {
        let mut best = 0;
        let mut best_mag = -1.0;
        for row in 0..n {
            let mag = v[(row, col)].norm();
            // Prefer the first index unless clearly larger, so near-ties are stable.
            if mag > best_mag * (1.0 + 1e-12) {
                best = row;
                best_mag = mag;
            }
        }
        if best_mag <= 0.0 {
            continue;
        }
        let phase = v[(best, col)].conj() / best_mag;
        for row in 0..n {
            v[(row, col)] *= phase;
        }
        v[(best, col)] = Complex64::new(v[(best, col)].re, 0.0);
    }
}

/// `e^{-iHt}` via the spectral decomposition of `h`.
pub fn mat_exp_hamiltonian(h: &HermitianMatrix, t: f64) -> Result<ComplexMatrix> {
    if !t.is_finite() {
        return Err(QleError::InvalidParameter(format!("evolution time {t} is not finite")));
    }
    let eig = hermitian_eig(h)?;
    Ok(eig.map_spectrum(|l| Complex64::from_polar(1.0, -l * t)))
}

/// Largest singular value of `m`.
pub fn spectral_norm(m: &ComplexMatrix) -> Result<f64> {
    let gram =
        HermitianMatrix::new(&m.adjoint() * m).or_else(|_| HermitianMatrix::new(symmetrize(&(&m.adjoint() * m))))?;
    let eig = hermitian_eig(&gram)?;
    let top = eig.eigenvalues.last().copied().unwrap_or(0.0);
    Ok(top.max(0.0).sqrt())
}

/// Spectral norm of a Hermitian matrix: `max |λ|`.
pub fn hermitian_spectral_norm(m: &HermitianMatrix) -> Result<f64> {
    let eig = hermitian_eig(m)?;
    Ok(eig.eigenvalues.iter().fold(0.0f64, |acc, l| acc.max(l.abs())))
}

fn symmetrize(m: &ComplexMatrix) -> ComplexMatrix {
    let adj = m.adjoint();
    (m + &adj).scale(Complex64::new(0.5, 0.0))
}

/// `x · log2(x)` with `0 · log 0 = 0`.
#[inline]
pub(crate) fn xlog2x(x: f64) -> f64 {
    if x > 0.0 {
        x * x.log2()
    } else {
        0.0
    }
}

/// Von Neumann entropy in bits.
pub fn von_neumann_entropy(rho: &HermitianMatrix) -> Result<f64> {
    let tr = rho.as_matrix().trace().re;
    if !((tr - 1.0).abs() <= DENSITY_TOL) {
        return Err(QleError::InvalidDensityMatrix(format!("trace {tr} != 1")));
    }
    let eig = hermitian_eig(rho)?;
    if let Some(&min) = eig.eigenvalues.first() {
        if min < -DENSITY_TOL {
            return Err(QleError::InvalidDensityMatrix(format!("negative eigenvalue {min}")));
        }
    }
    Ok(-eig.eigenvalues.iter().map(|&l| xlog2x(l.clamp(0.0, 1.0))).sum::<f64>())
}

/// Shannon entropy in bits. Slightly negative entries are clamped to zero and the
/// list is renormalized.
pub fn shannon_entropy(p: &[f64]) -> f64 {
    let total: f64 = p.iter().map(|&x| x.max(0.0)).sum();
    if !(total > 0.0) {
        return 0.0;
    }
    -p.iter().map(|&x| xlog2x(x.max(0.0) / total)).sum::<f64>()
}
