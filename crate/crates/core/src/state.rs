//! Dense multi-qubit states and operators.
//!
//! Qubit 0 is the most significant bit of a computational-basis index, so an
//! operator acting on qubit 0 is the leftmost factor of a Kronecker product and
//! the basis state `|q0 q1 … q(N-1)⟩` sits at index `Σ_j q_j 2^(N-1-j)`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tolerance;

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub const I: Complex64 = Complex64::new(0.0, 1.0);

/// Single-qubit Pauli matrices.
pub mod pauli {
    use super::{CMatrix, I, ONE, ZERO};

    pub fn identity() -> CMatrix {
        CMatrix::identity(2, 2)
    }

    pub fn x() -> CMatrix {
        CMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO])
    }

    pub fn y() -> CMatrix {
        CMatrix::from_row_slice(2, 2, &[ZERO, -I, I, ZERO])
    }

    pub fn z() -> CMatrix {
        CMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
    Z,
}

/// Number of qubits for a dimension, if it is a power of two.
pub fn qubits_for_dim(dim: usize) -> Option<usize> {
    (dim.is_power_of_two()).then(|| dim.trailing_zeros() as usize)
}

/// Value (0 or 1) of qubit `q` in basis index `s` of an `n`-qubit register.
#[inline]
pub fn bit(s: usize, q: usize, n: usize) -> usize {
    (s >> (n - 1 - q)) & 1
}

fn check_square(m: &CMatrix) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(Error::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    Ok(())
}

/// max |m_ij − conj(m_ji)|
pub fn hermitian_deviation(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// max |(m†m − I)_ij|
pub fn unitary_deviation(m: &CMatrix) -> f64 {
    let prod = m.adjoint() * m;
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let target = if i == j { ONE } else { ZERO };
            worst = worst.max((prod[(i, j)] - target).norm());
        }
    }
    worst
}

/// Largest entry magnitude of `a − b`.
pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// Kronecker product `a ⊗ b` of two square matrices.
pub fn kron(a: &CMatrix, b: &CMatrix) -> Result<CMatrix> {
    check_square(a)?;
    check_square(b)?;
    Ok(a.kronecker(b))
}

/// Embeds a 2×2 operator acting on qubit `target` of an `n`-qubit register.
pub fn embed_single_qubit(op: &CMatrix, target: usize, n: usize) -> Result<CMatrix> {
    if op.shape() != (2, 2) {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: op.nrows(),
        });
    }
    if target >= n {
        return Err(Error::param(format!("qubit {target} outside register of {n}")));
    }
    let dim = 1usize << n;
    let mut out = CMatrix::zeros(dim, dim);
    let shift = n - 1 - target;
    for col in 0..dim {
        let b = (col >> shift) & 1;
        for a in 0..2 {
            let v = op[(a, b)];
            if v != ZERO {
                let row = (col & !(1 << shift)) | (a << shift);
                out[(row, col)] += v;
            }
        }
    }
    Ok(out)
}

/// Collective spin `J_axis = Σ_j σ_axis^(j) / 2` on `n` qubits.
pub fn collective_spin(axis: Axis, n: usize) -> Result<CMatrix> {
    if n == 0 {
        return Err(Error::param("collective spin needs at least one qubit"));
    }
    if n > tolerance::MAX_QUBITS {
        return Err(Error::param(format!("{n} qubits exceeds the dense limit")));
    }
    let dim = 1usize << n;
    let mut out = CMatrix::zeros(dim, dim);
    for s in 0..dim {
        for q in 0..n {
            let b = bit(s, q, n);
            let flipped = s ^ (1 << (n - 1 - q));
            match axis {
                Axis::Z => out[(s, s)] += if b == 0 { 0.5 } else { -0.5 },
                Axis::X => out[(flipped, s)] += 0.5,
                // σ_y|0⟩ = i|1⟩, σ_y|1⟩ = −i|0⟩
                Axis::Y => out[(flipped, s)] += if b == 0 { I * 0.5 } else { -I * 0.5 },
            }
        }
    }
    Ok(out)
}

/// Eigenvalue of `J_z` for basis index `s`: (#zeros − #ones)/2.
pub fn jz_eigenvalue(s: usize, n: usize) -> f64 {
    let ones = (s & ((1usize << n) - 1)).count_ones() as f64;
    n as f64 / 2.0 - ones
}

/// `a b − b a`
pub fn commutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b - b * a
}

/// Eigen-decomposition of a Hermitian matrix with eigenvalues sorted descending.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    pub eigenvalues: DVector<f64>,
    /// Eigenvectors stored as columns, in the order of `eigenvalues`.
    pub eigenvectors: CMatrix,
}

impl SpectralDecomposition {
    pub fn reconstruct(&self) -> CMatrix {
        self.map_eigenvalues(|x| Complex64::new(x, 0.0))
    }

    /// `V f(Λ) V†`
    pub fn map_eigenvalues(&self, f: impl Fn(f64) -> Complex64) -> CMatrix {
        let v = &self.eigenvectors;
        let mut scaled = v.clone();
        for (k, mut col) in scaled.column_iter_mut().enumerate() {
            col *= f(self.eigenvalues[k]);
        }
        scaled * v.adjoint()
    }
}

/// Hermitian eigensolver.
///
/// The input is symmetrized before diagonalization; inputs further than
/// `1e-9` from Hermitian are rejected.
pub fn eig_hermitian(m: &CMatrix) -> Result<SpectralDecomposition> {
    check_square(m)?;
    let dev = hermitian_deviation(m);
    if dev > tolerance::EIG_HERMITIAN {
        return Err(Error::NotHermitian(dev));
    }
    let sym = (m + m.adjoint()) * Complex64::new(0.5, 0.0);
    let eig = sym.symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let eigenvalues = DVector::from_iterator(order.len(), order.iter().map(|&k| eig.eigenvalues[k]));
    let eigenvectors = CMatrix::from_columns(
        &order
            .iter()
            .map(|&k| eig.eigenvectors.column(k).into_owned())
            .collect::<Vec<_>>(),
    );
    Ok(SpectralDecomposition {
        eigenvalues,
        eigenvectors,
    })
}

/// `exp(−i H t)` for Hermitian `H`, via its spectral decomposition.
pub fn expm_hermitian(h: &CMatrix, t: f64) -> Result<CMatrix> {
    let eig = eig_hermitian(h)?;
    Ok(eig.map_eigenvalues(|lambda| Complex64::from_polar(1.0, -lambda * t)))
}

/// Normalized state vector on `N` qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    amplitudes: CVector,
    num_qubits: usize,
}

impl PureState {
    pub fn new(amplitudes: CVector) -> Result<Self> {
        let num_qubits = qubits_for_dim(amplitudes.len()).ok_or_else(|| {
            Error::InvalidState(format!("dimension {} is not a power of two", amplitudes.len()))
        })?;
        let norm = amplitudes.norm_squared();
        if (norm - 1.0).abs() > tolerance::NORM {
            return Err(Error::InvalidState(format!("squared norm {norm} != 1")));
        }
        Ok(Self {
            amplitudes,
            num_qubits,
        })
    }

    /// Rescales `amplitudes` to unit norm.
    pub fn normalized(amplitudes: CVector) -> Result<Self> {
        let norm = amplitudes.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::InvalidState("cannot normalize a zero vector".into()));
        }
        Self::new(amplitudes / Complex64::new(norm, 0.0))
    }

    pub fn basis(num_qubits: usize, index: usize) -> Result<Self> {
        let dim = 1usize << num_qubits;
        if index >= dim {
            return Err(Error::param(format!("basis index {index} >= {dim}")));
        }
        let mut v = CVector::zeros(dim);
        v[index] = ONE;
        Self::new(v)
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn populations(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    pub fn to_density(&self) -> DensityMatrix {
        let m = &self.amplitudes * self.amplitudes.adjoint();
        DensityMatrix::from_parts(m, self.num_qubits)
    }
}

/// Hermitian, unit-trace, positive-semidefinite matrix of dimension 2^N.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    entries: CMatrix,
    num_qubits: usize,
}

impl DensityMatrix {
    /// Validates all three invariants, including positivity (one eigensolve).
    pub fn from_matrix(entries: CMatrix) -> Result<Self> {
        check_square(&entries)?;
        let num_qubits = qubits_for_dim(entries.nrows()).ok_or_else(|| {
            Error::InvalidState(format!("dimension {} is not a power of two", entries.nrows()))
        })?;
        let rho = Self::from_parts(entries, num_qubits);
        rho.validate()?;
        Ok(rho)
    }

    /// Wraps a matrix that is a density matrix by construction.
    pub(crate) fn from_parts(entries: CMatrix, num_qubits: usize) -> Self {
        debug_assert_eq!(entries.nrows(), 1 << num_qubits);
        Self {
            entries,
            num_qubits,
        }
    }

    pub fn maximally_mixed(num_qubits: usize) -> Self {
        let dim = 1usize << num_qubits;
        let entries = CMatrix::identity(dim, dim) * Complex64::new(1.0 / dim as f64, 0.0);
        Self::from_parts(entries, num_qubits)
    }

    /// Projector onto computational-basis state `index`.
    pub fn basis(num_qubits: usize, index: usize) -> Result<Self> {
        Ok(PureState::basis(num_qubits, index)?.to_density())
    }

    /// Checks Hermiticity, unit trace and positivity.
    pub fn validate(&self) -> Result<()> {
        let herm = hermitian_deviation(&self.entries);
        if herm > tolerance::HERMITIAN {
            return Err(Error::NotHermitian(herm));
        }
        let tr = self.trace();
        if (tr.re - 1.0).abs() > tolerance::TRACE || tr.im.abs() > tolerance::TRACE {
            return Err(Error::InvalidState(format!("trace {tr} != 1")));
        }
        let eig = eig_hermitian(&self.entries)?;
        let min = eig.eigenvalues[eig.eigenvalues.len() - 1];
        if min < tolerance::PSD {
            return Err(Error::InvalidState(format!("negative eigenvalue {min:.3e}")));
        }
        Ok(())
    }

    pub fn entries(&self) -> &CMatrix {
        &self.entries
    }

    pub fn into_entries(self) -> CMatrix {
        self.entries
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn trace(&self) -> Complex64 {
        self.entries.trace()
    }

    pub fn spectrum(&self) -> Result<SpectralDecomposition> {
        eig_hermitian(&self.entries)
    }

    /// `U ρ U†`
    pub fn conjugate_by(&self, u: &CMatrix) -> Result<Self> {
        if u.nrows() != self.dim() || u.ncols() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: u.nrows(),
            });
        }
        Ok(Self::from_parts(u * &self.entries * u.adjoint(), self.num_qubits))
    }

    /// Entry-wise map `ρ_ss' ↦ f(s, s') ρ_ss'`; `f` must keep the result a state.
    pub(crate) fn map_entries(&self, f: impl Fn(usize, usize) -> Complex64) -> Self {
        let dim = self.dim();
        let entries = CMatrix::from_fn(dim, dim, |r, c| self.entries[(r, c)] * f(r, c));
        Self::from_parts(entries, self.num_qubits)
    }

    /// Convex combination `Σ w_k ρ_k` of states of equal dimension.
    pub fn mixture(parts: &[(f64, &DensityMatrix)]) -> Result<Self> {
        let first = parts
            .first()
            .ok_or_else(|| Error::InvalidState("empty mixture".into()))?;
        let dim = first.1.dim();
        let mut acc = CMatrix::zeros(dim, dim);
        let mut total = 0.0;
        for (w, rho) in parts {
            if rho.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: rho.dim(),
                });
            }
            if *w < 0.0 {
                return Err(Error::param("negative mixture weight"));
            }
            acc += rho.entries() * Complex64::new(*w, 0.0);
            total += w;
        }
        if (total - 1.0).abs() > tolerance::TRACE {
            return Err(Error::param(format!("mixture weights sum to {total}")));
        }
        Ok(Self::from_parts(acc, first.1.num_qubits))
    }
}

/// Complex matrix with U†U = I and a record of how it was drawn.
#[derive(Debug, Clone)]
pub struct UnitaryMatrix {
    entries: CMatrix,
    provenance: Provenance,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub ensemble: String,
    pub params: Vec<f64>,
}

impl UnitaryMatrix {
    pub fn new(entries: CMatrix, provenance: Provenance) -> Result<Self> {
        check_square(&entries)?;
        let dev = unitary_deviation(&entries);
        if dev > tolerance::UNITARY {
            return Err(Error::NotUnitary(dev));
        }
        Ok(Self {
            entries,
            provenance,
        })
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            entries: CMatrix::identity(dim, dim),
            provenance: Provenance {
                ensemble: "identity".into(),
                params: Vec::new(),
            },
        }
    }

    pub fn entries(&self) -> &CMatrix {
        &self.entries
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }
}

/// Tr ρ²
pub fn purity(rho: &DensityMatrix) -> f64 {
    rho.entries().iter().map(|z| z.norm_sqr()).sum()
}

/// Tr(ρ₁ρ₂); exactly symmetric in its arguments.
pub fn overlap(rho1: &DensityMatrix, rho2: &DensityMatrix) -> Result<f64> {
    if rho1.dim() != rho2.dim() {
        return Err(Error::DimensionMismatch {
            expected: rho1.dim(),
            found: rho2.dim(),
        });
    }
    // Tr(ρ₁ρ₂) = Σ_ij ρ₁_ij conj(ρ₂_ij) for Hermitian ρ₂.
    Ok(rho1
        .entries()
        .iter()
        .zip(rho2.entries().iter())
        .map(|(a, b)| a.re * b.re + a.im * b.im)
        .sum())
}
