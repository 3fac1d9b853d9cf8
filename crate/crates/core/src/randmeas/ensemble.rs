//! Random-unitary ensembles.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::propagate::{hadamard_all, ChebyshevWork, XBasisHamiltonian};
use super::rng::{domain, SeedStream};
use crate::dynamics::{apply_single_qubit, IsingParams};
use crate::error::{Error, Result};
use crate::state::{CMatrix, CVector, Provenance, UnitaryMatrix, I, ONE, ZERO};
use crate::tolerance;

pub type Mat2 = [[Complex64; 2]; 2];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnsembleKind {
    /// Haar single-qubit unitary written as `Rx(α)Ry(β)Rx(γ)`.
    HaarSingleQubitEuler,
    /// Independent Haar unitary on every qubit.
    HaarLocalProduct,
    /// `Π_m exp(−i(H_s + Σ_j Δ_m^j σz^j)T)` with Gaussian disorder.
    HamiltonianEvolution,
}

impl EnsembleKind {
    pub fn name(&self) -> &'static str {
        match self {
            Self::HaarSingleQubitEuler => "haar_single_qubit_euler",
            Self::HaarLocalProduct => "haar_local_product",
            Self::HamiltonianEvolution => "hamiltonian_evolution",
        }
    }
}

/// Parameters of the disordered time-evolution ensemble.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvolutionSpec {
    /// Number of segments K.
    pub segments: usize,
    /// Duration T of each segment.
    pub segment_duration: f64,
    /// Standard deviation δ of the on-site fields.
    pub disorder_std: f64,
    pub ising: IsingParams,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSpec {
    pub kind: EnsembleKind,
    pub num_qubits: usize,
    pub evolution: Option<EvolutionSpec>,
}

impl EnsembleSpec {
    pub fn single_qubit_euler() -> Self {
        Self {
            kind: EnsembleKind::HaarSingleQubitEuler,
            num_qubits: 1,
            evolution: None,
        }
    }

    pub fn local_haar(num_qubits: usize) -> Self {
        Self {
            kind: EnsembleKind::HaarLocalProduct,
            num_qubits,
            evolution: None,
        }
    }

    pub fn hamiltonian_evolution(evolution: EvolutionSpec) -> Self {
        Self {
            kind: EnsembleKind::HamiltonianEvolution,
            num_qubits: evolution.ising.num_qubits,
            evolution: Some(evolution),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_qubits == 0 || self.num_qubits > tolerance::MAX_QUBITS {
            return Err(Error::param(format!(
                "ensemble needs 1..={} qubits, got {}",
                tolerance::MAX_QUBITS,
                self.num_qubits
            )));
        }
        match self.kind {
            EnsembleKind::HaarSingleQubitEuler if self.num_qubits != 1 => Err(Error::param(
                "the Euler ensemble acts on a single qubit",
            )),
            EnsembleKind::HamiltonianEvolution => {
                let ev = self
                    .evolution
                    .as_ref()
                    .ok_or_else(|| Error::param("hamiltonian_evolution needs evolution parameters"))?;
                ev.ising.validate()?;
                if ev.ising.num_qubits != self.num_qubits {
                    return Err(Error::param(format!(
                        "ising model has {} qubits, ensemble has {}",
                        ev.ising.num_qubits, self.num_qubits
                    )));
                }
                if ev.segments == 0 {
                    return Err(Error::param("need at least one evolution segment"));
                }
                if !(ev.segment_duration > 0.0) || !ev.segment_duration.is_finite() {
                    return Err(Error::param(format!(
                        "segment duration must be > 0, got {}",
                        ev.segment_duration
                    )));
                }
                if !(ev.disorder_std >= 0.0) || !ev.disorder_std.is_finite() {
                    return Err(Error::param(format!(
                        "disorder std must be >= 0, got {}",
                        ev.disorder_std
                    )));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }
}

/// Haar 2×2 unitary `[[cos θ/2, −e^{iλ} sin θ/2], [e^{iφ} sin θ/2, e^{i(λ+φ)} cos θ/2]]`
/// with `θ = 2 asin √ξ`. Returns the matrix and `[λ, θ, φ]`.
pub fn haar_qubit<R: Rng + ?Sized>(rng: &mut R) -> (Mat2, [f64; 3]) {
    let xi: f64 = rng.random();
    let theta = 2.0 * xi.sqrt().asin();
    let lambda = rng.random::<f64>() * TAU;
    let phi = rng.random::<f64>() * TAU;
    (qubit_unitary(lambda, theta, phi), [lambda, theta, phi])
}

pub fn qubit_unitary(lambda: f64, theta: f64, phi: f64) -> Mat2 {
    let (s, c) = (0.5 * theta).sin_cos();
    [
        [ONE * c, -Complex64::from_polar(s, lambda)],
        [Complex64::from_polar(s, phi), Complex64::from_polar(c, lambda + phi)],
    ]
}

pub fn rx(angle: f64) -> Mat2 {
    let (s, c) = (0.5 * angle).sin_cos();
    [[ONE * c, -I * s], [-I * s, ONE * c]]
}

pub fn ry(angle: f64) -> Mat2 {
    let (s, c) = (0.5 * angle).sin_cos();
    [[ONE * c, -ONE * s], [ONE * s, ONE * c]]
}

pub fn mat2_mul(a: &Mat2, b: &Mat2) -> Mat2 {
    let mut out = [[ZERO; 2]; 2];
    for (r, row) in out.iter_mut().enumerate() {
        for (c, v) in row.iter_mut().enumerate() {
            *v = a[r][0] * b[0][c] + a[r][1] * b[1][c];
        }
    }
    out
}

fn mat2_adjoint(a: &Mat2) -> Mat2 {
    [[a[0][0].conj(), a[1][0].conj()], [a[0][1].conj(), a[1][1].conj()]]
}

/// Angles `[α, β, γ]` with `u ∝ Rx(α)Ry(β)Rx(γ)` up to a global phase.
pub fn euler_angles(u: &Mat2) -> [f64; 3] {
    // Conjugating by Ry(π/2) maps Rx to Rz, leaving a ZYZ decomposition.
    let w = ry(std::f64::consts::FRAC_PI_2);
    let mut v = mat2_mul(&mat2_adjoint(&w), &mat2_mul(u, &w));
    let det = v[0][0] * v[1][1] - v[0][1] * v[1][0];
    let norm = det.sqrt();
    for row in v.iter_mut() {
        for x in row.iter_mut() {
            *x /= norm;
        }
    }
    let (a00, a10) = (v[0][0].norm(), v[1][0].norm());
    let beta = 2.0 * a10.atan2(a00);
    let sum = if a00 > 1e-12 { -2.0 * v[0][0].arg() } else { 0.0 };
    let diff = if a10 > 1e-12 { 2.0 * v[1][0].arg() } else { 0.0 };
    [0.5 * (sum + diff), beta, 0.5 * (sum - diff)]
}

pub fn euler_unitary(angles: &[f64; 3]) -> Mat2 {
    mat2_mul(&rx(angles[0]), &mat2_mul(&ry(angles[1]), &rx(angles[2])))
}

/// One member of an ensemble, identified by its draw index.
#[derive(Debug, Clone)]
pub enum UnitaryDraw {
    Single { matrix: Mat2, angles: [f64; 3] },
    Local { factors: Vec<Mat2>, params: Vec<[f64; 3]> },
    /// Disorder fields, segment-major (`segments × num_qubits`).
    Evolution { fields: Vec<f64> },
}

impl UnitaryDraw {
    pub fn params(&self) -> Vec<f64> {
        match self {
            Self::Single { angles, .. } => angles.to_vec(),
            Self::Local { params, .. } => params.iter().flatten().copied().collect(),
            Self::Evolution { fields } => fields.clone(),
        }
    }
}

/// Validated ensemble with its seed stream and precomputed tables.
#[derive(Debug, Clone)]
pub struct Ensemble {
    spec: EnsembleSpec,
    seeds: SeedStream,
    x_diag: Vec<f64>,
}

impl Ensemble {
    pub fn new(spec: EnsembleSpec, seeds: SeedStream) -> Result<Self> {
        spec.validate()?;
        let x_diag = match &spec.evolution {
            Some(ev) if spec.kind == EnsembleKind::HamiltonianEvolution => ev.ising.x_basis_diagonal(),
            _ => Vec::new(),
        };
        Ok(Self {
            spec,
            seeds: seeds.derive(domain::UNITARIES),
            x_diag,
        })
    }

    pub fn spec(&self) -> &EnsembleSpec {
        &self.spec
    }

    pub fn num_qubits(&self) -> usize {
        self.spec.num_qubits
    }

    pub fn dim(&self) -> usize {
        1 << self.spec.num_qubits
    }

    pub fn draw(&self, index: u64) -> UnitaryDraw {
        let mut rng = self.seeds.rng(index);
        match self.spec.kind {
            EnsembleKind::HaarSingleQubitEuler => {
                let (u, _) = haar_qubit(&mut rng);
                let angles = euler_angles(&u);
                UnitaryDraw::Single {
                    matrix: euler_unitary(&angles),
                    angles,
                }
            }
            EnsembleKind::HaarLocalProduct => {
                let (factors, params) = (0..self.spec.num_qubits).map(|_| haar_qubit(&mut rng)).unzip();
                UnitaryDraw::Local { factors, params }
            }
            EnsembleKind::HamiltonianEvolution => {
                let ev = self.spec.evolution.as_ref().expect("validated");
                let count = ev.segments * self.spec.num_qubits;
                let fields = if ev.disorder_std > 0.0 {
                    let normal = Normal::new(0.0, ev.disorder_std).expect("validated std");
                    (0..count).map(|_| normal.sample(&mut rng)).collect()
                } else {
                    vec![0.0; count]
                };
                UnitaryDraw::Evolution { fields }
            }
        }
    }

    /// Left-multiplies every column of `cols` by the drawn unitary.
    pub fn apply(&self, draw: &UnitaryDraw, cols: &mut CMatrix) -> Result<()> {
        if cols.nrows() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: cols.nrows(),
            });
        }
        let n = self.spec.num_qubits;
        match draw {
            UnitaryDraw::Single { matrix, .. } => self.apply_local(std::slice::from_ref(matrix), cols),
            UnitaryDraw::Local { factors, .. } => self.apply_local(factors, cols),
            UnitaryDraw::Evolution { fields } => {
                let ev = self.spec.evolution.as_ref().expect("validated");
                let dim = self.dim();
                let mut work = ChebyshevWork::default();
                for col in cols.as_mut_slice().chunks_mut(dim) {
                    hadamard_all(col);
                    // Rightmost factor of the product acts first.
                    for seg in fields.chunks(n).rev() {
                        let h = XBasisHamiltonian {
                            diag: &self.x_diag,
                            fields: seg,
                        };
                        h.evolve(col, ev.segment_duration, &mut work);
                    }
                    hadamard_all(col);
                }
            }
        }
        Ok(())
    }

    fn apply_local(&self, factors: &[Mat2], cols: &mut CMatrix) {
        let n = self.spec.num_qubits;
        let dim = self.dim();
        for col in cols.as_mut_slice().chunks_mut(dim) {
            let mut v = CVector::from_column_slice(col);
            for (q, f) in factors.iter().enumerate() {
                apply_single_qubit(&mut v, f, q, n);
            }
            col.copy_from_slice(v.as_slice());
        }
    }

    /// Dense matrix of draw `index`.
    pub fn unitary(&self, index: u64) -> Result<UnitaryMatrix> {
        let draw = self.draw(index);
        let mut u = CMatrix::identity(self.dim(), self.dim());
        self.apply(&draw, &mut u)?;
        UnitaryMatrix::new(
            u,
            Provenance {
                ensemble: self.spec.kind.name().into(),
                params: draw.params(),
            },
        )
    }
}

/// Dense unitary number `index` from the ensemble seeded by `seeds`.
pub fn sample_unitary(spec: &EnsembleSpec, seeds: SeedStream, index: u64) -> Result<UnitaryMatrix> {
    Ensemble::new(spec.clone(), seeds)?.unitary(index)
}
