//! Random states, generators and dense Haar unitaries for tests and experiments.

use nalgebra::DVector;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::state::{CMatrix, CVector, DensityMatrix, PureState};

fn complex_normal<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Matrix of i.i.d. standard complex Gaussians.
pub fn ginibre<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| complex_normal(rng))
}

/// GUE-like Hermitian matrix `(G + G†)/2`.
pub fn random_hermitian<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CMatrix {
    let g = ginibre(dim, dim, rng);
    (&g + g.adjoint()) * Complex64::new(0.5, 0.0)
}

/// Random Hermitian matrix rescaled to unit spectral norm.
pub fn random_generator<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CMatrix {
    let h = random_hermitian(dim, rng);
    let eig = crate::state::eig_hermitian(&h).expect("hermitian by construction");
    let norm = eig
        .eigenvalues
        .iter()
        .fold(0.0f64, |acc, x| acc.max(x.abs()));
    h / Complex64::new(norm, 0.0)
}

/// Haar-random pure state.
pub fn random_pure_state<R: Rng + ?Sized>(num_qubits: usize, rng: &mut R) -> PureState {
    let dim = 1usize << num_qubits;
    let v = CVector::from_fn(dim, |_, _| complex_normal(rng));
    PureState::normalized(v).expect("non-zero gaussian vector")
}

/// Random mixed state `GG†/Tr(GG†)` with `G` a `dim × rank` Ginibre matrix.
pub fn random_density<R: Rng + ?Sized>(num_qubits: usize, rank: usize, rng: &mut R) -> DensityMatrix {
    let dim = 1usize << num_qubits;
    let g = ginibre(dim, rank.max(1), rng);
    let mut m = &g * g.adjoint();
    let tr = m.trace();
    m /= tr;
    // Remove rounding asymmetry so the Hermiticity check sees an exact mirror.
    let m = (&m + m.adjoint()) * Complex64::new(0.5, 0.0);
    DensityMatrix::from_matrix(m).expect("ginibre states are valid")
}

/// Dense Haar-random unitary from the QR decomposition of a Ginibre matrix,
/// with the phases of R's diagonal absorbed into Q.
pub fn haar_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CMatrix {
    let qr = ginibre(dim, dim, rng).qr();
    let mut q = qr.q();
    let r = qr.r();
    let phases = DVector::from_fn(dim, |k, _| {
        let d = r[(k, k)];
        if d.norm() > 0.0 {
            d / d.norm()
        } else {
            Complex64::new(1.0, 0.0)
        }
    });
    for (k, mut col) in q.column_iter_mut().enumerate() {
        col *= phases[k];
    }
    q
}
