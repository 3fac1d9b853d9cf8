//! Exact metrology quantities used as oracles for the randomized estimators.
//!
//! Conventions: the superfidelity `g` is the squared-fidelity-like quantity
//! `Tr ρ₁ρ₂ + √((1−Tr ρ₁²)(1−Tr ρ₂²))`, which equals `|⟨ψ|φ⟩|²` for pure
//! states. The modified Bures distance is `D_G = 8(1 − √g)`, so that
//! `D_G(ρ_θ, ρ_{θ+dθ}) = F_G dθ² + O(dθ³)` with `F_G` equal to the QFI for
//! pure states and a lower bound on it otherwise.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::state::{
    commutator, eig_hermitian, hermitian_deviation, overlap, purity, CMatrix, DensityMatrix, I,
};
use crate::tolerance;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QfiKind {
    ExactQfi,
    SubQfi,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QfiResult {
    pub value: f64,
    pub kind: QfiKind,
    pub generator_note: String,
    /// Finite step used for a sub-QFI ratio.
    pub dtheta: Option<f64>,
}

/// Default finite-difference step for black-box state families.
pub const FD_STEP: f64 = 1e-5;

fn same_dim(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::DimensionMismatch {
            expected: a,
            found: b,
        });
    }
    Ok(())
}

/// QFI from the spectral sum `Σ 2|⟨λ|∂ρ|λ'⟩|² / (p_λ + p_λ')`.
pub fn exact_qfi(rho_theta: &DensityMatrix, d_rho: &CMatrix) -> Result<QfiResult> {
    exact_qfi_with_cutoff(rho_theta, d_rho, tolerance::QFI_EIGEN_CUTOFF)
}

/// [`exact_qfi`] with an explicit cutoff on `p_λ + p_λ'`.
pub fn exact_qfi_with_cutoff(
    rho_theta: &DensityMatrix,
    d_rho: &CMatrix,
    cutoff: f64,
) -> Result<QfiResult> {
    same_dim(rho_theta.dim(), d_rho.nrows())?;
    same_dim(rho_theta.dim(), d_rho.ncols())?;
    let dev = hermitian_deviation(d_rho);
    if dev > tolerance::EIG_HERMITIAN {
        return Err(Error::NotHermitian(dev));
    }
    let eig = rho_theta.spectrum()?;
    let v = &eig.eigenvectors;
    let in_eigenbasis = v.adjoint() * d_rho * v;
    let p = &eig.eigenvalues;
    let dim = p.len();
    let mut value = 0.0;
    for a in 0..dim {
        for b in 0..dim {
            let denom = p[a] + p[b];
            if denom > cutoff {
                value += 2.0 * in_eigenbasis[(a, b)].norm_sqr() / denom;
            }
        }
    }
    Ok(QfiResult {
        value,
        kind: QfiKind::ExactQfi,
        generator_note: "spectral sum over d_rho".into(),
        dtheta: None,
    })
}

/// `∂θ ρ_θ = −i[G, ρ]` for `ρ_θ = e^{−iθG} ρ e^{iθG}`.
pub fn unitary_derivative(rho: &DensityMatrix, generator: &CMatrix) -> Result<CMatrix> {
    same_dim(rho.dim(), generator.nrows())?;
    same_dim(rho.dim(), generator.ncols())?;
    let dev = hermitian_deviation(generator);
    if dev > tolerance::EIG_HERMITIAN {
        return Err(Error::NotHermitian(dev));
    }
    Ok(commutator(generator, rho.entries()) * (-I))
}

/// QFI of the unitary family generated by `generator`; independent of θ.
pub fn exact_qfi_unitary(rho: &DensityMatrix, generator: &CMatrix) -> Result<QfiResult> {
    let d_rho = unitary_derivative(rho, generator)?;
    let mut out = exact_qfi(rho, &d_rho)?;
    out.generator_note = "unitary: d_rho = -i[G, rho]".into();
    Ok(out)
}

/// Central difference with one Richardson extrapolation step.
pub fn finite_difference_derivative<F>(family: F, theta: f64, step: f64) -> Result<CMatrix>
where
    F: Fn(f64) -> Result<DensityMatrix>,
{
    if !(step > 0.0) {
        return Err(Error::param("finite-difference step must be positive"));
    }
    let central = |h: f64| -> Result<CMatrix> {
        let plus = family(theta + h)?;
        let minus = family(theta - h)?;
        same_dim(plus.dim(), minus.dim())?;
        Ok((plus.entries() - minus.entries()) / Complex64::new(2.0 * h, 0.0))
    };
    let coarse = central(step)?;
    let fine = central(step / 2.0)?;
    let d = (fine * Complex64::new(4.0, 0.0) - coarse) / Complex64::new(3.0, 0.0);
    // Restore exact Hermiticity lost to rounding.
    Ok((&d + d.adjoint()) * Complex64::new(0.5, 0.0))
}

/// QFI of a black-box family at `theta`, with the derivative from
/// [`finite_difference_derivative`].
pub fn exact_qfi_family<F>(family: F, theta: f64) -> Result<QfiResult>
where
    F: Fn(f64) -> Result<DensityMatrix>,
{
    let rho = family(theta)?;
    let d_rho = finite_difference_derivative(&family, theta, FD_STEP)?;
    let mut out = exact_qfi(&rho, &d_rho)?;
    out.generator_note = format!("finite difference, step {FD_STEP:e}");
    Ok(out)
}

/// Superfidelity `Tr ρ₁ρ₂ + √((1−Tr ρ₁²)(1−Tr ρ₂²))`, clamped to [0, 1].
pub fn superfidelity(rho1: &DensityMatrix, rho2: &DensityMatrix) -> Result<f64> {
    let cross = overlap(rho1, rho2)?;
    Ok(superfidelity_from_traces(cross, purity(rho1), purity(rho2)))
}

/// Superfidelity assembled from the three trace functionals.
pub fn superfidelity_from_traces(cross: f64, purity1: f64, purity2: f64) -> f64 {
    let mixedness = (1.0 - purity1).max(0.0) * (1.0 - purity2).max(0.0);
    (cross + mixedness.sqrt()).clamp(0.0, 1.0)
}

/// `8(1 − √g)` for a superfidelity value `g`.
pub fn bures_from_superfidelity(g: f64) -> f64 {
    8.0 * (1.0 - g.clamp(0.0, 1.0).sqrt())
}

/// Modified Bures distance, in [0, 8].
pub fn modified_bures_distance(rho1: &DensityMatrix, rho2: &DensityMatrix) -> Result<f64> {
    Ok(bures_from_superfidelity(superfidelity(rho1, rho2)?))
}

/// Finite-step sub-QFI `D_G(ρ_θ₀, ρ_θ₀+dθ) / dθ²`.
pub fn sub_qfi_exact<F>(family: F, theta0: f64, dtheta: f64) -> Result<QfiResult>
where
    F: Fn(f64) -> Result<DensityMatrix>,
{
    if !(dtheta > 0.0) || !dtheta.is_finite() {
        return Err(Error::param(format!("sub-QFI needs dtheta > 0, got {dtheta}")));
    }
    let a = family(theta0)?;
    let b = family(theta0 + dtheta)?;
    let d = modified_bures_distance(&a, &b)?;
    Ok(QfiResult {
        value: d / (dtheta * dtheta),
        kind: QfiKind::SubQfi,
        generator_note: format!("D_G / dtheta^2 at dtheta = {dtheta}"),
        dtheta: Some(dtheta),
    })
}

/// PSD square root. Eigenvalues below the support threshold, including
/// negative rounding noise, are clipped to zero.
pub fn psd_sqrt(m: &CMatrix) -> Result<CMatrix> {
    let eig = eig_hermitian(m)?;
    let floor = tolerance::SUPPORT * eig.eigenvalues.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    Ok(eig.map_eigenvalues(|x| Complex64::new(if x > floor { x.sqrt() } else { 0.0 }, 0.0)))
}

/// Uhlmann fidelity `(Tr √(√ρ₁ ρ₂ √ρ₁))²`, clamped to [0, 1].
pub fn uhlmann_fidelity(rho1: &DensityMatrix, rho2: &DensityMatrix) -> Result<f64> {
    same_dim(rho1.dim(), rho2.dim())?;
    // Tr √(√ρ₁ ρ₂ √ρ₁) is the nuclear norm of √ρ₁ √ρ₂. Summing singular
    // values avoids square roots of rounding-level eigenvalues, which would
    // lift the result by ~1e-8 when either state is rank deficient.
    let product = psd_sqrt(rho1.entries())? * psd_sqrt(rho2.entries())?;
    let root_trace: f64 = product.singular_values().iter().sum();
    Ok((root_trace * root_trace).clamp(0.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{
        dephase, encode_phase, ghz_circuit, ghz_prepare, ramsey_state_with_phase, DephasingParams,
    };
    use crate::random::{random_density, random_pure_state};
    use crate::state::{collective_spin, Axis, PureState};
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    /// Oracle for pure states: 4 Var(G).
    fn four_variance(psi: &PureState, g: &CMatrix) -> f64 {
        let v = psi.amplitudes();
        let mean = (v.adjoint() * g * v)[(0, 0)].re;
        let second = (v.adjoint() * g * g * v)[(0, 0)].re;
        4.0 * (second - mean * mean)
    }

    #[test]
    fn ghz_qfi_is_n_squared() {
        for n in [4usize, 8] {
            let psi = ghz_prepare(n).unwrap();
            let jz = collective_spin(Axis::Z, n).unwrap();
            let f = exact_qfi_unitary(&psi.to_density(), &jz).unwrap();
            assert_abs_diff_eq!(f.value, (n * n) as f64, epsilon = 1e-9);
            assert_abs_diff_eq!(f.value, four_variance(&psi, &jz), epsilon = 1e-9);
        }
    }

    #[test]
    fn ramsey_qfi_closed_form() {
        let phi = 1.1;
        let t: f64 = 0.8;
        let t2: f64 = 1.3;
        let envelope = (-(t / t2) * (t / t2)).exp();
        let family = |theta: f64| Ok(ramsey_state_with_phase(phi, theta, envelope));
        let f = exact_qfi_family(family, 0.4).unwrap();
        let expected = phi.sin().powi(2) * (-2.0 * (t / t2) * (t / t2)).exp();
        assert_abs_diff_eq!(f.value, expected, epsilon = 1e-8);

        let pure = exact_qfi_family(|th| Ok(ramsey_state_with_phase(PI / 2.0, th, 1.0)), 0.0)
            .unwrap();
        assert_abs_diff_eq!(pure.value, 1.0, epsilon = 1e-8);
    }

    #[test]
    fn finite_difference_agrees_with_commutator() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let rho = random_density(2, 3, &mut rng);
        let jz = collective_spin(Axis::Z, 2).unwrap();
        let analytic = unitary_derivative(&rho, &jz).unwrap();
        let numeric =
            finite_difference_derivative(|th| encode_phase(&rho, th, 2), 0.0, FD_STEP).unwrap();
        assert!(crate::state::max_abs_diff(&analytic, &numeric) < 1e-9);
    }

    #[test]
    fn trivial_qfi_cases() {
        let mixed = DensityMatrix::maximally_mixed(2);
        let jz = collective_spin(Axis::Z, 2).unwrap();
        assert_abs_diff_eq!(exact_qfi_unitary(&mixed, &jz).unwrap().value, 0.0);
        let zero = CMatrix::zeros(4, 4);
        assert_abs_diff_eq!(exact_qfi(&mixed, &zero).unwrap().value, 0.0);

        let psi = ghz_circuit(2).unwrap().to_density();
        let id = CMatrix::identity(4, 4);
        assert_abs_diff_eq!(exact_qfi_unitary(&psi, &id).unwrap().value, 0.0, epsilon = 1e-12);

        let mut not_herm = CMatrix::zeros(4, 4);
        not_herm[(0, 1)] = Complex64::new(1.0, 0.0);
        assert!(matches!(exact_qfi(&psi, &not_herm), Err(Error::NotHermitian(_))));
        assert!(exact_qfi_unitary(&psi, &CMatrix::identity(2, 2)).is_err());
    }

    #[test]
    fn dephased_ghz_qfi() {
        for n in [2usize, 3, 5] {
            let p = DephasingParams { gamma: 0.05, t: 1.0 };
            let c = crate::dynamics::ghz_coherence(n, &p);
            let rho = dephase(&ghz_circuit(n).unwrap().to_density(), &p).unwrap();
            let jz = collective_spin(Axis::Z, n).unwrap();
            let f = exact_qfi_unitary(&rho, &jz).unwrap();
            assert_abs_diff_eq!(f.value, (n * n) as f64 * c * c, epsilon = 1e-9);
        }
    }

    #[test]
    fn superfidelity_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for rank in [1, 2, 4] {
            let rho = random_density(2, rank, &mut rng);
            assert_abs_diff_eq!(superfidelity(&rho, &rho).unwrap(), 1.0, epsilon = 1e-12);
        }
        let zero = DensityMatrix::basis(1, 0).unwrap();
        let one = DensityMatrix::basis(1, 1).unwrap();
        assert_abs_diff_eq!(superfidelity(&zero, &one).unwrap(), 0.0);
        assert_abs_diff_eq!(modified_bures_distance(&zero, &one).unwrap(), 8.0);
        assert_abs_diff_eq!(modified_bures_distance(&zero, &zero).unwrap(), 0.0);
        assert!(superfidelity(&zero, &DensityMatrix::maximally_mixed(2)).is_err());

        let a = ramsey_state_with_phase(PI / 2.0, 1.0, 1.0);
        let b = ramsey_state_with_phase(PI / 2.0, 1.3, 1.0);
        assert_abs_diff_eq!(
            superfidelity(&a, &b).unwrap(),
            0.15f64.cos().powi(2),
            epsilon = 1e-14
        );
    }

    #[test]
    fn uhlmann_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let psi = random_pure_state(2, &mut rng).to_density();
        assert_abs_diff_eq!(uhlmann_fidelity(&psi, &psi).unwrap(), 1.0, epsilon = 1e-10);
        let zero = DensityMatrix::basis(1, 0).unwrap();
        let mixed = DensityMatrix::maximally_mixed(1);
        assert_abs_diff_eq!(uhlmann_fidelity(&zero, &mixed).unwrap(), 0.5, epsilon = 1e-12);
        for _ in 0..200 {
            let a = random_density(1, 2, &mut rng);
            let b = random_density(1, 2, &mut rng);
            let g = superfidelity(&a, &b).unwrap();
            let f = uhlmann_fidelity(&a, &b).unwrap();
            assert_abs_diff_eq!(g, f, epsilon = 1e-9);
        }
    }

    #[test]
    fn sub_qfi_limits() {
        let pure = |th: f64| Ok(ramsey_state_with_phase(PI / 2.0, th, 1.0));
        let f = sub_qfi_exact(pure, 0.3, 1e-4).unwrap();
        assert_abs_diff_eq!(f.value, 1.0, epsilon = 1e-6);
        assert_eq!(f.kind, QfiKind::SubQfi);

        let n = 2;
        let c: f64 = 0.8;
        let gamma_t = -c.ln() / (2.0 * n as f64);
        let rho = dephase(
            &ghz_circuit(n).unwrap().to_density(),
            &DephasingParams { gamma: gamma_t, t: 1.0 },
        )
        .unwrap();
        let jz = collective_spin(Axis::Z, n).unwrap();
        let exact = exact_qfi_unitary(&rho, &jz).unwrap().value;
        assert_abs_diff_eq!(exact, 2.56, epsilon = 1e-9);
        let sub = sub_qfi_exact(|th| encode_phase(&rho, th, n), 0.0, 1e-3).unwrap();
        assert!(sub.value <= exact + 1e-6);

        let constant = |_: f64| Ok(DensityMatrix::maximally_mixed(1));
        assert_abs_diff_eq!(sub_qfi_exact(constant, 0.0, 0.1).unwrap().value, 0.0);
        assert!(sub_qfi_exact(constant, 0.0, 0.0).is_err());
    }
}
