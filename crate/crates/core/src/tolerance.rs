//! Numerical tolerances shared by every module.
//!
//! All values assume double precision and dense matrices of dimension at most
//! 4096 (twelve qubits).

/// Maximum |ρ_ij − conj(ρ_ji)| accepted for a density matrix.
pub const HERMITIAN: f64 = 1e-12;

/// Maximum |Tr ρ − 1| accepted for a density matrix.
pub const TRACE: f64 = 1e-10;

/// Smallest eigenvalue a density matrix may have before it is rejected.
pub const PSD: f64 = -1e-10;

/// Maximum |‖ψ‖² − 1| accepted for a pure state.
pub const NORM: f64 = 1e-12;

/// Maximum entry of |U†U − I| accepted for a unitary.
pub const UNITARY: f64 = 1e-10;

/// Hermiticity slack accepted by the eigensolver input check.
pub const EIG_HERMITIAN: f64 = 1e-9;

/// Pairs with p_λ + p_λ' below this are dropped from the QFI spectral sum.
pub const QFI_EIGEN_CUTOFF: f64 = 1e-12;

/// Probability vectors in exact mode must sum to one within this.
pub const PROBABILITY_SUM: f64 = 1e-9;

/// Eigenvalues below this (times the largest) are outside the support of a state.
pub const SUPPORT: f64 = 1e-14;

/// Largest γ·dt accepted by the RK4 Lindblad integrator.
pub const MAX_RK4_STEP: f64 = 0.01;

/// Largest qubit count the dense backend supports.
pub const MAX_QUBITS: usize = 12;
