//! State preparation and evolution: the Ramsey family, phase encoding, GHZ
//! preparation, pure dephasing and the long-range Ising Hamiltonian.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::state::{
    bit, embed_single_qubit, jz_eigenvalue, pauli, CMatrix, CVector, DensityMatrix, PureState,
    ONE,
};
use crate::tolerance;

/// Single-qubit Ramsey interrogation.
///
/// Times are in µs and `delta` in rad/µs when used by the experiment runner,
/// but any consistent unit system works.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RamseyParams {
    /// Preparation angle φ about ŷ.
    pub phi: f64,
    /// Detuning Δ (angular frequency).
    pub delta: f64,
    /// Free evolution time.
    pub t: f64,
    /// Inhomogeneous dephasing time T₂*.
    pub t2star: f64,
}

impl RamseyParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.t >= 0.0) {
            return Err(Error::param(format!("ramsey time must be >= 0, got {}", self.t)));
        }
        if !(self.t2star > 0.0) {
            return Err(Error::param(format!("T2* must be > 0, got {}", self.t2star)));
        }
        Ok(())
    }

    /// Accumulated phase θ = Δt.
    pub fn theta(&self) -> f64 {
        self.delta * self.t
    }

    /// Gaussian coherence envelope e^{−(t/T₂*)²}.
    pub fn envelope(&self) -> f64 {
        (-(self.t / self.t2star).powi(2)).exp()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DephasingParams {
    pub gamma: f64,
    pub t: f64,
}

impl DephasingParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.gamma >= 0.0) || !(self.t >= 0.0) {
            return Err(Error::param(format!(
                "dephasing needs gamma >= 0 and t >= 0, got gamma={} t={}",
                self.gamma, self.t
            )));
        }
        Ok(())
    }
}

/// Long-range transverse Ising model
/// `H_s = Σ_{k<l} g|k−l|^{−α} σx^k σx^l + Ω Σ_k σx^k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IsingParams {
    pub num_qubits: usize,
    /// Nearest-neighbour coupling g.
    pub coupling: f64,
    /// Range exponent α.
    pub alpha: f64,
    /// Transverse field Ω.
    pub omega: f64,
}

impl IsingParams {
    pub fn validate(&self) -> Result<()> {
        if self.num_qubits < 2 || self.num_qubits > tolerance::MAX_QUBITS {
            return Err(Error::param(format!(
                "ising model needs 2..={} qubits, got {}",
                tolerance::MAX_QUBITS,
                self.num_qubits
            )));
        }
        if !(self.alpha > 0.0 && self.alpha < 3.0) {
            return Err(Error::param(format!("ising exponent must lie in (0, 3), got {}", self.alpha)));
        }
        if !self.coupling.is_finite() || !self.omega.is_finite() {
            return Err(Error::param("ising coupling and field must be finite"));
        }
        Ok(())
    }

    /// Coupling between sites `k` and `l`.
    pub fn pair_coupling(&self, k: usize, l: usize) -> f64 {
        self.coupling * (k.abs_diff(l) as f64).powf(-self.alpha)
    }

    /// Eigenvalues of `H_s` in the σx eigenbasis, indexed like computational
    /// states with bit 0 ↦ σx = +1 and bit 1 ↦ σx = −1.
    pub fn x_basis_diagonal(&self) -> Vec<f64> {
        let n = self.num_qubits;
        (0..1usize << n)
            .map(|s| {
                let sign = |q: usize| if bit(s, q, n) == 0 { 1.0 } else { -1.0 };
                let mut e = 0.0;
                for k in 0..n {
                    e += self.omega * sign(k);
                    for l in (k + 1)..n {
                        e += self.pair_coupling(k, l) * sign(k) * sign(l);
                    }
                }
                e
            })
            .collect()
    }
}

/// The Ramsey state with the phase written explicitly:
/// off-diagonal `½ sin φ e^{iθ} · envelope`.
pub fn ramsey_state_with_phase(phi: f64, theta: f64, envelope: f64) -> DensityMatrix {
    let c = (phi / 2.0).cos();
    let s = (phi / 2.0).sin();
    let coherence = Complex64::from_polar(0.5 * phi.sin() * envelope, theta);
    let m = CMatrix::from_row_slice(
        2,
        2,
        &[
            Complex64::new(c * c, 0.0),
            coherence,
            coherence.conj(),
            Complex64::new(s * s, 0.0),
        ],
    );
    DensityMatrix::from_parts(m, 1)
}

/// Qubit state after a Ramsey sequence with Gaussian dephasing.
pub fn ramsey_state(p: &RamseyParams) -> Result<DensityMatrix> {
    p.validate()?;
    Ok(ramsey_state_with_phase(p.phi, p.theta(), p.envelope()))
}

/// `cos(φ/2)|0⟩ + sin(φ/2)|1⟩`
pub fn ramsey_initial_state(phi: f64) -> PureState {
    let v = CVector::from_vec(vec![
        Complex64::new((phi / 2.0).cos(), 0.0),
        Complex64::new((phi / 2.0).sin(), 0.0),
    ]);
    PureState::normalized(v).expect("unit vector")
}

/// `e^{−iθJz} ρ e^{iθJz}` on `num_qubits` qubits.
pub fn encode_phase(rho: &DensityMatrix, theta: f64, num_qubits: usize) -> Result<DensityMatrix> {
    let dim = 1usize << num_qubits;
    if rho.dim() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: rho.dim(),
        });
    }
    let m: Vec<f64> = (0..dim).map(|s| jz_eigenvalue(s, num_qubits)).collect();
    Ok(rho.map_entries(|r, c| Complex64::from_polar(1.0, -theta * (m[r] - m[c]))))
}

fn check_ghz_size(n: usize) -> Result<()> {
    if n == 0 || n > tolerance::MAX_QUBITS {
        return Err(Error::param(format!(
            "GHZ preparation needs 1..={} qubits, got {n}",
            tolerance::MAX_QUBITS
        )));
    }
    Ok(())
}

/// Applies a 2×2 operator to qubit `target` of a state vector in place.
pub fn apply_single_qubit(psi: &mut CVector, op: &[[Complex64; 2]; 2], target: usize, n: usize) {
    let stride = 1usize << (n - 1 - target);
    let dim = psi.len();
    let mut base = 0;
    while base < dim {
        for lo in base..base + stride {
            let hi = lo + stride;
            let (a, b) = (psi[lo], psi[hi]);
            psi[lo] = op[0][0] * a + op[0][1] * b;
            psi[hi] = op[1][0] * a + op[1][1] * b;
        }
        base += 2 * stride;
    }
}

/// Prepares a GHZ state as `exp(iπJx/2) exp(iπJz²/2) exp(iπJx/2) |0…0⟩`.
///
/// The twisting step leaves the cat along ±y for even `N` and along ±x for odd
/// `N`; in the odd case the final rotation is `exp(iπJy/2)` so that the cat
/// always ends up along ±z.
///
/// The collective rotations factorize into identical single-qubit rotations
/// and `exp(iπJz²/2)` is diagonal, so nothing of size 2^N × 2^N is formed.
/// The global phase is whatever the product yields.
pub fn ghz_prepare(num_qubits: usize) -> Result<PureState> {
    check_ghz_size(num_qubits)?;
    let n = num_qubits;
    let c = Complex64::new(FRAC_PI_4.cos(), 0.0);
    let s = Complex64::new(0.0, FRAC_PI_4.sin());
    // exp(iπσx/4)
    let rot = [[c, s], [s, c]];
    let mut psi = CVector::zeros(1 << n);
    psi[0] = ONE;
    for q in 0..n {
        apply_single_qubit(&mut psi, &rot, q, n);
    }
    for (idx, amp) in psi.iter_mut().enumerate() {
        let m = jz_eigenvalue(idx, n);
        *amp *= Complex64::from_polar(1.0, FRAC_PI_2 * m * m);
    }
    // exp(iπσy/4)
    let rot_y = [[c, ONE * FRAC_PI_4.sin()], [-ONE * FRAC_PI_4.sin(), c]];
    let last = if n % 2 == 0 { &rot } else { &rot_y };
    for q in 0..n {
        apply_single_qubit(&mut psi, last, q, n);
    }
    PureState::normalized(psi)
}

/// GHZ state from a Hadamard on qubit 0 followed by a CNOT chain.
pub fn ghz_circuit(num_qubits: usize) -> Result<PureState> {
    check_ghz_size(num_qubits)?;
    let n = num_qubits;
    let h = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let mut psi = CVector::zeros(1 << n);
    psi[0] = ONE;
    apply_single_qubit(&mut psi, &[[h, h], [h, -h]], 0, n);
    for control in 0..n.saturating_sub(1) {
        let target = control + 1;
        let tmask = 1usize << (n - 1 - target);
        for idx in 0..psi.len() {
            if bit(idx, control, n) == 1 && idx & tmask == 0 {
                psi.swap_rows(idx, idx | tmask);
            }
        }
    }
    PureState::normalized(psi)
}

/// Exact solution of independent σz dephasing on every qubit: entry `(s, s')`
/// decays as `e^{−2γt·h(s,s')}` with `h` the Hamming distance.
pub fn dephase(rho: &DensityMatrix, p: &DephasingParams) -> Result<DensityMatrix> {
    p.validate()?;
    let rate = 2.0 * p.gamma * p.t;
    let table: Vec<f64> = (0..=rho.num_qubits())
        .map(|h| (-rate * h as f64).exp())
        .collect();
    Ok(rho.map_entries(|r, c| Complex64::new(table[(r ^ c).count_ones() as usize], 0.0)))
}

/// Lindblad dissipator `Σ_j L_j ρ L_j† − ½{L_j†L_j, ρ}`.
#[derive(Debug, Clone)]
pub struct Dissipator {
    jumps: Vec<CMatrix>,
    anticommutator: CMatrix,
}

impl Dissipator {
    pub fn new(jumps: Vec<CMatrix>) -> Result<Self> {
        let dim = jumps.first().map(|l| l.nrows()).unwrap_or(0);
        let mut anticommutator = CMatrix::zeros(dim, dim);
        for l in &jumps {
            if l.shape() != (dim, dim) {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: l.nrows(),
                });
            }
            anticommutator += l.adjoint() * l;
        }
        Ok(Self {
            jumps,
            anticommutator,
        })
    }

    /// `L_j = √γ σz^(j)` for every qubit.
    pub fn dephasing(num_qubits: usize, gamma: f64) -> Result<Self> {
        let scale = Complex64::new(gamma.sqrt(), 0.0);
        let jumps = (0..num_qubits)
            .map(|q| embed_single_qubit(&pauli::z(), q, num_qubits).map(|z| z * scale))
            .collect::<Result<Vec<_>>>()?;
        Self::new(jumps)
    }

    pub fn apply(&self, rho: &CMatrix) -> CMatrix {
        let half = Complex64::new(0.5, 0.0);
        let mut out = -(&self.anticommutator * rho + rho * &self.anticommutator) * half;
        for l in &self.jumps {
            out += l * rho * l.adjoint();
        }
        out
    }
}

/// Integrates dρ/dt = 𝓛ρ for σz dephasing with classic fourth-order Runge–Kutta.
///
/// Requires `γ·t/steps <= 0.01`.
pub fn lindblad_evolve(
    rho: &DensityMatrix,
    p: &DephasingParams,
    steps: usize,
) -> Result<DensityMatrix> {
    p.validate()?;
    if steps == 0 {
        return Err(Error::param("lindblad_evolve needs at least one step"));
    }
    let dt = p.t / steps as f64;
    let coarse = p.gamma * dt;
    if coarse > tolerance::MAX_RK4_STEP {
        return Err(Error::StepTooCoarse(coarse));
    }
    let dissipator = Dissipator::dephasing(rho.num_qubits(), p.gamma)?;
    let mut state = rho.entries().clone();
    let h = Complex64::new(dt, 0.0);
    let half = Complex64::new(0.5, 0.0);
    let sixth = Complex64::new(1.0 / 6.0, 0.0);
    let two = Complex64::new(2.0, 0.0);
    for _ in 0..steps {
        let k1 = dissipator.apply(&state);
        let k2 = dissipator.apply(&(&state + &k1 * h * half));
        let k3 = dissipator.apply(&(&state + &k2 * h * half));
        let k4 = dissipator.apply(&(&state + &k3 * h));
        state += (k1 + k2 * two + k3 * two + k4) * h * sixth;
    }
    Ok(DensityMatrix::from_parts(state, rho.num_qubits()))
}

/// Dense long-range Ising Hamiltonian.
pub fn ising_hamiltonian(p: &IsingParams) -> Result<CMatrix> {
    p.validate()?;
    let n = p.num_qubits;
    let dim = 1usize << n;
    let mut h = CMatrix::zeros(dim, dim);
    for s in 0..dim {
        for k in 0..n {
            let fk = 1usize << (n - 1 - k);
            h[(s ^ fk, s)] += Complex64::new(p.omega, 0.0);
            for l in (k + 1)..n {
                let fl = 1usize << (n - 1 - l);
                h[(s ^ fk ^ fl, s)] += Complex64::new(p.pair_coupling(k, l), 0.0);
            }
        }
    }
    Ok(h)
}

/// Disorder term `Σ_j Δ_j σz^(j)` as a diagonal.
pub fn disorder_diagonal(fields: &[f64]) -> Vec<f64> {
    let n = fields.len();
    (0..1usize << n)
        .map(|s| {
            (0..n)
                .map(|q| if bit(s, q, n) == 0 { fields[q] } else { -fields[q] })
                .sum()
        })
        .collect()
}

/// Coherence factor of the extreme GHZ off-diagonal after dephasing.
pub fn ghz_coherence(num_qubits: usize, p: &DephasingParams) -> f64 {
    (-2.0 * p.gamma * p.t * num_qubits as f64).exp()
}
