//! Matrix-free propagation for the disordered Ising ensemble.
//!
//! Vectors are handled in the σx eigenbasis (the image of the computational
//! basis under a Hadamard on every qubit). There the Ising part is diagonal and
//! each disorder term `Δ_j σz^(j)` flips bit `j`, so `H` costs `O(N·2^N)` per
//! application. `exp(−iHT)` is expanded in Chebyshev polynomials with Bessel
//! coefficients.

use num_complex::Complex64;

use crate::state::ZERO;

/// `J_0(x), …, J_m(x)` for `x ≥ 0` by Miller's backward recurrence.
pub(crate) fn bessel_j_sequence(x: f64, m: usize) -> Vec<f64> {
    let mut out = vec![0.0; m + 1];
    if x == 0.0 {
        out[0] = 1.0;
        return out;
    }
    let reach = m.max(x.ceil() as usize) + 40 + (10.0 * x.sqrt()) as usize;
    let start = reach + reach % 2;
    let mut j = vec![0.0; start + 2];
    j[start] = 1e-300;
    for k in (1..=start).rev() {
        j[k - 1] = 2.0 * k as f64 / x * j[k] - j[k + 1];
        if j[k - 1].abs() > 1e250 {
            for v in j[k - 1..].iter_mut() {
                *v *= 1e-250;
            }
        }
    }
    let norm: f64 = j[0] + 2.0 * j.iter().skip(2).step_by(2).sum::<f64>();
    for (o, v) in out.iter_mut().zip(j.iter()) {
        *o = v / norm;
    }
    out
}

/// Fast Walsh-Hadamard transform with unitary normalization. Self-inverse.
pub(crate) fn hadamard_all(v: &mut [Complex64]) {
    let dim = v.len();
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    let mut half = 1;
    while half < dim {
        for base in (0..dim).step_by(2 * half) {
            for lo in base..base + half {
                let (a, b) = (v[lo], v[lo + half]);
                v[lo] = (a + b) * scale;
                v[lo + half] = (a - b) * scale;
            }
        }
        half *= 2;
    }
}

/// `H = diag + Σ_j fields[j] X_j` in the σx eigenbasis.
pub(crate) struct XBasisHamiltonian<'a> {
    pub diag: &'a [f64],
    pub fields: &'a [f64],
}

impl XBasisHamiltonian<'_> {
    fn num_qubits(&self) -> usize {
        self.fields.len()
    }

    /// Interval containing the spectrum.
    pub fn spectral_bounds(&self) -> (f64, f64) {
        let lo = self.diag.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = self.diag.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let spread: f64 = self.fields.iter().map(|f| f.abs()).sum();
        (lo - spread, hi + spread)
    }

    /// `out = (H − shift)·v / scale`
    fn apply_scaled(&self, v: &[Complex64], out: &mut [Complex64], shift: f64, scale: f64) {
        let n = self.num_qubits();
        let inv = 1.0 / scale;
        for (s, o) in out.iter_mut().enumerate() {
            let mut acc = v[s] * (self.diag[s] - shift);
            for (q, &f) in self.fields.iter().enumerate() {
                acc += v[s ^ (1usize << (n - 1 - q))] * f;
            }
            *o = acc * inv;
        }
    }

    /// Replaces `v` by `exp(−iHt)·v`.
    pub fn evolve(&self, v: &mut [Complex64], t: f64, work: &mut ChebyshevWork) {
        let (lo, hi) = self.spectral_bounds();
        let center = 0.5 * (lo + hi);
        let radius = 0.5 * (hi - lo) * (1.0 + 1e-12) + 1e-300;
        let phase = Complex64::from_polar(1.0, -center * t);
        let x = radius * t.abs();
        if x < 1e-14 {
            v.iter_mut().for_each(|a| *a *= phase);
            return;
        }
        let coeffs = chebyshev_coefficients(x, t.signum());
        let dim = v.len();
        work.resize(dim);
        let ChebyshevWork { prev, curr, next, acc } = work;
        prev.copy_from_slice(v);
        self.apply_scaled(prev, curr, center, radius);
        for s in 0..dim {
            acc[s] = prev[s] * coeffs[0] + curr[s] * coeffs[1];
        }
        for c in coeffs.iter().skip(2) {
            self.apply_scaled(curr, next, center, radius);
            for s in 0..dim {
                next[s] = next[s] * 2.0 - prev[s];
                acc[s] += next[s] * c;
            }
            std::mem::swap(prev, curr);
            std::mem::swap(curr, next);
        }
        for s in 0..dim {
            v[s] = acc[s] * phase;
        }
    }
}

/// Coefficients `(2 − δ_k0)(−i·sign)^k J_k(x)` truncated where the Bessel
/// tail drops below double precision.
fn chebyshev_coefficients(x: f64, sign: f64) -> Vec<Complex64> {
    let m = (1.5 * x) as usize + 40;
    let j = bessel_j_sequence(x, m);
    let mut len = j.len();
    for k in (x.ceil() as usize + 1)..j.len() {
        if j[k].abs() < 1e-17 {
            len = k;
            break;
        }
    }
    len = len.max(2);
    let step = Complex64::new(0.0, -sign);
    let mut pow = Complex64::new(1.0, 0.0);
    (0..len)
        .map(|k| {
            let c = pow * j[k] * if k == 0 { 1.0 } else { 2.0 };
            pow *= step;
            c
        })
        .collect()
}

#[derive(Default)]
pub(crate) struct ChebyshevWork {
    prev: Vec<Complex64>,
    curr: Vec<Complex64>,
    next: Vec<Complex64>,
    acc: Vec<Complex64>,
}

impl ChebyshevWork {
    fn resize(&mut self, dim: usize) {
        for b in [&mut self.prev, &mut self.curr, &mut self.next, &mut self.acc] {
            b.clear();
            b.resize(dim, ZERO);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::{expm_hermitian, CMatrix, CVector};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn bessel_values() {
        let j = bessel_j_sequence(1.0, 3);
        assert!((j[0] - 0.765_197_686_557_966_6).abs() < 1e-14);
        assert!((j[1] - 0.440_050_585_744_933_5).abs() < 1e-14);
        let j = bessel_j_sequence(10.0, 5);
        assert!((j[0] + 0.245_935_764_451_348_3).abs() < 1e-13);
        assert!((j[5] + 0.234_061_528_186_793_6).abs() < 1e-13);
        let j = bessel_j_sequence(80.0, 200);
        let sum: f64 = j[0] * j[0] + 2.0 * j[1..].iter().map(|v| v * v).sum::<f64>();
        assert!((sum - 1.0).abs() < 1e-12);
    }

    #[test]
    fn hadamard_is_involutive() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let v: Vec<Complex64> = (0..16)
            .map(|_| Complex64::new(rng.random(), rng.random()))
            .collect();
        let mut w = v.clone();
        hadamard_all(&mut w);
        hadamard_all(&mut w);
        for (a, b) in v.iter().zip(&w) {
            assert!((a - b).norm() < 1e-14);
        }
    }

    #[test]
    fn chebyshev_matches_dense_exponential() {
        let n = 4;
        let dim = 1 << n;
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let diag: Vec<f64> = (0..dim).map(|_| rng.random_range(-5.0..5.0)).collect();
        let fields: Vec<f64> = (0..n).map(|_| rng.random_range(-2.0..2.0)).collect();
        let mut h = CMatrix::zeros(dim, dim);
        for s in 0..dim {
            h[(s, s)] += Complex64::new(diag[s], 0.0);
            for (q, f) in fields.iter().enumerate() {
                h[(s ^ (1 << (n - 1 - q)), s)] += Complex64::new(*f, 0.0);
            }
        }
        let ham = XBasisHamiltonian { diag: &diag, fields: &fields };
        let v0: CVector = CVector::from_fn(dim, |_, _| Complex64::new(rng.random(), rng.random()));
        for t in [0.0, 0.3, 1.0, 4.0, -2.0] {
            let expect = expm_hermitian(&h, t).unwrap() * &v0;
            let mut v: Vec<Complex64> = v0.iter().copied().collect();
            ham.evolve(&mut v, t, &mut ChebyshevWork::default());
            for (a, b) in expect.iter().zip(&v) {
                assert!((a - b).norm() < 1e-11, "t={t}");
            }
        }
    }
}
