//! Simulated computational-basis measurements after a random rotation.

use rand::Rng;
use rand_distr::{Binomial, Distribution};

use super::ensemble::{Ensemble, UnitaryDraw};
use crate::error::{Error, Result};
use crate::state::{eig_hermitian, CMatrix, DensityMatrix, UnitaryMatrix};
use crate::tolerance;

/// Born probabilities `diag(UρU†)`, or multinomial frequencies when `shots` is
/// given. `rng` is only touched in shot mode.
pub fn measure<R: Rng + ?Sized>(
    rho: &DensityMatrix,
    u: &UnitaryMatrix,
    shots: Option<u64>,
    rng: &mut R,
) -> Result<Vec<f64>> {
    if rho.dim() != u.dim() {
        return Err(Error::DimensionMismatch {
            expected: rho.dim(),
            found: u.dim(),
        });
    }
    let rotated = u.entries() * rho.entries();
    let ue = u.entries();
    let probs: Vec<f64> = (0..rho.dim())
        .map(|s| {
            let mut acc = 0.0;
            for k in 0..rho.dim() {
                acc += (rotated[(s, k)] * ue[(s, k)].conj()).re;
            }
            acc.max(0.0)
        })
        .collect();
    match shots {
        None => Ok(probs),
        Some(shots) => sample_frequencies(&probs, shots, rng),
    }
}

/// Empirical frequencies of `shots` multinomial draws.
pub fn sample_frequencies<R: Rng + ?Sized>(probs: &[f64], shots: u64, rng: &mut R) -> Result<Vec<f64>> {
    if shots == 0 {
        return Err(Error::param("shot count must be positive"));
    }
    let mut remaining = shots;
    let mut mass: f64 = probs.iter().map(|p| p.max(0.0)).sum();
    let mut out = vec![0.0; probs.len()];
    for (o, &p) in out.iter_mut().zip(probs) {
        if remaining == 0 {
            break;
        }
        let p = p.max(0.0);
        let q = if mass > 0.0 { (p / mass).clamp(0.0, 1.0) } else { 1.0 };
        let k = Binomial::new(remaining, q)
            .map_err(|e| Error::param(format!("binomial: {e}")))?
            .sample(rng);
        *o = k as f64 / shots as f64;
        remaining -= k;
        mass -= p;
    }
    Ok(out)
}

/// Measurement engine for a fixed set of states.
///
/// All states are restricted to the span `B` of their joint support, so a
/// random unitary only has to be applied to `dim B` vectors. Each restricted
/// state is stored as `L L†` and `P(s) = Σ_c |(U B L)_{sc}|²`.
#[derive(Debug, Clone)]
pub struct MeasurementEngine {
    basis: CMatrix,
    factors: Vec<CMatrix>,
    dim: usize,
}

impl MeasurementEngine {
    pub fn new(states: &[DensityMatrix]) -> Result<Self> {
        let first = states
            .first()
            .ok_or_else(|| Error::param("measurement engine needs at least one state"))?;
        let dim = first.dim();
        let mut avg = CMatrix::zeros(dim, dim);
        for s in states {
            if s.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: s.dim(),
                });
            }
            avg += s.entries();
        }
        avg /= num_complex::Complex64::new(states.len() as f64, 0.0);
        let spec = eig_hermitian(&avg)?;
        let keep = spec
            .eigenvalues
            .iter()
            .take_while(|&&l| l > tolerance::SUPPORT)
            .count()
            .max(1);
        let basis = spec.eigenvectors.columns(0, keep).into_owned();
        let factors = states
            .iter()
            .map(|s| {
                let restricted = basis.adjoint() * s.entries() * &basis;
                let sp = eig_hermitian(&restricted)?;
                let rank = sp
                    .eigenvalues
                    .iter()
                    .take_while(|&&l| l > tolerance::SUPPORT)
                    .count()
                    .max(1);
                let mut l = sp.eigenvectors.columns(0, rank).into_owned();
                for (c, mut col) in l.column_iter_mut().enumerate() {
                    col *= num_complex::Complex64::new(sp.eigenvalues[c].max(0.0).sqrt(), 0.0);
                }
                Ok(l)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { basis, factors, dim })
    }

    pub fn num_states(&self) -> usize {
        self.factors.len()
    }

    /// Dimension of the joint support.
    pub fn support_dim(&self) -> usize {
        self.basis.ncols()
    }

    /// Exact outcome distributions of every state under one draw.
    pub fn probabilities(&self, ensemble: &Ensemble, draw: &UnitaryDraw) -> Result<Vec<Vec<f64>>> {
        if ensemble.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: ensemble.dim(),
            });
        }
        let mut rotated = self.basis.clone();
        ensemble.apply(draw, &mut rotated)?;
        Ok(self
            .factors
            .iter()
            .map(|l| {
                let m = &rotated * l;
                (0..self.dim)
                    .map(|s| m.row(s).iter().map(|z| z.norm_sqr()).sum())
                    .collect()
            })
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::ramsey_initial_state;
    use crate::random::{haar_unitary, random_density};
    use crate::randmeas::ensemble::EnsembleSpec;
    use crate::randmeas::rng::SeedStream;
    use crate::state::Provenance;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn unitary(m: CMatrix) -> UnitaryMatrix {
        UnitaryMatrix::new(
            m,
            Provenance {
                ensemble: "test".into(),
                params: vec![],
            },
        )
        .unwrap()
    }

    #[test]
    fn trivial_distributions() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let u = unitary(haar_unitary(4, &mut rng));
        let p = measure(&DensityMatrix::maximally_mixed(2), &u, None, &mut rng).unwrap();
        assert!(p.iter().all(|x| (x - 0.25).abs() < 1e-12));
        let p = measure(&DensityMatrix::basis(2, 0).unwrap(), &UnitaryMatrix::identity(4), None, &mut rng).unwrap();
        assert_eq!(p, vec![1.0, 0.0, 0.0, 0.0]);
        let phi: f64 = 0.7;
        let rho = ramsey_initial_state(phi).to_density();
        let p = measure(&rho, &UnitaryMatrix::identity(2), None, &mut rng).unwrap();
        assert!((p[0] - (phi / 2.0).cos().powi(2)).abs() < 1e-12);
    }

    #[test]
    fn errors() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let rho = DensityMatrix::maximally_mixed(2);
        assert!(measure(&rho, &UnitaryMatrix::identity(2), None, &mut rng).is_err());
        assert!(measure(&rho, &UnitaryMatrix::identity(4), Some(0), &mut rng).is_err());
    }

    #[test]
    fn shots_converge_to_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let rho = random_density(2, 4, &mut rng);
        let u = unitary(haar_unitary(4, &mut rng));
        let exact = measure(&rho, &u, None, &mut rng).unwrap();
        let freq = measure(&rho, &u, Some(1_000_000), &mut rng).unwrap();
        let tv: f64 = 0.5 * exact.iter().zip(&freq).map(|(a, b)| (a - b).abs()).sum::<f64>();
        assert!(tv < 1e-2, "tv = {tv}");
        assert!((freq.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn engine_matches_dense_measurement() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let states = vec![
            random_density(3, 1, &mut rng),
            random_density(3, 2, &mut rng),
            random_density(3, 8, &mut rng),
        ];
        let engine = MeasurementEngine::new(&states).unwrap();
        assert_eq!(engine.support_dim(), 8);
        let ens = Ensemble::new(EnsembleSpec::local_haar(3), SeedStream::new(4)).unwrap();
        for idx in 0..5 {
            let probs = engine.probabilities(&ens, &ens.draw(idx)).unwrap();
            let u = ens.unitary(idx).unwrap();
            for (s, p) in states.iter().zip(&probs) {
                let direct = measure(s, &u, None, &mut rng).unwrap();
                for (a, b) in direct.iter().zip(p) {
                    assert!((a - b).abs() < 1e-12);
                }
            }
        }
        let pure = vec![states[0].clone()];
        assert_eq!(MeasurementEngine::new(&pure).unwrap().support_dim(), 1);
    }
}
