//! Property tests for the state, channel and metric invariants.

use proptest::prelude::*;
use qfi_core::dynamics::{dephase, encode_phase, ramsey_state_with_phase, DephasingParams};
use qfi_core::metrics::{
    exact_qfi_unitary, exact_qfi_with_cutoff, superfidelity, sub_qfi_exact, uhlmann_fidelity, unitary_derivative,
};
use qfi_core::pipeline::witness;
use qfi_core::random::{haar_unitary, random_density, random_generator, random_hermitian, random_pure_state};
use qfi_core::randmeas::SeedStream;
use qfi_core::state::{eig_hermitian, expm_hermitian, max_abs_diff, overlap, purity};
use qfi_core::DensityMatrix;

fn rng(seed: u64) -> rand_chacha::ChaCha8Rng {
    SeedStream::new(seed).rng(0)
}

fn mixed(seed: u64, nq: usize) -> DensityMatrix {
    let mut r = rng(seed);
    let rank = 1 + (seed as usize % (1 << nq));
    random_density(nq, rank, &mut r)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn eig_reconstructs(seed in any::<u64>(), dim in 2usize..=16) {
        let h = random_hermitian(dim, &mut rng(seed));
        let e = eig_hermitian(&h).unwrap();
        prop_assert!(max_abs_diff(&e.reconstruct(), &h) < 1e-10);
    }

    #[test]
    fn overlap_is_symmetric(seed in any::<u64>(), nq in 1usize..=3) {
        let a = mixed(seed, nq);
        let b = mixed(seed ^ 0x9e37, nq);
        prop_assert!((overlap(&a, &b).unwrap() - overlap(&b, &a).unwrap()).abs() <= 1e-12);
    }

    #[test]
    fn purity_is_unitarily_invariant(seed in any::<u64>(), nq in 1usize..=3) {
        let rho = mixed(seed, nq);
        let u = haar_unitary(1 << nq, &mut rng(seed.wrapping_add(1)));
        let rotated = rho.conjugate_by(&u).unwrap();
        rotated.validate().unwrap();
        prop_assert!((purity(&rotated) - purity(&rho)).abs() <= 1e-10);
    }

    #[test]
    fn dephasing_is_a_semigroup(seed in any::<u64>(), nq in 1usize..=3, t1 in 0.0f64..2.0, t2 in 0.0f64..2.0) {
        let rho = mixed(seed, nq);
        let step = |r: &DensityMatrix, t: f64| dephase(r, &DephasingParams { gamma: 0.3, t }).unwrap();
        let two = step(&step(&rho, t1), t2);
        two.validate().unwrap();
        prop_assert!(max_abs_diff(two.entries(), step(&rho, t1 + t2).entries()) <= 1e-10);
    }

    #[test]
    fn phase_encoding_composes(seed in any::<u64>(), nq in 1usize..=3, a in -3.0f64..3.0, b in -3.0f64..3.0) {
        let rho = mixed(seed, nq);
        let twice = encode_phase(&encode_phase(&rho, a, nq).unwrap(), b, nq).unwrap();
        twice.validate().unwrap();
        let once = encode_phase(&rho, a + b, nq).unwrap();
        prop_assert!(max_abs_diff(twice.entries(), once.entries()) <= 1e-10);
    }

    #[test]
    fn ramsey_purity_closed_form(phi in 0.0f64..std::f64::consts::PI, theta in -6.0f64..6.0, env in 0.0f64..=1.0) {
        let rho = ramsey_state_with_phase(phi, theta, env);
        rho.validate().unwrap();
        let expected = 0.5 * (1.0 + phi.sin().powi(2) * env * env + phi.cos().powi(2));
        prop_assert!((purity(&rho) - expected).abs() <= 1e-12);
    }

    #[test]
    fn superfidelity_bounds_fidelity(seed in any::<u64>(), nq in 1usize..=3) {
        let a = mixed(seed, nq);
        let b = mixed(seed.rotate_left(17), nq);
        prop_assert!(superfidelity(&a, &b).unwrap() + 1e-10 >= uhlmann_fidelity(&a, &b).unwrap());
    }

    #[test]
    fn qfi_is_shift_invariant(seed in any::<u64>(), nq in 1usize..=3, theta in -3.0f64..3.0) {
        let rho = mixed(seed, nq);
        let g = random_generator(1 << nq, &mut rng(seed.wrapping_add(7)));
        let shifted = rho.conjugate_by(&expm_hermitian(&g, theta).unwrap()).unwrap();
        let f0 = exact_qfi_unitary(&rho, &g).unwrap().value;
        let f1 = exact_qfi_unitary(&shifted, &g).unwrap().value;
        prop_assert!((f0 - f1).abs() <= 1e-9);
    }

    #[test]
    fn cutoff_halving_is_stable(seed in any::<u64>(), nq in 1usize..=3) {
        let mut r = rng(seed);
        let rho = random_density(nq, 1 << nq, &mut r);
        let g = random_generator(1 << nq, &mut r);
        let d = unitary_derivative(&rho, &g).unwrap();
        let a = exact_qfi_with_cutoff(&rho, &d, 1e-12).unwrap().value;
        let b = exact_qfi_with_cutoff(&rho, &d, 5e-13).unwrap().value;
        prop_assert!((a - b).abs() < 1e-6);
    }

    #[test]
    fn witness_is_monotone(a in 0.0f64..100.0, b in 0.0f64..100.0, n in 1usize..=12) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(witness(lo, n).unwrap().m_witnessed <= witness(hi, n).unwrap().m_witnessed);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn sub_qfi_lower_bounds_qfi(seed in any::<u64>(), nq in 1usize..=4) {
        let rho = mixed(seed, nq);
        let g = random_generator(1 << nq, &mut rng(seed.wrapping_add(3)));
        let family = |t: f64| rho.conjugate_by(&expm_hermitian(&g, t)?);
        let sub = sub_qfi_exact(family, 0.0, 1e-3).unwrap().value;
        prop_assert!(sub <= exact_qfi_unitary(&rho, &g).unwrap().value + 1e-6);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn sub_qfi_equals_qfi_on_pure_states(seed in any::<u64>(), nq in 1usize..=3) {
        let mut r = rng(seed);
        let rho = random_pure_state(nq, &mut r).to_density();
        let g = random_generator(1 << nq, &mut r);
        let exact = exact_qfi_unitary(&rho, &g).unwrap().value;
        prop_assume!(exact > 1e-3);
        let family = |t: f64| rho.conjugate_by(&expm_hermitian(&g, t)?);
        let sub = sub_qfi_exact(family, 0.0, 1e-3).unwrap().value;
        prop_assert!((sub - exact).abs() / exact <= 1e-4);
    }
}
