//! Random-unitary ensembles, simulated randomized measurements and the
//! estimators of purity, overlap, superfidelity and fidelity built on them.

pub mod ensemble;
pub mod estimators;
pub mod measure;
mod propagate;
pub mod record;
pub mod rng;

pub use ensemble::{
    euler_angles, euler_unitary, haar_qubit, sample_unitary, Ensemble, EnsembleKind, EnsembleSpec, EvolutionSpec,
    Mat2, UnitaryDraw,
};
pub use estimators::{
    bures_estimate, estimate_fidelity_single_qubit, estimate_overlap, estimate_purity, estimate_superfidelity,
    estimate_superfidelity_with, Bootstrap, Estimate, Kernel, MixednessRule, PairTerms,
};
pub use measure::{measure, sample_frequencies, MeasurementEngine};
pub use record::{generate_records, read_records, write_records, MeasurementRecord};
pub use rng::SeedStream;
