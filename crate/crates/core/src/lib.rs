//! Quantum Fisher information from simulated randomized measurements.
//!
//! The crate is organized bottom-up:
//!
//! * [`state`]: dense density matrices, unitaries and trace functionals.
//! * [`dynamics`]: Ramsey states, phase encoding, GHZ preparation, dephasing.
//! * [`metrics`]: exact QFI, superfidelity, modified Bures distance, sub-QFI.
//! * [`randmeas`]: random-unitary ensembles, simulated measurements and the
//!   trace-functional estimators built on them.
//! * [`pipeline`]: dθ sweeps, polynomial extraction of the sub-QFI, the
//!   entanglement witness and measurement-budget scans.
//! * [`experiments`]: configuration, scenario runners and result files.

pub mod dynamics;
pub mod error;
pub mod experiments;
pub mod metrics;
pub mod pipeline;
pub mod random;
pub mod randmeas;
pub mod state;
pub mod tolerance;

pub use error::{Error, Result};
pub use state::{CMatrix, CVector, DensityMatrix, PureState, SpectralDecomposition, UnitaryMatrix};
