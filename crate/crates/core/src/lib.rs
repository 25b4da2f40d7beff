//! Variational and exact ground states of multilevel atoms coupled to
//! several quantized field modes.

pub mod error;
pub mod export;
pub mod model;
pub mod observables;
pub mod phasemap;
pub mod quantum;
pub mod rwa;
pub mod varsurface;

pub use error::{Error, Result};
pub use model::{AtomicSystem, Pair, Transition, ValidationReport};
pub use observables::ObservableSet;
pub use phasemap::{PhaseGrid, RegionLabel, SeparatrixCurve};
pub use quantum::QuantumGroundResult;
pub use varsurface::VariationalCandidate;
