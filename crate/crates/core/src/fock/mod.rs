//! Fermionic Fock substrate: modes, sparse states, ladder operators.

pub mod car;
pub mod dense;
pub mod expm;
pub mod modes;
pub mod ops;
pub mod species;
pub mod state;

pub use car::{check_car, check_car_with, CarIdentity, CarReport, CarViolation};
pub use dense::{FockMatrix, SectorBasis};
pub use expm::{evolve_exp, evolve_exp_krylov, evolve_exp_with, ExpOptions};
pub use modes::{ModeIndex, ModeSpace};
pub use ops::{apply_term, apply_terms, expectation, FermionOp, OperatorTerm};
pub use species::{Mass, Role, SpeciesSpec};
pub use state::{apply_annihilation, apply_creation, ParityRule, SectorState};
