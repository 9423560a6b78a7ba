//! Fermionic field simulation of local measurement models: Fock-sector
//! numerics, closed-form trajectory backend, and vacuum-representation
//! transforms.

pub mod analytic;
pub mod dh;
pub mod eprb;
pub mod error;
pub mod evolution;
pub mod fock;
pub mod lattice;
pub mod model;
pub mod tolerances;

pub use error::{Error, Result};
pub use lattice::{Boundary, Lattice};
pub use num_complex::Complex64 as C64;
