//! Scenario orchestration: preparation audit, backends, the
//! interpretational rule and correlation scans.

pub mod audit;
pub mod density;
pub mod factorized;
pub mod run;
pub mod scenario;

pub use audit::{AuditItem, AuditReport};
pub use density::{density, localize, DensityField, LocalizedObserver};
pub use factorized::{relative_axis, FactorizedEngine};
pub use run::{
    default_grid, lattice_fields, run_eprb, scan_correlation, Backend, BackendResult, Deviation, EprbRun,
    LatticeEngine, LocationCheck, ScanRow, WindowProbability,
};
pub use scenario::{CouplingMode, Entities, PacketPolicy, ScenarioKind, ScenarioSpec};
