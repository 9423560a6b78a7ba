//! Vacuum-representation transform with fictitious static fields.

pub mod fictitious;
pub mod scenario;
pub mod transform;

pub use fictitious::{FictitiousFieldSpec, FictitiousShape};
pub use scenario::{DhGenerator, DhScenario, GeneratorKind};
pub use transform::{
    closed_form_observer_field, dense_exp, dense_generator, dense_v, dh_apply_v, dh_transform_operator, dh_transform_state,
    expectation_equivalence, frobenius, generator_checks, generator_probe, locality_footprint, pipeline_equivalence, vacuum_report,
    EquivalenceReport, GeneratorChecks, LocalityFootprint, VacuumReport,
};
