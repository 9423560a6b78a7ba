//! Staged time evolution: window schedule, free and interaction
//! propagators, series checks, picture equivalence.

pub mod heisenberg;
pub mod plan;
pub mod propagate;
pub mod series;

pub use heisenberg::{heisenberg_consistency, reachable_basis, HeisenbergReport};
pub use plan::{
    kinetic_time, segments, Group, InteractionKind, Segment, StagePlan, StageTimes, Trajectory, TrajectoryPlan,
};
pub use propagate::{
    apply_one_body, dense_propagator, propagate_free, propagate_interaction, run_schedule, ComparatorLink,
    FrameMode, FreeKernel, MeasurementPair, Schedule,
};
pub use series::{aperture_density, qr_series_check, QrReport};
