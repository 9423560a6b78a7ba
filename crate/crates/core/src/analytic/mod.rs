//! Closed-form backends: trajectory (MN) limit, continuum packets, tail
//! integrals, and backend cross-validation.

pub mod compare;
pub mod continuum;
pub mod mn;
pub mod quadrature;
pub mod tail;

pub use compare::{mn_vs_lattice, ConvergenceReport, ResolutionDeviation};
pub use continuum::{alpha_tilde, continuum_packet, green, kernel_composition, packet_composition, Composition};
pub use mn::{comparator_closed_form, mn_run, mn_run_partial, MnKind, MnOutcome, MnScenario};
pub use quadrature::{Integrator, QuadOptions, QuadResult};
pub use tail::{fit_tail_slope, tail_integral, tail_scan, TailIntegralSpec, TailRow};
