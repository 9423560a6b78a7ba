//! Pass thresholds shared by the acceptance suite and the CLI checks.

/// Analytic observer probability against ½.
pub const ANALYTIC_PROBABILITY: f64 = 1e-12;
/// Lattice observer probability at the default resolution.
pub const LATTICE_PROBABILITY: f64 = 1e-2;
/// Lattice observer probability at doubled resolution.
pub const LATTICE_PROBABILITY_DOUBLED: f64 = 2e-3;
/// P₀ + P₁ = 1 at every query time.
pub const COMPLETENESS: f64 = 1e-9;
/// Slack above 1 allowed for any reported probability.
pub const PROBABILITY_CEILING: f64 = 1e-9;

/// Normalized correlation curve, analytic and lattice.
pub const SCAN_ANALYTIC: f64 = 1e-6;
pub const SCAN_LATTICE: f64 = 1e-2;

/// 1 − |⟨0|V†|ψ′⟩|².
pub const DH_SINGLE_FIDELITY: f64 = 1e-9;
pub const DH_EPRB_FIDELITY: f64 = 1e-8;
/// Frobenius distance of V†χV from its closed form.
pub const DH_CLOSED_FORM: f64 = 1e-9;
/// Spread of physical expectations across fictitious draws.
pub const DH_FICTITIOUS: f64 = 1e-10;
/// ‖[W_a, W_b]‖ for commuting generators.
pub const DH_COMMUTATOR: f64 = 1e-12;

pub const UNITARITY: f64 = 1e-10;
pub const HERMITICITY: f64 = 1e-12;

/// Truncated Q/R series at order 8 against cos/sin.
pub const QR_SERIES: f64 = 1e-6;
pub const QR_ORDER: usize = 8;

pub const GREEN_COMPOSITION: f64 = 1e-8;

pub const TAIL_SLOPE: f64 = -0.5;
/// Relative tolerance on the fitted tail slope.
pub const TAIL_SLOPE_REL: f64 = 0.1;

/// Dense against staged sparse evolution, and against the analytic limit.
pub const DENSE_SPARSE: f64 = 1e-8;
pub const MINI_ANALYTIC: f64 = 1e-2;

/// Observer centroid against the classical trajectory, in units of Δx.
pub const LOCATION_CELLS: f64 = 0.5;
