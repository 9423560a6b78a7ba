//! Lattice-to-MN convergence under successive resolution doubling.

use serde::Serialize;

use crate::eprb::{run_eprb, Backend, LatticeEngine, ScenarioSpec};
use crate::error::Result;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResolutionDeviation {
    pub sites_per_axis: usize,
    pub spacing: f64,
    /// max |lattice − MN| over observer probabilities at t_[2,3].
    pub observer: f64,
    /// max |lattice − MN| over comparator probabilities at t_[4,5].
    pub comparator: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub rows: Vec<ResolutionDeviation>,
}

impl ConvergenceReport {
    /// True when each refinement does not increase the observer deviation
    /// beyond `slack`.
    pub fn monotone(&self, slack: f64) -> bool {
        self.rows.windows(2).all(|w| w[1].observer <= w[0].observer + slack)
    }
}

/// Runs `spec` and `refinements` successive doublings on both backends.
pub fn mn_vs_lattice(spec: &ScenarioSpec, refinements: usize) -> Result<ConvergenceReport> {
    let mut rows = Vec::new();
    let mut s = spec.clone();
    for k in 0..=refinements {
        if k > 0 {
            s = s.doubled();
        }
        let run = run_eprb(&s, Backend::Both, LatticeEngine::Factorized)?;
        let max_of = |window: &str| {
            run.deviations.iter().filter(|d| d.window == window).map(|d| d.abs).fold(0.0, f64::max)
        };
        let observer = max_of("t23");
        let comparator = max_of("t45");
        rows.push(ResolutionDeviation {
            sites_per_axis: s.lattice.sites_per_axis(),
            spacing: s.lattice.spacing(),
            observer,
            comparator,
        });
    }
    Ok(ConvergenceReport { rows })
}
