//! Structured output of a run: record.json plus flat CSV tables.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use everett_core::eprb::{AuditReport, DensityField, Deviation, EprbRun, LocationCheck, LocalizedObserver};
use everett_core::tolerances as tol;
use serde::Serialize;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub const THRESHOLD_NOTE: &str = "observer regions are the epsilon-superlevel sets of the per-cell density, split \
     into connected components; epsilon is a policy choice of this tool";

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LatticeProvenance {
    pub dim: usize,
    pub sites_per_axis: usize,
    pub spacing: f64,
    pub boundary: String,
    pub frame: String,
    pub engine: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProbabilityRow {
    pub backend: String,
    pub window: String,
    pub time: f64,
    pub species: String,
    pub label: u8,
    pub probability: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LocalizedRow {
    pub backend: String,
    #[serde(flatten)]
    pub observer: LocalizedObserver,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LocationRow {
    pub backend: String,
    #[serde(flatten)]
    pub check: LocationCheck,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResultRecord {
    pub version: String,
    pub command: String,
    pub seed: u64,
    /// Full configuration in the input format; parses back to the same run.
    pub config: String,
    pub backends: Vec<String>,
    pub lattice: LatticeProvenance,
    pub audit: AuditReport,
    pub probabilities: Vec<ProbabilityRow>,
    pub localized: Vec<LocalizedRow>,
    pub locations: Vec<LocationRow>,
    pub deviations: Vec<Deviation>,
    pub tolerances: BTreeMap<String, f64>,
    pub epsilon: f64,
    pub threshold_note: String,
}

pub fn tolerance_table() -> BTreeMap<String, f64> {
    [
        ("analytic_probability", tol::ANALYTIC_PROBABILITY),
        ("lattice_probability", tol::LATTICE_PROBABILITY),
        ("lattice_probability_doubled", tol::LATTICE_PROBABILITY_DOUBLED),
        ("completeness", tol::COMPLETENESS),
        ("probability_ceiling", tol::PROBABILITY_CEILING),
        ("scan_analytic", tol::SCAN_ANALYTIC),
        ("scan_lattice", tol::SCAN_LATTICE),
        ("location_cells", tol::LOCATION_CELLS),
    ]
    .into_iter()
    .map(|(k, v)| (k.to_string(), v))
    .collect()
}

impl ResultRecord {
    pub fn from_run(
        run: &EprbRun,
        config: &crate::config::RunConfig,
        command: &str,
        seed: u64,
    ) -> Self {
        let spec = &config.scenario;
        let mut backends = Vec::new();
        let mut probabilities = Vec::new();
        let mut localized = Vec::new();
        let mut locations = Vec::new();
        for res in [&run.lattice, &run.analytic].into_iter().flatten() {
            backends.push(res.backend.clone());
            for w in &res.probabilities {
                probabilities.push(ProbabilityRow {
                    backend: res.backend.clone(),
                    window: w.window.clone(),
                    time: w.time,
                    species: w.species.clone(),
                    label: w.label,
                    probability: w.probability,
                });
            }
            localized.extend(res.localized.iter().map(|o| LocalizedRow { backend: res.backend.clone(), observer: o.clone() }));
            locations.extend(res.locations.iter().map(|c| LocationRow { backend: res.backend.clone(), check: c.clone() }));
        }
        let lat = &spec.lattice;
        Self {
            version: VERSION.into(),
            command: command.into(),
            seed,
            config: config.to_text(),
            backends,
            lattice: LatticeProvenance {
                dim: lat.dim(),
                sites_per_axis: lat.sites_per_axis(),
                spacing: lat.spacing(),
                boundary: format!("{:?}", lat.boundary()).to_lowercase(),
                frame: format!("{:?}", spec.frame).to_lowercase(),
                engine: format!("{:?}", config.run.engine).to_lowercase(),
            },
            audit: run.audit.clone(),
            probabilities,
            localized,
            locations,
            deviations: run.deviations.clone(),
            tolerances: tolerance_table(),
            epsilon: spec.epsilon,
            threshold_note: THRESHOLD_NOTE.into(),
        }
    }

    /// Probabilities in [0, 1 + ceiling] and P₀ + P₁ = 1 per observer.
    pub fn validate(&self) -> Result<(), String> {
        for p in &self.probabilities {
            if !(p.probability >= -tol::PROBABILITY_CEILING && p.probability <= 1.0 + tol::PROBABILITY_CEILING) {
                return Err(format!("{} {} label {} probability {} out of range", p.backend, p.species, p.label, p.probability));
            }
        }
        for p in self.probabilities.iter().filter(|p| p.label == 0) {
            let other = self
                .probabilities
                .iter()
                .find(|q| q.backend == p.backend && q.window == p.window && q.species == p.species && q.label == 1);
            if let Some(q) = other {
                let sum = p.probability + q.probability;
                if (sum - 1.0).abs() > tol::COMPLETENESS {
                    return Err(format!("{} {} at {}: P0 + P1 = {sum}", p.backend, p.species, p.window));
                }
            }
        }
        Ok(())
    }

    pub fn write_json(&self, path: &Path) -> std::io::Result<()> {
        let mut f = std::fs::File::create(path)?;
        serde_json::to_writer_pretty(&mut f, self)?;
        writeln!(f)
    }
}

/// 17 significant digits.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_densities(path: &Path, fields: &[DensityField]) -> csv::Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["species", "label", "time", "cell", "x", "density"])?;
    for f in fields {
        for (cell, (pos, v)) in f.positions.iter().zip(&f.values).enumerate() {
            w.write_record([
                f.species.clone(),
                f.label.to_string(),
                num(f.time),
                cell.to_string(),
                num(pos[0]),
                num(*v),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}
