//! Backend dispatch, probability tables and angle scans.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::audit::AuditReport;
use super::density::{density, localize, DensityField, LocalizedObserver};
use super::factorized::{relative_axis, FactorizedEngine};
use super::scenario::{ScenarioKind, ScenarioSpec};
use crate::analytic::mn_run_partial;
use crate::error::Result;
use crate::evolution::run_schedule;
use crate::lattice::distance;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    Lattice,
    Analytic,
    Both,
}

impl Backend {
    pub fn lattice(self) -> bool {
        matches!(self, Backend::Lattice | Backend::Both)
    }

    pub fn analytic(self) -> bool {
        matches!(self, Backend::Analytic | Backend::Both)
    }
}

impl std::str::FromStr for Backend {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "lattice" => Ok(Backend::Lattice),
            "analytic" => Ok(Backend::Analytic),
            "both" => Ok(Backend::Both),
            other => Err(format!("unknown backend '{other}' (expected lattice|analytic|both)")),
        }
    }
}

/// How the lattice backend evolves the state.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LatticeEngine {
    /// Per-wing product tensors; any lattice size.
    Factorized,
    /// Staged sparse Fock evolution; ≤ 128 modes.
    Sparse,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WindowProbability {
    pub window: String,
    pub time: f64,
    pub species: String,
    pub label: u8,
    pub probability: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LocationCheck {
    pub species: String,
    pub label: u8,
    pub time: f64,
    pub centroid: [f64; 3],
    pub predicted: [f64; 3],
    pub error: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BackendResult {
    pub backend: String,
    pub probabilities: Vec<WindowProbability>,
    pub localized: Vec<LocalizedObserver>,
    pub locations: Vec<LocationCheck>,
}

impl BackendResult {
    pub fn probability(&self, window: &str, species: &str, label: u8) -> Option<f64> {
        self.probabilities
            .iter()
            .find(|w| w.window == window && w.species == species && w.label == label)
            .map(|w| w.probability)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Deviation {
    pub window: String,
    pub species: String,
    pub label: u8,
    pub lattice: f64,
    pub analytic: f64,
    pub abs: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EprbRun {
    pub audit: AuditReport,
    pub lattice: Option<BackendResult>,
    pub analytic: Option<BackendResult>,
    pub deviations: Vec<Deviation>,
    #[serde(skip)]
    pub fields: Vec<DensityField>,
}

/// (window name, query time, species indices queried there).
fn queries(spec: &ScenarioSpec) -> Vec<(&'static str, f64, Vec<usize>)> {
    let mut q = vec![("t23", spec.query_23, (0..spec.wings()).map(|p| spec.wing_species(p).0).collect())];
    if let Some(c) = spec.comparator_species() {
        q.push(("t45", spec.query_45, vec![c]));
    }
    q
}

fn sparse_fields(spec: &ScenarioSpec, tq: f64, species: &[usize]) -> Result<Vec<DensityField>> {
    let schedule = spec.schedule()?;
    let psi = run_schedule(&spec.initial_state()?, &schedule, tq)?;
    let mut out = Vec::new();
    for &s in species {
        for label in 0..2 {
            out.push(density(&psi, &schedule.space, s, label, &spec.lattice, &spec.origin(s, tq), tq)?);
        }
    }
    Ok(out)
}

fn factorized_fields(engine: &FactorizedEngine, tq: f64, species: &[usize]) -> Result<Vec<DensityField>> {
    let spec = engine.spec();
    let mut out = Vec::new();
    for &s in species {
        let pair = if Some(s) == spec.comparator_species() {
            engine.comparator_density(tq)?
        } else {
            let p = (0..spec.wings()).find(|&p| spec.wing_species(p).0 == s).expect("observer species");
            engine.observer_density(p, tq)?
        };
        out.extend(pair);
    }
    Ok(out)
}

/// Densities of the queried observers/comparator at one time on the lattice.
pub fn lattice_fields(spec: &ScenarioSpec, engine: LatticeEngine, tq: f64, species: &[usize]) -> Result<Vec<DensityField>> {
    match engine {
        LatticeEngine::Sparse => sparse_fields(spec, tq, species),
        LatticeEngine::Factorized => factorized_fields(&FactorizedEngine::new(spec)?, tq, species),
    }
}

fn run_lattice(spec: &ScenarioSpec, engine: LatticeEngine) -> Result<(BackendResult, Vec<DensityField>)> {
    let tr = spec.trajectories();
    let fe = match engine {
        LatticeEngine::Factorized => Some(FactorizedEngine::new(spec)?),
        LatticeEngine::Sparse => None,
    };
    let mut res = BackendResult { backend: "lattice".into(), probabilities: vec![], localized: vec![], locations: vec![] };
    let mut all = Vec::new();
    let ids: Vec<String> = spec.species_list().into_iter().map(|s| s.0.id).collect();
    for (window, tq, species) in queries(spec) {
        let fields = match &fe {
            Some(e) => factorized_fields(e, tq, &species)?,
            None => sparse_fields(spec, tq, &species)?,
        };
        for f in &fields {
            res.probabilities.push(WindowProbability {
                window: window.into(),
                time: tq,
                species: f.species.clone(),
                label: f.label,
                probability: f.total(),
            });
            let s = ids.iter().position(|id| *id == f.species).expect("known species");
            let predicted = tr.position(s, tq);
            for lo in localize(f, &spec.lattice, spec.epsilon) {
                res.locations.push(LocationCheck {
                    species: lo.species.clone(),
                    label: lo.label,
                    time: tq,
                    centroid: lo.centroid,
                    predicted,
                    error: distance(&lo.centroid, &predicted),
                });
                res.localized.push(lo);
            }
        }
        all.extend(fields);
    }
    Ok((res, all))
}

fn fraction(tq: f64, a: f64, b: f64) -> f64 {
    if b > a {
        ((tq - a) / (b - a)).clamp(0.0, 1.0)
    } else {
        1.0
    }
}

fn run_analytic(spec: &ScenarioSpec) -> BackendResult {
    let mn = spec.mn_scenario();
    let tr = spec.trajectories();
    let t = spec.times;
    let ids: Vec<String> = spec.species_list().into_iter().map(|s| s.0.id).collect();
    let mut res = BackendResult { backend: "analytic".into(), probabilities: vec![], localized: vec![], locations: vec![] };
    for (window, tq, species) in queries(spec) {
        let f_meas = if tq < t.t1 { 0.0 } else { fraction(tq, t.t1, t.t2) };
        let f_comp = if tq < t.t3 { 0.0 } else { fraction(tq, t.t3, t.t4) };
        let out = mn_run_partial(&mn, f_meas, f_comp);
        for s in species {
            let probs = if Some(s) == spec.comparator_species() {
                out.comparator.expect("eprb comparator")
            } else {
                let p = (0..spec.wings()).find(|&p| spec.wing_species(p).0 == s).expect("observer species");
                out.observer[p]
            };
            let predicted = tr.position(s, tq);
            for (label, &probability) in probs.iter().enumerate() {
                res.probabilities.push(WindowProbability {
                    window: window.into(),
                    time: tq,
                    species: ids[s].clone(),
                    label: label as u8,
                    probability,
                });
                if probability > 0.0 {
                    res.localized.push(LocalizedObserver {
                        species: ids[s].clone(),
                        label: label as u8,
                        time: tq,
                        cells: vec![],
                        probability,
                        centroid: predicted,
                        epsilon: spec.epsilon,
                    });
                }
            }
        }
    }
    res
}

/// Audits the scenario, then evaluates the requested backends at t_[2,3]
/// (observers) and t_[4,5] (comparator).
pub fn run_eprb(spec: &ScenarioSpec, backend: Backend, engine: LatticeEngine) -> Result<EprbRun> {
    let audit = spec.audit()?;
    let (lattice, fields) = if backend.lattice() {
        let (r, f) = run_lattice(spec, engine)?;
        (Some(r), f)
    } else {
        (None, vec![])
    };
    let analytic = backend.analytic().then(|| run_analytic(spec));
    let mut deviations = Vec::new();
    if let (Some(l), Some(a)) = (&lattice, &analytic) {
        for w in &l.probabilities {
            if let Some(pa) = a.probability(&w.window, &w.species, w.label) {
                deviations.push(Deviation {
                    window: w.window.clone(),
                    species: w.species.clone(),
                    label: w.label,
                    lattice: w.probability,
                    analytic: pa,
                    abs: (w.probability - pa).abs(),
                });
            }
        }
    }
    Ok(EprbRun { audit, lattice, analytic, deviations, fields })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScanRow {
    pub theta12_rad: f64,
    pub p_c1: f64,
    /// P^C₁ / (sin²β / 2); equals ½(1 − cos θ₁₂) exactly in the MN limit.
    pub p_c1_normalized: f64,
    /// P^C₁ / (β² / 2); carries the O(β²) gap.
    pub p_c1_normalized_beta2: f64,
    pub backend: String,
    pub beta: f64,
}

/// 13 points from 0 to π.
pub fn default_grid() -> Vec<f64> {
    (0..13).map(|k| std::f64::consts::PI * k as f64 / 12.0).collect()
}

/// Comparator probability at t_[4,5] versus the relative analyzer angle;
/// n₂ is n₁ rotated by θ₁₂ in n₁'s meridian plane.
pub fn scan_correlation(base: &ScenarioSpec, grid: &[f64], backend: Backend) -> Result<Vec<ScanRow>> {
    base.audit()?;
    if base.kind != ScenarioKind::Eprb {
        return Err(crate::error::Error::Precondition("scan needs an eprb scenario".into()));
    }
    let beta = base.plan().theta_c;
    let rows: Vec<Result<Vec<ScanRow>>> = grid
        .par_iter()
        .map(|&th| {
            let mut spec = base.clone();
            spec.axes[1] = relative_axis(&base.axes[0], th);
            let mut rows = Vec::new();
            let mut push = |p: f64, name: &str| {
                rows.push(ScanRow {
                    theta12_rad: th,
                    p_c1: p,
                    p_c1_normalized: p / (0.5 * beta.sin().powi(2)),
                    p_c1_normalized_beta2: p / (0.5 * beta * beta),
                    backend: name.into(),
                    beta,
                });
            };
            if backend.analytic() {
                let t = spec.times;
                let out = mn_run_partial(&spec.mn_scenario(), 1.0, fraction(spec.query_45, t.t3, t.t4));
                push(out.comparator.expect("eprb")[1], "analytic");
            }
            if backend.lattice() {
                push(FactorizedEngine::new(&spec)?.comparator_probability(spec.query_45)?, "lattice");
            }
            Ok(rows)
        })
        .collect();
    let mut out = Vec::new();
    for r in rows {
        out.extend(r?);
    }
    Ok(out)
}
