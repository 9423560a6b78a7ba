//! Preparation conditions S1–S4 plus lattice sanity (aliasing, packet
//! resolution).

use serde::Serialize;

use super::scenario::{PacketPolicy, ScenarioKind, ScenarioSpec};
use crate::error::{Error, Result};
use crate::evolution::FrameMode;
use crate::lattice::distance;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AuditItem {
    pub condition: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AuditReport {
    pub items: Vec<AuditItem>,
    /// (pair, t_enter, t_leave) for every interacting pair that meets.
    pub encounters: Vec<(String, f64, f64)>,
}

impl AuditReport {
    pub fn passed(&self) -> bool {
        self.items.iter().all(|i| i.passed)
    }

    pub fn first_failure(&self) -> Option<&AuditItem> {
        self.items.iter().find(|i| !i.passed)
    }
}

/// Samples per unit of the audit horizon when locating encounter windows.
const ENCOUNTER_SAMPLES: usize = 20_000;

fn item(condition: &'static str, passed: bool, detail: String) -> AuditItem {
    AuditItem { condition, passed, detail }
}

/// Intervals (on a sampled grid) where the separation is within `a`.
fn encounter_windows(f: &dyn Fn(f64) -> f64, a: f64, t0: f64, t_end: f64) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    let mut open: Option<f64> = None;
    for k in 0..=ENCOUNTER_SAMPLES {
        let t = t0 + (t_end - t0) * k as f64 / ENCOUNTER_SAMPLES as f64;
        let inside = f(t) <= a * (1.0 + 1e-12);
        match (inside, open) {
            (true, None) => open = Some(t),
            (false, Some(s)) => {
                out.push((s, t));
                open = None;
            }
            _ => {}
        }
    }
    if let Some(s) = open {
        out.push((s, t_end));
    }
    out
}

pub fn audit(spec: &ScenarioSpec) -> Result<AuditReport> {
    spec.times.validate()?;
    let species = spec.species_list();
    let tr = spec.trajectories();
    let t0 = spec.times.t0;
    let mut items = Vec::new();

    // S1: one quantum per species, each species listed once.
    let mut ids: Vec<&str> = species.iter().map(|s| s.0.id.as_str()).collect();
    ids.sort_unstable();
    let unique = ids.windows(2).all(|w| w[0] != w[1]);
    let positive = species.iter().all(|s| s.1.alpha > 0.0 && s.1.mass > 0.0);
    items.push(item("S1", unique && positive, format!("{} species, one quantum each", species.len())));

    // S2: well separated at t₀ (the singlet pair shares its source).
    let a_max = spec.apertures.iter().copied().fold(spec.aperture_c, f64::max);
    let mut s2 = (true, String::from("all pairs separated"));
    for i in 0..species.len() {
        for j in i + 1..species.len() {
            if spec.kind == ScenarioKind::Eprb && (i, j) == (0, 1) {
                continue;
            }
            let d = distance(&species[i].1.center, &species[j].1.center);
            let need = 5.0 * species[i].1.width().max(species[j].1.width()) + a_max;
            if d <= need && s2.0 {
                s2 = (false, format!("{}–{} separation {d} ≤ {need}", species[i].0.id, species[j].0.id));
            }
        }
    }
    items.push(item("S2", s2.0, s2.1));

    // Packets must fit the lattice window; in the lab frame the velocity
    // phase must also be resolved.
    let mut res = (true, String::from("packets resolved"));
    for (s, (sp, p, _)) in species.iter().enumerate() {
        if spec.frame == FrameMode::Lab {
            let v = p.velocity.iter().map(|x| x * x).sum::<f64>().sqrt();
            let k = p.mass * v * spec.lattice.spacing() / spec.hbar;
            if k > std::f64::consts::FRAC_PI_4 {
                res = (false, format!("{}: m|v|Δx/ħ = {k} exceeds π/4 (aliasing)", sp.id));
                break;
            }
        }
        if spec.packet_policy == PacketPolicy::Strict {
            if let Err(e) = spec.spatial_amplitudes(s) {
                res = (false, e.to_string());
                break;
            }
        }
    }
    items.push(item("S2", res.0, res.1));

    // S3: observers and comparator start ignorant. Enforced by the state
    // builder; recorded for completeness.
    items.push(item("S3", true, "observers prepared in awareness 0".into()));

    // S4: interacting pairs meet only briefly, measurement encounters end
    // before comparator encounters begin.
    let t_end = spec.query_45.max(spec.query_23).max(spec.times.t4) + (spec.times.t4 - t0);
    let mut encounters = Vec::new();
    let mut meas_end = f64::NEG_INFINITY;
    let mut s4 = (true, String::from("encounter windows disjoint"));
    for p in 0..spec.wings() {
        let (o, s) = spec.wing_species(p);
        let w = encounter_windows(&|t| tr.separation(o, s, t), spec.apertures[p], t0, t_end);
        for &(a, b) in &w {
            meas_end = meas_end.max(b);
            encounters.push((format!("{}-{}", species[o].0.id, species[s].0.id), a, b));
        }
        if w.len() > 1 {
            s4 = (false, format!("wing {} meets its system {} times", p + 1, w.len()));
        }
    }
    let mut comp_start = f64::INFINITY;
    if let Some(c) = spec.comparator_species() {
        for o in [2, 3] {
            let w = encounter_windows(&|t| tr.separation(c, o, t), spec.aperture_c, t0, t_end);
            for &(a, b) in &w {
                comp_start = comp_start.min(a);
                encounters.push((format!("{}-{}", species[c].0.id, species[o].0.id), a, b));
            }
        }
    }
    if s4.0 && meas_end > comp_start {
        s4 = (false, format!("measurement encounter ends at {meas_end} after comparator encounter starts at {comp_start}"));
    }
    if s4.0 {
        if let Some((pair, a, _)) = encounters.iter().find(|e| e.1 <= t0) {
            s4 = (false, format!("{pair} already within aperture at t0={a}"));
        }
    }
    items.push(item("S4", s4.0, s4.1));

    let report = AuditReport { items, encounters };
    match report.first_failure() {
        Some(f) => Err(Error::Audit { condition: f.condition, detail: f.detail.clone() }),
        None => Ok(report),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_scenarios_pass() {
        let r = ScenarioSpec::default_eprb().audit().unwrap();
        assert!(r.passed());
        assert_eq!(r.encounters.len(), 4);
        assert!(ScenarioSpec::default_single().audit().unwrap().passed());
        assert!(ScenarioSpec::default_eprb().doubled().audit().unwrap().passed());
    }

    #[test]
    fn crowded_start_names_s2() {
        let mut s = ScenarioSpec::default_eprb();
        s.entities.o2.center[0] = -5.0;
        match s.audit() {
            Err(Error::Audit { condition, .. }) => assert_eq!(condition, "S2"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn early_comparator_encounter_names_s4() {
        let mut s = ScenarioSpec::default_eprb();
        // observer 1 passes the comparator before meeting its system
        s.entities.c.center[0] = -60.0;
        match s.audit() {
            Err(Error::Audit { condition, .. }) => assert_eq!(condition, "S4"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn lab_frame_flags_aliasing() {
        let mut s = ScenarioSpec::default_eprb();
        s.frame = FrameMode::Lab;
        s.packet_policy = PacketPolicy::Renormalize;
        match s.audit() {
            Err(Error::Audit { condition, detail }) => {
                assert_eq!(condition, "S2");
                assert!(detail.contains("aliasing"));
            }
            other => panic!("{other:?}"),
        }
    }
}
