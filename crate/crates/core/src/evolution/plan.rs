//! Five-window schedule and classical trajectories.
//!
//! Windows: [t₀,t₁] all free; [t₁,t₂] measurement plus comparator kinetic;
//! [t₂,t₃] all free; [t₃,t₄] comparator interaction plus system kinetic;
//! [t₄,∞) all free.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{add3, distance, scale3};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageTimes {
    pub t0: f64,
    pub t1: f64,
    pub t2: f64,
    pub t3: f64,
    pub t4: f64,
}

impl StageTimes {
    pub fn sudden(t0: f64, t1: f64, t3: f64) -> Self {
        Self { t0, t1, t2: t1, t3, t4: t3 }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.t0 < self.t1 && self.t1 <= self.t2 && self.t2 < self.t3 && self.t3 <= self.t4;
        if !ok || ![self.t0, self.t1, self.t2, self.t3, self.t4].iter().all(|t| t.is_finite()) {
            return Err(Error::Precondition(format!("stage times must satisfy t0 < t1 <= t2 < t3 <= t4: {self:?}")));
        }
        Ok(())
    }

    /// Query time inside the first free window after the measurements.
    pub fn mid_23(&self) -> f64 {
        0.5 * (self.t2 + self.t3)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StagePlan {
    pub times: StageTimes,
    /// Θ: full measurement rotation angle.
    pub theta: f64,
    /// Θ_C (β in the perturbative regime).
    pub theta_c: f64,
}

impl StagePlan {
    /// Finite-coupling windows: Θ = κ(t₂−t₁)/ħ, Θ_C = κ_C(t₄−t₃)/ħ.
    pub fn finite(times: StageTimes, kappa: f64, kappa_c: f64, hbar: f64) -> Self {
        Self {
            times,
            theta: kappa * (times.t2 - times.t1) / hbar,
            theta_c: kappa_c * (times.t4 - times.t3) / hbar,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Group {
    System,
    Observer,
    Comparator,
    /// Static fields never move.
    Fixed,
}

impl Group {
    pub const MOVING: [Group; 3] = [Group::System, Group::Observer, Group::Comparator];
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InteractionKind {
    Measurement,
    Comparator,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Segment {
    Free { groups: Vec<Group>, duration: f64 },
    Interaction { kind: InteractionKind, angle: f64, fraction: f64 },
}

fn window_fraction(tq: f64, a: f64, b: f64) -> f64 {
    if b > a {
        ((tq - a) / (b - a)).clamp(0.0, 1.0)
    } else {
        1.0
    }
}

/// Ordered propagation steps taking the state from t₀ to `tq`. Inside a
/// window the coupling×time is interpolated linearly. A zero-length
/// window counts as applied once `tq` reaches it.
pub fn segments(plan: &StagePlan, tq: f64) -> Vec<Segment> {
    let t = &plan.times;
    let all = Group::MOVING.to_vec();
    let mut out = vec![Segment::Free { groups: all.clone(), duration: tq.min(t.t1) - t.t0 }];
    if tq < t.t1 {
        return out;
    }
    let f = window_fraction(tq, t.t1, t.t2);
    out.push(Segment::Interaction { kind: InteractionKind::Measurement, angle: f * plan.theta, fraction: f });
    out.push(Segment::Free { groups: vec![Group::Comparator], duration: f * (t.t2 - t.t1) });
    if tq < t.t2 {
        return out;
    }
    out.push(Segment::Free { groups: all.clone(), duration: tq.min(t.t3) - t.t2 });
    if tq < t.t3 {
        return out;
    }
    let f = window_fraction(tq, t.t3, t.t4);
    out.push(Segment::Interaction { kind: InteractionKind::Comparator, angle: f * plan.theta_c, fraction: f });
    out.push(Segment::Free { groups: vec![Group::System], duration: f * (t.t4 - t.t3) });
    if tq < t.t4 {
        return out;
    }
    out.push(Segment::Free { groups: all, duration: tq - t.t4 });
    out
}

/// Time during [t₀, t] in which the group's kinetic term is switched on.
pub fn kinetic_time(plan: &StagePlan, group: Group, t: f64) -> f64 {
    segments(plan, t)
        .iter()
        .map(|s| match s {
            Segment::Free { groups, duration } if groups.contains(&group) => *duration,
            _ => 0.0,
        })
        .sum()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub group: Group,
    pub x0: [f64; 3],
    pub velocity: [f64; 3],
}

/// Classical trajectories, indexed like the species of the mode space.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryPlan {
    pub plan: StagePlan,
    pub entities: Vec<Trajectory>,
}

impl TrajectoryPlan {
    /// x(t) = x₀ + v·(kinetic time). Equals x₀ + v(t−t₀) in the sudden limit.
    pub fn position(&self, entity: usize, t: f64) -> [f64; 3] {
        let e = &self.entities[entity];
        if e.group == Group::Fixed {
            return e.x0;
        }
        add3(&e.x0, &scale3(&e.velocity, kinetic_time(&self.plan, e.group, t)))
    }

    pub fn separation(&self, a: usize, b: usize, t: f64) -> f64 {
        distance(&self.position(a, t), &self.position(b, t))
    }
}
