//! Scenario description, S1–S4 audit, and translation into the mode
//! space, schedule and trajectory-limit inputs.

use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::analytic::{MnKind, MnScenario};
use super::audit::AuditReport;
use crate::error::Result;
use crate::evolution::{
    ComparatorLink, FrameMode, Group, MeasurementPair, Schedule, StagePlan, StageTimes, Trajectory, TrajectoryPlan,
};
use crate::fock::{ModeSpace, SectorState, SpeciesSpec};
use crate::lattice::{sub3, Boundary, Lattice};
use crate::model::{build_packet_state, Internal, PacketEntry, SpinAxis, WavepacketSpec};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioKind {
    Eprb,
    SingleObserver,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CouplingMode {
    /// Windows parameterized directly by Θ and Θ_C.
    Sudden,
    /// Θ = κ(t₂−t₁)/ħ, Θ_C = κ_C(t₄−t₃)/ħ.
    Finite { kappa: f64, kappa_c: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PacketPolicy {
    /// Packets must be resolved by the lattice (norm and boundary audit).
    Strict,
    /// Sample and renormalize; for deliberately tiny lattices.
    Renormalize,
}

/// Wave packets at t₀ in lab coordinates. A single-observer scenario uses
/// `s1` and `o1` only.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Entities {
    pub s1: WavepacketSpec,
    pub s2: WavepacketSpec,
    pub o1: WavepacketSpec,
    pub o2: WavepacketSpec,
    pub c: WavepacketSpec,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScenarioSpec {
    pub kind: ScenarioKind,
    pub axes: [SpinAxis; 2],
    pub theta: f64,
    pub beta: f64,
    pub coupling: CouplingMode,
    pub apertures: [f64; 2],
    pub aperture_c: f64,
    pub times: StageTimes,
    pub query_23: f64,
    pub query_45: f64,
    pub hbar: f64,
    pub lattice: Lattice,
    pub frame: FrameMode,
    pub packet_policy: PacketPolicy,
    pub entities: Entities,
    /// b₁, b₂ for the single-observer system spin.
    pub spin: [C64; 2],
    /// Per-cell threshold of the interpretational rule.
    pub epsilon: f64,
}

pub const DEFAULT_WIDTH: f64 = 1.5;
pub const DEFAULT_APERTURE: f64 = 6.0;

fn packet(x0: f64, v: f64, width: f64) -> WavepacketSpec {
    WavepacketSpec { center: [x0, 0.0, 0.0], alpha: width.powi(-2), velocity: [v, 0.0, 0.0], mass: 1.0 }
}

impl ScenarioSpec {
    /// 1-D, L = 48, Δx = 1, ħ = m = 1, packet width 1.5, apertures 6.
    /// Systems leave a common source; each observer meets its system at
    /// t₁ and both observers reach the static comparator at t₃.
    pub fn default_eprb() -> Self {
        let w = DEFAULT_WIDTH;
        Self {
            kind: ScenarioKind::Eprb,
            axes: [SpinAxis::new(0.0, 0.0), SpinAxis::new(std::f64::consts::FRAC_PI_2, 0.0)],
            theta: std::f64::consts::FRAC_PI_2,
            beta: 0.1,
            coupling: CouplingMode::Sudden,
            apertures: [DEFAULT_APERTURE; 2],
            aperture_c: DEFAULT_APERTURE,
            times: StageTimes::sudden(0.0, 0.5, 1.0),
            query_23: 0.75,
            query_45: 1.25,
            hbar: 1.0,
            lattice: Lattice::new(1, 48, 1.0, Boundary::Open).expect("static lattice"),
            frame: FrameMode::Comoving,
            packet_policy: PacketPolicy::Strict,
            entities: Entities {
                s1: packet(0.0, -40.0, w),
                s2: packet(0.0, 40.0, w),
                o1: packet(-100.0, 160.0, w),
                o2: packet(-20.0, 80.0, w),
                c: packet(60.0, 0.0, w),
            },
            spin: [C64::new(1.0, 0.0), C64::new(0.0, 0.0)],
            epsilon: 1e-6,
        }
    }

    /// One system, one observer meeting at t₁.
    pub fn default_single() -> Self {
        let mut s = Self::default_eprb();
        s.kind = ScenarioKind::SingleObserver;
        s.axes = [SpinAxis::new(0.0, 0.0); 2];
        let b = std::f64::consts::FRAC_1_SQRT_2;
        s.spin = [C64::new(b, 0.0), C64::new(0.0, b)];
        s
    }

    /// Twice the cells at half the spacing, with packet widths halved and
    /// apertures kept.
    pub fn doubled(&self) -> Self {
        let mut s = self.clone();
        s.lattice = self.lattice.doubled();
        for e in s.entities_mut() {
            e.alpha *= 4.0;
        }
        s
    }

    /// Static packets in a small lab-frame window of `sites` cells, entity
    /// k centered on cell k mod `sites`. Used by the vacuum-representation
    /// checks, whose full Fock space must stay small.
    pub fn static_window(&self, sites: usize, alpha: f64) -> Result<Self> {
        let mut s = self.clone();
        s.lattice = Lattice::chain(sites, 1.0)?;
        s.frame = FrameMode::Lab;
        s.packet_policy = PacketPolicy::Renormalize;
        for (k, p) in s.entities_mut().into_iter().enumerate() {
            p.center = [(k % sites) as f64 + 0.5, 0.0, 0.0];
            p.velocity = [0.0; 3];
            p.alpha = alpha;
        }
        Ok(s)
    }

    fn entities_mut(&mut self) -> [&mut WavepacketSpec; 5] {
        let e = &mut self.entities;
        [&mut e.s1, &mut e.s2, &mut e.o1, &mut e.o2, &mut e.c]
    }

    pub fn plan(&self) -> StagePlan {
        match self.coupling {
            CouplingMode::Sudden => StagePlan { times: self.times, theta: self.theta, theta_c: self.beta },
            CouplingMode::Finite { kappa, kappa_c } => StagePlan::finite(self.times, kappa, kappa_c, self.hbar),
        }
    }

    /// Species in mode order with their packets and trajectory groups.
    pub fn species_list(&self) -> Vec<(SpeciesSpec, WavepacketSpec, Group)> {
        let e = &self.entities;
        match self.kind {
            ScenarioKind::Eprb => vec![
                (SpeciesSpec::system("S1", e.s1.mass), e.s1, Group::System),
                (SpeciesSpec::system("S2", e.s2.mass), e.s2, Group::System),
                (SpeciesSpec::observer("O1", e.o1.mass), e.o1, Group::Observer),
                (SpeciesSpec::observer("O2", e.o2.mass), e.o2, Group::Observer),
                (SpeciesSpec::comparator("C", e.c.mass), e.c, Group::Comparator),
            ],
            ScenarioKind::SingleObserver => vec![
                (SpeciesSpec::system("S", e.s1.mass), e.s1, Group::System),
                (SpeciesSpec::observer("O", e.o1.mass), e.o1, Group::Observer),
            ],
        }
    }

    pub fn wings(&self) -> usize {
        match self.kind {
            ScenarioKind::Eprb => 2,
            ScenarioKind::SingleObserver => 1,
        }
    }

    /// (observer, system) species indices per wing.
    pub fn wing_species(&self, p: usize) -> (usize, usize) {
        match self.kind {
            ScenarioKind::Eprb => (2 + p, p),
            ScenarioKind::SingleObserver => (1, 0),
        }
    }

    pub fn comparator_species(&self) -> Option<usize> {
        (self.kind == ScenarioKind::Eprb).then_some(4)
    }

    pub fn trajectories(&self) -> TrajectoryPlan {
        TrajectoryPlan {
            plan: self.plan(),
            entities: self
                .species_list()
                .into_iter()
                .map(|(_, p, g)| Trajectory { group: g, x0: p.center, velocity: p.velocity })
                .collect(),
        }
    }

    /// Gate decisions on classical trajectories: measurement pairs at t₁,
    /// comparator with both observers at t₃.
    pub fn gates(&self) -> ([bool; 2], bool) {
        let tr = self.trajectories();
        let t = &self.times;
        let mut g = [false; 2];
        for (p, slot) in g.iter_mut().enumerate().take(self.wings()) {
            let (o, s) = self.wing_species(p);
            *slot = tr.separation(o, s, t.t1) <= self.apertures[p] * (1.0 + 1e-12);
        }
        let gc = match self.comparator_species() {
            Some(c) => (0..2).all(|p| tr.separation(c, 2 + p, t.t3) <= self.aperture_c * (1.0 + 1e-12)),
            None => false,
        };
        (g, gc)
    }

    /// Distances at the meeting times; zero under perfect alignment.
    pub fn alignment_residuals(&self) -> Vec<(String, f64)> {
        let tr = self.trajectories();
        let t = &self.times;
        let mut out = Vec::new();
        for p in 0..self.wings() {
            let (o, s) = self.wing_species(p);
            out.push((format!("wing{}_t1", p + 1), tr.separation(o, s, t.t1)));
        }
        if let Some(c) = self.comparator_species() {
            out.push(("observers_t3".into(), tr.separation(2, 3, t.t3)));
            for p in 0..2 {
                out.push((format!("observer{}_comparator_t3", p + 1), tr.separation(2 + p, c, t.t3)));
            }
        }
        out
    }

    pub fn mn_scenario(&self) -> MnScenario {
        let (gates, gate_c) = self.gates();
        let plan = self.plan();
        MnScenario {
            kind: match self.kind {
                ScenarioKind::Eprb => MnKind::Eprb,
                ScenarioKind::SingleObserver => MnKind::SingleObserver { spin: self.spin },
            },
            axes: self.axes,
            theta: plan.theta,
            theta_c: plan.theta_c,
            gates,
            gate_c,
        }
    }

    pub fn mode_space(&self) -> Result<ModeSpace> {
        ModeSpace::new(self.species_list().into_iter().map(|e| e.0).collect(), self.lattice.cell_count())
    }

    /// Frame origin of a species at time t (lab position of cell k is
    /// center(k) + origin).
    pub fn origin(&self, species: usize, t: f64) -> [f64; 3] {
        match self.frame {
            FrameMode::Lab => [0.0; 3],
            FrameMode::Comoving => sub3(&self.trajectories().position(species, t), &self.lattice.midpoint()),
        }
    }

    /// Discretized t₀ amplitudes of one species in its own frame. In a
    /// co-moving frame the packet is at rest, so the velocity phase drops.
    pub fn spatial_amplitudes(&self, species: usize) -> Result<Vec<C64>> {
        let (spec, mut p, _) = self.species_list()[species].clone();
        if self.frame == FrameMode::Comoving {
            p.velocity = [0.0; 3];
        }
        let origin = self.origin(species, self.times.t0);
        match self.packet_policy {
            PacketPolicy::Strict => p.discretize(&spec.id, &self.lattice, &origin, self.hbar),
            PacketPolicy::Renormalize => {
                Ok(crate::model::packet::normalize(p.sample(&self.lattice, &origin, self.hbar)))
            }
        }
    }

    pub fn schedule(&self) -> Result<Schedule> {
        let space = self.mode_space()?;
        let pairs = (0..self.wings())
            .map(|p| {
                let (o, s) = self.wing_species(p);
                MeasurementPair { observer: o, system: s, axis: self.axes[p], aperture: self.apertures[p] }
            })
            .collect();
        let comparator = self
            .comparator_species()
            .map(|c| ComparatorLink { comparator: c, observers: [2, 3], aperture: self.aperture_c });
        Ok(Schedule {
            space,
            lattice: self.lattice.clone(),
            hbar: self.hbar,
            trajectories: self.trajectories(),
            frame: self.frame,
            pairs,
            comparator,
        })
    }

    /// Fock initial state: singlet systems (or b-weighted single spin),
    /// observers and comparator in awareness 0.
    pub fn initial_state(&self) -> Result<SectorState> {
        let space = self.mode_space()?;
        space.require_sparse()?;
        let n = self.species_list().len();
        let mut entries = Vec::with_capacity(n);
        for s in 0..n {
            let spatial = self.spatial_amplitudes(s)?;
            let internal = match (self.kind, s) {
                (ScenarioKind::SingleObserver, 0) => Internal::Superposition(self.spin.to_vec()),
                (ScenarioKind::Eprb, 0 | 1) => Internal::Label(1),
                _ => Internal::Label(0),
            };
            entries.push(PacketEntry { species: s, internal, spatial });
        }
        let singlet = (self.kind == ScenarioKind::Eprb).then_some((0, 1));
        build_packet_state(&space, &entries, singlet)
    }

    pub fn audit(&self) -> Result<AuditReport> {
        super::audit::audit(self)
    }
}


