use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use rustc_hash::FxHashMap;

use super::plan::{segments, Group, InteractionKind, Segment, TrajectoryPlan};
use crate::error::{Error, Result};
use crate::fock::state::{create_config, ParityRule, DEFAULT_PRUNE};
use crate::fock::{evolve_exp, ModeSpace, OperatorTerm, Role, SectorState};
use crate::lattice::{sub3, Lattice};
use crate::model::{comparator_generator, measurement_generator, one_body_matrix, SpinAxis};

/// Eigendecomposition of the one-body kinetic matrix; propagators for any
/// duration follow without refactoring.
#[derive(Clone, Debug)]
pub struct FreeKernel {
    vectors: DMatrix<f64>,
    values: DVector<f64>,
    hbar: f64,
}

impl FreeKernel {
    pub fn new(lattice: &Lattice, mass: f64, hbar: f64) -> Self {
        let eig = one_body_matrix(lattice, mass, hbar).symmetric_eigen();
        Self { vectors: eig.eigenvectors, values: eig.eigenvalues, hbar }
    }

    /// u(t) = exp(−i h t/ħ) on the cell space.
    pub fn propagator(&self, duration: f64) -> DMatrix<C64> {
        let n = self.values.len();
        let v = self.vectors.map(|x| C64::new(x, 0.0));
        let mut vp = v.clone();
        for j in 0..n {
            let ph = C64::from_polar(1.0, -self.values[j] * duration / self.hbar);
            for i in 0..n {
                vp[(i, j)] *= ph;
            }
        }
        vp * v.transpose()
    }
}

/// Applies a one-body transform u (cells × cells, identity on internal
/// labels) to every quantum of one species.
pub fn apply_one_body(state: &SectorState, space: &ModeSpace, species: usize, u: &DMatrix<C64>) -> SectorState {
    let range = space.species_range(species);
    let offset = range.start;
    let mask = space.species_mask(species);
    let cells = space.cells();
    let mut cache: FxHashMap<u128, Vec<(u128, C64)>> = FxHashMap::default();
    let mut out = SectorState::zero(state.n_modes());
    for (config, a) in state.sorted() {
        let block = (config & mask) >> offset;
        if block == 0 {
            out.add(config, a);
            continue;
        }
        let rest = config & !mask;
        let expansion = cache.entry(block).or_insert_with(|| {
            let mut local: FxHashMap<u128, C64> = FxHashMap::default();
            local.insert(0, C64::new(1.0, 0.0));
            let occupied: Vec<usize> = (0..128).filter(|&b| block >> b & 1 == 1).collect();
            for &l in occupied.iter().rev() {
                let (pos, c) = (l / cells, l % cells);
                let mut next: FxHashMap<u128, C64> = FxHashMap::default();
                for (&lc, &amp) in &local {
                    for c2 in 0..cells {
                        let w = u[(c2, c)];
                        if w == C64::new(0.0, 0.0) {
                            continue;
                        }
                        if let Some((nc, odd)) = create_config(lc, pos * cells + c2, ParityRule::Canonical) {
                            let v = if odd { -w * amp } else { w * amp };
                            *next.entry(nc).or_default() += v;
                        }
                    }
                }
                local = next;
            }
            let mut v: Vec<_> = local.into_iter().collect();
            v.sort_unstable_by_key(|e| e.0);
            v
        });
        for &(lc, w) in expansion.iter() {
            out.add(rest | (lc << offset), w * a);
        }
    }
    out.prune(DEFAULT_PRUNE);
    out
}

#[derive(Clone, Debug, PartialEq)]
pub struct MeasurementPair {
    pub observer: usize,
    pub system: usize,
    pub axis: SpinAxis,
    pub aperture: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ComparatorLink {
    pub comparator: usize,
    pub observers: [usize; 2],
    pub aperture: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FrameMode {
    /// Each species' lattice window rides on its classical trajectory.
    Comoving,
    /// One fixed window shared by all species.
    Lab,
}

/// Everything needed to run the schedule on a mode space. Trajectory
/// entities are indexed like the species.
#[derive(Clone, Debug)]
pub struct Schedule {
    pub space: ModeSpace,
    pub lattice: Lattice,
    pub hbar: f64,
    pub trajectories: TrajectoryPlan,
    pub frame: FrameMode,
    pub pairs: Vec<MeasurementPair>,
    pub comparator: Option<ComparatorLink>,
}

impl Schedule {
    /// Lab position of cell k is lattice.center(k) + origin.
    pub fn origin(&self, species: usize, t: f64) -> [f64; 3] {
        match self.frame {
            FrameMode::Lab => [0.0; 3],
            FrameMode::Comoving => sub3(&self.trajectories.position(species, t), &self.lattice.midpoint()),
        }
    }

    pub fn species_in(&self, groups: &[Group]) -> Vec<usize> {
        (0..self.space.species().len())
            .filter(|&s| groups.contains(&self.trajectories.entities[s].group))
            .collect()
    }

    pub fn measurement_generator(&self) -> Result<Vec<OperatorTerm>> {
        let t1 = self.trajectories.plan.times.t1;
        let mut g = Vec::new();
        for p in &self.pairs {
            g.extend(measurement_generator(
                &self.space,
                p.observer,
                p.system,
                &p.axis,
                p.aperture,
                &self.lattice,
                &self.origin(p.observer, t1),
                &self.origin(p.system, t1),
            )?);
        }
        Ok(g)
    }

    pub fn comparator_generator(&self) -> Result<Vec<OperatorTerm>> {
        let t3 = self.trajectories.plan.times.t3;
        match &self.comparator {
            None => Ok(vec![]),
            Some(c) => comparator_generator(
                &self.space,
                c.comparator,
                c.observers,
                c.aperture,
                &self.lattice,
                [
                    &self.origin(c.comparator, t3),
                    &self.origin(c.observers[0], t3),
                    &self.origin(c.observers[1], t3),
                ],
            ),
        }
    }

    pub fn generator(&self, kind: InteractionKind) -> Result<Vec<OperatorTerm>> {
        match kind {
            InteractionKind::Measurement => self.measurement_generator(),
            InteractionKind::Comparator => self.comparator_generator(),
        }
    }

    fn kinetic_species(&self, groups: &[Group]) -> Vec<(usize, f64)> {
        self.species_in(groups)
            .into_iter()
            .filter_map(|s| {
                let spec = &self.space.species()[s];
                (spec.role != Role::Fictitious).then_some(())?;
                spec.mass().map(|m| (s, m))
            })
            .collect()
    }
}

pub fn propagate_free(
    state: &SectorState,
    space: &ModeSpace,
    lattice: &Lattice,
    species: &[usize],
    duration: f64,
    hbar: f64,
) -> Result<SectorState> {
    if duration < 0.0 {
        return Err(Error::Precondition(format!("negative duration {duration}")));
    }
    let mut s = state.clone();
    if duration == 0.0 {
        return Ok(s);
    }
    for &sp in species {
        if let Some(m) = space.species()[sp].mass() {
            let u = FreeKernel::new(lattice, m, hbar).propagator(duration);
            s = apply_one_body(&s, space, sp, &u);
        }
    }
    Ok(s)
}

/// exp(angle·G) for the window's generator, G = H/(iκ).
pub fn propagate_interaction(
    state: &SectorState,
    schedule: &Schedule,
    kind: InteractionKind,
    angle: f64,
) -> Result<SectorState> {
    if angle == 0.0 {
        return Ok(state.clone());
    }
    let g = schedule.generator(kind)?;
    evolve_exp(state, &g, C64::new(angle, 0.0))
}

pub fn run_schedule(initial: &SectorState, schedule: &Schedule, t_query: f64) -> Result<SectorState> {
    if t_query < schedule.trajectories.plan.times.t0 {
        return Err(Error::Precondition("query time before t0".into()));
    }
    let mut s = initial.clone();
    for seg in segments(&schedule.trajectories.plan, t_query) {
        s = match seg {
            Segment::Free { groups, duration } => {
                let sp: Vec<usize> = schedule.kinetic_species(&groups).into_iter().map(|e| e.0).collect();
                propagate_free(&s, &schedule.space, &schedule.lattice, &sp, duration, schedule.hbar)?
            }
            Segment::Interaction { kind, angle, .. } => propagate_interaction(&s, schedule, kind, angle)?,
        };
    }
    Ok(s)
}

/// Dense U(t_query) on a sector basis, built window by window from full
/// Hamiltonian matrices. Independent of the sparse path above.
pub fn dense_propagator(
    schedule: &Schedule,
    basis: &crate::fock::SectorBasis,
    t_query: f64,
) -> Result<DMatrix<C64>> {
    use crate::fock::dense::unitary_from_hermitian;
    use crate::model::build_free_hamiltonian;
    let n = basis.dim();
    let mut u = DMatrix::<C64>::identity(n, n);
    for seg in segments(&schedule.trajectories.plan, t_query) {
        let step = match seg {
            Segment::Free { groups, duration } => {
                let mut terms = Vec::new();
                for (s, _) in schedule.kinetic_species(&groups) {
                    terms.extend(build_free_hamiltonian(&schedule.space, s, &schedule.lattice, schedule.hbar)?);
                }
                let h = basis.matrix(&terms)?;
                unitary_from_hermitian(&h, duration / schedule.hbar)
            }
            Segment::Interaction { kind, angle, .. } => {
                // exp(Θ G) = exp(−iΘ (iG)) with iG Hermitian
                let g = basis.matrix(&schedule.generator(kind)?)?;
                unitary_from_hermitian(&(g * C64::new(0.0, 1.0)), angle)
            }
        };
        u = step * u;
    }
    Ok(u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::SpeciesSpec;
    use crate::model::{build_packet_state, Internal, PacketEntry, WavepacketSpec};

    #[test]
    fn free_composition_and_unitarity() {
        let lat = Lattice::chain(12, 1.0).unwrap();
        let k = FreeKernel::new(&lat, 1.3, 1.0);
        let a = k.propagator(0.4);
        let b = k.propagator(0.7);
        let ab = k.propagator(1.1);
        assert!(crate::fock::dense::max_abs_diff(&(&a * &b), &ab) < 1e-12);
        let id = DMatrix::<C64>::identity(12, 12);
        assert!(crate::fock::dense::max_abs_diff(&(a.adjoint() * &a), &id) < 1e-12);
    }

    #[test]
    fn packet_center_moves() {
        let sp = ModeSpace::new(vec![SpeciesSpec::observer("O", 4.0)], 60).unwrap();
        let lat60 = Lattice::chain(60, 1.0).unwrap();
        let p = WavepacketSpec { center: [20.0, 0.0, 0.0], alpha: 1.0 / 9.0, velocity: [0.1, 0.0, 0.0], mass: 4.0 };
        let spatial = p.discretize("O", &lat60, &[0.0; 3], 1.0).unwrap();
        let s = build_packet_state(&sp, &[PacketEntry { species: 0, internal: Internal::Label(0), spatial }], None)
            .unwrap();
        let out = propagate_free(&s, &sp, &lat60, &[0], 50.0, 1.0).unwrap();
        assert!((out.norm_sq() - 1.0).abs() < 1e-10);
        let mean: f64 = out.iter().map(|(c, a)| a.norm_sqr() * lat60.center(sp.decode(c.trailing_zeros() as usize).cell)[0]).sum();
        assert!((mean - 25.0).abs() < 0.5, "{mean}");
    }
}
