//! Physical packets plus one fictitious partner per quantum, and the
//! skew-Hermitian generators W = A − A† built from them.

use num_complex::Complex64 as C64;
use serde::Serialize;

use super::fictitious::{FictitiousFieldSpec, FictitiousShape};
use crate::eprb::{ScenarioKind, ScenarioSpec};
use crate::error::{Error, Result};
use crate::evolution::{Group, Schedule, Trajectory};
use crate::fock::ops::adjoint_terms;
use crate::fock::{FermionOp, ModeSpace, OperatorTerm, SectorState, SpeciesSpec};
use crate::lattice::Lattice;
use crate::model::packet::normalize;
use crate::model::{build_packet_state, Internal, PacketEntry};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum GeneratorKind {
    /// Single system with spin coefficients b.
    System,
    /// Observer or comparator: χ†₀ ζ† block.
    Observer,
    /// Four-field singlet block of the two systems.
    SystemSinglet,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DhGenerator {
    pub kind: GeneratorKind,
    pub name: String,
    /// Physical species dressed by this generator.
    pub species: Vec<usize>,
    pub fictitious: Vec<usize>,
    /// Creator block A; W = A − A†.
    pub creator: Vec<OperatorTerm>,
    pub terms: Vec<OperatorTerm>,
}

#[derive(Clone, Debug)]
pub struct DhScenario {
    pub kind: ScenarioKind,
    pub lattice: Lattice,
    /// Physical species followed by one fictitious species each, in the
    /// same order.
    pub space: ModeSpace,
    pub physical: Vec<SpeciesSpec>,
    pub packets: Vec<Vec<C64>>,
    pub spin: [C64; 2],
    pub fictitious: Vec<FictitiousFieldSpec>,
    base: Option<ScenarioSpec>,
}

fn pair_term(coeff: C64, a: usize, b: usize) -> Result<Option<OperatorTerm>> {
    OperatorTerm::from_product(coeff, &[FermionOp::Create(a), FermionOp::Create(b)])
}

fn skew(creator: Vec<OperatorTerm>) -> Vec<OperatorTerm> {
    let mut terms = creator.clone();
    terms.extend(adjoint_terms(&creator).into_iter().map(|t| t.scaled(C64::new(-1.0, 0.0))));
    terms
}

impl DhScenario {
    pub fn new(
        kind: ScenarioKind,
        lattice: Lattice,
        physical: Vec<SpeciesSpec>,
        packets: Vec<Vec<C64>>,
        spin: [C64; 2],
        fictitious: Vec<FictitiousFieldSpec>,
    ) -> Result<Self> {
        let expected = match kind {
            ScenarioKind::Eprb => 5,
            ScenarioKind::SingleObserver => 2,
        };
        if physical.len() != expected || packets.len() != expected || fictitious.len() != expected {
            return Err(Error::Precondition(format!("{kind:?} needs {expected} species, packets and fictitious fields")));
        }
        let mut species = physical.clone();
        for (p, f) in physical.iter().zip(&fictitious) {
            if f.partner != p.id {
                return Err(Error::Precondition(format!("fictitious field for {} listed at {}", f.partner, p.id)));
            }
            if f.wavefunction.len() != lattice.cell_count() {
                return Err(Error::Precondition("fictitious wavefunction length differs from cell count".into()));
            }
            species.push(SpeciesSpec::fictitious(format!("Z_{}", p.id)));
        }
        let space = ModeSpace::new(species, lattice.cell_count())?;
        space.require_sparse()?;
        let packets = packets.into_iter().map(normalize).collect();
        let n = (spin[0].norm_sqr() + spin[1].norm_sqr()).sqrt();
        let spin = [spin[0] / n, spin[1] / n];
        Ok(Self { kind, lattice, space, physical, packets, spin, fictitious, base: None })
    }

    /// Packets from a scenario's t₀ preparation, fictitious fields of one
    /// shape (random draws use one stream per partner).
    pub fn from_scenario(spec: &ScenarioSpec, shape: FictitiousShape) -> Result<Self> {
        let list = spec.species_list();
        let physical: Vec<SpeciesSpec> = list.iter().map(|e| e.0.clone()).collect();
        let packets = (0..list.len()).map(|s| spec.spatial_amplitudes(s)).collect::<Result<Vec<_>>>()?;
        let fict = physical
            .iter()
            .enumerate()
            .map(|(k, p)| FictitiousFieldSpec::from_shape(p.id.clone(), shape, &spec.lattice, k as u64))
            .collect::<Result<Vec<_>>>()?;
        let mut s = Self::new(spec.kind, spec.lattice.clone(), physical, packets, spec.spin, fict)?;
        s.base = Some(spec.clone());
        Ok(s)
    }

    pub fn n_physical(&self) -> usize {
        self.physical.len()
    }

    /// Number of modes carrying physical fields; they come first.
    pub fn physical_modes(&self) -> usize {
        self.space.offset(self.n_physical())
    }

    pub fn partner(&self, species: usize) -> usize {
        self.n_physical() + species
    }

    fn packet_creator(&self, s: usize, label: u8) -> Result<Vec<(C64, usize)>> {
        let pos = self.space.species()[s]
            .label_position(label)
            .ok_or_else(|| Error::Species(format!("{} has no label {label}", self.space.species()[s].id)))?;
        Ok(self.packets[s].iter().enumerate().map(|(c, &a)| (a, self.space.rank_at(s, pos, c))).collect())
    }

    fn fict_creator(&self, s: usize) -> Vec<(C64, usize)> {
        let z = self.partner(s);
        self.fictitious[s].wavefunction.iter().enumerate().map(|(c, &a)| (a, self.space.rank_at(z, 0, c))).collect()
    }

    fn observer_generator(&self, s: usize) -> Result<DhGenerator> {
        let mut creator = Vec::new();
        for (a, r) in self.packet_creator(s, 0)? {
            for (b, z) in self.fict_creator(s) {
                if let Some(t) = pair_term(a * b, r, z)? {
                    creator.push(t);
                }
            }
        }
        Ok(DhGenerator {
            kind: GeneratorKind::Observer,
            name: format!("W_{}", self.physical[s].id),
            species: vec![s],
            fictitious: vec![self.partner(s)],
            terms: skew(creator.clone()),
            creator,
        })
    }

    fn system_generator(&self, s: usize) -> Result<DhGenerator> {
        let mut creator = Vec::new();
        for (i, label) in [1u8, 2].into_iter().enumerate() {
            for (a, r) in self.packet_creator(s, label)? {
                for (b, z) in self.fict_creator(s) {
                    if let Some(t) = pair_term(self.spin[i] * a * b, r, z)? {
                        creator.push(t);
                    }
                }
            }
        }
        Ok(DhGenerator {
            kind: GeneratorKind::System,
            name: format!("W_{}", self.physical[s].id),
            species: vec![s],
            fictitious: vec![self.partner(s)],
            terms: skew(creator.clone()),
            creator,
        })
    }

    fn singlet_generator(&self) -> Result<DhGenerator> {
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let mut creator = Vec::new();
        let (z1, z2) = (self.fict_creator(0), self.fict_creator(1));
        for (la, lb, sign) in [(1u8, 2u8, r), (2, 1, -r)] {
            for (a, ra) in self.packet_creator(0, la)? {
                for (b, rb) in self.packet_creator(1, lb)? {
                    for &(c, rc) in &z1 {
                        for &(d, rd) in &z2 {
                            let ops = [ra, rb, rc, rd].map(FermionOp::Create);
                            if let Some(t) = OperatorTerm::from_product(a * b * c * d * sign, &ops)? {
                                creator.push(t);
                            }
                        }
                    }
                }
            }
        }
        Ok(DhGenerator {
            kind: GeneratorKind::SystemSinglet,
            name: "W_S_E".into(),
            species: vec![0, 1],
            fictitious: vec![self.partner(0), self.partner(1)],
            terms: skew(creator.clone()),
            creator,
        })
    }

    /// Generators in the factor order of V: single (W_S, W_O); EPRB
    /// (W_S_E, W_O2, W_O1, W_C).
    pub fn generators(&self) -> Result<Vec<DhGenerator>> {
        match self.kind {
            ScenarioKind::SingleObserver => Ok(vec![self.system_generator(0)?, self.observer_generator(1)?]),
            ScenarioKind::Eprb => Ok(vec![
                self.singlet_generator()?,
                self.observer_generator(3)?,
                self.observer_generator(2)?,
                self.observer_generator(4)?,
            ]),
        }
    }

    fn entry(&self, s: usize, internal: Internal) -> PacketEntry {
        PacketEntry { species: s, internal, spatial: self.packets[s].clone() }
    }

    fn fict_entry(&self, s: usize) -> PacketEntry {
        PacketEntry { species: self.partner(s), internal: Internal::Label(0), spatial: self.fictitious[s].wavefunction.clone() }
    }

    /// ψ′_in: every physical quantum followed by its fictitious partner.
    pub fn modified_state(&self) -> Result<SectorState> {
        match self.kind {
            ScenarioKind::SingleObserver => build_packet_state(
                &self.space,
                &[
                    self.entry(1, Internal::Label(0)),
                    self.fict_entry(1),
                    self.entry(0, Internal::Superposition(self.spin.to_vec())),
                    self.fict_entry(0),
                ],
                None,
            ),
            ScenarioKind::Eprb => build_packet_state(
                &self.space,
                &[
                    self.entry(4, Internal::Label(0)),
                    self.fict_entry(4),
                    self.entry(2, Internal::Label(0)),
                    self.fict_entry(2),
                    self.entry(3, Internal::Label(0)),
                    self.fict_entry(3),
                    self.entry(0, Internal::Label(1)),
                    self.entry(1, Internal::Label(2)),
                    self.fict_entry(0),
                    self.fict_entry(1),
                ],
                Some((6, 7)),
            ),
        }
    }

    /// ψ_in without fictitious quanta, on the same mode space.
    pub fn physical_state(&self) -> Result<SectorState> {
        match self.kind {
            ScenarioKind::SingleObserver => build_packet_state(
                &self.space,
                &[self.entry(1, Internal::Label(0)), self.entry(0, Internal::Superposition(self.spin.to_vec()))],
                None,
            ),
            ScenarioKind::Eprb => build_packet_state(
                &self.space,
                &[
                    self.entry(4, Internal::Label(0)),
                    self.entry(2, Internal::Label(0)),
                    self.entry(3, Internal::Label(0)),
                    self.entry(0, Internal::Label(1)),
                    self.entry(1, Internal::Label(2)),
                ],
                Some((3, 4)),
            ),
        }
    }

    /// The base scenario's schedule on the enlarged space; fictitious
    /// species never move and have no Hamiltonian terms.
    pub fn schedule(&self) -> Result<Schedule> {
        let base = self
            .base
            .as_ref()
            .ok_or_else(|| Error::Precondition("no base scenario for the schedule".into()))?;
        let mut sch = base.schedule()?;
        sch.space = self.space.clone();
        for _ in 0..self.n_physical() {
            sch.trajectories.entities.push(Trajectory { group: Group::Fixed, x0: [0.0; 3], velocity: [0.0; 3] });
        }
        Ok(sch)
    }

    pub fn base(&self) -> Option<&ScenarioSpec> {
        self.base.as_ref()
    }
}
