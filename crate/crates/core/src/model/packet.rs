//! Gaussian one-quantum packets and product initial states.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{apply_creation, ModeSpace, SectorState};
use crate::lattice::{add3, dot3, sub3, Lattice};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WavepacketSpec {
    pub center: [f64; 3],
    /// α, with packet width α^(−1/2)
    pub alpha: f64,
    pub velocity: [f64; 3],
    pub mass: f64,
}

/// Resolution audit thresholds for a discretized packet.
pub const NORM_TOL: f64 = 1e-6;
pub const BOUNDARY_TAIL_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Resolution {
    /// Σ|ψ_k|² before normalization.
    pub raw_norm: f64,
    /// Probability on the outer cell shell.
    pub boundary_tail: f64,
    /// α^(−1/2)/Δx; advisory only.
    pub width_cells: f64,
}

impl WavepacketSpec {
    pub fn width(&self) -> f64 {
        self.alpha.powf(-0.5)
    }

    /// Continuum amplitude at t₀ in `dim` dimensions.
    pub fn amplitude(&self, x: &[f64; 3], dim: usize, hbar: f64) -> C64 {
        let d = sub3(x, &self.center);
        let r2: f64 = d.iter().take(dim).map(|v| v * v).sum();
        let k: f64 = (0..dim).map(|i| self.mass * self.velocity[i] * d[i] / hbar).sum();
        let norm = (self.alpha / std::f64::consts::PI).powf(dim as f64 / 4.0);
        C64::from_polar(norm * (-0.5 * self.alpha * r2).exp(), k)
    }

    /// Samples ψ at lab cell centers, scaled by Δx^(d/2), not renormalized.
    pub fn sample(&self, lattice: &Lattice, origin: &[f64; 3], hbar: f64) -> Vec<C64> {
        let w = lattice.cell_volume().sqrt();
        (0..lattice.cell_count())
            .map(|c| self.amplitude(&add3(&lattice.center(c), origin), lattice.dim(), hbar) * w)
            .collect()
    }

    pub fn resolution(&self, lattice: &Lattice, origin: &[f64; 3], hbar: f64) -> Resolution {
        let v = self.sample(lattice, origin, hbar);
        let raw_norm = v.iter().map(|a| a.norm_sqr()).sum();
        let boundary_tail = (0..v.len()).filter(|&c| lattice.is_boundary_cell(c)).map(|c| v[c].norm_sqr()).sum();
        Resolution { raw_norm, boundary_tail, width_cells: self.width() / lattice.spacing() }
    }

    /// Discretized, normalized amplitudes; errors when the lattice does not
    /// hold the packet.
    pub fn discretize(&self, id: &str, lattice: &Lattice, origin: &[f64; 3], hbar: f64) -> Result<Vec<C64>> {
        let res = self.resolution(lattice, origin, hbar);
        if (res.raw_norm - 1.0).abs() > NORM_TOL {
            return Err(Error::Unresolved {
                species: id.into(),
                reason: format!("discrete norm {:.3e} differs from 1 by more than {NORM_TOL:.0e}", res.raw_norm),
            });
        }
        if res.boundary_tail > BOUNDARY_TAIL_TOL {
            return Err(Error::Unresolved {
                species: id.into(),
                reason: format!("boundary probability {:.3e} exceeds {BOUNDARY_TAIL_TOL:.0e}", res.boundary_tail),
            });
        }
        Ok(normalize(self.sample(lattice, origin, hbar)))
    }

    /// m|v|Δx/ħ, the largest phase step between neighboring cells.
    pub fn phase_step(&self, lattice: &Lattice, hbar: f64) -> f64 {
        self.mass * dot3(&self.velocity, &self.velocity).sqrt() * lattice.spacing() / hbar
    }
}

pub fn normalize(mut v: Vec<C64>) -> Vec<C64> {
    let n: f64 = v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    if n > 0.0 {
        for a in &mut v {
            *a /= n;
        }
    }
    v
}

/// Internal part of a one-quantum factor.
#[derive(Clone, Debug, PartialEq)]
pub enum Internal {
    Label(u8),
    /// Coefficients on labels in species order, e.g. b₁, b₂ for spin.
    Superposition(Vec<C64>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct PacketEntry {
    pub species: usize,
    pub internal: Internal,
    /// Normalized per-cell spatial amplitudes.
    pub spatial: Vec<C64>,
}

// sum over monomials of creator products
type Factor = Vec<(C64, Vec<usize>)>;

fn factor_of(space: &ModeSpace, e: &PacketEntry) -> Result<Factor> {
    let spec = &space.species()[e.species];
    let internal: Vec<C64> = match &e.internal {
        Internal::Label(l) => {
            let pos = spec
                .label_position(*l)
                .ok_or_else(|| Error::Species(format!("{} has no label {l}", spec.id)))?;
            (0..spec.internal_dim()).map(|p| C64::new(if p == pos { 1.0 } else { 0.0 }, 0.0)).collect()
        }
        Internal::Superposition(b) => {
            if b.len() != spec.internal_dim() {
                return Err(Error::Species(format!("{}: expected {} coefficients", spec.id, spec.internal_dim())));
            }
            normalize(b.clone())
        }
    };
    let mut f = Vec::new();
    for (pos, b) in internal.iter().enumerate() {
        for (cell, s) in e.spatial.iter().enumerate() {
            let c = b * s;
            if c.norm() > 0.0 {
                f.push((c, vec![space.rank_at(e.species, pos, cell)]));
            }
        }
    }
    Ok(f)
}

/// (A₁ B₂ − A₂ B₁)/√2 for two spin species with spatial packets A and B.
fn singlet_factor(space: &ModeSpace, a: &PacketEntry, b: &PacketEntry) -> Factor {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut f = Vec::new();
    for (ia, ib, sign) in [(0usize, 1usize, s), (1, 0, -s)] {
        for (ca, &pa) in a.spatial.iter().enumerate() {
            for (cb, &pb) in b.spatial.iter().enumerate() {
                let c = pa * pb * sign;
                if c.norm() > 0.0 {
                    f.push((c, vec![space.rank_at(a.species, ia, ca), space.rank_at(b.species, ib, cb)]));
                }
            }
        }
    }
    f
}

/// Π_entries (Σ amplitude·a†)|0⟩, leftmost entry outermost. With
/// `singlet = Some((i, j))` entries i and j (both spin systems, internal
/// part ignored) are replaced by the antisymmetric spin pair, placed at
/// position i.
pub fn build_packet_state(
    space: &ModeSpace,
    entries: &[PacketEntry],
    singlet: Option<(usize, usize)>,
) -> Result<SectorState> {
    space.require_sparse()?;
    let mut factors: Vec<Factor> = Vec::new();
    for (k, e) in entries.iter().enumerate() {
        if e.spatial.len() != space.cells() {
            return Err(Error::Precondition("packet length differs from cell count".into()));
        }
        match singlet {
            Some((i, j)) if k == i => factors.push(singlet_factor(space, e, &entries[j])),
            Some((_, j)) if k == j => {}
            _ => factors.push(factor_of(space, e)?),
        }
    }
    let mut state = SectorState::vacuum(space.total());
    for f in factors.iter().rev() {
        let mut next = SectorState::zero(space.total());
        for (c, ranks) in f {
            let mut s = state.clone();
            for &r in ranks.iter().rev() {
                s = apply_creation(&s, r);
            }
            next.axpy(*c, &s);
        }
        state = next;
    }
    state.prune(crate::fock::state::DEFAULT_PRUNE);
    Ok(state.normalized())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{expectation, SpeciesSpec};
    use crate::model::hamiltonian::build_free_hamiltonian;
    use crate::model::spin::{SpinAxis, Updown};

    #[test]
    fn single_cell_packet() {
        let sp = ModeSpace::new(vec![SpeciesSpec::observer("O", 1.0)], 1).unwrap();
        let e = PacketEntry { species: 0, internal: Internal::Label(0), spatial: vec![C64::new(1.0, 0.0)] };
        let s = build_packet_state(&sp, &[e], None).unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s.amplitude(1), C64::new(1.0, 0.0));
    }

    #[test]
    fn unresolved_packet_rejected() {
        let lat = Lattice::chain(8, 1.0).unwrap();
        let p = WavepacketSpec { center: [4.0, 0.0, 0.0], alpha: 0.1, velocity: [0.0; 3], mass: 1.0 };
        assert!(p.discretize("S", &lat, &[0.0; 3], 1.0).is_err());
    }

    #[test]
    fn kinetic_energy_matches_continuum() {
        // α^(−1/2) = 6Δx
        let lat = Lattice::chain(60, 1.0).unwrap();
        let alpha = 1.0 / 36.0;
        let v = 0.2;
        let p = WavepacketSpec { center: [30.0, 0.0, 0.0], alpha, velocity: [v, 0.0, 0.0], mass: 1.0 };
        let sp = ModeSpace::new(vec![SpeciesSpec::observer("O", 1.0)], 60).unwrap();
        let spatial = p.discretize("O", &lat, &[0.0; 3], 1.0).unwrap();
        let s = build_packet_state(&sp, &[PacketEntry { species: 0, internal: Internal::Label(0), spatial }], None)
            .unwrap();
        let h = build_free_hamiltonian(&sp, 0, &lat, 1.0).unwrap();
        let e = expectation(&s, &h).re;
        let continuum = alpha / 4.0 + 0.5 * v * v;
        assert!((e - continuum).abs() / continuum < 0.05, "{e} vs {continuum}");
    }

    #[test]
    fn singlet_spin_statistics() {
        let sp = ModeSpace::new(vec![SpeciesSpec::system("S1", 1.0), SpeciesSpec::system("S2", 1.0)], 1).unwrap();
        let one = vec![C64::new(1.0, 0.0)];
        let mk = |s| PacketEntry { species: s, internal: Internal::Label(1), spatial: one.clone() };
        let st = build_packet_state(&sp, &[mk(0), mk(1)], Some((0, 1))).unwrap();
        assert!((st.norm_sq() - 1.0).abs() < 1e-12);
        for (a1, a2) in [(SpinAxis::new(0.3, 1.0), SpinAxis::new(2.0, 0.2)), (SpinAxis::z(), SpinAxis::z())] {
            // amplitude of both-up along (n1, n2)
            let u1 = a1.coefficients(Updown::Up);
            let u2 = a2.coefficients(Updown::Up);
            let mut proj = SectorState::vacuum(4);
            let mut acc = SectorState::zero(4);
            for i in 0..2 {
                for j in 0..2 {
                    let s = apply_creation(&apply_creation(&proj, 2 + j), i);
                    acc.axpy(u1[i] * u2[j], &s);
                }
            }
            proj = acc;
            let p = proj.inner(&st).norm_sqr();
            let n1 = a1.n();
            let n2 = a2.n();
            let expect = 0.25 * (1.0 - dot3(&n1, &n2));
            assert!((p - expect).abs() < 1e-12, "{p} vs {expect}");
        }
    }
}
