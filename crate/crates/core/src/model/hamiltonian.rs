//! Free, measurement and comparator Hamiltonians as operator-term lists.
//!
//! Lattice operators obey {a, a†} = δ and continuum fields are a/Δx^(d/2),
//! so each continuum integral's Δx^d cancels against the field rescaling:
//! the interaction terms carry weight 1 per gated cell tuple.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::spin::{SpinAxis, Updown};
use crate::error::{Error, Result};
use crate::fock::{FermionOp, ModeSpace, OperatorTerm, Role};
use crate::lattice::{add3, distance, Lattice};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CouplingSpec {
    pub kappa: f64,
    pub kappa_c: f64,
    pub range_a: [f64; 2],
    pub range_ac: f64,
}

impl CouplingSpec {
    pub fn validate(&self, lattice: &Lattice) -> Result<()> {
        for (name, a) in [("a1", self.range_a[0]), ("a2", self.range_a[1]), ("aC", self.range_ac)] {
            if !(a > 0.0) {
                return Err(Error::Precondition(format!("aperture {name} = {a} must be positive")));
            }
            if a < lattice.spacing() {
                return Err(Error::Precondition(format!("aperture {name} = {a} is below one cell")));
            }
        }
        Ok(())
    }
}

/// Heaviside range gate on cell-center distance. Distances equal to the
/// aperture up to rounding are inside.
#[inline]
pub fn gate(d: f64, a: f64) -> bool {
    d <= a * (1.0 + 1e-12)
}

/// Single-particle kinetic matrix ħ²/(2mΔx²)·(2d on the diagonal, −1 per hop).
pub fn one_body_matrix(lattice: &Lattice, mass: f64, hbar: f64) -> DMatrix<f64> {
    let n = lattice.cell_count();
    let t = hbar * hbar / (2.0 * mass * lattice.spacing().powi(2));
    let mut h = DMatrix::zeros(n, n);
    for c in 0..n {
        h[(c, c)] += 2.0 * lattice.dim() as f64 * t;
        for nb in lattice.neighbors(c) {
            h[(nb, c)] -= t;
        }
    }
    h
}

pub fn build_free_hamiltonian(
    space: &ModeSpace,
    species: usize,
    lattice: &Lattice,
    hbar: f64,
) -> Result<Vec<OperatorTerm>> {
    let spec = &space.species()[species];
    let mass = match (spec.role, spec.mass()) {
        (Role::Fictitious, _) => {
            return Err(Error::Species(format!("{} is fictitious and has no kinetic term", spec.id)))
        }
        (_, Some(m)) => m,
        (_, None) => return Ok(vec![]),
    };
    let h = one_body_matrix(lattice, mass, hbar);
    let n = lattice.cell_count();
    let mut terms = Vec::new();
    for pos in 0..spec.internal_dim() {
        for j in 0..n {
            for i in 0..n {
                if h[(i, j)] != 0.0 {
                    terms.push(OperatorTerm::hop(
                        C64::new(h[(i, j)], 0.0),
                        space.rank_at(species, pos, i),
                        space.rank_at(species, pos, j),
                    ));
                }
            }
        }
    }
    Ok(terms)
}

/// Lab-frame cell positions of a species: lattice center plus frame origin.
pub fn lab_positions(lattice: &Lattice, origin: &[f64; 3]) -> Vec<[f64; 3]> {
    (0..lattice.cell_count()).map(|c| add3(&lattice.center(c), origin)).collect()
}

fn flip_ops(space: &ModeSpace, species: usize, cell: usize) -> [(f64, FermionOp, FermionOp); 2] {
    let r0 = space.rank_at(species, 0, cell);
    let r1 = space.rank_at(species, 1, cell);
    [
        (1.0, FermionOp::Create(r1), FermionOp::Annihilate(r0)),
        (-1.0, FermionOp::Create(r0), FermionOp::Annihilate(r1)),
    ]
}

fn push(terms: &mut Vec<OperatorTerm>, c: C64, ops: &[FermionOp]) -> Result<()> {
    if c.norm() == 0.0 {
        return Ok(());
    }
    if let Some(t) = OperatorTerm::from_product(c, ops)? {
        terms.push(t);
    }
    Ok(())
}

/// G with H^{OS}_M = iκ·G: Σ_{gated x,y} (χ†₁χ₀ − χ†₀χ₁)(x) 𝓝_{n,up}(y).
/// The window propagator is then exp(Θ·G), Θ = κΔt/ħ.
#[allow(clippy::too_many_arguments)]
pub fn measurement_generator(
    space: &ModeSpace,
    observer: usize,
    system: usize,
    axis: &SpinAxis,
    aperture: f64,
    lattice: &Lattice,
    origin_observer: &[f64; 3],
    origin_system: &[f64; 3],
) -> Result<Vec<OperatorTerm>> {
    if space.species()[system].role != Role::System {
        return Err(Error::Species(format!("{} is not a spin system", space.species()[system].id)));
    }
    let u = axis.coefficients(Updown::Up);
    let xo = lab_positions(lattice, origin_observer);
    let ys = lab_positions(lattice, origin_system);
    let mut terms = Vec::new();
    for (x, px) in xo.iter().enumerate() {
        for (y, py) in ys.iter().enumerate() {
            if !gate(distance(px, py), aperture) {
                continue;
            }
            for (sgn, cre, ann) in flip_ops(space, observer, x) {
                for i in 0..2 {
                    for j in 0..2 {
                        let c = u[i] * u[j].conj() * sgn;
                        let ri = space.rank_at(system, i, y);
                        let rj = space.rank_at(system, j, y);
                        push(&mut terms, c, &[cre, ann, FermionOp::Create(ri), FermionOp::Annihilate(rj)])?;
                    }
                }
            }
        }
    }
    Ok(terms)
}

#[allow(clippy::too_many_arguments)]
pub fn build_measurement_hamiltonian(
    space: &ModeSpace,
    observer: usize,
    system: usize,
    axis: &SpinAxis,
    coupling: &CouplingSpec,
    p: usize,
    lattice: &Lattice,
    origin_observer: &[f64; 3],
    origin_system: &[f64; 3],
) -> Result<Vec<OperatorTerm>> {
    let g = measurement_generator(
        space,
        observer,
        system,
        axis,
        coupling.range_a[p],
        lattice,
        origin_observer,
        origin_system,
    )?;
    Ok(g.iter().map(|t| t.scaled(C64::new(0.0, coupling.kappa))).collect())
}

/// G with H^{CO}_M = iκ_C·G:
/// Σ (ξ†₁ξ₀ − ξ†₀ξ₁)(x) f_C(x,y) f_C(x,z) 𝓝^{O1}₁(y) 𝓝^{O2}₁(z).
pub fn comparator_generator(
    space: &ModeSpace,
    comparator: usize,
    observers: [usize; 2],
    aperture: f64,
    lattice: &Lattice,
    origins: [&[f64; 3]; 3],
) -> Result<Vec<OperatorTerm>> {
    let xc = lab_positions(lattice, origins[0]);
    let y1 = lab_positions(lattice, origins[1]);
    let y2 = lab_positions(lattice, origins[2]);
    let mut terms = Vec::new();
    for (x, px) in xc.iter().enumerate() {
        let near1: Vec<usize> = (0..y1.len()).filter(|&y| gate(distance(px, &y1[y]), aperture)).collect();
        let near2: Vec<usize> = (0..y2.len()).filter(|&z| gate(distance(px, &y2[z]), aperture)).collect();
        for &y in &near1 {
            for &z in &near2 {
                let n1 = space.rank_at(observers[0], 1, y);
                let n2 = space.rank_at(observers[1], 1, z);
                for (sgn, cre, ann) in flip_ops(space, comparator, x) {
                    push(
                        &mut terms,
                        C64::new(sgn, 0.0),
                        &[
                            cre,
                            ann,
                            FermionOp::Create(n1),
                            FermionOp::Annihilate(n1),
                            FermionOp::Create(n2),
                            FermionOp::Annihilate(n2),
                        ],
                    )?;
                }
            }
        }
    }
    Ok(terms)
}

pub fn build_comparator_hamiltonian(
    space: &ModeSpace,
    comparator: usize,
    observers: [usize; 2],
    coupling: &CouplingSpec,
    lattice: &Lattice,
    origins: [&[f64; 3]; 3],
) -> Result<Vec<OperatorTerm>> {
    let g = comparator_generator(space, comparator, observers, coupling.range_ac, lattice, origins)?;
    Ok(g.iter().map(|t| t.scaled(C64::new(0.0, coupling.kappa_c))).collect())
}

/// Σ_x 𝓝_label(x) for one species.
pub fn number_operator(space: &ModeSpace, species: usize, label: u8) -> Result<Vec<OperatorTerm>> {
    let pos = space.species()[species]
        .label_position(label)
        .ok_or_else(|| Error::Species(format!("no label {label}")))?;
    Ok((0..space.cells()).map(|c| OperatorTerm::number(space.rank_at(species, pos, c))).collect())
}
