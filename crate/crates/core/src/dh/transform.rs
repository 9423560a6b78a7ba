//! V† = Π exp(−(π/2)W) on states, dense conjugation of fields, the
//! closed-form transformed observer field, locality footprints and
//! fictitious-draw independence.

use num_complex::Complex64 as C64;
use serde::Serialize;

use super::fictitious::FictitiousShape;
use super::scenario::{DhGenerator, DhScenario};
use crate::eprb::{density, ScenarioSpec};
use crate::error::{Error, Result};
use crate::evolution::run_schedule;
use crate::fock::{apply_terms, evolve_exp_krylov, expectation, FockMatrix, OperatorTerm, ParityRule, SectorState};
use crate::lattice::distance;

const HALF_PI: f64 = std::f64::consts::FRAC_PI_2;
const KRYLOV_DIM: usize = 24;
const KRYLOV_TOL: f64 = 1e-14;

/// Applies V† for V = V₁V₂…: the first listed factor acts first. Each
/// factor spans a two-dimensional Krylov space, so Arnoldi is exact after
/// two steps.
pub fn dh_transform_state(gens: &[DhGenerator], state: &SectorState) -> Result<SectorState> {
    let mut s = state.clone();
    for g in gens {
        s = evolve_exp_krylov(&s, &g.terms, C64::new(-HALF_PI, 0.0), KRYLOV_DIM, KRYLOV_TOL)?;
    }
    Ok(s)
}

/// V|ψ⟩, the inverse of [`dh_transform_state`].
pub fn dh_apply_v(gens: &[DhGenerator], state: &SectorState) -> Result<SectorState> {
    let mut s = state.clone();
    for g in gens.iter().rev() {
        s = evolve_exp_krylov(&s, &g.terms, C64::new(HALF_PI, 0.0), KRYLOV_DIM, KRYLOV_TOL)?;
    }
    Ok(s)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VacuumReport {
    /// |⟨0|V†|ψ′⟩|²
    pub fidelity: f64,
    pub transformed_norm: f64,
    /// ‖V V†|ψ′⟩ − |ψ′⟩‖
    pub roundtrip: f64,
}

pub fn vacuum_report(dh: &DhScenario) -> Result<VacuumReport> {
    let gens = dh.generators()?;
    let psi = dh.modified_state()?;
    let out = dh_transform_state(&gens, &psi)?;
    let back = dh_apply_v(&gens, &out)?;
    Ok(VacuumReport { fidelity: out.amplitude(0).norm_sqr(), transformed_norm: out.norm(), roundtrip: back.distance(&psi) })
}

/// exp(scale·W) on the full Fock space by Taylor summation.
pub fn dense_exp(w: &FockMatrix, scale: f64) -> Result<FockMatrix> {
    let n = w.n_modes();
    let mut sum = FockMatrix::identity(n)?;
    let mut term = FockMatrix::identity(n)?;
    for k in 1..80 {
        term = FockMatrix::zero(n)?.add_scaled(&term.mul(w), C64::new(scale / k as f64, 0.0));
        sum = sum.add_scaled(&term, C64::new(1.0, 0.0));
        if term.max_abs() < 1e-18 {
            return Ok(sum);
        }
    }
    Err(Error::NonConvergence { terms: 80, residual: term.max_abs() })
}

pub fn dense_generator(g: &DhGenerator, n_modes: usize) -> Result<FockMatrix> {
    FockMatrix::from_terms(n_modes, &g.terms)
}

/// Full-Fock V for the scenario's generators (≤ 16 modes).
pub fn dense_v(dh: &DhScenario) -> Result<FockMatrix> {
    let n = dh.space.total();
    let mut v = FockMatrix::identity(n)?;
    for g in dh.generators()? {
        v = v.mul(&dense_exp(&dense_generator(&g, n)?, HALF_PI)?);
    }
    Ok(v)
}

/// V† O V with V from [`dense_v`].
pub fn dh_transform_operator(op: &FockMatrix, v: &FockMatrix) -> FockMatrix {
    v.adjoint().mul(op).mul(v)
}

/// χ_i(x) + δ_{i0} ψ(x) Σ_y (ψ′(y) ζ†(y) − ψ*(y) χ₀(y)) for an observer
/// or comparator species.
pub fn closed_form_observer_field(dh: &DhScenario, species: usize, label: u8, cell: usize) -> Result<FockMatrix> {
    let n = dh.space.total();
    let r = dh.space.mode(species, label, cell)?.rank;
    let mut out = FockMatrix::annihilation(n, r, ParityRule::Canonical)?;
    if label != 0 {
        return Ok(out);
    }
    let psi = &dh.packets[species];
    let fict = &dh.fictitious[species].wavefunction;
    let z = dh.partner(species);
    for y in 0..dh.lattice.cell_count() {
        let zr = dh.space.rank_at(z, 0, y);
        let cr = dh.space.mode(species, 0, y)?.rank;
        out = out.add_scaled(&FockMatrix::creation(n, zr, ParityRule::Canonical)?, psi[cell] * fict[y]);
        out = out.add_scaled(&FockMatrix::annihilation(n, cr, ParityRule::Canonical)?, -psi[cell] * psi[y].conj());
    }
    Ok(out)
}

/// Frobenius norm, an upper bound on the operator norm.
pub fn frobenius(m: &FockMatrix) -> f64 {
    let dim = 1usize << m.n_modes();
    let mut s = 0.0;
    for c in 0..dim {
        for r in 0..dim {
            let v = m.get(r, c);
            if v != C64::new(0.0, 0.0) {
                s += v.norm_sqr();
            }
        }
    }
    s.sqrt()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GeneratorChecks {
    /// max over generators of max|W + W†|
    pub skew_residual: f64,
    /// max over pairs of max|[W_a, W_b]|
    pub commutator: f64,
}

pub fn generator_checks(dh: &DhScenario) -> Result<GeneratorChecks> {
    let n = dh.space.total();
    let mats = dh.generators()?.iter().map(|g| dense_generator(g, n)).collect::<Result<Vec<_>>>()?;
    let skew_residual = mats.iter().map(|w| w.add_scaled(&w.adjoint(), C64::new(1.0, 0.0)).max_abs()).fold(0.0, f64::max);
    let mut commutator: f64 = 0.0;
    for a in 0..mats.len() {
        for b in a + 1..mats.len() {
            commutator = commutator.max(mats[a].commutator(&mats[b]).max_abs());
        }
    }
    Ok(GeneratorChecks { skew_residual, commutator })
}

/// Sparse stand-in for `generator_checks` when the full Fock space is too
/// large: skewness from ⟨φ|Wψ⟩ + conj⟨ψ|Wφ⟩ and commutation from
/// ‖[W_a, W_b]ψ‖, over the given probe states.
pub fn generator_probe(gens: &[DhGenerator], probes: &[SectorState]) -> GeneratorChecks {
    let mut skew_residual: f64 = 0.0;
    let mut commutator: f64 = 0.0;
    let images: Vec<Vec<SectorState>> =
        gens.iter().map(|g| probes.iter().map(|p| apply_terms(p, &g.terms)).collect()).collect();
    for img in &images {
        for (i, phi) in probes.iter().enumerate() {
            for (j, psi) in probes.iter().enumerate() {
                skew_residual = skew_residual.max((phi.inner(&img[j]) + psi.inner(&img[i]).conj()).norm());
            }
        }
    }
    for a in 0..gens.len() {
        for b in a + 1..gens.len() {
            for k in 0..probes.len() {
                let mut c = apply_terms(&images[b][k], &gens[a].terms);
                c.axpy(C64::new(-1.0, 0.0), &apply_terms(&images[a][k], &gens[b].terms));
                commutator = commutator.max(c.norm());
            }
        }
    }
    GeneratorChecks { skew_residual, commutator }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LocalityFootprint {
    pub species: String,
    pub label: u8,
    pub cell: usize,
    /// Per cell, summed over the physical modes there: coefficient weight
    /// of that mode in χ_V − χ.
    pub physical: Vec<f64>,
    /// Same for the partner fictitious field.
    pub fictitious: Vec<f64>,
    pub total_physical: f64,
    /// Largest distance from x of a cell with physical weight ≥ ε.
    pub support_radius: f64,
    pub epsilon: f64,
}

/// Footprint of V†χ_label(x)V − χ_label(x). The difference is linear in the
/// fields, so {D, a†_r} and {D, a_r} are multiples of the identity and
/// read off the coefficient of each mode.
pub fn locality_footprint(
    dh: &DhScenario,
    v: &FockMatrix,
    species: usize,
    label: u8,
    cell: usize,
    epsilon: f64,
) -> Result<LocalityFootprint> {
    let n = dh.space.total();
    let chi = FockMatrix::annihilation(n, dh.space.mode(species, label, cell)?.rank, ParityRule::Canonical)?;
    let d = dh_transform_operator(&chi, v).add_scaled(&chi, C64::new(-1.0, 0.0));
    let cells = dh.lattice.cell_count();
    let mut physical = vec![0.0; cells];
    let mut fictitious = vec![0.0; cells];
    for r in 0..n {
        let m = dh.space.decode(r);
        let a = FockMatrix::annihilation(n, r, ParityRule::Canonical)?;
        let ad = FockMatrix::creation(n, r, ParityRule::Canonical)?;
        let w = d.anticommutator(&ad).max_abs() + d.anticommutator(&a).max_abs();
        if dh.space.species()[m.species].is_fictitious() {
            fictitious[m.cell] += w;
        } else {
            physical[m.cell] += w;
        }
    }
    let x = dh.lattice.center(cell);
    let support_radius = (0..cells)
        .filter(|&c| physical[c] >= epsilon)
        .map(|c| distance(&x, &dh.lattice.center(c)))
        .fold(0.0, f64::max);
    Ok(LocalityFootprint {
        species: dh.space.species()[species].id.clone(),
        label,
        cell,
        total_physical: physical.iter().sum(),
        physical,
        fictitious,
        support_radius,
        epsilon,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EquivalenceReport {
    pub reference: f64,
    pub draws: Vec<(u64, f64)>,
    pub max_deviation: f64,
}

/// ⟨O⟩ on ψ_in versus on ψ′_in for seeded random fictitious draws. O must
/// act on physical modes only.
pub fn expectation_equivalence(spec: &ScenarioSpec, observable: &[OperatorTerm], seeds: &[u64]) -> Result<EquivalenceReport> {
    let first = DhScenario::from_scenario(spec, FictitiousShape::Random { seed: seeds.first().copied().unwrap_or(0) })?;
    let limit = first.physical_modes();
    if observable.iter().any(|t| t.max_mode().is_some_and(|m| m >= limit)) {
        return Err(Error::Precondition("observable acts on fictitious modes".into()));
    }
    let reference = expectation(&first.physical_state()?, observable).re;
    let mut draws = Vec::new();
    for &seed in seeds {
        let dh = DhScenario::from_scenario(spec, FictitiousShape::Random { seed })?;
        draws.push((seed, expectation(&dh.modified_state()?, observable).re));
    }
    let max_deviation = draws.iter().map(|d| (d.1 - reference).abs()).fold(0.0, f64::max);
    Ok(EquivalenceReport { reference, draws, max_deviation })
}

/// Runs the base schedule on ψ′_in and on ψ_in and returns the largest
/// per-cell density difference over every physical species and label.
pub fn pipeline_equivalence(dh: &DhScenario, tq: f64) -> Result<f64> {
    let base = dh.base().ok_or_else(|| Error::Precondition("no base scenario".into()))?;
    let sch = dh.schedule()?;
    let a = run_schedule(&dh.modified_state()?, &sch, tq)?;
    let b = run_schedule(&dh.physical_state()?, &sch, tq)?;
    let mut worst: f64 = 0.0;
    for s in 0..dh.n_physical() {
        for &label in &dh.physical[s].labels {
            let o = base.origin(s, tq);
            let da = density(&a, &sch.space, s, label, &dh.lattice, &o, tq)?;
            let db = density(&b, &sch.space, s, label, &dh.lattice, &o, tq)?;
            for (x, y) in da.values.iter().zip(&db.values) {
                worst = worst.max((x - y).abs());
            }
        }
    }
    Ok(worst)
}
