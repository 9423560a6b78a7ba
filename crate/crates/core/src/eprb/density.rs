//! Number-density fields and the interpretational rule.

use serde::Serialize;

use crate::error::Result;
use crate::fock::{ModeSpace, SectorState};
use crate::lattice::{add3, Lattice};

/// Per-cell probability ⟨𝓝_i(x)⟩ (continuum density × cell volume) of one
/// species and internal label at one time. Positions are lab coordinates.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DensityField {
    pub species: String,
    pub label: u8,
    pub time: f64,
    pub positions: Vec<[f64; 3]>,
    pub values: Vec<f64>,
}

impl DensityField {
    pub fn new(species: &str, label: u8, time: f64, lattice: &Lattice, origin: &[f64; 3], values: Vec<f64>) -> Self {
        let positions = (0..lattice.cell_count()).map(|c| add3(&lattice.center(c), origin)).collect();
        Self { species: species.into(), label, time, positions, values }
    }

    pub fn total(&self) -> f64 {
        self.values.iter().sum()
    }
}

/// ⟨a†a⟩ per cell for the modes of (species, label).
pub fn density(
    state: &SectorState,
    space: &ModeSpace,
    species: usize,
    label: u8,
    lattice: &Lattice,
    origin: &[f64; 3],
    time: f64,
) -> Result<DensityField> {
    let cells = lattice.cell_count();
    let ranks: Vec<usize> = (0..cells).map(|c| space.mode(species, label, c).map(|m| m.rank)).collect::<Result<_>>()?;
    let mut values = vec![0.0; cells];
    for (config, a) in state.sorted() {
        let p = a.norm_sqr();
        for (c, &r) in ranks.iter().enumerate() {
            if config >> r & 1 == 1 {
                values[c] += p;
            }
        }
    }
    Ok(DensityField::new(&space.species()[species].id, label, time, lattice, origin, values))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LocalizedObserver {
    pub species: String,
    pub label: u8,
    pub time: f64,
    /// Ω: cell indices of one connected ε-superlevel component.
    pub cells: Vec<usize>,
    pub probability: f64,
    /// Density-weighted mean lab position over Ω.
    pub centroid: [f64; 3],
    pub epsilon: f64,
}

/// Splits the ε-superlevel support into connected components, one record
/// per component. Components are ordered by their smallest cell.
pub fn localize(field: &DensityField, lattice: &Lattice, epsilon: f64) -> Vec<LocalizedObserver> {
    assert!(epsilon > 0.0, "epsilon must be positive");
    let n = field.values.len();
    let above: Vec<bool> = field.values.iter().map(|&v| v >= epsilon).collect();
    let mut seen = vec![false; n];
    let mut out = Vec::new();
    for start in 0..n {
        if !above[start] || seen[start] {
            continue;
        }
        let mut stack = vec![start];
        let mut cells = Vec::new();
        seen[start] = true;
        while let Some(c) = stack.pop() {
            cells.push(c);
            for nb in lattice.neighbors(c) {
                if above[nb] && !seen[nb] {
                    seen[nb] = true;
                    stack.push(nb);
                }
            }
        }
        cells.sort_unstable();
        let probability: f64 = cells.iter().map(|&c| field.values[c]).sum();
        let mut centroid = [0.0; 3];
        for &c in &cells {
            for (k, x) in centroid.iter_mut().enumerate() {
                *x += field.values[c] * field.positions[c][k];
            }
        }
        for x in centroid.iter_mut() {
            *x /= probability;
        }
        out.push(LocalizedObserver {
            species: field.species.clone(),
            label: field.label,
            time: field.time,
            cells,
            probability,
            centroid,
            epsilon,
        });
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::SpeciesSpec;
    use crate::model::{build_packet_state, Internal, PacketEntry, WavepacketSpec};

    fn field(values: Vec<f64>) -> (DensityField, Lattice) {
        let l = Lattice::chain(values.len(), 1.0).unwrap();
        (DensityField::new("O1", 1, 0.0, &l, &[0.0; 3], values), l)
    }

    #[test]
    fn spike_gives_one_record() {
        let mut v = vec![0.0; 9];
        v[4] = 0.5;
        let (f, l) = field(v);
        let r = localize(&f, &l, 1e-6);
        assert_eq!(r.len(), 1);
        assert_eq!(r[0].probability, 0.5);
        assert_eq!(r[0].cells, vec![4]);
        assert_eq!(r[0].centroid[0], 4.5);
    }

    #[test]
    fn empty_field_gives_nothing() {
        let (f, l) = field(vec![0.0; 5]);
        assert!(localize(&f, &l, 1e-6).is_empty());
    }

    #[test]
    fn two_bumps_two_records() {
        let (f, l) = field(vec![0.1, 0.2, 0.0, 0.0, 0.3, 0.4, 0.0]);
        let r = localize(&f, &l, 1e-6);
        let p: Vec<f64> = r.iter().map(|o| o.probability).collect();
        assert!((p[0] - 0.3).abs() < 1e-15 && (p[1] - 0.7).abs() < 1e-15);
        for o in &r {
            for (c, v) in f.values.iter().enumerate() {
                if !o.cells.contains(&c) && *v >= 1e-6 {
                    assert!(r.iter().any(|q| q.cells.contains(&c)));
                }
            }
        }
    }

    #[test]
    fn fresh_observer_is_ignorant() {
        let l = Lattice::chain(20, 1.0).unwrap();
        let space = ModeSpace::new(vec![SpeciesSpec::observer("O", 1.0)], 20).unwrap();
        let p = WavepacketSpec { center: [10.0, 0.0, 0.0], alpha: 0.5, velocity: [0.0; 3], mass: 1.0 };
        let spatial = p.discretize("O", &l, &[0.0; 3], 1.0).unwrap();
        let st = build_packet_state(&space, &[PacketEntry { species: 0, internal: Internal::Label(0), spatial }], None).unwrap();
        let d0 = density(&st, &space, 0, 0, &l, &[0.0; 3], 0.0).unwrap();
        let d1 = density(&st, &space, 0, 1, &l, &[0.0; 3], 0.0).unwrap();
        assert!((d0.total() - 1.0).abs() < 1e-12);
        assert_eq!(d1.total(), 0.0);
        let vac = SectorState::vacuum(space.total());
        assert_eq!(density(&vac, &space, 0, 0, &l, &[0.0; 3], 0.0).unwrap().total(), 0.0);
    }
}
