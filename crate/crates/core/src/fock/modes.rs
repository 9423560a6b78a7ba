use serde::Serialize;

use super::species::SpeciesSpec;
use crate::error::{Error, Result};

/// Position of a single fermionic mode in the canonical order
/// (species, internal label, cell).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct ModeIndex {
    pub species: usize,
    pub internal: u8,
    pub cell: usize,
    pub rank: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ModeSpace {
    species: Vec<SpeciesSpec>,
    cells: usize,
    offsets: Vec<usize>,
    total: usize,
}

impl ModeSpace {
    pub fn new(species: Vec<SpeciesSpec>, cells: usize) -> Result<Self> {
        let mut offsets = Vec::with_capacity(species.len());
        let mut total = 0;
        for (i, s) in species.iter().enumerate() {
            s.validate()?;
            if species[..i].iter().any(|o| o.id == s.id) {
                return Err(Error::Species(format!("duplicate species id {}", s.id)));
            }
            offsets.push(total);
            total += s.internal_dim() * cells;
        }
        Ok(Self { species, cells, offsets, total })
    }

    pub fn species(&self) -> &[SpeciesSpec] {
        &self.species
    }

    pub fn cells(&self) -> usize {
        self.cells
    }

    pub fn total(&self) -> usize {
        self.total
    }

    pub fn offset(&self, species: usize) -> usize {
        self.offsets[species]
    }

    pub fn species_index(&self, id: &str) -> Option<usize> {
        self.species.iter().position(|s| s.id == id)
    }

    /// Sparse states pack configurations into a u128.
    pub fn require_sparse(&self) -> Result<()> {
        if self.total > 128 {
            Err(Error::TooManyModes(self.total))
        } else {
            Ok(())
        }
    }

    #[inline]
    pub fn rank_at(&self, species: usize, label_pos: usize, cell: usize) -> usize {
        self.offsets[species] + label_pos * self.cells + cell
    }

    pub fn mode(&self, species: usize, label: u8, cell: usize) -> Result<ModeIndex> {
        let spec = self
            .species
            .get(species)
            .ok_or_else(|| Error::Species(format!("species index {species} out of range")))?;
        let pos = spec
            .label_position(label)
            .ok_or_else(|| Error::Species(format!("{} has no internal label {label}", spec.id)))?;
        if cell >= self.cells {
            return Err(Error::Lattice(format!("cell {cell} out of range")));
        }
        Ok(ModeIndex { species, internal: label, cell, rank: self.rank_at(species, pos, cell) })
    }

    pub fn decode(&self, rank: usize) -> ModeIndex {
        assert!(rank < self.total, "rank {rank} out of range");
        let species = self.offsets.partition_point(|&o| o <= rank) - 1;
        let local = rank - self.offsets[species];
        let pos = local / self.cells;
        ModeIndex {
            species,
            internal: self.species[species].labels[pos],
            cell: local % self.cells,
            rank,
        }
    }

    /// Contiguous rank range of a species.
    pub fn species_range(&self, species: usize) -> std::ops::Range<usize> {
        let start = self.offsets[species];
        start..start + self.species[species].internal_dim() * self.cells
    }

    pub fn species_mask(&self, species: usize) -> u128 {
        let r = self.species_range(species);
        let width = r.end - r.start;
        let ones = if width >= 128 { u128::MAX } else { (1u128 << width) - 1 };
        ones << r.start
    }

    /// Quanta per species for a configuration.
    pub fn occupations(&self, config: u128) -> Vec<usize> {
        (0..self.species.len())
            .map(|s| (config & self.species_mask(s)).count_ones() as usize)
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn space() -> ModeSpace {
        ModeSpace::new(
            vec![SpeciesSpec::system("S", 1.0), SpeciesSpec::observer("O", 1.0), SpeciesSpec::fictitious("Z")],
            3,
        )
        .unwrap()
    }

    #[test]
    fn ranks_are_a_bijection() {
        let sp = space();
        assert_eq!(sp.total(), 15);
        let mut seen = vec![false; sp.total()];
        for (s, spec) in sp.species().iter().enumerate() {
            for &l in &spec.labels {
                for c in 0..3 {
                    let m = sp.mode(s, l, c).unwrap();
                    assert!(!seen[m.rank]);
                    seen[m.rank] = true;
                    assert_eq!(sp.decode(m.rank), m);
                }
            }
        }
        assert!(seen.iter().all(|&b| b));
    }

    #[test]
    fn canonical_order() {
        let sp = space();
        assert_eq!(sp.mode(0, 1, 0).unwrap().rank, 0);
        assert_eq!(sp.mode(0, 2, 0).unwrap().rank, 3);
        assert_eq!(sp.mode(1, 0, 2).unwrap().rank, 8);
        assert_eq!(sp.mode(2, 0, 0).unwrap().rank, 12);
        assert!(sp.mode(0, 0, 0).is_err());
        assert_eq!(sp.species_mask(1), 0b111111 << 6);
    }
}
