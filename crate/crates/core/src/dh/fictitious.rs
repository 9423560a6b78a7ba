//! Static auxiliary fields with arbitrary normalized wavefunctions.

use num_complex::Complex64 as C64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{distance, Lattice};
use crate::model::packet::normalize;

pub const NORM_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "shape")]
pub enum FictitiousShape {
    /// Real Gaussian exp(−α|x−c|²/2) around a frame-local center.
    Gaussian { center: [f64; 3], alpha: f64 },
    Uniform,
    /// Complex normal entries from a seeded ChaCha8 stream.
    Random { seed: u64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct FictitiousFieldSpec {
    /// Physical species id this field dresses.
    pub partner: String,
    pub wavefunction: Vec<C64>,
}

impl FictitiousFieldSpec {
    pub fn new(partner: impl Into<String>, wavefunction: Vec<C64>) -> Result<Self> {
        let n: f64 = wavefunction.iter().map(|a| a.norm_sqr()).sum();
        if (n - 1.0).abs() > NORM_TOL {
            return Err(Error::Precondition(format!("fictitious wavefunction norm {n} is not 1")));
        }
        Ok(Self { partner: partner.into(), wavefunction })
    }

    /// `stream` separates draws of different partners under one seed.
    pub fn from_shape(partner: impl Into<String>, shape: FictitiousShape, lattice: &Lattice, stream: u64) -> Result<Self> {
        let n = lattice.cell_count();
        let v: Vec<C64> = match shape {
            FictitiousShape::Gaussian { center, alpha } => (0..n)
                .map(|c| C64::new((-0.5 * alpha * distance(&lattice.center(c), &center).powi(2)).exp(), 0.0))
                .collect(),
            FictitiousShape::Uniform => vec![C64::new(1.0, 0.0); n],
            FictitiousShape::Random { seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(stream);
                (0..n)
                    .map(|_| {
                        let re: f64 = StandardNormal.sample(&mut rng);
                        let im: f64 = StandardNormal.sample(&mut rng);
                        C64::new(re, im)
                    })
                    .collect()
            }
        };
        if v.iter().all(|a| a.norm() == 0.0) {
            return Err(Error::Precondition("fictitious wavefunction vanishes on the lattice".into()));
        }
        Self::new(partner, normalize(v))
    }
}
