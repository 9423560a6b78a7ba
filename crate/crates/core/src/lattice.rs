//! Regular cubic grid shared by every species.
//!
//! Cells are numbered with axis 0 fastest: `cell = i0 + L*i1 + L*L*i2`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    Open,
    Periodic,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Lattice {
    dim: usize,
    sites_per_axis: usize,
    spacing: f64,
    boundary: Boundary,
}

impl Lattice {
    pub fn new(dim: usize, sites_per_axis: usize, spacing: f64, boundary: Boundary) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(Error::Lattice(format!("dimension {dim} not in 1..=3")));
        }
        if sites_per_axis == 0 {
            return Err(Error::Lattice("sites_per_axis must be positive".into()));
        }
        if !(spacing > 0.0 && spacing.is_finite()) {
            return Err(Error::Lattice(format!("spacing {spacing} must be positive")));
        }
        Ok(Self { dim, sites_per_axis, spacing, boundary })
    }

    /// 1-D open chain, the common case.
    pub fn chain(sites: usize, spacing: f64) -> Result<Self> {
        Self::new(1, sites, spacing, Boundary::Open)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn sites_per_axis(&self) -> usize {
        self.sites_per_axis
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    pub fn cell_count(&self) -> usize {
        self.sites_per_axis.pow(self.dim as u32)
    }

    /// Volume element Δx^dim.
    pub fn cell_volume(&self) -> f64 {
        self.spacing.powi(self.dim as i32)
    }

    pub fn coords(&self, cell: usize) -> [usize; 3] {
        let l = self.sites_per_axis;
        let mut c = [0usize; 3];
        let mut rest = cell;
        for slot in c.iter_mut().take(self.dim) {
            *slot = rest % l;
            rest /= l;
        }
        c
    }

    pub fn index(&self, coords: [usize; 3]) -> usize {
        let l = self.sites_per_axis;
        (0..self.dim).rev().fold(0, |acc, ax| acc * l + coords[ax])
    }

    /// Cell center (k + 1/2)Δx per axis; unused axes are 0.
    pub fn center(&self, cell: usize) -> [f64; 3] {
        let c = self.coords(cell);
        let mut x = [0.0; 3];
        for ax in 0..self.dim {
            x[ax] = (c[ax] as f64 + 0.5) * self.spacing;
        }
        x
    }

    /// Geometric middle of the box, L·Δx/2 per used axis.
    pub fn midpoint(&self) -> [f64; 3] {
        let mut x = [0.0; 3];
        for v in x.iter_mut().take(self.dim) {
            *v = 0.5 * self.sites_per_axis as f64 * self.spacing;
        }
        x
    }

    /// Neighbors in the ± direction of each axis. With periodic wrap on a
    /// 2-site axis the same neighbor appears twice, which is what the
    /// Laplacian stencil needs.
    pub fn neighbors(&self, cell: usize) -> Vec<usize> {
        let l = self.sites_per_axis;
        let c = self.coords(cell);
        let mut out = Vec::with_capacity(2 * self.dim);
        for ax in 0..self.dim {
            for step in [-1i64, 1] {
                let k = c[ax] as i64 + step;
                let k = if k < 0 || k >= l as i64 {
                    match self.boundary {
                        Boundary::Open => continue,
                        Boundary::Periodic => k.rem_euclid(l as i64),
                    }
                } else {
                    k
                };
                let mut cc = c;
                cc[ax] = k as usize;
                out.push(self.index(cc));
            }
        }
        out
    }

    /// Cells on the outer shell of the box.
    pub fn is_boundary_cell(&self, cell: usize) -> bool {
        let c = self.coords(cell);
        (0..self.dim).any(|ax| c[ax] == 0 || c[ax] + 1 == self.sites_per_axis)
    }

    pub fn doubled(&self) -> Self {
        Self {
            dim: self.dim,
            sites_per_axis: self.sites_per_axis * 2,
            spacing: self.spacing / 2.0,
            boundary: self.boundary,
        }
    }
}

pub fn distance(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

pub fn add3(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

pub fn sub3(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub fn scale3(a: &[f64; 3], s: f64) -> [f64; 3] {
    [a[0] * s, a[1] * s, a[2] * s]
}

pub fn dot3(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}
