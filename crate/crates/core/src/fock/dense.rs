//! Explicit matrices for small mode counts: full-Fock sparse matrices for
//! algebra checks, and dense sector matrices for brute-force evolution.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use rustc_hash::FxHashMap;

use super::ops::OperatorTerm;
use super::state::{annihilate_config, create_config, ParityRule, SectorState};
use crate::error::{Error, Result};

pub const MAX_FULL_FOCK_MODES: usize = 16;

/// Operator on the whole 2^n Fock space, stored column-wise.
#[derive(Clone, Debug, PartialEq)]
pub struct FockMatrix {
    n_modes: usize,
    cols: Vec<Vec<(u32, C64)>>,
}

impl FockMatrix {
    fn check(n_modes: usize) -> Result<()> {
        if n_modes > MAX_FULL_FOCK_MODES {
            return Err(Error::TooLarge(format!("{n_modes} modes exceed {MAX_FULL_FOCK_MODES}")));
        }
        Ok(())
    }

    fn from_fn(n_modes: usize, f: impl Fn(u128) -> Vec<(u128, C64)>) -> Result<Self> {
        Self::check(n_modes)?;
        let dim = 1usize << n_modes;
        let cols = (0..dim)
            .map(|b| {
                let mut acc: FxHashMap<u32, C64> = FxHashMap::default();
                for (r, v) in f(b as u128) {
                    *acc.entry(r as u32).or_default() += v;
                }
                let mut col: Vec<_> = acc.into_iter().filter(|e| e.1 != C64::new(0.0, 0.0)).collect();
                col.sort_unstable_by_key(|e| e.0);
                col
            })
            .collect();
        Ok(Self { n_modes, cols })
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn identity(n_modes: usize) -> Result<Self> {
        Self::from_fn(n_modes, |b| vec![(b, C64::new(1.0, 0.0))])
    }

    pub fn zero(n_modes: usize) -> Result<Self> {
        Self::from_fn(n_modes, |_| vec![])
    }

    pub fn creation(n_modes: usize, r: usize, rule: ParityRule) -> Result<Self> {
        Self::from_fn(n_modes, |b| {
            create_config(b, r, rule)
                .map(|(c, odd)| vec![(c, C64::new(if odd { -1.0 } else { 1.0 }, 0.0))])
                .unwrap_or_default()
        })
    }

    pub fn annihilation(n_modes: usize, r: usize, rule: ParityRule) -> Result<Self> {
        Self::from_fn(n_modes, |b| {
            annihilate_config(b, r, rule)
                .map(|(c, odd)| vec![(c, C64::new(if odd { -1.0 } else { 1.0 }, 0.0))])
                .unwrap_or_default()
        })
    }

    pub fn from_terms(n_modes: usize, terms: &[OperatorTerm]) -> Result<Self> {
        Self::from_fn(n_modes, |b| {
            terms.iter().filter_map(|t| t.apply_config(b, ParityRule::Canonical)).collect()
        })
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.cols[col]
            .binary_search_by_key(&(row as u32), |e| e.0)
            .map(|i| self.cols[col][i].1)
            .unwrap_or_default()
    }

    pub fn mul(&self, rhs: &FockMatrix) -> FockMatrix {
        let cols = rhs
            .cols
            .iter()
            .map(|col| {
                let mut acc: FxHashMap<u32, C64> = FxHashMap::default();
                for &(k, b) in col {
                    for &(i, a) in &self.cols[k as usize] {
                        *acc.entry(i).or_default() += a * b;
                    }
                }
                let mut c: Vec<_> = acc.into_iter().filter(|e| e.1 != C64::new(0.0, 0.0)).collect();
                c.sort_unstable_by_key(|e| e.0);
                c
            })
            .collect();
        FockMatrix { n_modes: self.n_modes, cols }
    }

    /// self + s·rhs
    pub fn add_scaled(&self, rhs: &FockMatrix, s: C64) -> FockMatrix {
        let cols = self
            .cols
            .iter()
            .zip(&rhs.cols)
            .map(|(a, b)| {
                let mut acc: FxHashMap<u32, C64> = a.iter().copied().collect();
                for &(i, v) in b {
                    *acc.entry(i).or_default() += s * v;
                }
                let mut c: Vec<_> = acc.into_iter().filter(|e| e.1 != C64::new(0.0, 0.0)).collect();
                c.sort_unstable_by_key(|e| e.0);
                c
            })
            .collect();
        FockMatrix { n_modes: self.n_modes, cols }
    }

    pub fn adjoint(&self) -> FockMatrix {
        let mut cols: Vec<Vec<(u32, C64)>> = vec![Vec::new(); self.cols.len()];
        for (j, col) in self.cols.iter().enumerate() {
            for &(i, v) in col {
                cols[i as usize].push((j as u32, v.conj()));
            }
        }
        for c in &mut cols {
            c.sort_unstable_by_key(|e| e.0);
        }
        FockMatrix { n_modes: self.n_modes, cols }
    }

    pub fn anticommutator(&self, rhs: &FockMatrix) -> FockMatrix {
        self.mul(rhs).add_scaled(&rhs.mul(self), C64::new(1.0, 0.0))
    }

    pub fn commutator(&self, rhs: &FockMatrix) -> FockMatrix {
        self.mul(rhs).add_scaled(&rhs.mul(self), C64::new(-1.0, 0.0))
    }

    pub fn is_zero(&self) -> bool {
        self.cols.iter().all(|c| c.is_empty())
    }

    pub fn max_abs(&self) -> f64 {
        self.cols.iter().flatten().map(|e| e.1.norm()).fold(0.0, f64::max)
    }

    pub fn nnz(&self) -> usize {
        self.cols.iter().map(Vec::len).sum()
    }

    pub fn apply(&self, state: &SectorState) -> SectorState {
        let mut out = SectorState::zero(self.n_modes);
        for (c, a) in state.iter() {
            for &(i, v) in &self.cols[c as usize] {
                out.add(i as u128, v * a);
            }
        }
        out
    }
}

/// Ordered list of configurations spanning a subspace.
#[derive(Clone, Debug)]
pub struct SectorBasis {
    n_modes: usize,
    configs: Vec<u128>,
    index: FxHashMap<u128, usize>,
}

impl SectorBasis {
    pub fn from_configs(n_modes: usize, mut configs: Vec<u128>) -> Self {
        configs.sort_unstable();
        configs.dedup();
        let index = configs.iter().enumerate().map(|(i, &c)| (c, i)).collect();
        Self { n_modes, configs, index }
    }

    /// Smallest config set containing `seed` and closed under every term list.
    pub fn closure(seed: &SectorState, generators: &[&[OperatorTerm]], limit: usize) -> Result<Self> {
        let mut seen: FxHashMap<u128, ()> = FxHashMap::default();
        let mut queue: Vec<u128> = seed.iter().map(|e| e.0).collect();
        queue.sort_unstable();
        for &c in &queue {
            seen.insert(c, ());
        }
        while let Some(c) = queue.pop() {
            for terms in generators {
                for t in terms.iter() {
                    if let Some((c2, _)) = t.apply_config(c, ParityRule::Canonical) {
                        if seen.insert(c2, ()).is_none() {
                            if seen.len() > limit {
                                return Err(Error::TooLarge(format!("reachable space exceeds {limit}")));
                            }
                            queue.push(c2);
                        }
                    }
                }
            }
        }
        Ok(Self::from_configs(seed.n_modes(), seen.into_keys().collect()))
    }

    pub fn dim(&self) -> usize {
        self.configs.len()
    }

    pub fn configs(&self) -> &[u128] {
        &self.configs
    }

    pub fn position(&self, config: u128) -> Option<usize> {
        self.index.get(&config).copied()
    }

    pub fn vector(&self, state: &SectorState) -> Result<DVector<C64>> {
        let mut v = DVector::zeros(self.dim());
        for (c, a) in state.iter() {
            let i = self
                .position(c)
                .ok_or_else(|| Error::Precondition("state leaves the sector basis".into()))?;
            v[i] = a;
        }
        Ok(v)
    }

    pub fn state(&self, v: &DVector<C64>) -> SectorState {
        SectorState::from_amplitudes(
            self.n_modes,
            self.configs.iter().zip(v.iter()).filter(|e| *e.1 != C64::new(0.0, 0.0)).map(|(&c, &a)| (c, a)),
        )
    }

    pub fn matrix(&self, terms: &[OperatorTerm]) -> Result<DMatrix<C64>> {
        let n = self.dim();
        let mut m = DMatrix::zeros(n, n);
        for (j, &c) in self.configs.iter().enumerate() {
            for t in terms {
                if let Some((c2, v)) = t.apply_config(c, ParityRule::Canonical) {
                    let i = self
                        .position(c2)
                        .ok_or_else(|| Error::Precondition("operator leaves the sector basis".into()))?;
                    m[(i, j)] += v;
                }
            }
        }
        Ok(m)
    }
}

/// exp(−i t H) for Hermitian H via eigendecomposition.
pub fn unitary_from_hermitian(h: &DMatrix<C64>, t: f64) -> DMatrix<C64> {
    let eig = h.clone().symmetric_eigen();
    let v = &eig.eigenvectors;
    let phases = DMatrix::from_diagonal(&eig.eigenvalues.map(|l| C64::new(0.0, -l * t).exp()));
    v * phases * v.adjoint()
}

/// exp(A) by scaling and squaring a Taylor series; used as an independent
/// oracle, not on hot paths.
pub fn expm(a: &DMatrix<C64>) -> DMatrix<C64> {
    let n = a.nrows();
    let norm1 = (0..n).map(|j| a.column(j).iter().map(|z| z.norm()).sum::<f64>()).fold(0.0, f64::max);
    let mut s = 0;
    while norm1 / 2f64.powi(s) > 0.25 {
        s += 1;
    }
    let b = a / C64::new(2f64.powi(s), 0.0);
    let mut term = DMatrix::<C64>::identity(n, n);
    let mut sum = term.clone();
    for k in 1..40 {
        term = &term * &b / C64::new(k as f64, 0.0);
        sum += &term;
        if term.iter().map(|z| z.norm()).fold(0.0, f64::max) < 1e-18 {
            break;
        }
    }
    for _ in 0..s {
        sum = &sum * &sum;
    }
    sum
}

pub fn max_abs_diff(a: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
    (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Largest singular value.
pub fn operator_norm(a: &DMatrix<C64>) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    a.clone().singular_values().iter().copied().fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn expm_matches_eigen_route() {
        let h = DMatrix::from_row_slice(
            2,
            2,
            &[C64::new(1.0, 0.0), C64::new(0.3, -0.2), C64::new(0.3, 0.2), C64::new(-0.5, 0.0)],
        );
        let u1 = unitary_from_hermitian(&h, 0.7);
        let u2 = expm(&(h * C64::new(0.0, -0.7)));
        assert!(max_abs_diff(&u1, &u2) < 1e-13);
    }

    #[test]
    fn creation_adjoint_is_annihilation() {
        for r in 0..4 {
            let c = FockMatrix::creation(4, r, ParityRule::Canonical).unwrap();
            let a = FockMatrix::annihilation(4, r, ParityRule::Canonical).unwrap();
            assert_eq!(c.adjoint(), a);
        }
    }
}
