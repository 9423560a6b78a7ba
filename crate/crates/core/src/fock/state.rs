use num_complex::Complex64 as C64;
use rustc_hash::FxHashMap;

use super::modes::ModeSpace;

pub const DEFAULT_PRUNE: f64 = 1e-14;

/// Parity rule for the fermionic sign. `IgnoreMode` deliberately drops one
/// mode from the count and exists only so the algebra checker can be shown
/// to catch a broken convention.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ParityRule {
    Canonical,
    IgnoreMode(usize),
}

impl ParityRule {
    /// True when the number of occupied modes below `r` is odd.
    #[inline]
    pub fn odd_below(self, config: u128, r: usize) -> bool {
        let mut below = config & low_mask(r);
        if let ParityRule::IgnoreMode(k) = self {
            if k < r {
                below &= !(1u128 << k);
            }
        }
        below.count_ones() & 1 == 1
    }
}

#[inline]
pub fn low_mask(r: usize) -> u128 {
    if r >= 128 {
        u128::MAX
    } else {
        (1u128 << r) - 1
    }
}

/// a†_r on a basis configuration: new config and whether the sign flips.
#[inline]
pub fn create_config(config: u128, r: usize, rule: ParityRule) -> Option<(u128, bool)> {
    let bit = 1u128 << r;
    if config & bit != 0 {
        return None;
    }
    Some((config | bit, rule.odd_below(config, r)))
}

/// a_r on a basis configuration.
#[inline]
pub fn annihilate_config(config: u128, r: usize, rule: ParityRule) -> Option<(u128, bool)> {
    let bit = 1u128 << r;
    if config & bit == 0 {
        return None;
    }
    Some((config & !bit, rule.odd_below(config, r)))
}

/// Sparse amplitude vector over occupation configurations. Bit r of the key
/// is set when mode r is occupied; |config⟩ = a†_{r1} a†_{r2} … |0⟩ with
/// r1 < r2 < …
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SectorState {
    amps: FxHashMap<u128, C64>,
    n_modes: usize,
}

impl SectorState {
    pub fn zero(n_modes: usize) -> Self {
        assert!(n_modes <= 128, "sparse states hold at most 128 modes");
        Self { amps: FxHashMap::default(), n_modes }
    }

    pub fn vacuum(n_modes: usize) -> Self {
        Self::basis(n_modes, 0)
    }

    pub fn basis(n_modes: usize, config: u128) -> Self {
        let mut s = Self::zero(n_modes);
        s.amps.insert(config, C64::new(1.0, 0.0));
        s
    }

    pub fn from_amplitudes(n_modes: usize, it: impl IntoIterator<Item = (u128, C64)>) -> Self {
        let mut s = Self::zero(n_modes);
        for (c, a) in it {
            s.add(c, a);
        }
        s
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn len(&self) -> usize {
        self.amps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amps.is_empty()
    }

    #[inline]
    pub fn add(&mut self, config: u128, a: C64) {
        *self.amps.entry(config).or_insert(C64::new(0.0, 0.0)) += a;
    }

    pub fn amplitude(&self, config: u128) -> C64 {
        self.amps.get(&config).copied().unwrap_or_default()
    }

    pub fn iter(&self) -> impl Iterator<Item = (u128, C64)> + '_ {
        self.amps.iter().map(|(&c, &a)| (c, a))
    }

    /// Entries sorted by configuration, for reproducible output.
    pub fn sorted(&self) -> Vec<(u128, C64)> {
        let mut v: Vec<_> = self.iter().collect();
        v.sort_unstable_by_key(|e| e.0);
        v
    }

    pub fn norm_sq(&self) -> f64 {
        let mut v: Vec<f64> = self.amps.values().map(|a| a.norm_sqr()).collect();
        v.sort_unstable_by(|a, b| a.total_cmp(b));
        v.iter().sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn scaled(&self, c: C64) -> Self {
        Self { amps: self.amps.iter().map(|(&k, &a)| (k, a * c)).collect(), n_modes: self.n_modes }
    }

    pub fn normalized(&self) -> Self {
        let n = self.norm();
        if n == 0.0 {
            self.clone()
        } else {
            self.scaled(C64::new(1.0 / n, 0.0))
        }
    }

    /// self += c·other
    pub fn axpy(&mut self, c: C64, other: &SectorState) {
        for (k, a) in other.iter() {
            self.add(k, c * a);
        }
    }

    /// ⟨self|other⟩
    pub fn inner(&self, other: &SectorState) -> C64 {
        let (small, large, conj_small) = if self.len() <= other.len() {
            (self, other, true)
        } else {
            (other, self, false)
        };
        let mut acc = C64::new(0.0, 0.0);
        for (k, a) in small.iter() {
            let b = large.amplitude(k);
            acc += if conj_small { a.conj() * b } else { b.conj() * a };
        }
        acc
    }

    pub fn distance(&self, other: &SectorState) -> f64 {
        let mut d = self.clone();
        d.axpy(C64::new(-1.0, 0.0), other);
        d.norm()
    }

    pub fn prune(&mut self, threshold: f64) {
        self.amps.retain(|_, a| a.norm() > threshold);
    }

    /// Per-species quantum counts if every configuration agrees.
    pub fn occupations(&self, space: &ModeSpace) -> Option<Vec<usize>> {
        let mut it = self.amps.keys();
        let first = space.occupations(*it.next()?);
        it.all(|&c| space.occupations(c) == first).then_some(first)
    }
}

pub fn apply_creation(state: &SectorState, r: usize) -> SectorState {
    apply_creation_with(state, r, ParityRule::Canonical)
}

pub fn apply_annihilation(state: &SectorState, r: usize) -> SectorState {
    apply_annihilation_with(state, r, ParityRule::Canonical)
}

pub fn apply_creation_with(state: &SectorState, r: usize, rule: ParityRule) -> SectorState {
    assert!(r < state.n_modes());
    let mut out = SectorState::zero(state.n_modes());
    for (c, a) in state.iter() {
        if let Some((c2, odd)) = create_config(c, r, rule) {
            out.add(c2, if odd { -a } else { a });
        }
    }
    out
}

pub fn apply_annihilation_with(state: &SectorState, r: usize, rule: ParityRule) -> SectorState {
    assert!(r < state.n_modes());
    let mut out = SectorState::zero(state.n_modes());
    for (c, a) in state.iter() {
        if let Some((c2, odd)) = annihilate_config(c, r, rule) {
            out.add(c2, if odd { -a } else { a });
        }
    }
    out
}
