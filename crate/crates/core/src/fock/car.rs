//! Exhaustive anticommutation check on the full Fock space.

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::dense::MAX_FULL_FOCK_MODES;
use super::modes::ModeSpace;
use super::species::SpeciesSpec;
use super::state::{annihilate_config, create_config, ParityRule, SectorState};
use crate::error::{Error, Result};
use crate::lattice::Lattice;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CarIdentity {
    /// {a_r, a†_s} = δ_rs
    Mixed,
    /// {a_r, a_s} = 0
    Annihilators,
    /// {a†_r, a†_s} = 0
    Creators,
    /// ⟨u|a_r|v⟩ = conj ⟨v|a†_r|u⟩
    Adjoint,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CarViolation {
    pub identity: CarIdentity,
    pub r: usize,
    pub s: usize,
    pub config: u128,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CarReport {
    pub modes: usize,
    pub pairs_checked: usize,
    pub adjoint_trials: usize,
    pub violations: Vec<CarViolation>,
}

impl CarReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

type Ladder = fn(u128, usize, ParityRule) -> Option<(u128, bool)>;

// Applies op1 after op2 to a basis config, returning (config, ±1).
fn pair(b: u128, op1: (Ladder, usize), op2: (Ladder, usize), rule: ParityRule) -> Option<(u128, i8)> {
    let (c1, o1) = (op2.0)(b, op2.1, rule)?;
    let (c2, o2) = (op1.0)(c1, op1.1, rule)?;
    Some((c2, if o1 ^ o2 { -1 } else { 1 }))
}

// {X, Y} on basis state b, as an exact integer combination.
fn anticommutator_on(b: u128, x: (Ladder, usize), y: (Ladder, usize), rule: ParityRule) -> Vec<(u128, i8)> {
    let mut out: Vec<(u128, i8)> = Vec::with_capacity(2);
    for term in [pair(b, x, y, rule), pair(b, y, x, rule)].into_iter().flatten() {
        match out.iter_mut().find(|e| e.0 == term.0) {
            Some(e) => e.1 += term.1,
            None => out.push(term),
        }
    }
    out.retain(|e| e.1 != 0);
    out
}

pub fn check_car(lattice: &Lattice, species: &[SpeciesSpec], trials: usize) -> Result<CarReport> {
    let space = ModeSpace::new(species.to_vec(), lattice.cell_count())?;
    check_car_with(&space, trials, ParityRule::Canonical, 0)
}

/// Checks every identity on every basis configuration exactly, then runs
/// `trials` random adjoint checks with sparse complex states.
pub fn check_car_with(space: &ModeSpace, trials: usize, rule: ParityRule, seed: u64) -> Result<CarReport> {
    let n = space.total();
    if n > MAX_FULL_FOCK_MODES {
        return Err(Error::TooLarge(format!("{n} modes exceed {MAX_FULL_FOCK_MODES}")));
    }
    let cre: Ladder = create_config;
    let ann: Ladder = annihilate_config;
    let mut violations = Vec::new();
    let mut pairs = 0;
    for r in 0..n {
        for s in 0..n {
            pairs += 1;
            let checks = [
                (CarIdentity::Mixed, (ann, r), (cre, s), r == s),
                (CarIdentity::Annihilators, (ann, r), (ann, s), false),
                (CarIdentity::Creators, (cre, r), (cre, s), false),
            ];
            for (id, x, y, delta) in checks {
                let bad = (0..(1u128 << n)).find(|&b| {
                    let got = anticommutator_on(b, x, y, rule);
                    if delta {
                        got != [(b, 1)]
                    } else {
                        !got.is_empty()
                    }
                });
                if let Some(config) = bad {
                    violations.push(CarViolation { identity: id, r, s, config });
                }
            }
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dim = 1u128 << n;
    for _ in 0..trials {
        let rand_state = |rng: &mut ChaCha8Rng| {
            SectorState::from_amplitudes(
                n,
                (0..6).map(|_| {
                    (rng.random_range(0..dim), C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
                }),
            )
        };
        let u = rand_state(&mut rng);
        let v = rand_state(&mut rng);
        let r = rng.random_range(0..n);
        let lhs = u.inner(&super::state::apply_annihilation_with(&v, r, rule));
        let rhs = v.inner(&super::state::apply_creation_with(&u, r, rule)).conj();
        if (lhs - rhs).norm() > 1e-12 {
            violations.push(CarViolation { identity: CarIdentity::Adjoint, r, s: r, config: 0 });
        }
    }
    Ok(CarReport { modes: n, pairs_checked: pairs, adjoint_trials: trials, violations })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_species_pass() {
        let lat = Lattice::chain(1, 1.0).unwrap();
        let rep = check_car(&lat, &[SpeciesSpec::system("S", 1.0), SpeciesSpec::observer("O", 1.0)], 20).unwrap();
        assert!(rep.passed());
        assert_eq!(rep.modes, 4);
        assert_eq!(rep.pairs_checked, 16);
    }

    #[test]
    fn fictitious_included() {
        let lat = Lattice::chain(2, 1.0).unwrap();
        let sp = [SpeciesSpec::observer("O", 1.0), SpeciesSpec::fictitious("Z_O")];
        assert!(check_car(&lat, &sp, 10).unwrap().passed());
    }

    #[test]
    fn broken_sign_is_caught() {
        let space = ModeSpace::new(vec![SpeciesSpec::system("S", 1.0)], 2).unwrap();
        let rep = check_car_with(&space, 0, ParityRule::IgnoreMode(0), 0).unwrap();
        assert!(!rep.passed());
        let v = &rep.violations[0];
        assert!(v.r != v.s && (v.r == 0 || v.s == 0));
    }
}
