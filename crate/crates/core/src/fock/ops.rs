use num_complex::Complex64 as C64;

use super::state::{annihilate_config, create_config, ParityRule, SectorState};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FermionOp {
    Create(usize),
    Annihilate(usize),
}

/// coefficient · a†_{c0} a†_{c1} … a_{a0} a_{a1} …
#[derive(Clone, Debug, PartialEq)]
pub struct OperatorTerm {
    pub coefficient: C64,
    pub creators: Vec<usize>,
    pub annihilators: Vec<usize>,
}

fn has_repeat(v: &[usize]) -> bool {
    v.iter().enumerate().any(|(i, r)| v[..i].contains(r))
}

impl OperatorTerm {
    /// Normal-ordered term; a repeated creator or annihilator makes the
    /// operator vanish, so we reject it instead of carrying a dead term.
    pub fn new(coefficient: C64, creators: Vec<usize>, annihilators: Vec<usize>) -> Self {
        assert!(!has_repeat(&creators) && !has_repeat(&annihilators), "repeated mode in term");
        Self { coefficient, creators, annihilators }
    }

    pub fn identity(coefficient: C64) -> Self {
        Self::new(coefficient, vec![], vec![])
    }

    pub fn number(r: usize) -> Self {
        Self::new(C64::new(1.0, 0.0), vec![r], vec![r])
    }

    /// c · a†_to a_from
    pub fn hop(c: C64, to: usize, from: usize) -> Self {
        Self::new(c, vec![to], vec![from])
    }

    /// Normal-orders a product of ladder operators by anticommuting
    /// creators to the left. Returns `Ok(None)` when the product is
    /// identically zero (repeated creator or annihilator) and an error when
    /// a contraction would be needed.
    pub fn from_product(coefficient: C64, ops: &[FermionOp]) -> Result<Option<Self>> {
        let mut seq = ops.to_vec();
        let mut odd = false;
        // bubble creators left; each swap of distinct modes costs a sign
        for i in 1..seq.len() {
            let mut j = i;
            while j > 0 {
                match (seq[j - 1], seq[j]) {
                    (FermionOp::Annihilate(a), FermionOp::Create(c)) => {
                        if a == c {
                            return Err(Error::Contraction(a));
                        }
                        seq.swap(j - 1, j);
                        odd = !odd;
                        j -= 1;
                    }
                    _ => break,
                }
            }
        }
        let mut creators = Vec::new();
        let mut annihilators = Vec::new();
        for op in seq {
            match op {
                FermionOp::Create(r) => creators.push(r),
                FermionOp::Annihilate(r) => annihilators.push(r),
            }
        }
        if has_repeat(&creators) || has_repeat(&annihilators) {
            return Ok(None);
        }
        let coefficient = if odd { -coefficient } else { coefficient };
        Ok(Some(Self { coefficient, creators, annihilators }))
    }

    pub fn adjoint(&self) -> Self {
        Self {
            coefficient: self.coefficient.conj(),
            creators: self.annihilators.iter().rev().copied().collect(),
            annihilators: self.creators.iter().rev().copied().collect(),
        }
    }

    pub fn scaled(&self, c: C64) -> Self {
        Self { coefficient: self.coefficient * c, ..self.clone() }
    }

    /// Action on one basis configuration.
    #[inline]
    pub fn apply_config(&self, config: u128, rule: ParityRule) -> Option<(u128, C64)> {
        let mut c = config;
        let mut odd = false;
        for &r in self.annihilators.iter().rev() {
            let (n, o) = annihilate_config(c, r, rule)?;
            c = n;
            odd ^= o;
        }
        for &r in self.creators.iter().rev() {
            let (n, o) = create_config(c, r, rule)?;
            c = n;
            odd ^= o;
        }
        Some((c, if odd { -self.coefficient } else { self.coefficient }))
    }

    pub fn max_mode(&self) -> Option<usize> {
        self.creators.iter().chain(&self.annihilators).copied().max()
    }
}

pub fn apply_term(state: &SectorState, term: &OperatorTerm) -> SectorState {
    apply_terms(state, std::slice::from_ref(term))
}

/// Σ_t t|state⟩
pub fn apply_terms(state: &SectorState, terms: &[OperatorTerm]) -> SectorState {
    let mut out = SectorState::zero(state.n_modes());
    for (c, a) in state.iter() {
        for t in terms {
            if let Some((c2, v)) = t.apply_config(c, ParityRule::Canonical) {
                out.add(c2, v * a);
            }
        }
    }
    out
}

pub fn adjoint_terms(terms: &[OperatorTerm]) -> Vec<OperatorTerm> {
    terms.iter().map(OperatorTerm::adjoint).collect()
}

/// ⟨state| Σ terms |state⟩
pub fn expectation(state: &SectorState, terms: &[OperatorTerm]) -> C64 {
    state.inner(&apply_terms(state, terms))
}
