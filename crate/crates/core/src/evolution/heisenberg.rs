use num_complex::Complex64 as C64;

use super::propagate::{dense_propagator, run_schedule, Schedule};
use crate::error::Result;
use crate::fock::{expectation, OperatorTerm, SectorBasis, SectorState};
use crate::model::build_free_hamiltonian;

pub const MAX_DENSE_DIM: usize = 8192;

#[derive(Clone, Debug, PartialEq)]
pub struct HeisenbergReport {
    /// ⟨ψ_in| U†ÂU |ψ_in⟩ from dense matrices.
    pub heisenberg: C64,
    /// ⟨ψ(t)| Â |ψ(t)⟩ from the staged sparse evolution.
    pub schrodinger: C64,
    pub difference: f64,
    /// ‖U_dense ψ_in − ψ_sparse(t)‖
    pub state_distance: f64,
    pub basis_dim: usize,
}

/// Sector basis reachable from `initial` under every operator the schedule
/// and the observable can apply.
pub fn reachable_basis(initial: &SectorState, schedule: &Schedule, observable: &[OperatorTerm]) -> Result<SectorBasis> {
    let mut lists: Vec<Vec<OperatorTerm>> = vec![observable.to_vec()];
    for s in 0..schedule.space.species().len() {
        let spec = &schedule.space.species()[s];
        if !spec.is_fictitious() && spec.mass().is_some() {
            lists.push(build_free_hamiltonian(&schedule.space, s, &schedule.lattice, schedule.hbar)?);
        }
    }
    lists.push(schedule.measurement_generator()?);
    lists.push(schedule.comparator_generator()?);
    let refs: Vec<&[OperatorTerm]> = lists.iter().map(|v| v.as_slice()).collect();
    SectorBasis::closure(initial, &refs, MAX_DENSE_DIM)
}

pub fn heisenberg_consistency(
    initial: &SectorState,
    schedule: &Schedule,
    observable: &[OperatorTerm],
    t_query: f64,
) -> Result<HeisenbergReport> {
    let basis = reachable_basis(initial, schedule, observable)?;
    let u = dense_propagator(schedule, &basis, t_query)?;
    let a = basis.matrix(observable)?;
    let psi = basis.vector(initial)?;
    let a_t = u.adjoint() * a * &u;
    let heisenberg = (psi.adjoint() * a_t * &psi)[(0, 0)];

    let evolved = run_schedule(initial, schedule, t_query)?;
    let schrodinger = expectation(&evolved, observable);
    let dense_state = basis.state(&(&u * &psi));
    Ok(HeisenbergReport {
        heisenberg,
        schrodinger,
        difference: (heisenberg - schrodinger).norm(),
        state_distance: dense_state.distance(&evolved),
        basis_dim: basis.dim(),
    })
}
