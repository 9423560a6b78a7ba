//! Matrix-free exp(scale·G)|ψ⟩ by substepping plus truncated Taylor series.

use num_complex::Complex64 as C64;

use nalgebra::DMatrix;

use super::dense::expm;
use super::ops::{apply_terms, OperatorTerm};
use super::state::{SectorState, DEFAULT_PRUNE};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExpOptions {
    pub max_terms: usize,
    pub max_substeps: usize,
    /// Target |scale|·‖G‖ per substep.
    pub step_norm: f64,
    pub tol: f64,
    pub prune: f64,
}

impl Default for ExpOptions {
    fn default() -> Self {
        Self { max_terms: 80, max_substeps: 64, step_norm: 1.0, tol: 1e-16, prune: DEFAULT_PRUNE }
    }
}

/// Crude growth-rate estimate of G on the Krylov space of ψ.
fn growth_estimate(state: &SectorState, generator: &[OperatorTerm]) -> f64 {
    let n0 = state.norm();
    if n0 == 0.0 {
        return 0.0;
    }
    let mut v = state.scaled(C64::new(1.0 / n0, 0.0));
    let mut est: f64 = 0.0;
    for _ in 0..4 {
        let w = apply_terms(&v, generator);
        let nw = w.norm();
        est = est.max(nw);
        if nw == 0.0 {
            break;
        }
        v = w.scaled(C64::new(1.0 / nw, 0.0));
    }
    est
}

pub fn evolve_exp(state: &SectorState, generator: &[OperatorTerm], scale: C64) -> Result<SectorState> {
    evolve_exp_with(state, generator, scale, &ExpOptions::default())
}

pub fn evolve_exp_with(
    state: &SectorState,
    generator: &[OperatorTerm],
    scale: C64,
    opts: &ExpOptions,
) -> Result<SectorState> {
    if generator.is_empty() || scale == C64::new(0.0, 0.0) || state.is_empty() {
        return Ok(state.clone());
    }
    // factor 2 guards against the power iteration underestimating
    let nu = 2.0 * scale.norm() * growth_estimate(state, generator);
    let steps = ((nu / opts.step_norm).ceil() as usize).clamp(1, opts.max_substeps);
    let h = scale / steps as f64;
    let mut psi = state.clone();
    for _ in 0..steps {
        let mut acc = psi.clone();
        let mut term = psi.clone();
        let mut converged = false;
        for k in 1..=opts.max_terms {
            term = apply_terms(&term, generator).scaled(h / k as f64);
            acc.axpy(C64::new(1.0, 0.0), &term);
            let tn = term.norm();
            if tn <= opts.tol * acc.norm().max(1e-300) || tn == 0.0 {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::NonConvergence { terms: opts.max_terms, residual: term.norm() });
        }
        acc.prune(opts.prune);
        psi = acc;
    }
    Ok(psi)
}

/// exp(scale·G)|ψ⟩ by Arnoldi projection onto the Krylov space of ψ.
/// Needs far fewer applications of G than the Taylor route when that
/// space is small, e.g. for generators with A² = 0. Krylov vectors are
/// pruned, which also removes products that cancel only after summation.
pub fn evolve_exp_krylov(
    state: &SectorState,
    generator: &[OperatorTerm],
    scale: C64,
    max_dim: usize,
    tol: f64,
) -> Result<SectorState> {
    let beta = state.norm();
    if generator.is_empty() || scale == C64::new(0.0, 0.0) || beta == 0.0 {
        return Ok(state.clone());
    }
    let prune = DEFAULT_PRUNE * beta;
    let mut basis = vec![state.scaled(C64::new(1.0 / beta, 0.0))];
    let mut h = DMatrix::<C64>::zeros(max_dim + 1, max_dim);
    let mut residual = f64::INFINITY;
    for j in 0..max_dim {
        let mut w = apply_terms(&basis[j], generator);
        // two Gram-Schmidt passes
        for _ in 0..2 {
            for (i, b) in basis.iter().enumerate() {
                let c = b.inner(&w);
                h[(i, j)] += c;
                w.axpy(-c, b);
            }
        }
        w.prune(prune);
        let hn = w.norm();
        h[(j + 1, j)] = C64::new(hn, 0.0);
        let m = j + 1;
        let small = expm(&(h.view((0, 0), (m, m)) * scale));
        residual = hn * scale.norm() * small[(m - 1, 0)].norm() * beta;
        if hn <= 1e-13 || residual < tol {
            let mut out = SectorState::zero(state.n_modes());
            for (i, b) in basis.iter().enumerate() {
                out.axpy(small[(i, 0)] * beta, b);
            }
            out.prune(prune);
            return Ok(out);
        }
        basis.push(w.scaled(C64::new(1.0 / hn, 0.0)));
    }
    Err(Error::NonConvergence { terms: max_dim, residual })
}
