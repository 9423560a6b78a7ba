//! Truncated Q/R series of the measurement conjugation checked against
//! their cos/sin resummation.

use num_complex::Complex64 as C64;

use crate::error::Result;
use crate::fock::{apply_terms, ModeSpace, OperatorTerm, SectorState};
use crate::lattice::{distance, Lattice};
use crate::model::{gate, lab_positions, SpinAxis, Updown};

#[derive(Clone, Debug, PartialEq)]
pub struct QrReport {
    pub angle: f64,
    /// ‖Q_N ψ − cos(ΘM)ψ‖ for N = 1..=max_order.
    pub q_error: Vec<f64>,
    /// ‖R_N ψ − sin(ΘM)ψ‖.
    pub r_error: Vec<f64>,
    /// ‖Mψ‖, the weight of the state the series acts on.
    pub active_norm: f64,
}

impl QrReport {
    /// Alternating-series remainder bound for each order.
    pub fn q_bound(&self, order: usize) -> f64 {
        self.active_norm * self.angle.abs().powi(2 * order as i32 + 2) / factorial(2 * order + 2)
    }

    pub fn r_bound(&self, order: usize) -> f64 {
        self.active_norm * self.angle.abs().powi(2 * order as i32 + 3) / factorial(2 * order + 3)
    }
}

pub fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// M = Σ_{y gated to x} 𝓝_{n,up}(y): the system density an observer at
/// lab point `x` sees through its aperture.
pub fn aperture_density(
    space: &ModeSpace,
    system: usize,
    axis: &SpinAxis,
    aperture: f64,
    lattice: &Lattice,
    x: &[f64; 3],
    origin_system: &[f64; 3],
) -> Vec<OperatorTerm> {
    let u = axis.coefficients(Updown::Up);
    let mut terms = Vec::new();
    for (y, py) in lab_positions(lattice, origin_system).iter().enumerate() {
        if !gate(distance(x, py), aperture) {
            continue;
        }
        for i in 0..2 {
            for j in 0..2 {
                let c = u[i] * u[j].conj();
                if c.norm() > 0.0 {
                    terms.push(OperatorTerm::hop(c, space.rank_at(system, i, y), space.rank_at(system, j, y)));
                }
            }
        }
    }
    terms
}

/// Q_N = Σ_{d≤N} (−1)^d Θ^{2d}/(2d)! M^{2d}, R_N = Σ_{d≤N} (−1)^d
/// Θ^{2d+1}/(2d+1)! M^{2d+1}. On one system quantum M is a projector, so
/// cos(ΘM)ψ = ψ − (1 − cosΘ)Mψ and sin(ΘM)ψ = sinΘ·Mψ.
pub fn qr_series_check(state: &SectorState, m: &[OperatorTerm], angle: f64, max_order: usize) -> Result<QrReport> {
    let mpsi = apply_terms(state, m);
    let mut cos_ref = state.clone();
    cos_ref.axpy(C64::new(-(1.0 - angle.cos()), 0.0), &mpsi);
    let sin_ref = mpsi.scaled(C64::new(angle.sin(), 0.0));

    // powers M^k ψ
    let mut powers = vec![state.clone()];
    for k in 1..=(2 * max_order + 1) {
        powers.push(apply_terms(&powers[k - 1], m));
    }
    let mut q_error = Vec::new();
    let mut r_error = Vec::new();
    let mut q = SectorState::zero(state.n_modes());
    let mut r = SectorState::zero(state.n_modes());
    for d in 0..=max_order {
        let sign = if d % 2 == 0 { 1.0 } else { -1.0 };
        let e = 2 * d;
        q.axpy(C64::new(sign * angle.powi(e as i32) / factorial(e), 0.0), &powers[e]);
        r.axpy(C64::new(sign * angle.powi(e as i32 + 1) / factorial(e + 1), 0.0), &powers[e + 1]);
        if d >= 1 {
            q_error.push(q.distance(&cos_ref));
            r_error.push(r.distance(&sin_ref));
        }
    }
    Ok(QrReport { angle, q_error, r_error, active_norm: mpsi.norm() })
}
