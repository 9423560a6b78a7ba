//! Exterior-aperture overlap Ĩ(x) = ∫_{|y−x_S|>a} G*(x−y, T) ψ*(y, t₁) dy
//! and its exp(−α̃a²/2) decay.

use num_complex::Complex64 as C64;
use serde::Serialize;

use super::continuum::{alpha_tilde, continuum_packet, green};
use super::quadrature::{Integrator, QuadOptions, QuadResult};
use crate::error::{Error, Result};
use crate::model::WavepacketSpec;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TailIntegralSpec {
    pub alpha: f64,
    pub mass: f64,
    pub hbar: f64,
    /// t₁ − t₀: free spreading before the measurement.
    pub spread_time: f64,
    /// t_[2,3] − t₁: propagation after the measurement.
    pub after_time: f64,
    pub aperture: f64,
    /// 1, or 3 (radial reduction, x at the packet center only).
    pub dim: usize,
}

impl TailIntegralSpec {
    pub fn alpha_tilde(&self) -> f64 {
        alpha_tilde(self.alpha, self.mass, self.hbar, self.spread_time)
    }

    /// Aperture giving α̃a² = `x`.
    pub fn with_scaled_aperture(&self, x: f64) -> Self {
        Self { aperture: (x / self.alpha_tilde()).sqrt(), ..*self }
    }

    fn packet(&self) -> WavepacketSpec {
        WavepacketSpec { center: [0.0; 3], alpha: self.alpha, velocity: [0.0; 3], mass: self.mass }
    }

    /// Quadratic phase rate of the integrand, used for zone splitting.
    fn chirp(&self) -> f64 {
        let b = self.alpha * self.hbar * self.spread_time / self.mass;
        self.mass / (2.0 * self.hbar * self.after_time) + 0.5 * self.alpha * b / (1.0 + b * b)
    }
}

/// Fresnel-zone breakpoints r_k = sqrt(a² + kπ/c) from `a` out to `r_max`.
fn zones(a: f64, r_max: f64, chirp: f64) -> Vec<f64> {
    let mut v = vec![a];
    let mut k = 1.0;
    loop {
        let r = (a * a + k * std::f64::consts::PI / chirp).sqrt();
        if r >= r_max || v.len() > 20_000 {
            break;
        }
        v.push(r);
        k += 1.0;
    }
    v.push(r_max);
    v
}

/// Ĩ at offset `x` from the aligned system position (1-D), or at the
/// center for the radial 3-D form.
pub fn tail_integral(spec: &TailIntegralSpec, x: f64) -> Result<QuadResult> {
    if spec.dim != 1 && spec.dim != 3 {
        return Err(Error::Precondition(format!("tail integral supports dim 1 or 3, got {}", spec.dim)));
    }
    if spec.dim == 3 && x != 0.0 {
        return Err(Error::Precondition("radial tail integral is evaluated at the packet center".into()));
    }
    if !(spec.after_time > 0.0) || spec.aperture < 0.0 {
        return Err(Error::Precondition("tail integral needs after_time > 0 and aperture >= 0".into()));
    }
    let at = spec.alpha_tilde();
    let packet = spec.packet();
    let r_max = (spec.aperture * spec.aperture + 90.0 / at).sqrt() + x.abs();
    let q = Integrator::default();
    let opts = QuadOptions { abs_tol: 1e-14, rel_tol: 1e-11, max_depth: 40 };
    let t = C64::new(spec.after_time, 0.0);
    let hbar = spec.hbar;
    let m = spec.mass;
    let tau = spec.spread_time;
    let bp = zones(spec.aperture, r_max, spec.chirp());
    if spec.dim == 1 {
        let f = |y: f64| {
            green(&[x - y], t, m, hbar).conj() * continuum_packet(&[y, 0.0, 0.0], 1, tau, &packet, hbar).conj()
        };
        let right = q.integrate(&f, &bp, &opts)?;
        let neg: Vec<f64> = bp.iter().rev().map(|r| -r).collect();
        let left = q.integrate(&f, &neg, &opts)?;
        Ok(QuadResult { value: left.value + right.value, error: left.error + right.error })
    } else {
        let f = |r: f64| {
            let g = green(&[r, 0.0, 0.0], t, m, hbar).conj();
            let p = continuum_packet(&[r, 0.0, 0.0], 3, tau, &packet, hbar).conj();
            g * p * (4.0 * std::f64::consts::PI * r * r)
        };
        q.integrate(&f, &bp, &opts)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TailRow {
    pub alpha_tilde_a2: f64,
    pub abs_i_tilde: f64,
}

/// |Ĩ| at the packet center over a grid of α̃a² values.
pub fn tail_scan(spec: &TailIntegralSpec, grid: &[f64]) -> Result<Vec<TailRow>> {
    grid.iter()
        .map(|&x| {
            let s = spec.with_scaled_aperture(x);
            Ok(TailRow { alpha_tilde_a2: x, abs_i_tilde: tail_integral(&s, 0.0)?.value.norm() })
        })
        .collect()
}

/// Least-squares slope of ln|Ĩ| against α̃a².
pub fn fit_tail_slope(rows: &[TailRow]) -> f64 {
    let pts: Vec<(f64, f64)> =
        rows.iter().filter(|r| r.abs_i_tilde > 0.0).map(|r| (r.alpha_tilde_a2, r.abs_i_tilde.ln())).collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}
