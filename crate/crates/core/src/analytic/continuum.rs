//! Closed-form free propagation of Gaussian packets in the continuum.

use num_complex::Complex64 as C64;

use super::quadrature::{Integrator, QuadOptions};
use crate::error::Result;
use crate::model::WavepacketSpec;

/// Free-particle kernel G(x, t) = (m/(2πiħt))^(d/2) exp(i m|x|²/(2ħt)),
/// d = x.len(). Complex t is allowed (used for kernel composition checks).
pub fn green(x: &[f64], t: C64, mass: f64, hbar: f64) -> C64 {
    let d = x.len() as f64;
    let r2: f64 = x.iter().map(|v| v * v).sum();
    let pref = (C64::new(mass, 0.0) / (C64::new(0.0, 2.0 * std::f64::consts::PI * hbar) * t)).powf(d / 2.0);
    pref * (C64::new(0.0, mass * r2 / (2.0 * hbar)) / t).exp()
}

/// Density width parameter after free spreading for time `dt`:
/// α̃ = α / (1 + α²ħ²dt²/m²).
pub fn alpha_tilde(alpha: f64, mass: f64, hbar: f64, dt: f64) -> f64 {
    alpha / (1.0 + (alpha * hbar * dt / mass).powi(2))
}

/// ψ(x, t₀ + τ) for a packet given at t₀, in `dim` dimensions:
/// Π_axes (α/π)^(1/4)(1+iβ)^(−1/2) exp[(−αy²/2 + iky − ik²β/(2α))/(1+iβ)],
/// y = x − x₀, k = mv/ħ, β = αħτ/m.
pub fn continuum_packet(x: &[f64; 3], dim: usize, tau: f64, spec: &WavepacketSpec, hbar: f64) -> C64 {
    let alpha = spec.alpha;
    let beta = alpha * hbar * tau / spec.mass;
    let den = C64::new(1.0, beta);
    let mut out = C64::new(1.0, 0.0);
    for ax in 0..dim {
        let y = x[ax] - spec.center[ax];
        let k = spec.mass * spec.velocity[ax] / hbar;
        let num = C64::new(-0.5 * alpha * y * y, k * y - 0.5 * k * k * beta / alpha);
        out *= (alpha / std::f64::consts::PI).powf(0.25) * den.powf(-0.5) * (num / den).exp();
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Composition {
    pub quadrature: C64,
    pub closed_form: C64,
    pub error: f64,
}

fn panels(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let n = ((hi - lo) / step).ceil().max(1.0) as usize;
    (0..=n).map(|k| lo + (hi - lo) * k as f64 / n as f64).collect()
}

fn opts() -> QuadOptions {
    QuadOptions { abs_tol: 1e-13, rel_tol: 1e-13, max_depth: 40 }
}

/// ∫ G(x−y, t₁) G(y−z, t₂) dy against G(x−z, t₁+t₂) in 1-D. Both times
/// need Im t < 0 so the kernels decay and the integral converges.
pub fn kernel_composition(x: f64, z: f64, t1: C64, t2: C64, mass: f64, hbar: f64) -> Result<Composition> {
    let width = |t: C64| (hbar * t.norm_sqr() / (mass * -t.im)).sqrt();
    let (w1, w2) = (width(t1), width(t2));
    let r = 14.0 * w1.max(w2) + (x - z).abs();
    let c = 0.5 * (x + z);
    let step = 0.05 * w1.min(w2);
    let f = |y: f64| green(&[x - y], t1, mass, hbar) * green(&[y - z], t2, mass, hbar);
    let q = Integrator::default().integrate(&f, &panels(c - r, c + r, step), &opts())?;
    let closed_form = green(&[x - z], t1 + t2, mass, hbar);
    Ok(Composition { quadrature: q.value, closed_form, error: (q.value - closed_form).norm() })
}

/// ∫ G(x−y, τ₂) ψ(y, t₀+τ₁) dy against ψ(x, t₀+τ₁+τ₂) in 1-D, real times.
pub fn packet_composition(x: f64, spec: &WavepacketSpec, tau1: f64, tau2: f64, hbar: f64) -> Result<Composition> {
    let at = alpha_tilde(spec.alpha, spec.mass, hbar, tau1);
    let c = spec.center[0] + spec.velocity[0] * tau1;
    let r = 14.0 / at.sqrt();
    // the kernel phase steepens away from x; resolve it across the packet
    let reach = (x - c).abs() + r;
    let step = (0.2 * hbar * tau2 / (spec.mass * reach)).min(0.05 / at.sqrt());
    let t2 = C64::new(tau2, 0.0);
    let f = |y: f64| green(&[x - y], t2, spec.mass, hbar) * continuum_packet(&[y, 0.0, 0.0], 1, tau1, spec, hbar);
    let q = Integrator::default().integrate(&f, &panels(c - r, c + r, step), &opts())?;
    let closed_form = continuum_packet(&[x, 0.0, 0.0], 1, tau1 + tau2, spec, hbar);
    Ok(Composition { quadrature: q.value, closed_form, error: (q.value - closed_form).norm() })
}
