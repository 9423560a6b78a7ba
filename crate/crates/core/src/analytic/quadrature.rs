//! Adaptive Gauss-Legendre quadrature for complex integrands.

use std::num::NonZeroUsize;

use gauss_quad::legendre::GaussLegendre;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug)]
pub struct QuadOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_depth: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self { abs_tol: 1e-10, rel_tol: 1e-12, max_depth: 30 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadResult {
    pub value: C64,
    pub error: f64,
}

pub struct Integrator {
    coarse: Vec<(f64, f64)>,
    fine: Vec<(f64, f64)>,
}

impl Default for Integrator {
    fn default() -> Self {
        Self::new(10)
    }
}

impl Integrator {
    /// Panel rule pair of `n` and `2n` nodes; the difference is the error
    /// estimate.
    pub fn new(n: usize) -> Self {
        let rule = |k: usize| GaussLegendre::new(NonZeroUsize::new(k).unwrap()).as_node_weight_pairs().to_vec();
        Self { coarse: rule(n), fine: rule(2 * n) }
    }

    fn panel(&self, f: &dyn Fn(f64) -> C64, a: f64, b: f64) -> (C64, C64) {
        let (h, m) = (0.5 * (b - a), 0.5 * (b + a));
        let eval = |rule: &[(f64, f64)]| rule.iter().map(|&(x, w)| f(m + h * x) * w).sum::<C64>() * h;
        (eval(&self.coarse), eval(&self.fine))
    }

    fn recurse(&self, f: &dyn Fn(f64) -> C64, a: f64, b: f64, tol: f64, depth: usize, out: &mut QuadResult) -> bool {
        let (lo, hi) = self.panel(f, a, b);
        let err = (hi - lo).norm();
        if err <= tol {
            out.value += hi;
            out.error += err;
            return true;
        }
        if depth == 0 {
            out.value += hi;
            out.error += err;
            return false;
        }
        let mid = 0.5 * (a + b);
        let l = self.recurse(f, a, mid, 0.5 * tol, depth - 1, out);
        let r = self.recurse(f, mid, b, 0.5 * tol, depth - 1, out);
        l && r
    }

    /// ∫ f over consecutive breakpoints, tolerance split evenly across panels.
    pub fn integrate(&self, f: &dyn Fn(f64) -> C64, breakpoints: &[f64], opts: &QuadOptions) -> Result<QuadResult> {
        let mut out = QuadResult { value: C64::new(0.0, 0.0), error: 0.0 };
        if breakpoints.len() < 2 {
            return Ok(out);
        }
        // rough magnitude for the relative part of the tolerance
        let mut scale = 0.0;
        for w in breakpoints.windows(2) {
            scale += self.panel(f, w[0], w[1]).1.norm();
        }
        let tol = opts.abs_tol.max(opts.rel_tol * scale);
        let per = tol / (breakpoints.len() - 1) as f64;
        let mut ok = true;
        for w in breakpoints.windows(2) {
            ok &= self.recurse(f, w[0], w[1], per, opts.max_depth, &mut out);
        }
        if !ok || !out.value.re.is_finite() || !out.value.im.is_finite() {
            return Err(Error::Quadrature { residual: out.error });
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaussian_and_oscillatory() {
        let q = Integrator::default();
        let opts = QuadOptions::default();
        let r = q.integrate(&|x: f64| C64::new((-x * x).exp(), 0.0), &[-10.0, 0.0, 10.0], &opts).unwrap();
        assert!((r.value.re - std::f64::consts::PI.sqrt()).abs() < 1e-10);
        // ∫_0^{20} e^{i x²} dx ≈ Fresnel; compare with fine splitting
        let f = |x: f64| C64::new(0.0, x * x).exp();
        let bp: Vec<f64> = (0..=200).map(|k| 0.1 * k as f64).collect();
        let a = q.integrate(&f, &[0.0, 20.0], &opts).unwrap().value;
        let b = q.integrate(&f, &bp, &opts).unwrap().value;
        assert!((a - b).norm() < 1e-9);
    }
}
