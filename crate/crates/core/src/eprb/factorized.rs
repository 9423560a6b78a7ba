//! Product-tensor lattice backend. Each species carries one quantum, so
//! the joint wavefunction is a short sum of per-wing tensors
//! Φ^s(x, o; y, σ) over the singlet's spin labels s. All interactions are
//! diagonal in position, which keeps the exact evolution factorized.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use super::density::DensityField;
use super::scenario::{ScenarioKind, ScenarioSpec};
use crate::error::{Error, Result};
use crate::evolution::{kinetic_time, FreeKernel, Group, StagePlan};
use crate::lattice::{add3, distance, Lattice};
use crate::model::{gate, SpinAxis, Updown};

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

fn fraction(tq: f64, a: f64, b: f64) -> f64 {
    if b > a {
        ((tq - a) / (b - a)).clamp(0.0, 1.0)
    } else {
        1.0
    }
}

fn apply(u: &DMatrix<C64>, v: &[C64]) -> Vec<C64> {
    let n = v.len();
    (0..n).map(|i| (0..n).map(|j| u[(i, j)] * v[j]).sum()).collect()
}

/// Gate matrix g(x, y) between two species' cells at time t.
fn gate_matrix(lattice: &Lattice, origin_a: &[f64; 3], origin_b: &[f64; 3], aperture: f64) -> Vec<Vec<usize>> {
    let n = lattice.cell_count();
    let pos_b: Vec<[f64; 3]> = (0..n).map(|y| add3(&lattice.center(y), origin_b)).collect();
    (0..n)
        .map(|x| {
            let px = add3(&lattice.center(x), origin_a);
            (0..n).filter(|&y| gate(distance(&px, &pos_b[y]), aperture)).collect()
        })
        .collect()
}

pub struct FactorizedEngine {
    spec: ScenarioSpec,
    plan: StagePlan,
    kernels: Vec<FreeKernel>,
    psi0: Vec<Vec<C64>>,
}

impl FactorizedEngine {
    pub fn new(spec: &ScenarioSpec) -> Result<Self> {
        let species = spec.species_list();
        let kernels = species.iter().map(|(_, p, _)| FreeKernel::new(&spec.lattice, p.mass, spec.hbar)).collect();
        let psi0 = (0..species.len()).map(|s| spec.spatial_amplitudes(s)).collect::<Result<_>>()?;
        Ok(Self { spec: spec.clone(), plan: spec.plan(), kernels, psi0 })
    }

    pub fn spec(&self) -> &ScenarioSpec {
        &self.spec
    }

    fn group(&self, s: usize) -> Group {
        self.spec.species_list()[s].2
    }

    /// Free amplitudes of species s after its kinetic time in [t_from, t_to].
    fn free_between(&self, s: usize, v: &[C64], t_from: f64, t_to: f64) -> Vec<C64> {
        let g = self.group(s);
        let dt = kinetic_time(&self.plan, g, t_to) - kinetic_time(&self.plan, g, t_from);
        if dt == 0.0 {
            return v.to_vec();
        }
        apply(&self.kernels[s].propagator(dt), v)
    }

    fn free_density(&self, s: usize, tq: f64) -> Vec<f64> {
        self.free_between(s, &self.psi0[s], self.spec.times.t0, tq).iter().map(|a| a.norm_sqr()).collect()
    }

    fn field(&self, s: usize, label: u8, tq: f64, values: Vec<f64>) -> DensityField {
        let id = &self.spec.species_list()[s].0.id;
        DensityField::new(id, label, tq, &self.spec.lattice, &self.spec.origin(s, tq), values)
    }

    /// Wing tensors Φ^s for s ∈ {label 1, label 2}, as L × 4L matrices with
    /// column index o·2L + 2y + σ, at a time tq ∈ [t₁, t₃].
    fn wing(&self, p: usize, tq: f64) -> [DMatrix<C64>; 2] {
        let (o, s) = self.spec.wing_species(p);
        let t = self.spec.times;
        let n = self.spec.lattice.cell_count();
        let po = self.free_between(o, &self.psi0[o], t.t0, t.t1);
        let ps = self.free_between(s, &self.psi0[s], t.t0, t.t1);
        let g = gate_matrix(&self.spec.lattice, &self.spec.origin(o, t.t1), &self.spec.origin(s, t.t1), self.spec.apertures[p]);
        let (sn, cs) = (fraction(tq, t.t1, t.t2) * self.plan.theta).sin_cos();
        let u = self.spec.axes[p].coefficients(Updown::Up);
        let dt = kinetic_time(&self.plan, Group::Observer, tq) - kinetic_time(&self.plan, Group::Observer, t.t1);
        let uo = (dt != 0.0).then(|| self.kernels[o].propagator(dt));
        [0usize, 1].map(|spin| {
            let mut phi = DMatrix::from_element(n, 4 * n, ZERO);
            for x in 0..n {
                for y in 0..n {
                    let amp = po[x] * ps[y];
                    if amp == ZERO {
                        continue;
                    }
                    phi[(x, 2 * y + spin)] += amp;
                }
                for &y in &g[x] {
                    let amp = po[x] * ps[y];
                    for sigma in 0..2 {
                        let w = amp * u[sigma] * u[spin].conj();
                        phi[(x, 2 * y + sigma)] += w * (cs - 1.0);
                        phi[(x, 2 * n + 2 * y + sigma)] += w * sn;
                    }
                }
            }
            match &uo {
                Some(u) => u * phi,
                None => phi,
            }
        })
    }

    fn single_spin(&self) -> [C64; 2] {
        let b = self.spec.spin;
        let n = (b[0].norm_sqr() + b[1].norm_sqr()).sqrt();
        [b[0] / n, b[1] / n]
    }

    /// Observer of wing p, both awareness labels, at tq ≤ t₃.
    pub fn observer_density(&self, p: usize, tq: f64) -> Result<[DensityField; 2]> {
        let (o, _) = self.spec.wing_species(p);
        let t = self.spec.times;
        let n = self.spec.lattice.cell_count();
        if tq > t.t3 && self.spec.kind == ScenarioKind::Eprb {
            return Err(Error::Precondition(format!("factorized observer density needs tq <= t3, got {tq}")));
        }
        if tq < t.t1 {
            return Ok([self.field(o, 0, tq, self.free_density(o, tq)), self.field(o, 1, tq, vec![0.0; n])]);
        }
        let w = self.wing(p, tq);
        let mut vals = [vec![0.0; n], vec![0.0; n]];
        let mut acc = |phi: &DMatrix<C64>, weight: f64| {
            for x in 0..n {
                for label in 0..2 {
                    let s: f64 = (0..2 * n).map(|c| phi[(x, label * 2 * n + c)].norm_sqr()).sum();
                    vals[label][x] += weight * s;
                }
            }
        };
        match self.spec.kind {
            ScenarioKind::Eprb => {
                acc(&w[0], 0.5);
                acc(&w[1], 0.5);
            }
            ScenarioKind::SingleObserver => {
                let b = self.single_spin();
                acc(&(w[0].map(|a| a * b[0]) + w[1].map(|a| a * b[1])), 1.0);
            }
        }
        let [v0, v1] = vals;
        Ok([self.field(o, 0, tq, v0), self.field(o, 1, tq, v1)])
    }

    /// Joint density p(y, 1; z, 1) of both observers aware at t₃, L × L.
    fn joint_aware(&self) -> DMatrix<f64> {
        let t3 = self.spec.times.t3;
        let n = self.spec.lattice.cell_count();
        let w = [self.wing(0, t3), self.wing(1, t3)];
        // M_p^{ss'}(y) = Σ_{w,σ} conj Φ^s(y,1,w,σ) Φ^{s'}(y,1,w,σ)
        let m: Vec<Vec<[[C64; 2]; 2]>> = w
            .iter()
            .map(|wing| {
                (0..n)
                    .map(|y| {
                        let mut mm = [[ZERO; 2]; 2];
                        for (a, row) in mm.iter_mut().enumerate() {
                            for (b, e) in row.iter_mut().enumerate() {
                                *e = (2 * n..4 * n).map(|c| wing[a][(y, c)].conj() * wing[b][(y, c)]).sum();
                            }
                        }
                        mm
                    })
                    .collect()
            })
            .collect();
        let eps = [1.0, -1.0];
        DMatrix::from_fn(n, n, |y, z| {
            let mut acc = ZERO;
            for s in 0..2 {
                for sp in 0..2 {
                    acc += eps[s] * eps[sp] * m[0][y][s][sp] * m[1][z][1 - s][1 - sp];
                }
            }
            0.5 * acc.re
        })
    }

    /// Comparator gate lists at t₃ and its amplitudes there.
    fn comparator_setup(&self) -> Result<(usize, Vec<C64>, [Vec<Vec<usize>>; 2])> {
        let c = self
            .spec
            .comparator_species()
            .ok_or_else(|| Error::Precondition("single-observer scenario has no comparator".into()))?;
        let t3 = self.spec.times.t3;
        let oc = self.spec.origin(c, t3);
        let g = [2usize, 3].map(|o| gate_matrix(&self.spec.lattice, &oc, &self.spec.origin(o, t3), self.spec.aperture_c));
        let psi = self.free_between(c, &self.psi0[c], self.spec.times.t0, t3);
        Ok((c, psi, g))
    }

    fn comparator_overlap(joint: &DMatrix<f64>, g: &[Vec<Vec<usize>>; 2], x: usize, xp: usize) -> f64 {
        let ys: Vec<usize> = g[0][x].iter().copied().filter(|y| g[0][xp].contains(y)).collect();
        let zs: Vec<usize> = g[1][x].iter().copied().filter(|z| g[1][xp].contains(z)).collect();
        ys.iter().map(|&y| zs.iter().map(|&z| joint[(y, z)]).sum::<f64>()).sum()
    }

    /// P(C aware) at tq ≥ t₃, without resolving positions.
    pub fn comparator_probability(&self, tq: f64) -> Result<f64> {
        let (_, psi, g) = self.comparator_setup()?;
        let t = self.spec.times;
        if tq < t.t3 {
            return Ok(0.0);
        }
        let beta = fraction(tq, t.t3, t.t4) * self.plan.theta_c;
        let joint = self.joint_aware();
        let s2 = beta.sin().powi(2);
        Ok((0..psi.len()).map(|x| psi[x].norm_sqr() * Self::comparator_overlap(&joint, &g, x, x)).sum::<f64>() * s2)
    }

    /// Comparator, both labels, at any tq.
    pub fn comparator_density(&self, tq: f64) -> Result<[DensityField; 2]> {
        let (c, psi, g) = self.comparator_setup()?;
        let t = self.spec.times;
        let n = psi.len();
        if tq < t.t3 {
            return Ok([self.field(c, 0, tq, self.free_density(c, tq)), self.field(c, 1, tq, vec![0.0; n])]);
        }
        let beta = fraction(tq, t.t3, t.t4) * self.plan.theta_c;
        let (sb, cb) = beta.sin_cos();
        let joint = self.joint_aware();
        let k = DMatrix::from_fn(n, n, |x, xp| Self::comparator_overlap(&joint, &g, x, xp));
        let outer = DMatrix::from_fn(n, n, |x, xp| psi[x] * psi[xp].conj());
        let rho1 = DMatrix::from_fn(n, n, |x, xp| outer[(x, xp)] * sb * sb * k[(x, xp)]);
        let rho0 = DMatrix::from_fn(n, n, |x, xp| {
            outer[(x, xp)] * (1.0 + (cb - 1.0) * (k[(x, x)] + k[(xp, xp)]) + (cb - 1.0).powi(2) * k[(x, xp)])
        });
        let dt = kinetic_time(&self.plan, Group::Comparator, tq) - kinetic_time(&self.plan, Group::Comparator, t.t3);
        let diag = |rho: DMatrix<C64>| -> Vec<f64> {
            let r = if dt != 0.0 {
                let u = self.kernels[c].propagator(dt);
                &u * rho * u.adjoint()
            } else {
                rho
            };
            (0..n).map(|x| r[(x, x)].re.max(0.0)).collect()
        };
        Ok([self.field(c, 0, tq, diag(rho0)), self.field(c, 1, tq, diag(rho1))])
    }
}

/// n₂ at relative angle θ₁₂ from n₁ in the meridian plane of n₁.
pub fn relative_axis(n1: &SpinAxis, theta12: f64) -> SpinAxis {
    let mut th = (n1.theta + theta12).rem_euclid(2.0 * std::f64::consts::PI);
    let mut phi = n1.phi;
    if th > std::f64::consts::PI {
        th = 2.0 * std::f64::consts::PI - th;
        phi += std::f64::consts::PI;
    }
    SpinAxis::new(th, phi.rem_euclid(2.0 * std::f64::consts::PI))
}
