//! Massive narrow-wavepacket limit: entities ride classical trajectories,
//! only the joint internal state evolves. Gates are decided upstream from
//! trajectory separations versus apertures.

use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::model::{SpinAxis, Updown};

#[derive(Clone, Debug, PartialEq)]
pub enum MnKind {
    /// S1, S2 in the singlet; O1, O2, C ignorant.
    Eprb,
    /// One system with spin coefficients (b₁, b₂) and one observer.
    SingleObserver { spin: [C64; 2] },
}

#[derive(Clone, Debug, PartialEq)]
pub struct MnScenario {
    pub kind: MnKind,
    pub axes: [SpinAxis; 2],
    pub theta: f64,
    pub theta_c: f64,
    /// Measurement gates per wing (only wing 0 is used for a single observer).
    pub gates: [bool; 2],
    pub gate_c: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MnOutcome {
    /// P(observer p in awareness state i), indexed [p][i].
    pub observer: Vec<[f64; 2]>,
    /// P(C in state i); zero-length for the single-observer case.
    pub comparator: Option<[f64; 2]>,
    #[serde(skip)]
    pub state: Vec<C64>,
}

/// Joint internal vector with factors listed as (dim, offset bit). Bits:
/// EPRB uses s1 = bit 0, s2 = bit 1, o1 = bit 2, o2 = bit 3, c = bit 4;
/// single observer uses s = bit 0, o = bit 1. Spin bit 0 means label 1.
struct Joint {
    amps: Vec<C64>,
}

impl Joint {
    fn prob(&self, bit: usize, value: usize) -> f64 {
        self.amps.iter().enumerate().filter(|(i, _)| (i >> bit) & 1 == value).map(|(_, a)| a.norm_sqr()).sum()
    }

    /// Rotates `target` by R(angle) = exp(angle(|1⟩⟨0| − |0⟩⟨1|)) on the
    /// component selected by `control` (a 2×2 projector on `control_bit`,
    /// or a plain bit condition).
    fn controlled_rotation(&mut self, target: usize, angle: f64, control: &dyn Fn(usize) -> Vec<(usize, C64)>) {
        // split ψ = Pψ + (1−P)ψ, rotate the P part
        let n = self.amps.len();
        let mut p_part = vec![C64::new(0.0, 0.0); n];
        for (i, &a) in self.amps.iter().enumerate() {
            if a == C64::new(0.0, 0.0) {
                continue;
            }
            for (j, w) in control(i) {
                p_part[j] += w * a;
            }
        }
        let (s, c) = angle.sin_cos();
        let mut rotated = vec![C64::new(0.0, 0.0); n];
        for (i, &a) in p_part.iter().enumerate() {
            let flipped = i ^ (1 << target);
            if (i >> target) & 1 == 0 {
                rotated[i] += a * c;
                rotated[flipped] += a * s;
            } else {
                rotated[i] += a * c;
                rotated[flipped] -= a * s;
            }
        }
        for i in 0..n {
            self.amps[i] = self.amps[i] - p_part[i] + rotated[i];
        }
    }
}

fn spin_projector(axis: &SpinAxis, bit: usize) -> impl Fn(usize) -> Vec<(usize, C64)> {
    let u = axis.coefficients(Updown::Up);
    move |i: usize| {
        // (P)_{jk} = u_j u_k*, acting on the spin bit of basis index i
        let k = (i >> bit) & 1;
        (0..2).map(|j| ((i & !(1 << bit)) | (j << bit), u[j] * u[k].conj())).collect()
    }
}

/// Runs the measurement window with fraction `f_meas` of Θ and the
/// comparator window with fraction `f_comp` of Θ_C.
pub fn mn_run_partial(s: &MnScenario, f_meas: f64, f_comp: f64) -> MnOutcome {
    let z = C64::new(0.0, 0.0);
    match &s.kind {
        MnKind::Eprb => {
            let mut amps = vec![z; 32];
            let r = std::f64::consts::FRAC_1_SQRT_2;
            // (|1⟩|2⟩ − |2⟩|1⟩)/√2 on (s1, s2), observers and C in 0
            amps[0b10] = C64::new(r, 0.0);
            amps[0b01] = C64::new(-r, 0.0);
            let mut j = Joint { amps };
            for p in 0..2 {
                if s.gates[p] && f_meas > 0.0 {
                    j.controlled_rotation(2 + p, f_meas * s.theta, &spin_projector(&s.axes[p], p));
                }
            }
            if s.gate_c && f_comp > 0.0 {
                let both = |i: usize| if (i >> 2) & 1 == 1 && (i >> 3) & 1 == 1 { vec![(i, C64::new(1.0, 0.0))] } else { vec![] };
                j.controlled_rotation(4, f_comp * s.theta_c, &both);
            }
            MnOutcome {
                observer: (0..2).map(|p| [j.prob(2 + p, 0), j.prob(2 + p, 1)]).collect(),
                comparator: Some([j.prob(4, 0), j.prob(4, 1)]),
                state: j.amps,
            }
        }
        MnKind::SingleObserver { spin } => {
            let n = (spin[0].norm_sqr() + spin[1].norm_sqr()).sqrt();
            let mut amps = vec![z; 4];
            amps[0] = spin[0] / n;
            amps[1] = spin[1] / n;
            let mut j = Joint { amps };
            if s.gates[0] && f_meas > 0.0 {
                j.controlled_rotation(1, f_meas * s.theta, &spin_projector(&s.axes[0], 0));
            }
            MnOutcome { observer: vec![[j.prob(1, 0), j.prob(1, 1)]], comparator: None, state: j.amps }
        }
    }
}

pub fn mn_run(s: &MnScenario) -> MnOutcome {
    mn_run_partial(s, 1.0, 1.0)
}

/// sin²β·¼(1 − n₁·n₂)
pub fn comparator_closed_form(beta: f64, a: &SpinAxis, b: &SpinAxis) -> f64 {
    let (n1, n2) = (a.n(), b.n());
    let dot: f64 = n1.iter().zip(&n2).map(|(x, y)| x * y).sum();
    beta.sin().powi(2) * 0.25 * (1.0 - dot)
}
