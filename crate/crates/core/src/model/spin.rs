use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{ModeIndex, ModeSpace, Role};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpinAxis {
    pub theta: f64,
    pub phi: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Updown {
    Up,
    Down,
}

impl SpinAxis {
    pub fn new(theta: f64, phi: f64) -> Self {
        Self { theta, phi }
    }

    pub fn z() -> Self {
        Self::new(0.0, 0.0)
    }

    /// Unit vector (sinθ cosφ, sinθ sinφ, cosθ).
    pub fn n(&self) -> [f64; 3] {
        let (st, ct) = self.theta.sin_cos();
        let (sp, cp) = self.phi.sin_cos();
        [st * cp, st * sp, ct]
    }

    /// Coefficients on spin labels (1, 2) of the rotated creator.
    pub fn coefficients(&self, which: Updown) -> [C64; 2] {
        let (s, c) = (self.theta / 2.0).sin_cos();
        let em = C64::from_polar(1.0, -self.phi / 2.0);
        let ep = C64::from_polar(1.0, self.phi / 2.0);
        match which {
            Updown::Up => [em * c, ep * s],
            Updown::Down => [-em * s, ep * c],
        }
    }
}

/// φ†_{n,i}(cell) as a combination of the label-1 and label-2 creators.
pub fn rotated_creator(
    space: &ModeSpace,
    species: usize,
    axis: &SpinAxis,
    which: Updown,
    cell: usize,
) -> Result<Vec<(C64, ModeIndex)>> {
    let spec = &space.species()[species];
    if spec.role != Role::System {
        return Err(Error::Species(format!("{} is not a spin system", spec.id)));
    }
    let u = axis.coefficients(which);
    Ok(vec![(u[0], space.mode(species, 1, cell)?), (u[1], space.mode(species, 2, cell)?)])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::SpeciesSpec;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    #[test]
    fn special_axes() {
        let sp = ModeSpace::new(vec![SpeciesSpec::system("S", 1.0), SpeciesSpec::observer("O", 1.0)], 1).unwrap();
        let up = rotated_creator(&sp, 0, &SpinAxis::z(), Updown::Up, 0).unwrap();
        assert_eq!(up[0].0, C64::new(1.0, 0.0));
        assert_eq!(up[1].0.norm(), 0.0);
        let flip = SpinAxis::new(PI, 0.0).coefficients(Updown::Up);
        assert!(flip[0].norm() < 1e-15 && (flip[1] - 1.0).norm() < 1e-15);
        let x = SpinAxis::new(PI / 2.0, 0.0).coefficients(Updown::Up);
        assert!((x[0].re - FRAC_1_SQRT_2).abs() < 1e-15 && (x[1].re - FRAC_1_SQRT_2).abs() < 1e-15);
        assert!(rotated_creator(&sp, 1, &SpinAxis::z(), Updown::Up, 0).is_err());
    }

    proptest! {
        #[test]
        fn rotation_is_unitary(theta in 0.0..PI, phi in 0.0..2.0 * PI) {
            let a = SpinAxis::new(theta, phi);
            let u = a.coefficients(Updown::Up);
            let d = a.coefficients(Updown::Down);
            let nn: f64 = a.n().iter().map(|x| x * x).sum();
            prop_assert!((nn - 1.0).abs() < 1e-12);
            prop_assert!((u[0].norm_sqr() + u[1].norm_sqr() - 1.0).abs() < 1e-12);
            prop_assert!((d[0].norm_sqr() + d[1].norm_sqr() - 1.0).abs() < 1e-12);
            prop_assert!((u[0].conj() * d[0] + u[1].conj() * d[1]).norm() < 1e-12);
            // ⟨σ⟩ in the up state reproduces n
            let sx = 2.0 * (u[0].conj() * u[1]).re;
            let sy = 2.0 * (u[0].conj() * u[1]).im;
            let sz = u[0].norm_sqr() - u[1].norm_sqr();
            let n = a.n();
            prop_assert!((sx - n[0]).abs() < 1e-12 && (sy - n[1]).abs() < 1e-12 && (sz - n[2]).abs() < 1e-12);
        }
    }
}
