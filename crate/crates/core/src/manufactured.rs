//! Analytic fields used to exercise the grid residuals.

use num_complex::Complex64;

use crate::algebra::Spinor;
use crate::fieldgrid::{Couplings, SpinorField};
use crate::lorentz::SpinTransform;
use crate::error::Result;

/// A free plane wave `amplitude * w * exp(-i (E t - p.x))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlaneWave {
    pub amplitude: Complex64,
    pub energy: f64,
    pub momentum: [f64; 3],
    pub spinor: Spinor,
}

/// Positive-energy amplitude with helicity `+1` or `-1` for momentum `p`:
/// `w = (sqrt(E + h|p|) chi, sqrt(E - h|p|) chi)` with `(p.tau) chi = h |p| chi`,
/// normalised to `w^dag w = 2E`.
pub fn plane_wave(momentum: [f64; 3], mass: f64, helicity: f64, amplitude: Complex64) -> PlaneWave {
    let [px, py, pz] = momentum;
    let p = (px * px + py * py + pz * pz).sqrt();
    let energy = (p * p + mass * mass).sqrt();
    let (theta, phi) = if p > 0.0 { ((pz / p).clamp(-1.0, 1.0).acos(), py.atan2(px)) } else { (0.0, 0.0) };
    let h = if helicity >= 0.0 { 1.0 } else { -1.0 };
    let chi = if h > 0.0 {
        [Complex64::new((0.5 * theta).cos(), 0.0), Complex64::from_polar((0.5 * theta).sin(), phi)]
    } else {
        [Complex64::from_polar(-(0.5 * theta).sin(), -phi), Complex64::new((0.5 * theta).cos(), 0.0)]
    };
    let a = (energy + h * p).sqrt();
    let b = (energy - h * p).max(0.0).sqrt();
    let spinor = Spinor::new(chi[0] * a, chi[1] * a, chi[0] * b, chi[1] * b);
    PlaneWave { amplitude, energy, momentum, spinor }
}

impl PlaneWave {
    pub fn at(&self, x: [f64; 4]) -> Spinor {
        let phase = -(self.energy * x[0]
            - self.momentum[0] * x[1]
            - self.momentum[1] * x[2]
            - self.momentum[2] * x[3]);
        self.spinor * (self.amplitude * Complex64::from_polar(1.0, phase))
    }
}

pub fn superpose(waves: &[PlaneWave], x: [f64; 4]) -> Spinor {
    waves.iter().fold(Spinor::zeros(), |acc, w| acc + w.at(x))
}

/// Field of a superposition of plane waves on a grid.
pub fn plane_wave_field(
    waves: &[PlaneWave],
    dims: [usize; 4],
    spacing: [f64; 4],
    origin: [f64; 4],
    couplings: Couplings,
) -> Result<SpinorField> {
    let waves = waves.to_vec();
    SpinorField::from_fn(dims, spacing, origin, couplings, move |x| superpose(&waves, x))
}

/// `exp(eps z / 2) S(boost_z(eps t)) (1, 0, 1, 0) / sqrt 2`: density
/// `exp(eps z)` with a frame that accelerates along `z`, on which
/// `omega_{300} = -eps cosh(eps t)` and the density-gradient and
/// frame-expansion relations hold exactly.
pub fn accelerated_density(eps: f64, x: [f64; 4]) -> Spinor {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let base = Spinor::new(
        Complex64::new(s, 0.0),
        Complex64::new(0.0, 0.0),
        Complex64::new(s, 0.0),
        Complex64::new(0.0, 0.0),
    );
    let boost = SpinTransform::boost(eps * x[0], 3).expect("axis 3");
    boost.apply(&base) * Complex64::from((0.5 * eps * x[3]).exp())
}
