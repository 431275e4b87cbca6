//! Reproducible random spinors.
//!
//! Sample `i` of seed `s` is drawn from ChaCha20 keyed by `seed_from_u64(s)`
//! on stream `i`, so every sample is independent of thread count and of how
//! many other samples are drawn. Normal deviates use Box-Muller on 53-bit
//! uniforms; each component is a standard complex normal (`E|z|^2 = 1`).

use num_complex::Complex64;
use rand_chacha::ChaCha20Rng;
use rand_core::{RngCore, SeedableRng};

use crate::algebra::{spinor_norm, Spinor};

pub struct SampleStream {
    rng: ChaCha20Rng,
    spare: Option<f64>,
}

impl SampleStream {
    pub fn new(seed: u64, index: u64) -> Self {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        rng.set_stream(index);
        Self { rng, spare: None }
    }

    /// Uniform on `(0, 1]`.
    pub fn uniform(&mut self) -> f64 {
        ((self.rng.next_u64() >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn normal(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        let u1 = self.uniform();
        let u2 = self.uniform();
        let r = (-2.0 * u1.ln()).sqrt();
        let t = 2.0 * std::f64::consts::PI * u2;
        self.spare = Some(r * t.sin());
        r * t.cos()
    }

    pub fn complex_normal(&mut self) -> Complex64 {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        Complex64::new(s * self.normal(), s * self.normal())
    }

    pub fn spinor(&mut self) -> Spinor {
        Spinor::new(
            self.complex_normal(),
            self.complex_normal(),
            self.complex_normal(),
            self.complex_normal(),
        )
    }
}

/// Spinor `index` of the stream with the given seed.
pub fn random_spinor(seed: u64, index: u64) -> Spinor {
    SampleStream::new(seed, index).spinor()
}

/// Same as [`random_spinor`] scaled to unit norm.
pub fn random_unit_spinor(seed: u64, index: u64) -> Spinor {
    let psi = random_spinor(seed, index);
    let n = spinor_norm(&psi);
    psi.map(|z| z / n)
}
