//! Seeded draws of random states.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::spectral::SpectralField;

/// Deterministic sampler; identical seeds give identical draws on every platform.
#[derive(Clone, Debug)]
pub struct FieldSampler {
    rng: ChaCha8Rng,
}

impl FieldSampler {
    pub fn new(seed: u64) -> Self {
        Self { rng: ChaCha8Rng::seed_from_u64(seed) }
    }

    /// Coefficients `c_k = scale · U(-1, 1) / k`, so high modes carry less energy.
    pub fn uniform(&mut self, modes: usize, scale: f64) -> SpectralField {
        let coeffs = (1..=modes).map(|k| scale * self.rng.random_range(-1.0..=1.0) / k as f64).collect();
        SpectralField::new(coeffs)
    }

    /// A draw from [`uniform`](Self::uniform) rescaled to the given L² norm.
    pub fn with_norm(&mut self, modes: usize, norm: f64) -> SpectralField {
        loop {
            let u = self.uniform(modes, 1.0);
            let n = u.l2_norm();
            if n > 1e-8 {
                return u.scaled(norm / n);
            }
        }
    }

    /// A band-limited field that is nonnegative on the whole interval:
    /// a nonnegative combination of `e₁` and `sin(πx/L)(1 − cos(jπx/L)) ∝
    /// e₁ − ½(e_{j+1} − e_{j−1})`, each a product of two nonnegative factors.
    pub fn nonnegative(&mut self, modes: usize, scale: f64) -> SpectralField {
        let mut coeffs = vec![0.0; modes];
        coeffs[0] = scale * self.rng.random_range(0.0..=1.0);
        for j in 1..modes {
            let w = scale * self.rng.random_range(0.0..=1.0) / j as f64;
            coeffs[0] += w;
            coeffs[j] -= 0.5 * w;
            if j >= 2 {
                coeffs[j - 2] += 0.5 * w;
            }
        }
        SpectralField::new(coeffs)
    }

    pub fn scalar(&mut self, lo: f64, hi: f64) -> f64 {
        if lo == hi {
            lo
        } else {
            self.rng.random_range(lo..hi)
        }
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }
}
