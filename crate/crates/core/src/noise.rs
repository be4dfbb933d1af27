//! Seeded measurement noise.
//!
//! Each frame (or each moment trial) is scaled by one Gaussian factor
//! `1 + relative_sigma * N(0, 1)`; camera frames also carry an additive
//! background level. Random streams are keyed by `(seed, stream)` so results
//! do not depend on evaluation order or thread count.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseModel {
    pub relative_sigma: f64,
    pub trials: usize,
    pub seed: u64,
    pub background_level: f64,
}

impl Default for NoiseModel {
    fn default() -> Self {
        Self { relative_sigma: 0.05, trials: 10, seed: 0, background_level: 0.0 }
    }
}

impl NoiseModel {
    pub fn new(relative_sigma: f64, trials: usize, seed: u64) -> Result<Self> {
        Self { relative_sigma, trials, seed, background_level: 0.0 }.validated()
    }

    pub fn with_background(mut self, level: f64) -> Result<Self> {
        self.background_level = level;
        self.validated()
    }

    pub fn validated(self) -> Result<Self> {
        if !(self.relative_sigma >= 0.0) || !self.relative_sigma.is_finite() {
            return Err(Error::InvalidParameter(format!("relative_sigma must be >= 0, got {}", self.relative_sigma)));
        }
        if self.trials == 0 {
            return Err(Error::InvalidParameter("trials must be >= 1".into()));
        }
        if !(self.background_level >= 0.0) || !self.background_level.is_finite() {
            return Err(Error::InvalidParameter(format!("background level must be >= 0, got {}", self.background_level)));
        }
        Ok(self)
    }

    /// Independent generator for one stream of this model's seed.
    pub fn rng(&self, stream: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(stream);
        rng
    }

    /// Same model with a seed derived from `(self.seed, index)`.
    pub fn for_point(&self, index: u64) -> NoiseModel {
        NoiseModel { seed: derive_seed(self.seed, index), ..*self }
    }

    pub fn gain<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let z: f64 = rng.sample(StandardNormal);
        1.0 + self.relative_sigma * z
    }

    /// Mean of `value * gain` over `trials` draws.
    pub fn averaged<R: Rng + ?Sized>(&self, value: f64, rng: &mut R) -> f64 {
        let sum: f64 = (0..self.trials).map(|_| value * self.gain(rng)).sum();
        sum / self.trials as f64
    }
}

/// Deterministic per-point seed.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(index.wrapping_add(1 << 32));
    rng.next_u64()
}
