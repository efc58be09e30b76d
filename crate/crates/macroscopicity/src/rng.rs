//! Seeded random-number generation for synthetic datasets and Monte Carlo
//! oracles: a reproducible stream cipher generator plus the few variate
//! transforms the crate needs.  Streams are deterministic functions of the
//! seed, independent of platform, so simulated datasets are byte-identical
//! across runs.

use rand::{Rng as _, SeedableRng};
use rand_chacha::ChaCha12Rng;

/// A seeded random stream.
pub struct SeededRng {
    inner: ChaCha12Rng,
    spare_normal: Option<f64>,
}

impl SeededRng {
    pub fn new(seed: u64) -> Self {
        Self {
            inner: ChaCha12Rng::seed_from_u64(seed),
            spare_normal: None,
        }
    }

    /// Uniform in [0, 1).
    pub fn uniform(&mut self) -> f64 {
        self.inner.gen::<f64>()
    }

    /// Standard normal deviate via the Box-Muller transform.
    pub fn normal(&mut self) -> f64 {
        if let Some(z) = self.spare_normal.take() {
            return z;
        }
        // 1 - u lies in (0, 1], keeping the logarithm finite.
        let u1 = 1.0 - self.uniform();
        let u2 = self.uniform();
        let r = (-2.0 * u1.ln()).sqrt();
        let (s, c) = (std::f64::consts::TAU * u2).sin_cos();
        self.spare_normal = Some(r * s);
        r * c
    }

    /// Index drawn with probability proportional to the given non-negative
    /// weights (which need not be normalized).
    pub fn categorical(&mut self, weights: &[f64]) -> usize {
        let total: f64 = weights.iter().sum();
        debug_assert!(total > 0.0 && total.is_finite());
        let mut u = self.uniform() * total;
        for (i, w) in weights.iter().enumerate() {
            u -= w;
            if u < 0.0 {
                return i;
            }
        }
        weights.len() - 1
    }

    /// Counts of `n` independent draws over the given outcome weights.
    pub fn multinomial(&mut self, n: u64, weights: &[f64]) -> Vec<u64> {
        let mut counts = vec![0u64; weights.len()];
        for _ in 0..n {
            counts[self.categorical(weights)] += 1;
        }
        counts
    }
}
