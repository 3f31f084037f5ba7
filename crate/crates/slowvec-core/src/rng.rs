//! Seeded random streams.
//!
//! Every randomised routine in the crate draws from a [`SeedStream`], a thin
//! wrapper over ChaCha12 keyed by a `u64` seed.  Streams are deterministic
//! across platforms, and independent sub-streams are derived by salting the
//! parent seed, so parallel consumers never contend for a shared generator.

use alloc::vec::Vec;

use num_complex::Complex;
use rand_chacha::ChaCha12Rng;
use rand_core::{RngCore, SeedableRng};

use crate::linalg::{self, C64};
use crate::math;

/// Deterministic random stream with convenience draws for the numeric code.
pub struct SeedStream {
    rng: ChaCha12Rng,
}

impl SeedStream {
    /// Stream keyed by `seed` alone.
    pub fn new(seed: u64) -> Self {
        SeedStream { rng: ChaCha12Rng::seed_from_u64(seed) }
    }

    /// Independent stream derived from `seed` and a caller-chosen `salt`.
    ///
    /// Distinct salts give statistically independent streams, which keeps
    /// per-sample and per-instance work order-independent under parallelism.
    pub fn salted(seed: u64, salt: u64) -> Self {
        // SplitMix64 finalizer over the combined words: cheap, well mixed,
        // and collision-free for the small salt ranges used here.
        let mut z = seed ^ salt.wrapping_mul(0x9e37_79b9_7f4a_7c15);
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^= z >> 31;
        SeedStream::new(z)
    }

    /// Uniform draw from `[0, 1)` with 53 bits of precision.
    pub fn uniform(&mut self) -> f64 {
        (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Standard normal draw (Box–Muller).
    pub fn normal(&mut self) -> f64 {
        // 1 - u keeps the logarithm away from zero.
        let u = 1.0 - self.uniform();
        let v = self.uniform();
        math::sqrt(-2.0 * math::ln(u)) * math::cos(2.0 * core::f64::consts::PI * v)
    }

    /// Complex draw with independent standard-normal parts.
    pub fn complex_normal(&mut self) -> C64 {
        Complex::new(self.normal(), self.normal())
    }

    /// Uniformly random point on the unit circle.
    pub fn unit_phase(&mut self) -> C64 {
        let t = 2.0 * core::f64::consts::PI * self.uniform();
        Complex::new(math::cos(t), math::sin(t))
    }

    /// Vector of independent complex normal entries.
    pub fn complex_normal_vec(&mut self, n: usize) -> Vec<C64> {
        (0..n).map(|_| self.complex_normal()).collect()
    }

    /// Euclidean unit vector drawn uniformly from the sphere in `C^n`.
    pub fn unit_vector(&mut self, n: usize) -> Vec<C64> {
        loop {
            let mut v = self.complex_normal_vec(n);
            if linalg::normalize(&mut v) > 1e-100 {
                return v;
            }
        }
    }
}
