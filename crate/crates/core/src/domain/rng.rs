//! Seeded standard-normal stream used for reproducible samples.
//!
//! The generator is xoshiro256** seeded through SplitMix64 (the
//! `rand_xoshiro` `seed_from_u64` construction). Uniforms take the top
//! 53 bits of each output and are mapped to `(0, 1]`. Normals come in
//! pairs from the Box–Muller transform evaluated with the pure-Rust
//! `libm` routines, so the stream is bit-identical on every platform.

use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::Xoshiro256StarStar;

const TWO_POW_M53: f64 = 1.0 / (1u64 << 53) as f64;

pub struct NormalStream {
    rng: Xoshiro256StarStar,
    spare: Option<f64>,
}

impl NormalStream {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: Xoshiro256StarStar::seed_from_u64(seed),
            spare: None,
        }
    }

    /// Uniform on `(0, 1]`.
    pub fn next_uniform(&mut self) -> f64 {
        ((self.rng.next_u64() >> 11) + 1) as f64 * TWO_POW_M53
    }

    pub fn next_normal(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        let u1 = self.next_uniform();
        let u2 = self.next_uniform();
        let r = libm::sqrt(-2.0 * libm::log(u1));
        let theta = 2.0 * std::f64::consts::PI * u2;
        self.spare = Some(r * libm::sin(theta));
        r * libm::cos(theta)
    }
}
