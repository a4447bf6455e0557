//! Deterministic pseudo-random numbers.
//!
//! All randomness in the lab (eigensolver start blocks, random initial fields,
//! halfspace sampling) flows from a single `u64` seed through SplitMix64, so
//! identical configs produce byte-identical outputs on every platform.

use crate::scalar::Scalar;

#[derive(Debug, Clone)]
pub struct Rng {
    state: u64,
}

impl Rng {
    pub fn new(seed: u64) -> Self {
        Rng { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E3779B97F4A7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
        z ^ (z >> 31)
    }

    /// Uniform in [0, 1).
    pub fn uniform<S: Scalar>(&mut self) -> S {
        let v = (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64;
        S::of(v)
    }

    /// Uniform in (lo, hi), endpoints excluded by nudging.
    pub fn uniform_in<S: Scalar>(&mut self, lo: S, hi: S) -> S {
        let t: S = self.uniform();
        let t = t * S::of(0.999_998) + S::of(0.000_001);
        lo + (hi - lo) * t
    }

    pub fn index(&mut self, n: usize) -> usize {
        (self.next_u64() % n as u64) as usize
    }

    /// Fork a stream for a named sub-task; decorrelates without consuming state.
    pub fn fork(&self, tag: u64) -> Rng {
        Rng::new(self.state ^ tag.wrapping_mul(0x9E3779B97F4A7C15) ^ 0xD1B54A32D192ED03)
    }
}
