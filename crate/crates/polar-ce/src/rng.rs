//! Deterministic RNG streams for Monte-Carlo trials.
//!
//! Each trial gets its own ChaCha stream derived from the master seed and a
//! counter triple, so trials can run on any number of threads in any order
//! and still reproduce bit-for-bit.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e3779b97f4a7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

/// Derive an independent stream from `(master, sweep point, trial, purpose)`.
pub fn derive_rng(master: u64, point: u64, trial: u64, purpose: u64) -> ChaCha12Rng {
    let mut state = master;
    for salt in [point, trial, purpose] {
        let mixed = splitmix64(&mut state);
        state ^= salt.wrapping_mul(0xd1342543de82ef95).wrapping_add(mixed);
    }
    let mut seed = [0u8; 32];
    for chunk in seed.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    ChaCha12Rng::from_seed(seed)
}

/// Circularly-symmetric complex Gaussian with zero mean and unit variance.
pub fn sample_cn01<R: Rng>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) / std::f64::consts::SQRT_2
}

/// Purpose tags for the per-trial streams.
pub mod stream {
    pub const PATHS: u64 = 1;
    pub const COMBINER: u64 = 2;
    pub const NOISE: u64 = 3;
    pub const BOOTSTRAP: u64 = 4;
}
