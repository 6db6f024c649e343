//! Deterministic random streams.
//!
//! Every random draw in this crate goes through [`SplitMix64`], so any
//! result can be reproduced from a 64-bit seed alone, in any language,
//! without depending on a particular RNG library version. The generator
//! and all derived draws are fully specified here:
//!
//! * State update: `state += 0x9E3779B97F4A7C15`, output `mix64(state)`
//!   where `mix64` is the finalizer
//!   `z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9`,
//!   `z = (z ^ (z >> 27)) * 0x94D049BB133111EB`,
//!   `z ^ (z >> 31)` (all wrapping).
//! * `next_f64` maps the top 53 bits to `[0, 1)`: `(x >> 11) * 2^-53`.
//! * `bounded(n)` uses rejection sampling on `next_u64` (no modulo bias).
//! * `normal` is one Box-Muller transform consuming exactly two `next_u64`
//!   draws: `sqrt(-2 ln(1-u1)) * cos(2π u2)`.
//! * Sub-streams for trial `i` of seed `s` start from
//!   `mix64(s ^ mix64(i + 0x9E3779B97F4A7C15))`.

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

#[inline]
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// SplitMix64 pseudo-random generator.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    /// Derive the generator for sub-stream `index` of `seed`.
    ///
    /// Used for per-trial and per-seed streams so that trials are
    /// independent of each other and of execution order.
    pub fn substream(seed: u64, index: u64) -> Self {
        Self::new(mix64(seed ^ mix64(index.wrapping_add(GOLDEN_GAMMA))))
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN_GAMMA);
        mix64(self.state)
    }

    /// Uniform in `[0, 1)` with 53-bit resolution.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / 9_007_199_254_740_992.0)
    }

    /// Uniform in `[lo, hi)`.
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }

    /// Uniform integer in `[0, n)`, unbiased via rejection sampling.
    ///
    /// Accepts `x` only below the largest multiple of `n` that fits in
    /// 2^64; the expected number of draws is below 2 for any `n`.
    pub fn bounded(&mut self, n: u64) -> u64 {
        assert!(n > 0, "bounded(0) is undefined");
        // 2^64 mod n, computed without 128-bit arithmetic.
        let rem = (u64::MAX % n).wrapping_add(1) % n;
        loop {
            let x = self.next_u64();
            if rem == 0 || x < 0u64.wrapping_sub(rem) {
                return x % n;
            }
        }
    }

    /// Gaussian draw via Box-Muller; consumes exactly two `next_u64`.
    pub fn normal(&mut self, mean: f64, std_dev: f64) -> f64 {
        let u1 = 1.0 - self.next_f64(); // (0, 1], keeps ln finite
        let u2 = self.next_f64();
        mean + std_dev * (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }
}
