//! Deterministic random streams.
//!
//! Every stochastic choice in this crate (initial designs, acquisition
//! candidates, evaluator noise) draws from an [`RngStream`] so that runs are
//! reproducible bit for bit from a single `u64` seed, on any platform.
//!
//! The generator is SplitMix64 (Steele, Lea & Flood, OOPSLA 2014): a 64-bit
//! counter advanced by the odd constant `0x9E3779B97F4A7C15` per draw, with
//! each counter value passed through the MurmurHash3-style finalizer below.
//! The algorithm is spelled out here in full so that traces can be
//! regenerated by an independent implementation:
//!
//! ```text
//! state  = state + 0x9E3779B97F4A7C15                 (mod 2^64)
//! z      = state
//! z      = (z xor (z >> 30)) * 0xBF58476D1CE4E5B9     (mod 2^64)
//! z      = (z xor (z >> 27)) * 0x94D049BB133111EB     (mod 2^64)
//! output = z xor (z >> 31)
//! ```
//!
//! Floating-point draws take the top 53 bits of one output, giving uniform
//! values on `[0, 1)` with no platform-dependent rounding.

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 output finalizer.
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derive an independent stream seed from a base seed and a purpose tag.
///
/// Defined as `mix64(seed xor mix64(tag * 0x9E3779B97F4A7C15))`. Used to
/// split one experiment seed into decorrelated streams (search, evaluator
/// noise, testbed construction) without consuming draws from any of them.
pub fn derive_seed(seed: u64, tag: u64) -> u64 {
    mix64(seed ^ mix64(tag.wrapping_mul(GOLDEN_GAMMA)))
}

/// A seeded SplitMix64 stream.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RngStream {
    state: u64,
}

impl RngStream {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    /// Next raw 64-bit output.
    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN_GAMMA);
        mix64(self.state)
    }

    /// Uniform draw on `[0, 1)` with 53 bits of precision.
    pub fn next_f64(&mut self) -> f64 {
        const SCALE: f64 = 1.0 / (1u64 << 53) as f64;
        (self.next_u64() >> 11) as f64 * SCALE
    }

    /// Uniform draw on `[lo, hi)`.
    pub fn next_in(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }

    /// Uniform index in `0..n`. Consumes one draw.
    pub fn next_index(&mut self, n: usize) -> usize {
        debug_assert!(n > 0);
        let i = (self.next_f64() * n as f64) as usize;
        i.min(n - 1)
    }

    /// Standard normal draw via the Box-Muller transform.
    ///
    /// Consumes exactly two uniform draws per call; the sine half of the
    /// pair is discarded so the stream position stays easy to reason about.
    pub fn next_gaussian(&mut self) -> f64 {
        let mut u1 = self.next_f64();
        let u2 = self.next_f64();
        if u1 == 0.0 {
            u1 = f64::MIN_POSITIVE;
        }
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }
}
