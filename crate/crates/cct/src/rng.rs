//! Seedable, splittable 64-bit generator (SplitMix64).
//!
//! Chosen for cross-platform reproducibility: fixtures, the Monte-Carlo
//! oracle, and the simulator must replay bit-identically from a seed on any
//! target. Streams split deterministically by `(seed, stream index)`, so
//! replicates can be distributed across workers without changing the output.

/// SplitMix64 state.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

const GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

#[inline]
fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    /// Stream `index` of a base seed: state is `mix(seed) ^ mix(index * odd)`,
    /// which keeps distinct `(seed, index)` pairs on distinct trajectories.
    pub fn split(seed: u64, index: u64) -> Self {
        SplitMix64 {
            state: mix(seed) ^ mix(index.wrapping_mul(0xA3EC_6476_5935_9ACD) | 1),
        }
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GAMMA);
        mix(self.state)
    }

    /// Uniform draw from `[0, 1)` with 53 random bits.
    #[inline]
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform draw from `0..bound` (`bound > 0`) by rejection-free modulo of
    /// a 64-bit value; bias is negligible for the small bounds used here.
    #[inline]
    pub fn next_below(&mut self, bound: u64) -> u64 {
        debug_assert!(bound > 0);
        self.next_u64() % bound
    }
}
