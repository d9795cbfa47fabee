//! Deterministic random number generation.
//!
//! Every random decision in a run flows from a single 64-bit seed. The
//! generator is a counter-based SplitMix64: drawing advances a counter and
//! hashes it, so streams can be split by deriving a fresh counter start from
//! the seed and a purpose tag. Strategies compared under the same seed
//! therefore see identical per-purpose streams and cannot perturb each other.

const GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

#[inline]
fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Independent stream labels carved out of one campaign seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Purpose {
    /// Fisher-Yates shuffles inside the randomized cover.
    Shuffle,
    /// Byte-level mutation of selected seeds.
    Mutation,
    /// Weighted-random sampling over the corpus.
    Sampling,
    /// Synthetic target generation.
    Generation,
}

/// Deterministic SplitMix64 generator.
#[derive(Debug, Clone)]
pub struct DetRng {
    state: u64,
}

impl DetRng {
    pub fn new(seed: u64) -> Self {
        DetRng { state: seed }
    }

    /// Derives the stream for one purpose from a campaign seed.
    pub fn for_purpose(seed: u64, purpose: Purpose) -> Self {
        let tag = (purpose as u64 + 1).wrapping_mul(GAMMA);
        DetRng {
            state: mix(seed ^ mix(tag)),
        }
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GAMMA);
        mix(self.state)
    }

    /// Uniform draw in `[0, n)`. Modulo bias is negligible for the small
    /// ranges used here (n far below 2^64).
    #[inline]
    pub fn below(&mut self, n: u64) -> u64 {
        assert!(n > 0, "below() requires a nonempty range");
        self.next_u64() % n
    }

    /// Bernoulli draw with probability `p`.
    pub fn chance(&mut self, p: f64) -> bool {
        let unit = (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
        unit < p
    }

    /// Draws `len` numbers in one go, for algorithms that want their whole
    /// random budget up front instead of calling the generator per element.
    pub fn batch(&mut self, len: usize) -> Vec<u64> {
        (0..len).map(|_| self.next_u64()).collect()
    }
}

/// Returns `0..count` in Fisher-Yates shuffled order. The random numbers are
/// drawn as a single batch before any swapping happens.
pub fn shuffled_indices(count: usize, rng: &mut DetRng) -> Vec<usize> {
    let draws = rng.batch(count);
    let mut order: Vec<usize> = (0..count).collect();
    for i in (1..count).rev() {
        let j = (draws[i] % (i as u64 + 1)) as usize;
        order.swap(i, j);
    }
    order
}
