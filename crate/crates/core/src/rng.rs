//! Counter-based uniform random number generator.
//!
//! The generator is a keyed SplitMix64 finalizer over a (seed, stream,
//! counter) triple. Any draw can be computed out of order from its
//! coordinates, which lets the reference chains and the hardware simulator
//! consume identical noise regardless of instruction scheduling. Streams are
//! cheap: deriving a substream is a hash, not a state copy.

/// Stream ids shared between the reference chains and the simulator.
///
/// Streams `0..rv_count` carry the per-bin noise for the conditional
/// distribution of the matching random variable; each sampled bin advances
/// the stream counter by one. Two extra streams follow the per-RV block.
pub mod streams {
    /// Stream used for index-selection draws (one per scanned bin).
    pub fn selection(rv_count: usize) -> u64 {
        rv_count as u64
    }

    /// Stream used for accept/reject uniforms (one per decision).
    pub fn accept(rv_count: usize) -> u64 {
        rv_count as u64 + 1
    }

    /// Stream used for auxiliary draws (proposal picks etc.).
    pub fn aux(rv_count: usize) -> u64 {
        rv_count as u64 + 2
    }
}

const GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;
const STREAM_SALT: u64 = 0xA076_1D64_78BD_642F;

#[inline]
fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derive the per-stream key for a (seed, stream) pair.
#[inline]
pub fn stream_key(seed: u64, stream: u64) -> u64 {
    mix(seed ^ mix(stream ^ STREAM_SALT))
}

/// Random access to a single draw without constructing a generator.
#[inline]
pub fn draw_at(seed: u64, stream: u64, counter: u64) -> u64 {
    mix(stream_key(seed, stream).wrapping_add(counter.wrapping_mul(GAMMA)))
}

/// Map a raw 64-bit draw to a double in the open interval (0, 1).
///
/// Uses the top 52 bits plus a half offset so neither endpoint is
/// reachable (the offset stays exactly representable at this width);
/// `-ln(-ln(u))` stays finite for every raw word.
#[inline]
pub fn unit_open(raw: u64) -> f64 {
    ((raw >> 12) as f64 + 0.5) * (1.0 / 4_503_599_627_370_496.0)
}

/// Seedable, splittable uniform generator.
///
/// Identical seeds yield identical streams on every platform; the state is
/// just the draw counter.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UniformRng {
    key: u64,
    seed: u64,
    stream: u64,
    counter: u64,
}

impl UniformRng {
    /// Generator on stream 0 of `seed`.
    pub fn new(seed: u64) -> Self {
        Self::substream(seed, 0)
    }

    /// Generator on a named substream of `seed`.
    pub fn substream(seed: u64, stream: u64) -> Self {
        Self {
            key: stream_key(seed, stream),
            seed,
            stream,
            counter: 0,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    /// Number of draws consumed so far.
    pub fn counter(&self) -> u64 {
        self.counter
    }

    /// Reposition the draw counter (used by the simulator to access bins
    /// out of order).
    pub fn set_counter(&mut self, counter: u64) {
        self.counter = counter;
    }

    /// Advance the counter without producing a value.
    pub fn skip(&mut self, n: u64) {
        self.counter = self.counter.wrapping_add(n);
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        let v = mix(self.key.wrapping_add(self.counter.wrapping_mul(GAMMA)));
        self.counter = self.counter.wrapping_add(1);
        v
    }

    /// Uniform in [0, 1).
    #[inline]
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / 9_007_199_254_740_992.0)
    }

    /// Uniform in the open interval (0, 1).
    #[inline]
    pub fn next_open(&mut self) -> f64 {
        unit_open(self.next_u64())
    }

    /// Uniform `w`-bit integer, `1 <= w <= 64`. Takes the high bits of the
    /// raw word, matching the hardware URNG tap.
    #[inline]
    pub fn next_bits(&mut self, w: u32) -> u64 {
        debug_assert!(w >= 1 && w <= 64);
        self.next_u64() >> (64 - w)
    }

    /// Uniform index in [0, n).
    #[inline]
    pub fn next_index(&mut self, n: usize) -> usize {
        debug_assert!(n > 0);
        // 53-bit mantissa path keeps this exact for all n we use (< 2^32).
        (self.next_f64() * n as f64) as usize % n
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_seeds_identical_streams() {
        let mut a = UniformRng::new(42);
        let mut b = UniformRng::new(42);
        for _ in 0..1000 {
            assert_eq!(a.next_u64(), b.next_u64());
        }
    }

    #[test]
    fn distinct_streams_differ() {
        let mut a = UniformRng::substream(42, 0);
        let mut b = UniformRng::substream(42, 1);
        let same = (0..64).filter(|_| a.next_u64() == b.next_u64()).count();
        assert_eq!(same, 0);
    }

    #[test]
    fn random_access_matches_sequential() {
        let mut rng = UniformRng::substream(7, 3);
        let seq: Vec<u64> = (0..16).map(|_| rng.next_u64()).collect();
        for (i, v) in seq.iter().enumerate() {
            assert_eq!(draw_at(7, 3, i as u64), *v);
        }
    }

    #[test]
    fn open_interval_excludes_endpoints() {
        assert!(unit_open(0) > 0.0);
        assert!(unit_open(u64::MAX) < 1.0);
    }

    #[test]
    fn bits_are_in_range() {
        let mut rng = UniformRng::new(9);
        for _ in 0..200 {
            assert!(rng.next_bits(4) < 16);
        }
    }

    #[test]
    fn mean_is_roughly_half() {
        let mut rng = UniformRng::new(1234);
        let n = 100_000;
        let sum: f64 = (0..n).map(|_| rng.next_f64()).sum();
        let mean = sum / n as f64;
        assert!((mean - 0.5).abs() < 0.005, "mean {mean}");
    }
}
