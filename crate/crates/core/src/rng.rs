//! Seeded replica streams.
//!
//! A stream is identified by `(base_seed, stream_index)`. The pair is folded
//! into one 64-bit seed with the splitmix64 finalizer and expanded into a
//! ChaCha8 generator, so every replica owns an independent, reproducible
//! sequence of uniforms.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// splitmix64 output function.
#[inline]
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN_GAMMA);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Folds a base seed and a replica index into one stream seed.
#[inline]
pub fn mix_seed(base_seed: u64, stream_index: u64) -> u64 {
    splitmix64(base_seed ^ splitmix64(stream_index.wrapping_mul(GOLDEN_GAMMA)))
}

/// Maps 64 random bits to a uniform in `[0, 1)` with 53 bits of precision.
#[inline]
pub fn unit_f64(bits: u64) -> f64 {
    (bits >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

#[derive(Clone, Debug)]
pub struct RngStream {
    base_seed: u64,
    stream_index: u64,
    inner: ChaCha8Rng,
}

impl RngStream {
    pub fn new(base_seed: u64, stream_index: u64) -> Self {
        let inner = ChaCha8Rng::seed_from_u64(mix_seed(base_seed, stream_index));
        Self { base_seed, stream_index, inner }
    }

    pub fn base_seed(&self) -> u64 {
        self.base_seed
    }

    pub fn stream_index(&self) -> u64 {
        self.stream_index
    }

    /// The stream with the same base seed and a different replica index.
    pub fn sibling(&self, stream_index: u64) -> Self {
        Self::new(self.base_seed, stream_index)
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Next uniform in `[0, 1)`.
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        unit_f64(self.inner.next_u64())
    }
}

/// A counter-based uniform field `u(j, s)` over space-time.
///
/// Every cell update reads its own draw regardless of the state of its
/// neighbours, so runs at different α with the same field are pathwise
/// coupled: a cell is erased iff `u(j, s) < α`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct UniformField {
    key: u64,
}

impl UniformField {
    pub fn new(base_seed: u64, stream_index: u64) -> Self {
        Self { key: mix_seed(base_seed, stream_index) }
    }

    #[inline]
    pub fn at(&self, cell: i64, time: u64) -> f64 {
        let h = splitmix64(self.key ^ splitmix64(cell as u64) ^ time.rotate_left(32).wrapping_mul(GOLDEN_GAMMA));
        unit_f64(splitmix64(h))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec::Vec;

    #[test]
    fn same_pair_same_sequence() {
        let mut a = RngStream::new(42, 7);
        let mut b = RngStream::new(42, 7);
        for _ in 0..1000 {
            assert_eq!(a.next_u64(), b.next_u64());
        }
    }

    #[test]
    fn distinct_streams_share_no_prefix() {
        let firsts: Vec<u64> = (0..256).map(|k| RngStream::new(1, k).next_u64()).collect();
        for i in 0..firsts.len() {
            for j in i + 1..firsts.len() {
                assert_ne!(firsts[i], firsts[j], "streams {i} and {j}");
            }
        }
    }

    #[test]
    fn streams_look_uncorrelated() {
        let n = 20_000;
        let mut a = RngStream::new(9, 0);
        let mut b = RngStream::new(9, 1);
        let (mut sa, mut sb, mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for _ in 0..n {
            let (x, y) = (a.uniform(), b.uniform());
            sa += x;
            sb += y;
            sab += x * y;
            saa += x * x;
            sbb += y * y;
        }
        let nf = n as f64;
        let cov = sab / nf - (sa / nf) * (sb / nf);
        let var_a = saa / nf - (sa / nf) * (sa / nf);
        let var_b = sbb / nf - (sb / nf) * (sb / nf);
        let corr = cov / libm::sqrt(var_a * var_b);
        // 4.5 sigma for n = 20000
        assert!(corr.abs() < 0.032, "corr = {corr}");
        assert!((sa / nf - 0.5).abs() < 0.01);
    }

    #[test]
    fn uniforms_in_unit_interval() {
        assert_eq!(unit_f64(0), 0.0);
        assert!(unit_f64(u64::MAX) < 1.0);
        let f = UniformField::new(3, 4);
        for s in 0..50 {
            for j in -50..50 {
                let u = f.at(j, s);
                assert!((0.0..1.0).contains(&u));
                assert_eq!(u, f.at(j, s));
            }
        }
    }
}
