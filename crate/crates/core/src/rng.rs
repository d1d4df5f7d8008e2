//! Deterministic randomness.
//!
//! Every random draw in the crate comes from ChaCha8 (`rand_chacha::ChaCha8Rng`),
//! a counter-based generator: a `(seed, stream, word position)` triple fully
//! determines each output word, so results do not depend on evaluation order
//! or thread count. Child seeds are derived with the SplitMix64 finalizer.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub use rand_chacha::ChaCha8Rng as Rng;

/// Domain tags mixed into derived seeds.
pub mod tag {
    pub const SKETCH: u64 = 0x534b_4554_4348;
    pub const PLAN: u64 = 0x504c_414e;
    pub const PACKET: u64 = 0x5041_434b;
    pub const CHANNEL: u64 = 0x4348_414e;
    pub const CODEWORD: u64 = 0x434f_4445;
    pub const TRIAL: u64 = 0x5452_4941;
}

#[inline]
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derives a child seed from `(base, tag, index)`.
#[inline]
pub fn derive_seed(base: u64, tag: u64, index: u64) -> u64 {
    splitmix64(splitmix64(base ^ splitmix64(tag)).wrapping_add(index))
}

/// Generator for one seed, stream 0.
pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Generator for an independent numbered stream under one seed.
pub fn stream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Uniform index in `0..n` by multiply-shift; bias is below `n / 2^64`.
#[inline]
pub fn below(rng: &mut ChaCha8Rng, n: u64) -> u64 {
    ((rng.next_u64() as u128 * n as u128) >> 64) as u64
}

/// Uniform real in `[0, 1)` with 53 random bits.
#[inline]
pub fn unit(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Number of Bernoulli(`prob`) failures before the next success.
///
/// `prob` must be in `(0, 1)`. Saturates at `u64::MAX` for astronomically long gaps.
#[inline]
pub fn geometric_gap(rng: &mut ChaCha8Rng, ln_q: f64) -> u64 {
    // 1 - unit() lies in (0, 1], so ln is finite.
    let u = 1.0 - unit(rng);
    let g = (u.ln() / ln_q).floor();
    if g >= u64::MAX as f64 {
        u64::MAX
    } else {
        g as u64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derived_seeds_differ_by_tag_and_index() {
        let a = derive_seed(7, tag::SKETCH, 0);
        assert_ne!(a, derive_seed(7, tag::SKETCH, 1));
        assert_ne!(a, derive_seed(7, tag::PLAN, 0));
        assert_ne!(a, derive_seed(8, tag::SKETCH, 0));
        assert_eq!(a, derive_seed(7, tag::SKETCH, 0));
    }

    #[test]
    fn streams_are_independent_and_reproducible() {
        let mut a = stream(1, 3);
        let mut b = stream(1, 3);
        let mut c = stream(1, 4);
        let xs: Vec<u64> = (0..4).map(|_| a.next_u64()).collect();
        let ys: Vec<u64> = (0..4).map(|_| b.next_u64()).collect();
        let zs: Vec<u64> = (0..4).map(|_| c.next_u64()).collect();
        assert_eq!(xs, ys);
        assert_ne!(xs, zs);
    }

    #[test]
    fn below_covers_range() {
        let mut rng = seeded(0);
        let mut seen = [0u32; 5];
        for _ in 0..10_000 {
            seen[below(&mut rng, 5) as usize] += 1;
        }
        assert!(seen.iter().all(|&c| (1800..2200).contains(&c)), "{seen:?}");
        assert_eq!(below(&mut rng, 1), 0);
    }

    #[test]
    fn geometric_gap_mean() {
        let mut rng = seeded(11);
        let p: f64 = 0.1;
        let ln_q = (1.0 - p).ln();
        let n = 200_000;
        let mean = (0..n).map(|_| geometric_gap(&mut rng, ln_q) as f64).sum::<f64>() / n as f64;
        // E = (1-p)/p = 9, sd of the mean ~ sqrt(90)/sqrt(n) ~ 0.021
        assert!((mean - 9.0).abs() < 0.1, "{mean}");
    }
}
