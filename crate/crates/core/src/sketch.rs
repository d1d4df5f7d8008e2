//! The modified Odd sketch.
//!
//! Bin `i` holds an independent membership mask: each input position joins
//! the bin with probability `1/n`, independently of every other (bin,
//! position) pair. A sketch bit is the parity of the input's 1-bits that
//! fall inside the bin, so one sketch costs `n` AND + popcount passes.

use std::io::Read;

use crate::bits::BitString;
use crate::error::{Error, Result};
use crate::real::Real;
use crate::rng;

const SPEC_MAGIC: &[u8; 4] = b"OSK1";

/// Geometry of one Odd sketch function.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SketchSpec {
    n: usize,
    input_len: usize,
    seed: u64,
    masks: Vec<BitString>,
}

impl SketchSpec {
    /// Materializes `n` membership masks over `input_len` positions.
    ///
    /// Mask `i` is read from ChaCha8 stream `i` of `seed`, one 64-bit word per
    /// position, so the indicator for `(i, j)` depends only on `(seed, i, j)`.
    pub fn build(n: usize, input_len: usize, seed: u64) -> Result<Self> {
        if n == 0 || input_len == 0 {
            return Err(Error::InvalidParameter(format!(
                "sketch needs n >= 1 and input_len >= 1, got n={n}, input_len={input_len}"
            )));
        }
        let masks = (0..n)
            .map(|bin| {
                let mut rng = rng::stream(seed, bin as u64);
                let mut mask = BitString::zeros(input_len);
                for j in 0..input_len {
                    if rng::below(&mut rng, n as u64) == 0 {
                        mask.set(j, true);
                    }
                }
                mask
            })
            .collect();
        Ok(Self {
            n,
            input_len,
            seed,
            masks,
        })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn input_len(&self) -> usize {
        self.input_len
    }

    #[inline]
    pub fn seed(&self) -> u64 {
        self.seed
    }

    #[inline]
    pub fn masks(&self) -> &[BitString] {
        &self.masks
    }

    /// Identifier shared by every sketch built from this spec.
    pub fn id(&self) -> u64 {
        rng::derive_seed(self.seed, self.n as u64, self.input_len as u64)
    }

    pub fn sketch(&self, bits: &BitString) -> Result<OddSketch> {
        if bits.len() != self.input_len {
            return Err(Error::LengthMismatch {
                expected: self.input_len,
                actual: bits.len(),
            });
        }
        let mut out = BitString::zeros(self.n);
        for (i, mask) in self.masks.iter().enumerate() {
            if bits.and_parity(mask) {
                out.set(i, true);
            }
        }
        Ok(OddSketch {
            bits: out,
            spec_id: self.id(),
        })
    }

    /// Binary record: `"OSK1"`, `n: u32`, `input_len: u32`, `seed: u64`, then
    /// each mask as `ceil(input_len / 64)` little-endian `u64` words.
    pub fn to_bytes(&self) -> Vec<u8> {
        let words = self.input_len.div_ceil(64);
        let mut out = Vec::with_capacity(20 + self.n * words * 8);
        out.extend_from_slice(SPEC_MAGIC);
        out.extend_from_slice(&(self.n as u32).to_le_bytes());
        out.extend_from_slice(&(self.input_len as u32).to_le_bytes());
        out.extend_from_slice(&self.seed.to_le_bytes());
        for mask in &self.masks {
            for w in mask.words() {
                out.extend_from_slice(&w.to_le_bytes());
            }
        }
        out
    }

    /// Parses a record and checks that its masks are the ones its seed
    /// generates.
    pub fn from_bytes(mut bytes: &[u8]) -> Result<Self> {
        let bad = |reason: &str| Error::format("sketch spec", reason);
        let mut magic = [0u8; 4];
        bytes.read_exact(&mut magic).map_err(|_| bad("truncated header"))?;
        if &magic != SPEC_MAGIC {
            return Err(bad("bad magic"));
        }
        let mut u32b = [0u8; 4];
        let mut u64b = [0u8; 8];
        bytes.read_exact(&mut u32b).map_err(|_| bad("truncated header"))?;
        let n = u32::from_le_bytes(u32b) as usize;
        bytes.read_exact(&mut u32b).map_err(|_| bad("truncated header"))?;
        let input_len = u32::from_le_bytes(u32b) as usize;
        bytes.read_exact(&mut u64b).map_err(|_| bad("truncated header"))?;
        let seed = u64::from_le_bytes(u64b);
        let words = input_len.div_ceil(64);
        if bytes.len() != n * words * 8 {
            return Err(bad("mask payload length does not match header"));
        }
        let spec = Self::build(n, input_len, seed)?;
        // Byte comparison also rejects nonzero padding past `input_len`.
        if spec.to_bytes()[20..] != *bytes {
            return Err(bad("masks do not match their seed"));
        }
        Ok(spec)
    }
}

/// Bin membership of input position `pos` (0-based) under `(n, seed)`,
/// identical to bit `pos` of mask `bin` in [`SketchSpec::build`].
pub fn membership(n: usize, seed: u64, bin: usize, pos: usize) -> bool {
    let mut rng = rng::stream(seed, bin as u64);
    // Each indicator consumes one u64, i.e. two 32-bit ChaCha words.
    rng.set_word_pos(2 * pos as u128);
    rng::below(&mut rng, n as u64) == 0
}

/// Sketch bits of the set `ones` (0-based input positions) under `(n, seed)`,
/// evaluated indicator by indicator instead of materializing masks. Cheaper
/// than [`SketchSpec::build`] when the set is much smaller than the input.
pub fn sketch_sparse(n: usize, seed: u64, ones: &[usize]) -> Result<BitString> {
    if n == 0 {
        return Err(Error::InvalidParameter("n must be positive".into()));
    }
    let mut out = BitString::zeros(n);
    for bin in 0..n {
        let mut rng = rng::stream(seed, bin as u64);
        let mut parity = false;
        for &pos in ones {
            rng.set_word_pos(2 * pos as u128);
            parity ^= rng::below(&mut rng, n as u64) == 0;
        }
        if parity {
            out.set(bin, true);
        }
    }
    Ok(out)
}

pub fn build_spec(n: usize, input_len: usize, seed: u64) -> Result<SketchSpec> {
    SketchSpec::build(n, input_len, seed)
}

pub fn sketch(bits: &BitString, spec: &SketchSpec) -> Result<OddSketch> {
    spec.sketch(bits)
}

/// An `n`-bit Odd sketch tagged with the spec that produced it.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct OddSketch {
    bits: BitString,
    spec_id: u64,
}

impl OddSketch {
    pub fn from_bits(bits: BitString, spec: &SketchSpec) -> Result<Self> {
        if bits.len() != spec.n {
            return Err(Error::LengthMismatch {
                expected: spec.n,
                actual: bits.len(),
            });
        }
        Ok(Self {
            bits,
            spec_id: spec.id(),
        })
    }

    pub fn bits(&self) -> &BitString {
        &self.bits
    }

    pub fn spec_id(&self) -> u64 {
        self.spec_id
    }

    pub fn n(&self) -> usize {
        self.bits.len()
    }

    pub fn xor(&self, other: &OddSketch) -> Result<OddSketch> {
        if self.spec_id != other.spec_id {
            return Err(Error::SpecMismatch {
                left: self.spec_id,
                right: other.spec_id,
            });
        }
        Ok(OddSketch {
            bits: self.bits.xor(&other.bits)?,
            spec_id: self.spec_id,
        })
    }

    pub fn count_ones(&self) -> usize {
        self.bits.count_ones()
    }
}

pub fn xor(a: &OddSketch, b: &OddSketch) -> Result<OddSketch> {
    a.xor(b)
}

pub fn count_ones(s: &OddSketch) -> usize {
    s.count_ones()
}

/// Method-of-moments estimate of the symmetric difference size,
/// `-(n/2) ln(1 - 2z/n)`. Defined only for `z < n/2`.
pub fn mom_estimate<T: Real>(z: usize, n: usize) -> Result<T> {
    if n == 0 {
        return Err(Error::InvalidParameter("n must be positive".into()));
    }
    if 2 * z >= n {
        return Err(Error::Saturated { z, n });
    }
    let n_t = T::of_usize(n);
    let two = T::of(2.0);
    Ok(-(n_t / two) * (-(two * T::of_usize(z) / n_t)).ln_1p())
}

/// [`mom_estimate`] divided by the sampling rate `beta`.
pub fn mom_estimate_scaled<T: Real>(z: usize, n: usize, beta: T) -> Result<T> {
    if !(beta > T::zero() && beta <= T::one()) {
        return Err(Error::InvalidParameter(format!(
            "sampling rate must lie in (0, 1], got {beta}"
        )));
    }
    Ok(mom_estimate::<T>(z, n)? / beta)
}

#[cfg(test)]
pub(crate) fn random_bits(len: usize, rng: &mut rng::Rng) -> BitString {
    use rand::RngCore;
    let words = (0..len.div_ceil(64)).map(|_| rng.next_u64()).collect();
    BitString::from_words(words, len)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn build_rejects_zero_parameters() {
        assert!(matches!(build_spec(0, 10, 1), Err(Error::InvalidParameter(_))));
        assert!(matches!(build_spec(10, 0, 1), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn build_geometry_and_determinism() {
        let a = build_spec(96, 6000, 42).unwrap();
        assert_eq!(a.masks().len(), 96);
        assert!(a.masks().iter().all(|m| m.len() == 6000));
        assert_eq!(a, build_spec(96, 6000, 42).unwrap());
        assert_ne!(a, build_spec(96, 6000, 43).unwrap());
    }

    #[test]
    fn single_bin_includes_everything() {
        let s = build_spec(1, 77, 5).unwrap();
        assert_eq!(s.masks()[0].count_ones(), 77);
    }

    #[test]
    fn mask_density_is_one_over_n() {
        let s = build_spec(96, 6000, 7).unwrap();
        let ones: usize = s.masks().iter().map(|m| m.count_ones()).sum();
        let total: f64 = 96.0 * 6000.0;
        let p = 1.0 / 96.0;
        let sd = (total * p * (1.0 - p)).sqrt();
        assert!((ones as f64 - total * p).abs() < 3.0 * sd, "{ones}");
    }

    #[test]
    fn mask_prefix_is_stable_across_lengths() {
        // Indicator (i, j) depends on (seed, i, j) only.
        let short = build_spec(8, 100, 3).unwrap();
        let long = build_spec(8, 300, 3).unwrap();
        for (a, b) in short.masks().iter().zip(long.masks()) {
            assert_eq!(*a, b.slice(0, 100));
        }
    }

    #[test]
    fn sparse_evaluation_matches_materialized_masks() {
        let s = build_spec(12, 300, 21).unwrap();
        for (bin, mask) in s.masks().iter().enumerate() {
            for pos in [0, 1, 63, 64, 65, 299] {
                assert_eq!(membership(12, 21, bin, pos), mask.get(pos));
            }
        }
        let mut rng = rng::seeded(8);
        for _ in 0..20 {
            let x = random_bits(300, &mut rng);
            let sparse = sketch_sparse(12, 21, &x.ones_positions()).unwrap();
            assert_eq!(&sparse, s.sketch(&x).unwrap().bits());
        }
    }

    #[test]
    fn sketch_of_empty_set_is_zero() {
        let s = build_spec(16, 200, 1).unwrap();
        assert_eq!(s.sketch(&BitString::zeros(200)).unwrap().count_ones(), 0);
    }

    #[test]
    fn sketch_of_singleton_is_mask_column() {
        let s = build_spec(16, 200, 1).unwrap();
        for j in [0, 17, 199] {
            let mut x = BitString::zeros(200);
            x.set(j, true);
            let sk = s.sketch(&x).unwrap();
            for i in 0..16 {
                assert_eq!(sk.bits().get(i), s.masks()[i].get(j));
            }
        }
    }

    #[test]
    fn sketch_matches_per_bin_counting_loop() {
        let s = build_spec(16, 200, 9).unwrap();
        let mut rng = rng::seeded(4);
        for _ in 0..50 {
            let x = random_bits(200, &mut rng);
            let sk = s.sketch(&x).unwrap();
            for i in 0..16 {
                let mut count = 0;
                for j in 0..200 {
                    if x.get(j) && s.masks()[i].get(j) {
                        count += 1;
                    }
                }
                assert_eq!(sk.bits().get(i), count % 2 == 1);
            }
        }
    }

    #[test]
    fn sketch_rejects_wrong_length() {
        let s = build_spec(16, 200, 9).unwrap();
        assert!(matches!(
            s.sketch(&BitString::zeros(199)),
            Err(Error::LengthMismatch { .. })
        ));
    }

    #[test]
    fn xor_with_self_is_zero_and_specs_must_match() {
        let s = build_spec(32, 64, 1).unwrap();
        let t = build_spec(32, 64, 2).unwrap();
        let x = BitString::ones(64);
        let a = s.sketch(&x).unwrap();
        assert_eq!(a.xor(&a).unwrap().count_ones(), 0);
        let b = t.sketch(&x).unwrap();
        assert!(matches!(a.xor(&b), Err(Error::SpecMismatch { .. })));
    }

    #[test]
    fn xor_identity_on_random_pairs() {
        let s = build_spec(32, 500, 12).unwrap();
        let mut rng = rng::seeded(99);
        for _ in 0..100 {
            let x = random_bits(500, &mut rng);
            let y = random_bits(500, &mut rng);
            let lhs = s.sketch(&x).unwrap().xor(&s.sketch(&y).unwrap()).unwrap();
            assert_eq!(lhs, s.sketch(&x.xor(&y).unwrap()).unwrap());
        }
    }

    #[test]
    fn xor_identity_exhaustive_small() {
        // All pairs of 6-bit inputs under several 4-bin specs.
        for seed in 0..4 {
            let s = build_spec(4, 6, seed).unwrap();
            for x in 0u64..64 {
                for y in 0u64..64 {
                    let bx = BitString::from_words(vec![x], 6);
                    let by = BitString::from_words(vec![y], 6);
                    let bz = BitString::from_words(vec![x ^ y], 6);
                    let lhs = s.sketch(&bx).unwrap().xor(&s.sketch(&by).unwrap()).unwrap();
                    assert_eq!(lhs, s.sketch(&bz).unwrap());
                }
            }
        }
    }

    #[test]
    fn count_ones_extremes() {
        let s = build_spec(96, 10, 0).unwrap();
        let zero = OddSketch::from_bits(BitString::zeros(96), &s).unwrap();
        let full = OddSketch::from_bits(BitString::ones(96), &s).unwrap();
        assert_eq!(count_ones(&zero), 0);
        assert_eq!(count_ones(&full), 96);
    }

    #[test]
    fn mom_examples() {
        assert_eq!(mom_estimate::<f64>(0, 96).unwrap(), 0.0);
        let v: f64 = mom_estimate(24, 96).unwrap();
        assert!((v - 48.0 * 2f64.ln()).abs() < 1e-12);
        assert!((v - 33.27).abs() < 0.01);
        assert!(matches!(mom_estimate::<f64>(48, 96), Err(Error::Saturated { z: 48, n: 96 })));
        assert!(mom_estimate::<f64>(47, 96).is_ok());
    }

    #[test]
    fn mom_scaled_examples() {
        let a: f64 = mom_estimate_scaled(24, 96, 1.0).unwrap();
        assert_eq!(a, mom_estimate::<f64>(24, 96).unwrap());
        let b: f64 = mom_estimate_scaled(24, 96, 0.5).unwrap();
        assert!((b - 66.54).abs() < 0.01);
        assert_eq!(mom_estimate_scaled::<f64>(0, 96, 0.3).unwrap(), 0.0);
        assert!(matches!(
            mom_estimate_scaled::<f64>(1, 96, 0.0),
            Err(Error::InvalidParameter(_))
        ));
        assert!(mom_estimate_scaled::<f64>(1, 96, 1.5).is_err());
    }

    #[test]
    fn mom_is_monotone() {
        let vals: Vec<f64> = (0..48).map(|z| mom_estimate(z, 96).unwrap()).collect();
        assert!(vals.windows(2).all(|w| w[1] > w[0]));
        let single: Vec<f32> = (0..48).map(|z| mom_estimate(z, 96).unwrap()).collect();
        assert!(single.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn spec_record_round_trip_and_tamper_detection() {
        let s = build_spec(12, 130, 77).unwrap();
        let bytes = s.to_bytes();
        assert_eq!(&bytes[..4], b"OSK1");
        assert_eq!(bytes.len(), 20 + 12 * 3 * 8);
        assert_eq!(SketchSpec::from_bytes(&bytes).unwrap(), s);

        let mut tampered = bytes.clone();
        *tampered.last_mut().unwrap() ^= 0x01;
        assert!(SketchSpec::from_bytes(&tampered).is_err());
        assert!(SketchSpec::from_bytes(&bytes[..bytes.len() - 1]).is_err());
        assert!(SketchSpec::from_bytes(b"OSK2").is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn xor_identity_property(n in 1usize..=32, len in 1usize..=256, seed: u64, a: u64, b: u64) {
            let s = build_spec(n, len, seed).unwrap();
            let mut ra = rng::seeded(a);
            let mut rb = rng::seeded(b);
            let x = random_bits(len, &mut ra);
            let y = random_bits(len, &mut rb);
            let lhs = s.sketch(&x).unwrap().xor(&s.sketch(&y).unwrap()).unwrap();
            prop_assert_eq!(lhs, s.sketch(&x.xor(&y).unwrap()).unwrap());
        }
    }
}
