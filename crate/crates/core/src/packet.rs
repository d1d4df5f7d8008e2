//! Packets and the binary symmetric channel.

use rand::RngCore;

use crate::bits::BitString;
use crate::error::{Error, Result};
use crate::rng::{self, Rng};

/// A packet of `l` bits. Its length is fixed at construction.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Packet {
    bits: BitString,
}

impl Packet {
    pub fn new(bits: BitString) -> Result<Self> {
        if bits.is_empty() {
            return Err(Error::InvalidLength("a packet needs at least one bit".into()));
        }
        Ok(Self { bits })
    }

    pub fn zeros(l: usize) -> Result<Self> {
        Self::new(BitString::zeros(l))
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.bits.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    /// The `i`-th bit, 1-based (`1..=len`).
    pub fn bit(&self, i: usize) -> Result<bool> {
        if i == 0 || i > self.len() {
            return Err(Error::OutOfRange(format!(
                "bit {i} of a {}-bit packet",
                self.len()
            )));
        }
        Ok(self.bits.get(i - 1))
    }

    #[inline]
    pub fn bits(&self) -> &BitString {
        &self.bits
    }

    pub fn into_bits(self) -> BitString {
        self.bits
    }
}

/// Binary symmetric channel with bit error rate `theta` in `[0, 0.5)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelParams {
    theta: f64,
    seed: u64,
}

impl ChannelParams {
    pub fn new(theta: f64, seed: u64) -> Result<Self> {
        if !(0.0..0.5).contains(&theta) {
            return Err(Error::InvalidParameter(format!(
                "bit error rate must lie in [0, 0.5), got {theta}"
            )));
        }
        Ok(Self { theta, seed })
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }
}

/// Packet of `l` independent fair bits drawn from `seed`.
pub fn generate_packet(l: usize, seed: u64) -> Result<Packet> {
    if l == 0 {
        return Err(Error::InvalidLength("packet length must be at least 1".into()));
    }
    let mut rng = rng::seeded(seed);
    let words = (0..l.div_ceil(64)).map(|_| rng.next_u64()).collect();
    Packet::new(BitString::from_words(words, l))
}

/// Flips each bit of `bits` independently with probability `theta`; returns
/// the number of flipped positions.
///
/// Error positions are drawn as geometric gaps, so the cost scales with the
/// number of flips rather than the length.
pub fn flip_bits(bits: &mut BitString, theta: f64, rng: &mut Rng) -> usize {
    if theta <= 0.0 || bits.is_empty() {
        return 0;
    }
    let ln_q = (-theta).ln_1p();
    let len = bits.len() as u64;
    let mut flips = 0;
    let mut pos = rng::geometric_gap(rng, ln_q);
    while pos < len {
        bits.flip(pos as usize);
        flips += 1;
        pos = pos.saturating_add(1).saturating_add(rng::geometric_gap(rng, ln_q));
    }
    flips
}

/// Sends `p` through the channel; returns the corrupted packet and the exact
/// number of flipped bits.
pub fn apply_bsc(p: &Packet, ch: &ChannelParams) -> (Packet, usize) {
    let mut bits = p.bits.clone();
    let mut rng = rng::seeded(ch.seed);
    let flips = flip_bits(&mut bits, ch.theta, &mut rng);
    (Packet { bits }, flips)
}

pub fn hamming_distance(a: &Packet, b: &Packet) -> Result<usize> {
    a.bits.hamming(&b.bits)
}
