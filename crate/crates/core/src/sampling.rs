//! Consistent bit sampling shared by sender and receiver.

use crate::bits::BitString;
use crate::error::{Error, Result};
use crate::packet::Packet;
use crate::real::Real;
use crate::rng;

/// The sampled bit positions for one resolution.
///
/// Positions are stored 0-based and sorted. When `l <= r` the plan is the
/// identity and every bit is used.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SamplingPlan {
    r: usize,
    l: usize,
    seed: u64,
    positions: Vec<usize>,
}

impl SamplingPlan {
    /// Draws `min(r, l)` distinct positions of `0..l` uniformly without
    /// replacement (partial Fisher-Yates), then sorts them.
    pub fn new(r: usize, l: usize, seed: u64) -> Result<Self> {
        if r == 0 || l == 0 {
            return Err(Error::InvalidParameter(format!(
                "sampling plan needs r >= 1 and l >= 1, got r={r}, l={l}"
            )));
        }
        let positions = if l <= r {
            (0..l).collect()
        } else {
            let mut rng = rng::seeded(seed);
            let mut pool: Vec<usize> = (0..l).collect();
            for i in 0..r {
                let j = i + rng::below(&mut rng, (l - i) as u64) as usize;
                pool.swap(i, j);
            }
            pool.truncate(r);
            pool.sort_unstable();
            pool
        };
        Ok(Self { r, l, seed, positions })
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn l(&self) -> usize {
        self.l
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Sampled positions, 0-based, ascending.
    pub fn positions(&self) -> &[usize] {
        &self.positions
    }

    /// Number of sampled bits, `min(r, l)`.
    pub fn sampled_len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_identity(&self) -> bool {
        self.positions.len() == self.l
    }

    /// Effective sampling rate `|positions| / l`.
    pub fn beta<T: Real>(&self) -> T {
        T::of_usize(self.positions.len()) / T::of_usize(self.l)
    }

    pub fn extract_bits(&self, bits: &BitString) -> Result<BitString> {
        if bits.len() != self.l {
            return Err(Error::LengthMismatch {
                expected: self.l,
                actual: bits.len(),
            });
        }
        if self.is_identity() {
            return Ok(bits.clone());
        }
        let mut out = BitString::zeros(self.positions.len());
        for (k, &pos) in self.positions.iter().enumerate() {
            if bits.get(pos) {
                out.set(k, true);
            }
        }
        Ok(out)
    }

    pub fn extract(&self, p: &Packet) -> Result<BitString> {
        self.extract_bits(p.bits())
    }
}

pub fn make_plan(r: usize, l: usize, seed: u64) -> Result<SamplingPlan> {
    SamplingPlan::new(r, l, seed)
}

pub fn extract(p: &Packet, plan: &SamplingPlan) -> Result<BitString> {
    plan.extract(p)
}

/// `r * theta_max / n <= 2/3`: the expected number of sampled errors at the
/// top of the BER range stays clear of saturation.
pub fn check_safety(r: usize, theta_max: f64, n: usize) -> bool {
    // Compare 3 r theta <= 2 n to keep the boundary exact.
    3.0 * r as f64 * theta_max <= 2.0 * n as f64
}
