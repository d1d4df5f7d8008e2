//! Packed bit strings.

use std::fmt;

use crate::error::{Error, Result};

const WORD: usize = 64;

/// A fixed-length bit string stored in 64-bit words, LSB-first within a word.
///
/// Bits past `len` in the last word are always zero.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitString {
    words: Vec<u64>,
    len: usize,
}

impl BitString {
    pub fn zeros(len: usize) -> Self {
        Self {
            words: vec![0; len.div_ceil(WORD)],
            len,
        }
    }

    pub fn ones(len: usize) -> Self {
        let mut s = Self {
            words: vec![u64::MAX; len.div_ceil(WORD)],
            len,
        };
        s.clear_tail();
        s
    }

    pub fn from_bools(bits: &[bool]) -> Self {
        let mut s = Self::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            if b {
                s.set(i, true);
            }
        }
        s
    }

    /// Builds from raw words; excess bits beyond `len` are cleared.
    pub fn from_words(mut words: Vec<u64>, len: usize) -> Self {
        words.resize(len.div_ceil(WORD), 0);
        let mut s = Self { words, len };
        s.clear_tail();
        s
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn words(&self) -> &[u64] {
        &self.words
    }

    /// Bit at 0-based index `i`.
    #[inline]
    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len, "bit index {i} out of range for length {}", self.len);
        (self.words[i / WORD] >> (i % WORD)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, value: bool) {
        assert!(i < self.len, "bit index {i} out of range for length {}", self.len);
        let mask = 1u64 << (i % WORD);
        if value {
            self.words[i / WORD] |= mask;
        } else {
            self.words[i / WORD] &= !mask;
        }
    }

    #[inline]
    pub fn flip(&mut self, i: usize) {
        assert!(i < self.len, "bit index {i} out of range for length {}", self.len);
        self.words[i / WORD] ^= 1u64 << (i % WORD);
    }

    #[inline]
    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Parity of `popcount(self AND mask)`.
    #[inline]
    pub fn and_parity(&self, mask: &BitString) -> bool {
        debug_assert_eq!(self.len, mask.len);
        let acc = self
            .words
            .iter()
            .zip(&mask.words)
            .fold(0u64, |acc, (a, b)| acc ^ (a & b));
        acc.count_ones() & 1 == 1
    }

    pub fn xor(&self, other: &BitString) -> Result<BitString> {
        self.check_len(other)?;
        let words = self
            .words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| a ^ b)
            .collect();
        Ok(BitString {
            words,
            len: self.len,
        })
    }

    pub fn hamming(&self, other: &BitString) -> Result<usize> {
        self.check_len(other)?;
        Ok(self
            .words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a ^ b).count_ones() as usize)
            .sum())
    }

    /// Copies bits `start..start + len` into a new string.
    pub fn slice(&self, start: usize, len: usize) -> BitString {
        assert!(start + len <= self.len);
        let mut out = BitString::zeros(len);
        for i in 0..len {
            if self.get(start + i) {
                out.set(i, true);
            }
        }
        out
    }

    pub fn concat<'a>(parts: impl IntoIterator<Item = &'a BitString>) -> BitString {
        let parts: Vec<&BitString> = parts.into_iter().collect();
        let mut out = BitString::zeros(parts.iter().map(|p| p.len).sum());
        let mut at = 0;
        for p in parts {
            for i in 0..p.len {
                if p.get(i) {
                    out.set(at + i, true);
                }
            }
            at += p.len;
        }
        out
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |i| self.get(i))
    }

    /// Indices of set bits, ascending.
    pub fn ones_positions(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.count_ones());
        for (w, &word) in self.words.iter().enumerate() {
            let mut bits = word;
            while bits != 0 {
                out.push(w * WORD + bits.trailing_zeros() as usize);
                bits &= bits - 1;
            }
        }
        out
    }

    /// Hex rendering, MSB-first within each byte: bit 0 is the high bit of
    /// the first byte. Padding bits in the last byte are zero.
    pub fn to_hex(&self) -> String {
        let mut out = String::with_capacity(self.len.div_ceil(8) * 2);
        for byte in 0..self.len.div_ceil(8) {
            let mut b = 0u8;
            for k in 0..8 {
                let i = byte * 8 + k;
                if i < self.len && self.get(i) {
                    b |= 0x80 >> k;
                }
            }
            out.push_str(&format!("{b:02x}"));
        }
        out
    }

    /// Inverse of [`BitString::to_hex`] for a string of `len` bits.
    pub fn from_hex(hex: &str, len: usize) -> Result<BitString> {
        let hex = hex.trim();
        let want = len.div_ceil(8) * 2;
        if hex.len() != want {
            return Err(Error::format(
                "hex bit string",
                format!("expected {want} hex digits for {len} bits, got {}", hex.len()),
            ));
        }
        let mut out = BitString::zeros(len);
        for byte in 0..len.div_ceil(8) {
            let b = u8::from_str_radix(&hex[2 * byte..2 * byte + 2], 16)
                .map_err(|e| Error::format("hex bit string", e.to_string()))?;
            for k in 0..8 {
                if b & (0x80 >> k) != 0 {
                    let i = byte * 8 + k;
                    if i >= len {
                        return Err(Error::format("hex bit string", "non-zero padding bits"));
                    }
                    out.set(i, true);
                }
            }
        }
        Ok(out)
    }

    fn check_len(&self, other: &BitString) -> Result<()> {
        if self.len != other.len {
            return Err(Error::LengthMismatch {
                expected: self.len,
                actual: other.len,
            });
        }
        Ok(())
    }

    fn clear_tail(&mut self) {
        let rem = self.len % WORD;
        if rem != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << rem) - 1;
            }
        }
    }
}

impl fmt::Debug for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.len <= 128 {
            let s: String = self.iter().map(|b| if b { '1' } else { '0' }).collect();
            write!(f, "BitString({s})")
        } else {
            write!(f, "BitString(len={}, ones={})", self.len, self.count_ones())
        }
    }
}
