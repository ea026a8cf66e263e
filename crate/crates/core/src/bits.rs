//! Fixed-width bit strings.
//!
//! Bit `i` of a [`BitString`] is the coefficient of `x^i` when the string is
//! read as a polynomial over GF(2). Serialized forms are big-endian, most
//! significant bit first.

use std::fmt;

/// A bit string of known length stored in little-endian 64-bit limbs.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct BitString {
    len: usize,
    words: Vec<u64>,
}

fn words_for(len: usize) -> usize {
    len.div_ceil(64)
}

impl BitString {
    pub fn zeros(len: usize) -> Self {
        BitString {
            len,
            words: vec![0; words_for(len)],
        }
    }

    /// Low `len` bits of `value`. Panics if `len > 64`.
    pub fn from_u64(value: u64, len: usize) -> Self {
        assert!(len <= 64, "from_u64 supports at most 64 bits");
        let mut s = Self::zeros(len);
        if len > 0 {
            s.words[0] = value;
            s.mask_tail();
        }
        s
    }

    /// Build from limbs; bits above `len` are cleared.
    pub fn from_words(mut words: Vec<u64>, len: usize) -> Self {
        words.resize(words_for(len), 0);
        let mut s = BitString { len, words };
        s.mask_tail();
        s
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    /// Value as an integer; `None` when the string is wider than 64 bits.
    pub fn to_u64(&self) -> Option<u64> {
        match self.len {
            0 => Some(0),
            1..=64 => Some(self.words[0]),
            _ => None,
        }
    }

    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len, "bit index {i} out of range {}", self.len);
        (self.words[i / 64] >> (i % 64)) & 1 == 1
    }

    pub fn set(&mut self, i: usize, bit: bool) {
        assert!(i < self.len, "bit index {i} out of range {}", self.len);
        let mask = 1u64 << (i % 64);
        if bit {
            self.words[i / 64] |= mask;
        } else {
            self.words[i / 64] &= !mask;
        }
    }

    pub fn flip(&mut self, i: usize) {
        assert!(i < self.len, "bit index {i} out of range {}", self.len);
        self.words[i / 64] ^= 1u64 << (i % 64);
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    /// XOR of two equal-length strings.
    pub fn xor(&self, other: &BitString) -> BitString {
        assert_eq!(self.len, other.len, "xor of unequal lengths");
        let words = self
            .words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| a ^ b)
            .collect();
        BitString {
            len: self.len,
            words,
        }
    }

    pub fn xor_assign(&mut self, other: &BitString) {
        assert_eq!(self.len, other.len, "xor of unequal lengths");
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
    }

    pub fn hamming_distance(&self, other: &BitString) -> usize {
        assert_eq!(self.len, other.len, "hamming distance of unequal lengths");
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a ^ b).count_ones() as usize)
            .sum()
    }

    /// Bits `[start, start + len)` as a new string.
    pub fn slice(&self, start: usize, len: usize) -> BitString {
        assert!(start + len <= self.len, "slice out of range");
        let mut out = BitString::zeros(len);
        if len == 0 {
            return out;
        }
        let shift = start % 64;
        let first = start / 64;
        for (w, slot) in out.words.iter_mut().enumerate() {
            let lo = self.words.get(first + w).copied().unwrap_or(0) >> shift;
            let hi = if shift == 0 {
                0
            } else {
                self.words.get(first + w + 1).copied().unwrap_or(0) << (64 - shift)
            };
            *slot = lo | hi;
        }
        out.mask_tail();
        out
    }

    /// Low `n` bits.
    pub fn truncate(&self, n: usize) -> BitString {
        self.slice(0, n)
    }

    /// `self` in the low bits followed by `other` above it.
    pub fn concat(&self, other: &BitString) -> BitString {
        let mut out = BitString::zeros(self.len + other.len);
        out.words[..self.words.len()].copy_from_slice(&self.words);
        out.write_at(self.len, other);
        out
    }

    /// Overwrite bits starting at `offset` with `src`.
    pub fn write_at(&mut self, offset: usize, src: &BitString) {
        assert!(offset + src.len <= self.len, "write out of range");
        let shift = offset % 64;
        let first = offset / 64;
        let mut remaining = src.len;
        for (w, &word) in src.words.iter().enumerate() {
            let take = remaining.min(64);
            remaining -= take;
            let mask = if take == 64 { u64::MAX } else { (1u64 << take) - 1 };
            let (word, idx) = (word & mask, first + w);
            self.words[idx] = (self.words[idx] & !(mask << shift)) | (word << shift);
            if shift != 0 && shift + take > 64 {
                let spill = 64 - shift;
                self.words[idx + 1] = (self.words[idx + 1] & !(mask >> spill)) | (word >> spill);
            }
        }
    }

    /// Big-endian bytes, MSB first, left-padded with zero bits to a whole byte.
    pub fn to_bytes_be(&self) -> Vec<u8> {
        let nbytes = self.len.div_ceil(8);
        (0..nbytes)
            .rev()
            .map(|b| {
                let word = self.words.get(b / 8).copied().unwrap_or(0);
                (word >> ((b % 8) * 8)) as u8
            })
            .collect()
    }

    pub fn from_bytes_be(bytes: &[u8], len: usize) -> BitString {
        let mut words = vec![0u64; words_for(len).max(words_for(bytes.len() * 8))];
        for (i, &byte) in bytes.iter().rev().enumerate() {
            words[i / 8] |= (byte as u64) << ((i % 8) * 8);
        }
        BitString::from_words(words, len)
    }

    /// Bits as `0`/`1` characters, most significant first.
    pub fn to_bit_chars(&self) -> String {
        (0..self.len)
            .rev()
            .map(|i| if self.get(i) { '1' } else { '0' })
            .collect()
    }

    fn mask_tail(&mut self) {
        let rem = self.len % 64;
        if rem != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << rem) - 1;
            }
        }
    }
}

impl fmt::Debug for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitString({}b:{})", self.len, self.to_bit_chars())
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_bit_chars())
    }
}

/// Appends bits into a packed buffer, MSB-first per byte.
#[derive(Default)]
pub(crate) struct BytePacker {
    bytes: Vec<u8>,
    used: usize,
}

impl BytePacker {
    pub(crate) fn push(&mut self, bits: &BitString) {
        for i in (0..bits.len()).rev() {
            if self.used % 8 == 0 {
                self.bytes.push(0);
            }
            if bits.get(i) {
                let last = self.bytes.last_mut().expect("pushed above");
                *last |= 0x80 >> (self.used % 8);
            }
            self.used += 1;
        }
    }

    pub(crate) fn finish(self) -> Vec<u8> {
        self.bytes
    }
}

/// Reads bits MSB-first per byte, inverse of [`BytePacker`].
pub(crate) struct ByteUnpacker<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> ByteUnpacker<'a> {
    pub(crate) fn new(bytes: &'a [u8]) -> Self {
        ByteUnpacker { bytes, pos: 0 }
    }

    pub(crate) fn take(&mut self, len: usize) -> Option<BitString> {
        if self.pos + len > self.bytes.len() * 8 {
            return None;
        }
        let mut out = BitString::zeros(len);
        for i in (0..len).rev() {
            let byte = self.bytes[self.pos / 8];
            if byte & (0x80 >> (self.pos % 8)) != 0 {
                out.set(i, true);
            }
            self.pos += 1;
        }
        Some(out)
    }
}
