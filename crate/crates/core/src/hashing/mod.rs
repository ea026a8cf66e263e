//! Affine strongly universal hashing over GF(2^a).
//!
//! A [`HashKey`] is a field multiplier plus a `t`-bit offset. The tag of an
//! `a`-bit message `m` is the low `t` bits of `multiplier · m` XOR `offset`,
//! which makes the family ε-ASU₂ with `ε = 2^-t`.

mod field;

use std::fmt;

use rand::Rng;
use serde::Serialize;

use crate::bits::BitString;
use crate::error::{Error, Result};

pub use field::{find_irreducible, GaloisField};

/// Identifier of a signature key: which recipient's block it was issued in
/// and its slot within that block. Orders origin-major, slot-minor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct KeyId {
    pub origin: u32,
    pub slot: u32,
}

impl KeyId {
    pub fn new(origin: u32, slot: u32) -> Self {
        KeyId { origin, slot }
    }

    /// Position in the canonical signature order when each origin block
    /// holds `block_len` slots.
    pub fn canonical_index(&self, block_len: u64) -> u64 {
        self.origin as u64 * block_len + self.slot as u64
    }
}

impl fmt::Display for KeyId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.origin, self.slot)
    }
}

/// Slot number encoded in exactly `width` bits.
pub fn encode_slot(slot: u32, width: u32) -> BitString {
    assert!(width <= 64, "slot ids wider than 64 bits are not supported");
    assert!(width >= 32 || slot < (1u32 << width), "slot {slot} does not fit in {width} bits");
    BitString::from_u64(slot as u64, width as usize)
}

pub fn decode_slot(bits: &BitString) -> u32 {
    bits.to_u64().expect("slot ids fit in 64 bits") as u32
}

/// One member of the hash family.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct HashKey {
    pub multiplier: BitString,
    pub offset: BitString,
}

impl HashKey {
    /// Split `a + t` raw key bits: multiplier in the low `a`, offset above.
    pub fn from_bits(bits: &BitString, a: u32, t: u32) -> Result<HashKey> {
        let want = (a + t) as usize;
        if bits.len() != want {
            return Err(Error::WidthMismatch {
                what: "hash key",
                expected: want,
                actual: bits.len(),
            });
        }
        Ok(HashKey {
            multiplier: bits.slice(0, a as usize),
            offset: bits.slice(a as usize, t as usize),
        })
    }

    pub fn to_bits(&self) -> BitString {
        self.multiplier.concat(&self.offset)
    }

    pub fn random<R: Rng + ?Sized>(rng: &mut R, a: u32, t: u32) -> HashKey {
        let draw = |rng: &mut R, len: u32| {
            let words = (0..(len as usize).div_ceil(64)).map(|_| rng.gen()).collect();
            BitString::from_words(words, len as usize)
        };
        HashKey {
            multiplier: draw(rng, a),
            offset: draw(rng, t),
        }
    }
}

impl fmt::Debug for HashKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "HashKey({} | {})", self.multiplier, self.offset)
    }
}

/// A `t`-bit hash value.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Tag(pub BitString);

impl Tag {
    pub fn bits(&self) -> &BitString {
        &self.0
    }
}

/// The hash family for fixed message length `a` and tag length `t`.
#[derive(Debug, Clone)]
pub struct HashFamily {
    field: GaloisField,
    tag_len: u32,
}

impl HashFamily {
    pub fn new(msg_len: u32, tag_len: u32) -> Result<HashFamily> {
        if !(1..=4096).contains(&msg_len) {
            return Err(Error::invalid("a", format!("must be in 1..=4096, got {msg_len}")));
        }
        if tag_len < 1 || tag_len > msg_len {
            return Err(Error::invalid("t", format!("must be in 1..=a ({msg_len}), got {tag_len}")));
        }
        Ok(HashFamily {
            field: GaloisField::new(msg_len),
            tag_len,
        })
    }

    pub fn msg_len(&self) -> u32 {
        self.field.degree()
    }

    pub fn tag_len(&self) -> u32 {
        self.tag_len
    }

    pub fn field(&self) -> &GaloisField {
        &self.field
    }

    pub fn tag(&self, key: &HashKey, message: &BitString) -> Result<Tag> {
        let a = self.msg_len() as usize;
        let t = self.tag_len as usize;
        for (what, expected, actual) in [
            ("message", a, message.len()),
            ("key multiplier", a, key.multiplier.len()),
            ("key offset", t, key.offset.len()),
        ] {
            if expected != actual {
                return Err(Error::WidthMismatch {
                    what,
                    expected,
                    actual,
                });
            }
        }
        if a <= 64 {
            let product = self.field.mul_u64(key.multiplier.words()[0], message.words()[0]);
            let mask = if t == 64 { u64::MAX } else { (1u64 << t) - 1 };
            let value = (product & mask) ^ key.offset.words()[0];
            return Ok(Tag(BitString::from_u64(value, t)));
        }
        let product = self.field.mul(&key.multiplier, message);
        Ok(Tag(product.truncate(t).xor(&key.offset)))
    }
}

/// Tag of `message` under `key`, building the field for `a = |message|`.
pub fn make_tag(key: &HashKey, message: &BitString, t: u32) -> Result<Tag> {
    if t as usize > message.len() {
        return Err(Error::WidthMismatch {
            what: "tag (t <= a)",
            expected: message.len(),
            actual: t as usize,
        });
    }
    HashFamily::new(message.len() as u32, t)?.tag(key, message)
}

/// Tags for every key, returned in canonical [`KeyId`] order.
pub fn batch_tags(
    family: &HashFamily,
    keys: &[(KeyId, HashKey)],
    message: &BitString,
) -> Result<Vec<(KeyId, Tag)>> {
    let mut order: Vec<&(KeyId, HashKey)> = keys.iter().collect();
    order.sort_by_key(|(id, _)| *id);
    if let Some(w) = order.windows(2).find(|w| w[0].0 == w[1].0) {
        return Err(Error::DuplicateKeyId {
            origin: w[0].0.origin,
            slot: w[0].0.slot,
        });
    }
    order
        .into_iter()
        .map(|(id, key)| family.tag(key, message).map(|tag| (*id, tag)))
        .collect()
}
