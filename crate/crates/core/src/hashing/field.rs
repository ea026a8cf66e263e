//! Arithmetic in GF(2^a) with the minimal-encoding irreducible modulus.

use std::collections::HashMap;
use std::sync::{Arc, OnceLock, RwLock};

use crate::bits::BitString;

/// Dense polynomial over GF(2); bit `i` of limb `i / 64` is the coefficient
/// of `x^i`. Kept trimmed of leading zero limbs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) struct Poly(Vec<u64>);

impl Poly {
    pub(crate) fn from_words(mut w: Vec<u64>) -> Poly {
        while w.last() == Some(&0) {
            w.pop();
        }
        Poly(w)
    }

    fn x() -> Poly {
        Poly(vec![2])
    }

    pub(crate) fn degree(&self) -> Option<usize> {
        let top = self.0.last()?;
        Some((self.0.len() - 1) * 64 + 63 - top.leading_zeros() as usize)
    }

    fn is_one(&self) -> bool {
        self.0 == [1]
    }

    fn xor(&self, other: &Poly) -> Poly {
        let n = self.0.len().max(other.0.len());
        let w = (0..n)
            .map(|i| self.0.get(i).copied().unwrap_or(0) ^ other.0.get(i).copied().unwrap_or(0))
            .collect();
        Poly::from_words(w)
    }

    /// `acc ^= src << shift` on raw limbs.
    fn xor_shifted(acc: &mut [u64], src: &[u64], shift: usize) {
        let (ws, bs) = (shift / 64, shift % 64);
        for (i, &w) in src.iter().enumerate() {
            acc[i + ws] ^= w << bs;
            if bs != 0 && i + ws + 1 < acc.len() {
                acc[i + ws + 1] ^= w >> (64 - bs);
            }
        }
    }

    pub(crate) fn mul(&self, other: &Poly) -> Poly {
        if self.0.is_empty() || other.0.is_empty() {
            return Poly(Vec::new());
        }
        let mut out = vec![0u64; self.0.len() + other.0.len()];
        for (i, &a) in self.0.iter().enumerate() {
            for (j, &b) in other.0.iter().enumerate() {
                let p = clmul64(a, b);
                out[i + j] ^= p as u64;
                out[i + j + 1] ^= (p >> 64) as u64;
            }
        }
        Poly::from_words(out)
    }

    fn square(&self) -> Poly {
        let mut out = vec![0u64; self.0.len() * 2];
        for (i, &w) in self.0.iter().enumerate() {
            out[2 * i] = spread32(w as u32);
            out[2 * i + 1] = spread32((w >> 32) as u32);
        }
        Poly::from_words(out)
    }

    pub(crate) fn rem(&self, m: &Poly) -> Poly {
        let dm = m.degree().expect("division by zero polynomial");
        let mut acc = self.0.clone();
        let Some(mut d) = self.degree() else {
            return Poly(Vec::new());
        };
        while d >= dm {
            if (acc[d / 64] >> (d % 64)) & 1 == 1 {
                Poly::xor_shifted(&mut acc, &m.0, d - dm);
            }
            if d == 0 {
                break;
            }
            d -= 1;
        }
        Poly::from_words(acc)
    }

    fn gcd(&self, other: &Poly) -> Poly {
        let (mut a, mut b) = (self.clone(), other.clone());
        while b.degree().is_some() {
            let r = a.rem(&b);
            a = b;
            b = r;
        }
        a
    }
}

/// Carry-less 64×64 → 128 multiply.
pub(crate) fn clmul64(a: u64, b: u64) -> u128 {
    let (mut x, y) = if a.count_ones() < b.count_ones() { (a, b) } else { (b, a) };
    let mut acc = 0u128;
    while x != 0 {
        let i = x.trailing_zeros();
        acc ^= (y as u128) << i;
        x &= x - 1;
    }
    acc
}

fn spread32(mut v: u32) -> u64 {
    let mut out = 0u64;
    let mut i = 0;
    while v != 0 {
        if v & 1 == 1 {
            out |= 1 << (2 * i);
        }
        v >>= 1;
        i += 1;
    }
    out
}

/// Ben-Or irreducibility test.
fn is_irreducible(f: &Poly) -> bool {
    let Some(d) = f.degree() else { return false };
    if d == 0 {
        return false;
    }
    let x = Poly::x();
    let mut u = x.clone();
    for _ in 1..=d / 2 {
        u = u.square().rem(f);
        if !f.gcd(&u.xor(&x)).is_one() {
            return false;
        }
    }
    true
}

fn cache() -> &'static RwLock<HashMap<u32, Arc<BitString>>> {
    static CACHE: OnceLock<RwLock<HashMap<u32, Arc<BitString>>>> = OnceLock::new();
    CACHE.get_or_init(Default::default)
}

/// Irreducible polynomial of degree `a` with the smallest integer encoding
/// among those with a nonzero constant term. Returned as `a + 1` bits.
///
/// Results are cached per degree. Panics unless `1 <= a <= 4096`.
pub fn find_irreducible(a: u32) -> Arc<BitString> {
    assert!((1..=4096).contains(&a), "degree {a} outside 1..=4096");
    if let Some(hit) = cache().read().expect("poisoned").get(&a) {
        return Arc::clone(hit);
    }
    let found = Arc::new(search_irreducible(a as usize));
    let mut guard = cache().write().expect("poisoned");
    Arc::clone(guard.entry(a).or_insert(found))
}

fn search_irreducible(a: usize) -> BitString {
    if a == 1 {
        return BitString::from_u64(0b11, 2);
    }
    let mut low: u64 = 1;
    loop {
        // x^a + low: constant term set; even total weight is divisible by x+1.
        if low.count_ones() % 2 == 0 {
            let mut words = vec![0u64; a / 64 + 1];
            words[0] = low;
            words[a / 64] |= 1 << (a % 64);
            let f = Poly::from_words(words.clone());
            if is_irreducible(&f) {
                return BitString::from_words(words, a + 1);
            }
        }
        low += 2;
        assert!(a >= 64 || low < (1u64 << a), "no irreducible of degree {a} found");
    }
}

/// GF(2^a) modulo the minimal irreducible of degree `a`.
#[derive(Clone, Debug)]
pub struct GaloisField {
    degree: u32,
    modulus: Arc<BitString>,
    small_modulus: Option<u128>,
}

impl GaloisField {
    pub fn new(degree: u32) -> GaloisField {
        let modulus = find_irreducible(degree);
        let small_modulus = (degree <= 64).then(|| {
            let w = modulus.words();
            w[0] as u128 | (w.get(1).copied().unwrap_or(0) as u128) << 64
        });
        GaloisField {
            degree,
            modulus,
            small_modulus,
        }
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn modulus(&self) -> &BitString {
        &self.modulus
    }

    /// Product of two `a`-bit elements. Panics on width mismatch.
    pub fn mul(&self, x: &BitString, y: &BitString) -> BitString {
        let a = self.degree as usize;
        assert_eq!(x.len(), a, "left operand width");
        assert_eq!(y.len(), a, "right operand width");
        if self.small_modulus.is_some() {
            let p = self.mul_u64(x.words()[0], y.words()[0]);
            return BitString::from_u64(p, a);
        }
        let prod = Poly::from_words(x.words().to_vec()).mul(&Poly::from_words(y.words().to_vec()));
        let m = Poly::from_words(self.modulus.words().to_vec());
        BitString::from_words(prod.rem(&m).0, a)
    }

    /// Product for fields of degree at most 64, on raw integers.
    pub fn mul_u64(&self, x: u64, y: u64) -> u64 {
        let m = self.small_modulus.expect("mul_u64 needs degree <= 64");
        let a = self.degree as usize;
        let mut p = clmul64(x, y);
        for i in (a..2 * a - 1).rev() {
            if (p >> i) & 1 == 1 {
                p ^= m << (i - a);
            }
        }
        p as u64
    }
}
