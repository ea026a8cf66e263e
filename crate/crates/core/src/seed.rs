//! Deterministic seed derivation.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Independent sub-seed for `(domain, index)` under a root seed.
pub fn derive_seed(root: u64, domain: Domain, index: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(root);
    rng.set_stream(((domain as u64) << 48) ^ index);
    rng.next_u64()
}

/// Namespaces for derived seeds so streams never collide across uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Domain {
    LinkPool = 1,
    LinkFlips = 2,
    Partition = 3,
    Trial = 4,
    Message = 5,
    Adversary = 6,
}
