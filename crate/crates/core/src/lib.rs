//! Unconditionally secure multi-recipient signatures built on pairwise
//! quantum key distribution.
//!
//! The crate is organised bottom-up:
//!
//! - [`secparams`]: thresholds, bounds, the solver for `k`, bit accounting.
//! - [`hashing`]: the affine GF(2^a) hash family that turns keys into tags.
//! - [`keystore`]: simulated pairwise key stores and one-time-pad channels.
//! - [`protocol`]: distribution stage, signing, threshold verification.
//! - [`simlab`]: Monte Carlo attacks and parameter sweeps.

// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bits;
pub mod error;
pub mod hashing;
pub mod keystore;
pub mod protocol;
pub mod secparams;
pub mod seed;
pub mod simlab;

pub use bits::BitString;
pub use error::{Error, Result};
pub use hashing::{HashFamily, HashKey, KeyId, Tag};
pub use keystore::{KeyNetwork, LinkId, NetworkConfig};
pub use protocol::{Recipient, Signature, Signer, VerificationReport};
pub use secparams::{
    BoundReport, ConsumptionReport, CountingMode, Level, ParamInputs, ProtocolParams, SLevelSpec,
    TailMode,
};

/// Version string recorded in emitted artifacts.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
