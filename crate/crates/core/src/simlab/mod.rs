//! Monte Carlo experiments on the full protocol stack.
//!
//! Every estimator derives one seed per trial from `(seed, trial_index)`, so
//! results are bit-identical across reruns and independent of how trials are
//! spread over worker threads.

mod attack;
mod sweep;

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::bits::BitString;
use crate::error::Result;
use crate::keystore::{KeyNetwork, LinkId, NetworkConfig};
use crate::protocol::{distribute, forward_chain, verify, VerificationReport};
use crate::secparams::{Level, ProtocolParams};
use crate::seed::{derive_seed, Domain};

pub use attack::{attack_forge, attack_repudiation, AttackOutcome, ForgeOutcome, ForgeSpec, RepudiationSpec};
pub use sweep::{
    axis_points, expected_mismatch_fraction, sweep_consumption, sweep_error_tolerance, ConsumptionRow,
    ErrorToleranceRow, SweepAxis, SweepResult, DEFAULT_MARGIN,
};

/// Two-sided 95% normal quantile.
const Z95: f64 = 1.959_963_984_540_054;

/// Success count over a number of trials, with a Wilson 95% interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub trials: u64,
    pub successes: u64,
    pub rate: f64,
    pub wilson_lo: f64,
    pub wilson_hi: f64,
}

impl Estimate {
    pub fn new(successes: u64, trials: u64) -> Estimate {
        assert!(trials > 0 && successes <= trials);
        let n = trials as f64;
        let p = successes as f64 / n;
        let z2 = Z95 * Z95;
        let denom = 1.0 + z2 / n;
        let center = (p + z2 / (2.0 * n)) / denom;
        let half = Z95 / denom * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
        Estimate {
            trials,
            successes,
            rate: p,
            wilson_lo: (center - half).max(0.0),
            wilson_hi: (center + half).min(1.0),
        }
    }

    /// Standard error of a Bernoulli(`p`) mean over this many trials.
    pub fn sigma_at(&self, p: f64) -> f64 {
        let p = p.clamp(0.0, 1.0);
        (p * (1.0 - p) / self.trials as f64).sqrt()
    }
}

/// Runs `trials` independent Bernoulli trials in parallel.
pub(crate) fn run_trials<F>(trials: u64, seed: u64, trial: F) -> Result<Estimate>
where
    F: Fn(u64) -> Result<bool> + Sync,
{
    let successes = (0..trials)
        .into_par_iter()
        .map(|i| trial(derive_seed(seed, Domain::Trial, i)).map(u64::from))
        .try_reduce(|| 0, |a, b| Ok(a + b))?;
    Ok(Estimate::new(successes, trials))
}

/// Uniformly random `a`-bit message derived from `seed`.
pub fn random_message(seed: u64, a: u32) -> BitString {
    let mut rng = ChaCha12Rng::seed_from_u64(derive_seed(seed, Domain::Message, 0));
    let words = (0..(a as usize).div_ceil(64)).map(|_| rng.gen()).collect();
    BitString::from_words(words, a as usize)
}

/// One honest end-to-end run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HonestRun {
    /// One report per recipient at `l_max`.
    pub reports: Vec<VerificationReport>,
    /// Reports of the forwarding chain recipient 0 → 1 → … from `l_max` down.
    pub chain: Vec<VerificationReport>,
    pub consumed: BTreeMap<LinkId, u64>,
}

impl HonestRun {
    pub fn all_accepted(&self) -> bool {
        self.reports.iter().all(|r| r.accepted)
    }
}

/// prepare → share → sign → verify for every recipient at `l_max`, then a
/// forwarding chain through the first `min(N, l_max + 2)` recipients.
pub fn run_honest(params: &ProtocolParams, config: &NetworkConfig) -> Result<HonestRun> {
    let mut network = KeyNetwork::new(config)?;
    let (signer, recipients) = distribute(&mut network, params)?;
    let message = random_message(config.seed, params.msg_len_bits);
    let signature = signer.sign(&message)?;
    let top = params.l_max as Level;
    let reports = recipients
        .par_iter()
        .map(|r| verify(r, &signature, top, params))
        .collect::<Result<Vec<_>>>()?;
    let hops = recipients.len().min(params.l_max as usize + 2);
    let chain: Vec<_> = recipients.iter().take(hops).collect();
    let chain = forward_chain(&chain, &signature, top, params)?;
    Ok(HonestRun {
        reports,
        chain,
        consumed: network.total_consumed(),
    })
}
