use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde::Serialize;

use super::{random_message, run_trials, Estimate};
use crate::bits::BitString;
use crate::error::{Error, Result};
use crate::hashing::{HashKey, KeyId, Tag};
use crate::keystore::{KeyNetwork, NetworkConfig};
use crate::protocol::{distribute, group_mismatches, Recipient, Signature};
use crate::secparams::{guess_pass_probability, p_forge, p_nontransfer, Level, ProtocolParams};
use crate::seed::{derive_seed, Domain};

/// A dishonest signer corrupting a fraction `gammas[r]` of the tags in the
/// block issued to recipient `r`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RepudiationSpec {
    pub gammas: Vec<f64>,
    pub trials: u64,
    pub seed: u64,
}

impl RepudiationSpec {
    pub fn uniform(gamma: f64, n: u32, trials: u64, seed: u64) -> RepudiationSpec {
        RepudiationSpec {
            gammas: vec![gamma; n as usize],
            trials,
            seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AttackOutcome {
    pub estimate: Estimate,
    /// Analytic bound at the same parameters, clamped to `[0, 1]`.
    pub analytic_bound: f64,
}

impl AttackOutcome {
    /// One-sided check: empirical rate at most the bound plus three standard
    /// errors evaluated at the bound.
    pub fn within_bound(&self) -> bool {
        self.estimate.rate <= self.analytic_bound + 3.0 * self.estimate.sigma_at(self.analytic_bound)
    }
}

/// Empirical repudiation rate: a trial succeeds when some honest recipient
/// accepts at level 0 while another rejects at level −1.
pub fn attack_repudiation(spec: &RepudiationSpec, params: &ProtocolParams) -> Result<AttackOutcome> {
    params.validate()?;
    let n = params.n_recipients as usize;
    if spec.gammas.len() != n {
        return Err(Error::invalid("gammas", format!("need {n} values, got {}", spec.gammas.len())));
    }
    if let Some(g) = spec.gammas.iter().find(|g| !(0.0..=1.0).contains(*g)) {
        return Err(Error::invalid("gammas", format!("{g} outside [0, 1]")));
    }
    if spec.trials == 0 {
        return Err(Error::invalid("trials", "must be >= 1"));
    }
    let block = params.n_recipients as usize * params.k as usize;
    let estimate = run_trials(spec.trials, spec.seed, |trial_seed| {
        let cfg = NetworkConfig::uniform(params.n_recipients + 1, 1.0, trial_seed);
        let mut network = KeyNetwork::new(&cfg)?;
        let (signer, recipients) = distribute(&mut network, params)?;
        let honest = signer.sign(&random_message(trial_seed, params.msg_len_bits))?;

        let mut rng = ChaCha12Rng::seed_from_u64(derive_seed(trial_seed, Domain::Adversary, 0));
        let (message, mut tags) = honest.into_parts();
        for (origin, gamma) in spec.gammas.iter().enumerate() {
            let count = (gamma * block as f64).round() as usize;
            for slot in sample(&mut rng, block, count) {
                tags[origin * block + slot].0.flip(0);
            }
        }
        let crafted = Signature::from_parts(message, tags);

        let mut someone_accepts = false;
        let mut someone_rejects = false;
        for r in &recipients {
            let m = group_mismatches(r, &crafted, params)?;
            someone_accepts |= m.evaluate(0, params)?.accepted;
            someone_rejects |= !m.evaluate(-1, params)?.accepted;
        }
        Ok(someone_accepts && someone_rejects)
    })?;
    Ok(AttackOutcome {
        estimate,
        analytic_bound: p_nontransfer(0, params, params.tail_mode)?.p_nontransfer,
    })
}

/// A recipient (optionally with colluders) forging a signature for another.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ForgeSpec {
    pub forger: u32,
    pub colluders: Vec<u32>,
    pub target: u32,
    pub level: Level,
    pub trials: u64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ForgeOutcome {
    pub estimate: Estimate,
    /// Chance that uniform guessing passes one group test the coalition
    /// cannot compute.
    pub p_t: f64,
    /// `N²(1-d_R)² p_t`, clamped.
    pub forge_bound: f64,
    /// Target groups whose keys the coalition does not hold.
    pub unknown_groups: u32,
    /// `unknown_groups · p_t`, clamped: acceptance needs at least one such
    /// test to pass whenever known groups alone fall short of `δ_l`.
    pub union_bound: f64,
    /// Whether the coalition fits within `⌊d_R N⌋` colluders.
    pub within_threat_model: bool,
}

impl ForgeSpec {
    fn validate(&self, params: &ProtocolParams) -> Result<()> {
        let n = params.n_recipients;
        if self.forger >= n || self.target >= n {
            return Err(Error::invalid("forger", format!("recipient indices must be < {n}")));
        }
        if self.forger == self.target {
            return Err(Error::invalid("target", "forger cannot target itself"));
        }
        for &c in &self.colluders {
            if c >= n || c == self.target || c == self.forger {
                return Err(Error::invalid(
                    "colluders",
                    format!("colluder {c} must be a recipient other than forger and target"),
                ));
            }
        }
        if self.level < -1 || self.level > params.l_max as Level {
            return Err(Error::invalid("level", format!("must be in -1..={}", params.l_max)));
        }
        if self.trials == 0 {
            return Err(Error::invalid("trials", "must be >= 1"));
        }
        Ok(())
    }

    fn coalition(&self) -> Vec<u32> {
        let mut c = self.colluders.clone();
        c.push(self.forger);
        c.sort_unstable();
        c.dedup();
        c
    }
}

/// Empirical forging rate for a coalition that computes every tag it holds a
/// key for and guesses the rest uniformly.
pub fn attack_forge(spec: &ForgeSpec, params: &ProtocolParams) -> Result<ForgeOutcome> {
    params.validate()?;
    spec.validate(params)?;
    let coalition = spec.coalition();
    let t = params.tag_len_bits as usize;
    let block = params.n_recipients as u64 * params.k;

    let estimate = run_trials(spec.trials, spec.seed, |trial_seed| {
        let cfg = NetworkConfig::uniform(params.n_recipients + 1, 1.0, trial_seed);
        let mut network = KeyNetwork::new(&cfg)?;
        let (signer, recipients) = distribute(&mut network, params)?;
        let family = signer.family().clone();
        drop(signer);

        let mut known: Vec<Option<&HashKey>> = vec![None; params.total_keys() as usize];
        for &m in &coalition {
            let member: &Recipient = &recipients[m as usize];
            for (slot, key) in member.issued_keys().iter().enumerate() {
                known[KeyId::new(m, slot as u32).canonical_index(block) as usize] = Some(key);
            }
            for (&origin, group) in member.groups() {
                for (slot, key) in group {
                    known[KeyId::new(origin, *slot).canonical_index(block) as usize] = Some(key);
                }
            }
        }

        let message = random_message(trial_seed, params.msg_len_bits);
        let mut rng = ChaCha12Rng::seed_from_u64(derive_seed(trial_seed, Domain::Adversary, 0));
        let tags = known
            .iter()
            .map(|k| match k {
                Some(key) => family.tag(key, &message),
                None => Ok(Tag(random_bits(&mut rng, t))),
            })
            .collect::<Result<Vec<_>>>()?;
        let forged = Signature::from_parts(message, tags);
        let report = group_mismatches(&recipients[spec.target as usize], &forged, params)?
            .evaluate(spec.level, params)?;
        Ok(report.accepted)
    })?;

    let p_t = guess_pass_probability(params.k, params.tag_len_bits, params.s(spec.level));
    let unknown_groups = params.n_recipients - coalition.len() as u32;
    Ok(ForgeOutcome {
        estimate,
        p_t,
        forge_bound: p_forge(params.n_recipients, params.d_r, p_t),
        unknown_groups,
        union_bound: (unknown_groups as f64 * p_t).min(1.0),
        within_threat_model: spec.colluders.len() as f64
            <= (params.d_r * params.n_recipients as f64 + 1e-9).floor(),
    })
}

fn random_bits<R: Rng>(rng: &mut R, len: usize) -> BitString {
    let words = (0..len.div_ceil(64)).map(|_| rng.gen()).collect();
    BitString::from_words(words, len)
}
