//! Simulated pairwise QKD key stores.
//!
//! Every unordered pair of users shares a [`LinkKeyStore`]: an unbounded
//! seeded stream of secret bits, a secret-bit rate, and a residual flip
//! probability `q` applied to the higher-numbered endpoint's view. User `0`
//! is the signer, so on signer links the flips land on the recipient side.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::ops::Range;
use std::path::Path;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use crate::bits::BitString;
use crate::error::{Error, Result};
use crate::secparams::{link_demand, ProtocolParams};
use crate::seed::{derive_seed, Domain};

/// User index; `0` is the signer, `1..=N` the recipients.
pub type UserId = u32;

pub const SIGNER: UserId = 0;

/// Unordered pair of distinct users, stored low-high.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct LinkId {
    pub lo: UserId,
    pub hi: UserId,
}

impl LinkId {
    pub fn new(a: UserId, b: UserId) -> Result<LinkId> {
        if a == b {
            return Err(Error::Config(format!("link endpoints must differ (got {a}, {b})")));
        }
        Ok(LinkId {
            lo: a.min(b),
            hi: a.max(b),
        })
    }

    pub fn contains(&self, user: UserId) -> bool {
        self.lo == user || self.hi == user
    }

    pub fn other(&self, user: UserId) -> UserId {
        if user == self.lo {
            self.hi
        } else {
            self.lo
        }
    }

    fn stream_index(&self) -> u64 {
        ((self.lo as u64) << 32) | self.hi as u64
    }
}

impl std::fmt::Display for LinkId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}-{}", self.lo, self.hi)
    }
}

/// Per-link overrides in a network config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkOverride {
    pub a: UserId,
    pub b: UserId,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rate_bps: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub flip_prob: Option<f64>,
}

/// Fully connected network of `users` parties (signer plus recipients).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkConfig {
    pub users: u32,
    pub default_rate_bps: f64,
    #[serde(default)]
    pub default_flip_prob: f64,
    #[serde(default)]
    pub links: Vec<LinkOverride>,
    #[serde(default)]
    pub seed: u64,
}

/// Resolved rate and flip probability of one link.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkSpec {
    pub rate_bps: f64,
    pub flip_prob: f64,
}

impl NetworkConfig {
    /// Every link at `rate_bps`, noiseless.
    pub fn uniform(users: u32, rate_bps: f64, seed: u64) -> NetworkConfig {
        NetworkConfig {
            users,
            default_rate_bps: rate_bps,
            default_flip_prob: 0.0,
            links: Vec::new(),
            seed,
        }
    }

    pub fn from_json(text: &str) -> Result<NetworkConfig> {
        let cfg: NetworkConfig =
            serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<NetworkConfig> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        NetworkConfig::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Sets `flip_prob = q` on every signer link.
    pub fn with_signer_link_flips(mut self, q: f64) -> NetworkConfig {
        self.links.retain(|l| l.a != SIGNER && l.b != SIGNER);
        for r in 1..self.users {
            self.links.push(LinkOverride {
                a: SIGNER,
                b: r,
                rate_bps: None,
                flip_prob: Some(q),
            });
        }
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.users < 3 {
            return Err(Error::Config(format!(
                "need a signer and at least 2 recipients, got {} users",
                self.users
            )));
        }
        check_rate(self.default_rate_bps)?;
        check_flip(self.default_flip_prob)?;
        let mut seen = BTreeSet::new();
        for l in &self.links {
            let id = LinkId::new(l.a, l.b)?;
            if id.hi >= self.users {
                return Err(Error::Config(format!("link {id} names a user >= {}", self.users)));
            }
            if !seen.insert(id) {
                return Err(Error::Config(format!("link {id} listed twice")));
            }
            if let Some(r) = l.rate_bps {
                check_rate(r)?;
            }
            if let Some(q) = l.flip_prob {
                check_flip(q)?;
            }
        }
        Ok(())
    }

    pub fn link_spec(&self, id: LinkId) -> LinkSpec {
        let over = self
            .links
            .iter()
            .find(|l| LinkId::new(l.a, l.b).ok() == Some(id));
        LinkSpec {
            rate_bps: over.and_then(|l| l.rate_bps).unwrap_or(self.default_rate_bps),
            flip_prob: over.and_then(|l| l.flip_prob).unwrap_or(self.default_flip_prob),
        }
    }

    /// All links among users `0..users`.
    pub fn link_ids(&self) -> impl Iterator<Item = LinkId> {
        let n = self.users;
        (0..n).flat_map(move |a| (a + 1..n).map(move |b| LinkId { lo: a, hi: b }))
    }
}

fn check_rate(r: f64) -> Result<()> {
    if r > 0.0 && r.is_finite() {
        Ok(())
    } else {
        Err(Error::Config(format!("rate_bps must be > 0, got {r}")))
    }
}

fn check_flip(q: f64) -> Result<()> {
    if (0.0..=1.0).contains(&q) {
        Ok(())
    } else {
        Err(Error::Config(format!("flip_prob must be in [0, 1], got {q}")))
    }
}

/// Both endpoints' views of one range of the key stream.
#[derive(Debug, Clone, PartialEq)]
pub struct SharedDraw {
    pub link: LinkId,
    pub range: Range<u64>,
    pub lo_view: BitString,
    pub hi_view: BitString,
}

impl SharedDraw {
    pub fn view(&self, user: UserId) -> &BitString {
        assert!(self.link.contains(user), "user {user} is not on link {}", self.link);
        if user == self.link.lo {
            &self.lo_view
        } else {
            &self.hi_view
        }
    }
}

/// Secret-bit pool shared by the two endpoints of one link.
pub struct LinkKeyStore {
    link: LinkId,
    spec: LinkSpec,
    pool: ChaCha12Rng,
    flips: ChaCha12Rng,
    word: u64,
    word_bits: u32,
    cursor: u64,
    issued: Vec<Range<u64>>,
}

impl LinkKeyStore {
    pub fn new(link: LinkId, spec: LinkSpec, seed: u64) -> LinkKeyStore {
        let idx = link.stream_index();
        LinkKeyStore {
            link,
            spec,
            pool: ChaCha12Rng::seed_from_u64(derive_seed(seed, Domain::LinkPool, idx)),
            flips: ChaCha12Rng::seed_from_u64(derive_seed(seed, Domain::LinkFlips, idx)),
            word: 0,
            word_bits: 0,
            cursor: 0,
            issued: Vec::new(),
        }
    }

    pub fn link(&self) -> LinkId {
        self.link
    }

    pub fn spec(&self) -> LinkSpec {
        self.spec
    }

    /// The next `n_bits` of the stream as seen by each endpoint. The
    /// higher-numbered endpoint's copy carries independent flips with
    /// probability `q`.
    pub fn draw_shared(&mut self, n_bits: usize) -> SharedDraw {
        let start = self.cursor;
        let clean = self.take(n_bits);
        let mut noisy = clean.clone();
        let q = self.spec.flip_prob;
        if q > 0.0 {
            for i in 0..n_bits {
                if q >= 1.0 || self.flips.gen_bool(q) {
                    noisy.flip(i);
                }
            }
        }
        self.cursor += n_bits as u64;
        if n_bits > 0 {
            self.issued.push(start..self.cursor);
        }
        SharedDraw {
            link: self.link,
            range: start..self.cursor,
            lo_view: clean,
            hi_view: noisy,
        }
    }

    /// One-time-pad `payload` from `from` to the other endpoint; returns what
    /// the receiver decrypts. Pad bits are fresh and never reissued.
    pub fn otp_transfer(&mut self, from: UserId, payload: &BitString) -> Result<BitString> {
        if payload.is_empty() {
            return Err(Error::invalid("payload", "must be non-empty"));
        }
        if !self.link.contains(from) {
            return Err(Error::UnknownLink(from, self.link.other(from)));
        }
        let pad = self.draw_shared(payload.len());
        let to = self.link.other(from);
        let cipher = payload.xor(pad.view(from));
        Ok(cipher.xor(pad.view(to)))
    }

    /// Bits drawn since construction.
    pub fn consumed_bits(&self) -> u64 {
        self.cursor
    }

    /// Every range handed out, in order.
    pub fn issued_ranges(&self) -> &[Range<u64>] {
        &self.issued
    }

    fn take(&mut self, n: usize) -> BitString {
        let mut words = vec![0u64; n.div_ceil(64)];
        let mut filled = 0usize;
        while filled < n {
            if self.word_bits == 0 {
                self.word = self.pool.next_u64();
                self.word_bits = 64;
            }
            let chunk = (n - filled).min(self.word_bits as usize);
            let bits = if chunk == 64 {
                self.word
            } else {
                self.word & ((1u64 << chunk) - 1)
            };
            let (w, b) = (filled / 64, filled % 64);
            words[w] |= bits << b;
            if b != 0 && b + chunk > 64 {
                words[w + 1] |= bits >> (64 - b);
            }
            self.word = if chunk == 64 { 0 } else { self.word >> chunk };
            self.word_bits -= chunk as u32;
            filled += chunk;
        }
        BitString::from_words(words, n)
    }
}

/// All link key stores of one network.
pub struct KeyNetwork {
    config: NetworkConfig,
    links: BTreeMap<LinkId, LinkKeyStore>,
}

impl KeyNetwork {
    pub fn new(config: &NetworkConfig) -> Result<KeyNetwork> {
        config.validate()?;
        let links = config
            .link_ids()
            .map(|id| (id, LinkKeyStore::new(id, config.link_spec(id), config.seed)))
            .collect();
        Ok(KeyNetwork {
            config: config.clone(),
            links,
        })
    }

    pub fn config(&self) -> &NetworkConfig {
        &self.config
    }

    pub fn users(&self) -> u32 {
        self.config.users
    }

    pub fn link_mut(&mut self, a: UserId, b: UserId) -> Result<&mut LinkKeyStore> {
        let id = LinkId::new(a, b)?;
        self.links.get_mut(&id).ok_or(Error::UnknownLink(a, b))
    }

    pub fn link(&self, a: UserId, b: UserId) -> Result<&LinkKeyStore> {
        let id = LinkId::new(a, b)?;
        self.links.get(&id).ok_or(Error::UnknownLink(a, b))
    }

    pub fn links(&self) -> impl Iterator<Item = &LinkKeyStore> {
        self.links.values()
    }

    /// Bits drawn per link.
    pub fn total_consumed(&self) -> BTreeMap<LinkId, u64> {
        self.links
            .iter()
            .map(|(id, l)| (*id, l.consumed_bits()))
            .collect()
    }
}

/// Time until every link has generated the key the distribution stage needs.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReadyEstimate {
    pub seconds: f64,
    pub binding_link: LinkId,
    /// `(link, bits needed, seconds)` for every link in use.
    pub per_link: Vec<(LinkId, u64, f64)>,
}

/// Worst-link time to accumulate the distribution-stage key material.
pub fn time_to_ready(config: &NetworkConfig, params: &ProtocolParams) -> Result<ReadyEstimate> {
    config.validate()?;
    let n = params.n_recipients;
    if config.users < n + 1 {
        return Err(Error::Config(format!(
            "network has {} users but {} recipients plus a signer are needed",
            config.users, n
        )));
    }
    let demand = link_demand(params);
    let mut per_link = Vec::new();
    for id in config.link_ids().filter(|id| id.hi <= n) {
        let rate = config.link_spec(id).rate_bps;
        if !(rate > 0.0) {
            return Err(Error::Config(format!("link {id} has zero rate")));
        }
        let bits = if id.lo == SIGNER {
            demand.sender_link_bits
        } else {
            demand.recipient_link_bits
        };
        per_link.push((id, bits, bits as f64 / rate));
    }
    let &(binding_link, _, seconds) = per_link
        .iter()
        .max_by(|x, y| x.2.total_cmp(&y.2).then(y.0.cmp(&x.0)))
        .expect("at least one link");
    Ok(ReadyEstimate {
        seconds,
        binding_link,
        per_link,
    })
}
