//! The signature protocol: distribution stage (preparation, sharing) and
//! messaging stage (sign, verify at a level, forward).
//!
//! Recipient `r` (0-based) is user `r + 1` on the key network. Keys carry a
//! [`KeyId`] whose `origin` is the recipient whose block they were issued
//! in; each block holds `N·k` slots. Signatures list all `N²k` tags in
//! canonical order, `origin · N·k + slot`, without embedded ids.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use serde::Serialize;

use crate::bits::{BitString, BytePacker, ByteUnpacker};
use crate::error::{Error, Result};
use crate::hashing::{decode_slot, encode_slot, HashFamily, HashKey, KeyId, Tag};
use crate::keystore::{KeyNetwork, UserId, SIGNER};
use crate::secparams::{Level, ProtocolParams, THRESHOLD_EPS};
use crate::seed::{derive_seed, Domain};

/// Network user id of recipient `index`.
pub fn recipient_user(index: u32) -> UserId {
    index + 1
}

/// The signer after preparation: holds every issued key.
#[derive(Clone)]
pub struct Signer {
    family: HashFamily,
    block_len: u32,
    keys: Vec<HashKey>,
}

impl Signer {
    pub fn key_count(&self) -> usize {
        self.keys.len()
    }

    pub fn key(&self, id: KeyId) -> Option<&HashKey> {
        self.keys.get(id.canonical_index(self.block_len as u64) as usize)
    }

    pub fn family(&self) -> &HashFamily {
        &self.family
    }

    /// Tags of `message` under every key, canonical order.
    pub fn sign(&self, message: &BitString) -> Result<Signature> {
        let tags = self
            .keys
            .iter()
            .map(|key| self.family.tag(key, message))
            .collect::<Result<Vec<_>>>()?;
        Ok(Signature {
            message: message.clone(),
            tags,
        })
    }
}

/// A recipient's key material.
#[derive(Clone)]
pub struct Recipient {
    index: u32,
    /// The `N·k` keys received from the signer, by slot.
    issued: Vec<HashKey>,
    /// After sharing: origin → `(slot, key)` for the `k` keys held from that origin.
    groups: BTreeMap<u32, Vec<(u32, HashKey)>>,
    partition_seed: u64,
}

impl Recipient {
    pub fn index(&self) -> u32 {
        self.index
    }

    pub fn user(&self) -> UserId {
        recipient_user(self.index)
    }

    pub fn issued_keys(&self) -> &[HashKey] {
        &self.issued
    }

    pub fn groups(&self) -> &BTreeMap<u32, Vec<(u32, HashKey)>> {
        &self.groups
    }

    pub fn has_shared(&self) -> bool {
        !self.groups.is_empty()
    }

    /// Every `KeyId` this recipient verifies against.
    pub fn held_ids(&self) -> impl Iterator<Item = KeyId> + '_ {
        self.groups
            .iter()
            .flat_map(|(&o, g)| g.iter().map(move |(s, _)| KeyId::new(o, *s)))
    }
}

/// Message plus its `N²k` tags in canonical order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Signature {
    message: BitString,
    tags: Vec<Tag>,
}

impl Signature {
    pub fn from_parts(message: BitString, tags: Vec<Tag>) -> Signature {
        Signature { message, tags }
    }

    pub fn message(&self) -> &BitString {
        &self.message
    }

    pub fn tags(&self) -> &[Tag] {
        &self.tags
    }

    pub fn into_parts(self) -> (BitString, Vec<Tag>) {
        (self.message, self.tags)
    }

    /// Byte layout (all integers big-endian):
    ///
    /// ```text
    /// u32 a | u32 t | u32 tag_count | message: ceil(a/8) bytes |
    /// tags: tag_count * t bits packed MSB-first, zero-padded to a byte
    /// ```
    pub fn to_bytes(&self) -> Vec<u8> {
        let t = self.tags.first().map_or(0, |tag| tag.0.len());
        let mut out = Vec::new();
        out.extend((self.message.len() as u32).to_be_bytes());
        out.extend((t as u32).to_be_bytes());
        out.extend((self.tags.len() as u32).to_be_bytes());
        out.extend(self.message.to_bytes_be());
        let mut packer = BytePacker::default();
        for tag in &self.tags {
            packer.push(&tag.0);
        }
        out.extend(packer.finish());
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Signature> {
        let malformed = |m: &str| Error::MalformedSignature(m.to_string());
        let header = |i: usize| -> Result<usize> {
            let b = bytes.get(4 * i..4 * i + 4).ok_or_else(|| malformed("truncated header"))?;
            Ok(u32::from_be_bytes(b.try_into().expect("4 bytes")) as usize)
        };
        let (a, t, count) = (header(0)?, header(1)?, header(2)?);
        let msg_bytes = a.div_ceil(8);
        let body = &bytes[12..];
        if body.len() < msg_bytes {
            return Err(malformed("truncated message"));
        }
        let message = BitString::from_bytes_be(&body[..msg_bytes], a);
        let packed = &body[msg_bytes..];
        if packed.len() != (count * t).div_ceil(8) {
            return Err(malformed("tag section length does not match header"));
        }
        let mut unpacker = ByteUnpacker::new(packed);
        let tags = (0..count)
            .map(|_| unpacker.take(t).map(Tag).ok_or_else(|| malformed("truncated tags")))
            .collect::<Result<Vec<_>>>()?;
        Ok(Signature { message, tags })
    }
}

/// Outcome of one verification.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    pub recipient: u32,
    pub level_requested: Level,
    /// origin → fraction of mismatching tags in that group.
    pub per_group: BTreeMap<u32, f64>,
    pub mismatches: BTreeMap<u32, u64>,
    pub tests_passed: u32,
    pub accepted: bool,
    pub s_level: f64,
    pub delta: f64,
}

/// Per-group mismatch counts of one recipient against one signature,
/// evaluated at any level without recomputing tags.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupMismatches {
    pub recipient: u32,
    /// origin → (mismatches, group size).
    pub counts: BTreeMap<u32, (u64, u64)>,
}

impl GroupMismatches {
    pub fn evaluate(&self, level: Level, params: &ProtocolParams) -> Result<VerificationReport> {
        check_level(level, params)?;
        let s = params.s(level);
        let delta = params.delta(level)?;
        let mut per_group = BTreeMap::new();
        let mut tests_passed = 0u32;
        for (&origin, &(bad, size)) in &self.counts {
            let fraction = if size == 0 { 1.0 } else { bad as f64 / size as f64 };
            if fraction < s - THRESHOLD_EPS {
                tests_passed += 1;
            }
            per_group.insert(origin, fraction);
        }
        let accepted = tests_passed as f64 / params.n_recipients as f64 > delta + THRESHOLD_EPS;
        Ok(VerificationReport {
            recipient: self.recipient,
            level_requested: level,
            per_group,
            mismatches: self.counts.iter().map(|(&o, &(b, _))| (o, b)).collect(),
            tests_passed,
            accepted,
            s_level: s,
            delta,
        })
    }
}

fn check_level(level: Level, params: &ProtocolParams) -> Result<()> {
    if level < -1 || level > params.l_max as Level {
        return Err(Error::invalid(
            "level",
            format!("must be in -1..={}, got {level}", params.l_max),
        ));
    }
    Ok(())
}

/// Distribution step 1: the signer draws `N·k` keys for each recipient from
/// their shared key store.
pub fn prepare(network: &mut KeyNetwork, params: &ProtocolParams) -> Result<(Signer, Vec<Recipient>)> {
    params.validate()?;
    let n = params.n_recipients;
    if network.users() < n + 1 {
        return Err(Error::Config(format!(
            "network has {} users, need {}",
            network.users(),
            n + 1
        )));
    }
    let (a, t) = (params.msg_len_bits, params.tag_len_bits);
    let block_len = block_len(params)?;
    let key_len = (a + t) as usize;
    let family = HashFamily::new(a, t)?;
    let seed = network.config().seed;

    let mut signer_keys = Vec::with_capacity(n as usize * block_len as usize);
    let mut recipients = Vec::with_capacity(n as usize);
    for r in 0..n {
        let link = network.link_mut(SIGNER, recipient_user(r))?;
        // One draw per block: the same stream bits as key-by-key draws.
        let draw = link.draw_shared(block_len as usize * key_len);
        let (ours, theirs) = (draw.view(SIGNER), draw.view(recipient_user(r)));
        let mut issued = Vec::with_capacity(block_len as usize);
        for i in 0..block_len as usize {
            signer_keys.push(HashKey::from_bits(&ours.slice(i * key_len, key_len), a, t)?);
            issued.push(HashKey::from_bits(&theirs.slice(i * key_len, key_len), a, t)?);
        }
        recipients.push(Recipient {
            index: r,
            issued,
            groups: BTreeMap::new(),
            partition_seed: derive_seed(seed, Domain::Partition, r as u64),
        });
    }
    Ok((
        Signer {
            family,
            block_len,
            keys: signer_keys,
        },
        recipients,
    ))
}

fn block_len(params: &ProtocolParams) -> Result<u32> {
    let len = params.n_recipients as u64 * params.k;
    u32::try_from(len).map_err(|_| Error::invalid("k", format!("N·k = {len} exceeds 2^32")))
}

/// Distribution step 2: each recipient splits its block at random into `N`
/// sets of `k`, keeps one and sends each other set, with slot ids, to a
/// distinct recipient over a one-time-padded channel.
pub fn share(recipients: &mut [Recipient], network: &mut KeyNetwork, params: &ProtocolParams) -> Result<()> {
    let n = params.n_recipients as usize;
    if recipients.len() != n {
        return Err(Error::invalid(
            "recipients",
            format!("expected {n}, got {}", recipients.len()),
        ));
    }
    let k = params.k as usize;
    let (a, t) = (params.msg_len_bits, params.tag_len_bits);
    let id_width = params.id_bits();
    let key_len = (a + t) as usize;
    let entry_len = id_width as usize + key_len;

    // inbox[dest] collects (origin, entries) before anyone's groups change.
    type Delivery = (u32, Vec<(u32, HashKey)>);
    let mut inbox: Vec<Vec<Delivery>> = vec![Vec::new(); n];
    for sender in recipients.iter() {
        if sender.issued.len() != n * k {
            return Err(Error::invalid("recipients", "prepare has not completed"));
        }
        let mut slots: Vec<u32> = (0..(n * k) as u32).collect();
        slots.shuffle(&mut ChaCha12Rng::seed_from_u64(sender.partition_seed));
        for (dest, chunk) in slots.chunks(k).enumerate() {
            if dest == sender.index as usize {
                let kept = chunk
                    .iter()
                    .map(|&s| (s, sender.issued[s as usize].clone()))
                    .collect();
                inbox[dest].push((sender.index, kept));
                continue;
            }
            let mut payload = BitString::zeros(k * entry_len);
            for (i, &s) in chunk.iter().enumerate() {
                payload.write_at(i * entry_len, &encode_slot(s, id_width));
                payload.write_at(i * entry_len + id_width as usize, &sender.issued[s as usize].to_bits());
            }
            let from = sender.user();
            let received = network
                .link_mut(from, recipient_user(dest as u32))?
                .otp_transfer(from, &payload)?;
            let entries = (0..k)
                .map(|i| {
                    let entry = received.slice(i * entry_len, entry_len);
                    let slot = decode_slot(&entry.slice(0, id_width as usize));
                    let key = HashKey::from_bits(&entry.slice(id_width as usize, key_len), a, t)?;
                    Ok((slot, key))
                })
                .collect::<Result<Vec<_>>>()?;
            inbox[dest].push((sender.index, entries));
        }
    }
    for (dest, msgs) in inbox.into_iter().enumerate() {
        recipients[dest].groups = msgs.into_iter().collect();
    }
    Ok(())
}

/// Preparation followed by sharing.
pub fn distribute(network: &mut KeyNetwork, params: &ProtocolParams) -> Result<(Signer, Vec<Recipient>)> {
    let (signer, mut recipients) = prepare(network, params)?;
    share(&mut recipients, network, params)?;
    Ok((signer, recipients))
}

pub fn sign(signer: &Signer, message: &BitString) -> Result<Signature> {
    signer.sign(message)
}

/// Recompute this recipient's tags and count mismatches per origin group.
pub fn group_mismatches(
    recipient: &Recipient,
    signature: &Signature,
    params: &ProtocolParams,
) -> Result<GroupMismatches> {
    if !recipient.has_shared() {
        return Err(Error::invalid("recipient", "sharing has not completed"));
    }
    let block = block_len(params)? as u64;
    let expected = params.total_keys();
    if signature.tags.len() as u64 != expected {
        return Err(Error::MalformedSignature(format!(
            "expected {expected} tags, got {}",
            signature.tags.len()
        )));
    }
    if signature.message.len() != params.msg_len_bits as usize {
        return Err(Error::WidthMismatch {
            what: "message",
            expected: params.msg_len_bits as usize,
            actual: signature.message.len(),
        });
    }
    let family = HashFamily::new(params.msg_len_bits, params.tag_len_bits)?;
    let mut counts = BTreeMap::new();
    for (&origin, group) in &recipient.groups {
        let mut bad = 0u64;
        for (slot, key) in group {
            // A slot id garbled in transit cannot be matched to a tag.
            let matches = (*slot as u64) < block
                && family.tag(key, &signature.message)?
                    == signature.tags[KeyId::new(origin, *slot).canonical_index(block) as usize];
            if !matches {
                bad += 1;
            }
        }
        counts.insert(origin, (bad, group.len() as u64));
    }
    Ok(GroupMismatches {
        recipient: recipient.index,
        counts,
    })
}

/// Verify `signature` at transferability level `level`.
pub fn verify(
    recipient: &Recipient,
    signature: &Signature,
    level: Level,
    params: &ProtocolParams,
) -> Result<VerificationReport> {
    check_level(level, params)?;
    group_mismatches(recipient, signature, params)?.evaluate(level, params)
}

/// Pass a signature along `chain`, verifying at `start_level`,
/// `start_level - 1`, … in turn.
pub fn forward_chain(
    chain: &[&Recipient],
    signature: &Signature,
    start_level: Level,
    params: &ProtocolParams,
) -> Result<Vec<VerificationReport>> {
    check_level(start_level, params)?;
    let available = (start_level + 2) as usize;
    if chain.len() > available {
        return Err(Error::ChainTooLong {
            requested: chain.len(),
            available,
        });
    }
    chain
        .iter()
        .zip((-1..=start_level).rev())
        .map(|(r, level)| verify(r, signature, level, params))
        .collect()
}
