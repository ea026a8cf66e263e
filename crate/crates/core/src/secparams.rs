//! Security-parameter calculus.
//!
//! Everything here is a pure function of scalar protocol parameters: the
//! dishonest fraction `d_r`, the maximum transferability level, the evenly
//! spaced mismatch thresholds `s_l`, the acceptance thresholds `δ_l`, the
//! forging and non-transferability bounds, the solver for the security
//! parameter `k`, and the secret-bit consumption formulas.
//!
//! Probabilities are carried in natural-log space internally so that bounds
//! far below `1e-300` still order correctly; reported probabilities are
//! exponentiated and clamped to `[0, 1]`.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Transferability level. `-1` is the weakest level, `l_max` the strongest.
pub type Level = i32;

/// Slack used when comparing a measured fraction against a threshold, so
/// that values equal up to rounding fall on the "not strictly beyond" side.
pub const THRESHOLD_EPS: f64 = 1e-12;

/// Largest `k` the solver will consider.
pub const MAX_K: u64 = 1 << 32;

/// Form of the exponent in the tail bound on `p_m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TailMode {
    /// `exp(-(s_{l-1} - s_l) k / 2)`, the exponent exactly as usually printed.
    Literal,
    /// `exp(-(s_{l-1} - s_l)^2 k / 2)`, the Hoeffding form.
    #[default]
    Squared,
}

/// How secret-bit consumption is counted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CountingMode {
    /// `N²ka + N(N-1)(a + ⌈log₂ kN⌉)`.
    Literal,
    /// Bits actually drawn from the key stores with key length `a + t`.
    Accounting,
}

impl fmt::Display for TailMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TailMode::Literal => "literal",
            TailMode::Squared => "squared",
        })
    }
}

impl FromStr for TailMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "literal" => Ok(TailMode::Literal),
            "squared" => Ok(TailMode::Squared),
            other => Err(Error::invalid(
                "mode",
                format!("expected `literal` or `squared`, got `{other}`"),
            )),
        }
    }
}

impl fmt::Display for CountingMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CountingMode::Literal => "literal",
            CountingMode::Accounting => "accounting",
        })
    }
}

/// Offsets of the outermost mismatch thresholds from `0` and `1/2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SLevelSpec {
    /// `s_{l_max} = eps1`.
    pub eps1: f64,
    /// `s_{-1} = 1/2 - eps2`.
    pub eps2: f64,
}

impl SLevelSpec {
    /// The values used in the seven-recipient experiment.
    pub const EXPERIMENT: SLevelSpec = SLevelSpec {
        eps1: 0.005,
        eps2: 0.001,
    };

    pub fn validate(&self) -> Result<()> {
        if !(self.eps1 > 0.0) || !self.eps1.is_finite() {
            return Err(Error::invalid("eps1", format!("must be > 0, got {}", self.eps1)));
        }
        if !(self.eps2 > 0.0) || !self.eps2.is_finite() {
            return Err(Error::invalid("eps2", format!("must be > 0, got {}", self.eps2)));
        }
        if self.eps1 + self.eps2 >= 0.5 {
            return Err(Error::invalid(
                "eps1",
                format!(
                    "eps1 + eps2 must be < 1/2, got {} + {}",
                    self.eps1, self.eps2
                ),
            ));
        }
        Ok(())
    }
}

impl Default for SLevelSpec {
    fn default() -> Self {
        SLevelSpec::EXPERIMENT
    }
}

/// Mismatch thresholds `s_l` for `l ∈ {-1, 0, …, l_max}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SLevels(BTreeMap<Level, f64>);

impl SLevels {
    pub fn get(&self, level: Level) -> Option<f64> {
        self.0.get(&level).copied()
    }

    pub fn l_max(&self) -> Level {
        *self.0.keys().next_back().expect("s-levels are never empty")
    }

    /// `(level, s_level)` from `-1` upward.
    pub fn iter(&self) -> impl Iterator<Item = (Level, f64)> + '_ {
        self.0.iter().map(|(&l, &s)| (l, s))
    }

    /// Gap `s_{l-1} - s_l`.
    pub fn gap(&self, level: Level) -> Result<f64> {
        let lower = self.get(level - 1);
        let upper = self.get(level);
        match (lower, upper) {
            (Some(lo), Some(hi)) if lo > hi => Ok(lo - hi),
            (Some(_), Some(_)) => Err(Error::invalid(
                "s_levels",
                format!("s_{} must exceed s_{}", level - 1, level),
            )),
            _ => Err(Error::invalid(
                "level",
                format!("levels {} and {} are not both defined", level, level - 1),
            )),
        }
    }

    fn validate(&self) -> Result<()> {
        let values: Vec<f64> = self.0.values().copied().collect();
        if self.0.keys().next() != Some(&-1) || values.len() < 2 {
            return Err(Error::invalid("s_levels", "must cover -1..=l_max with l_max >= 0"));
        }
        // BTreeMap iterates from -1 upward, so values must strictly decrease.
        if values.iter().any(|&s| !(s > 0.0 && s < 0.5)) {
            return Err(Error::invalid("s_levels", "every s_l must lie in (0, 1/2)"));
        }
        let gaps: Vec<f64> = values.windows(2).map(|w| w[0] - w[1]).collect();
        if gaps.iter().any(|&g| g <= 0.0) {
            return Err(Error::invalid("s_levels", "s_l must strictly increase as l decreases"));
        }
        if gaps.iter().any(|g| (g - gaps[0]).abs() > 1e-12) {
            return Err(Error::invalid("s_levels", "gaps must be evenly spaced"));
        }
        Ok(())
    }
}

/// Fully resolved protocol parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProtocolParams {
    /// Number of recipients `N` (the signer is not counted).
    pub n_recipients: u32,
    /// Message length `a` in bits.
    pub msg_len_bits: u32,
    /// Tag length `t` in bits.
    pub tag_len_bits: u32,
    pub l_max: u32,
    /// Assumed fraction of dishonest recipients.
    pub d_r: f64,
    pub s_levels: SLevels,
    /// Keys per shared group.
    pub k: u64,
    pub p_target: f64,
    pub tail_mode: TailMode,
}

impl ProtocolParams {
    pub fn validate(&self) -> Result<()> {
        if self.n_recipients < 2 {
            return Err(Error::invalid("n", format!("need at least 2 recipients, got {}", self.n_recipients)));
        }
        if self.msg_len_bits < 1 || self.msg_len_bits > MAX_MSG_BITS {
            return Err(Error::invalid("a", format!("must be in 1..={MAX_MSG_BITS}, got {}", self.msg_len_bits)));
        }
        if self.tag_len_bits < 1 || self.tag_len_bits > self.msg_len_bits {
            return Err(Error::invalid(
                "t",
                format!("must be in 1..=a ({}), got {}", self.msg_len_bits, self.tag_len_bits),
            ));
        }
        if self.k < 1 {
            return Err(Error::invalid("k", "must be >= 1"));
        }
        check_probability("p_target", self.p_target)?;
        if !(0.0..0.5).contains(&self.d_r) {
            return Err(Error::invalid("d_r", format!("must be in [0, 1/2), got {}", self.d_r)));
        }
        if (self.l_max as f64 + 1.0) * self.d_r >= 0.5 {
            return Err(Error::invalid(
                "lmax",
                format!("(l_max + 1) d_r = {} must be < 1/2", (self.l_max as f64 + 1.0) * self.d_r),
            ));
        }
        self.s_levels.validate()?;
        if self.s_levels.l_max() != self.l_max as Level {
            return Err(Error::invalid("s_levels", "top level must equal l_max"));
        }
        Ok(())
    }

    /// `s_l`, panicking on levels outside `-1..=l_max`.
    pub fn s(&self, level: Level) -> f64 {
        self.s_levels
            .get(level)
            .unwrap_or_else(|| panic!("level {level} outside -1..={}", self.l_max))
    }

    /// `δ_l`.
    pub fn delta(&self, level: Level) -> Result<f64> {
        compute_delta(level, self.d_r)
    }

    /// Total number of signature keys, `N²k`.
    pub fn total_keys(&self) -> u64 {
        let n = self.n_recipients as u64;
        n * n * self.k
    }

    /// Key length `a + t`.
    pub fn key_len_bits(&self) -> u32 {
        self.msg_len_bits + self.tag_len_bits
    }

    pub fn id_bits(&self) -> u32 {
        id_bits(self.n_recipients as u64, self.k)
    }
}

/// Upper bound on the message length accepted by [`ProtocolParams`].
pub const MAX_MSG_BITS: u32 = 4096;

/// Unresolved inputs; anything left `None` is derived.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamInputs {
    pub n: u32,
    pub a: u32,
    pub t: Option<u32>,
    pub l_max: Option<u32>,
    pub p_target: f64,
    pub s_spec: SLevelSpec,
    pub k: Option<u64>,
    pub mode: TailMode,
}

impl Default for ParamInputs {
    fn default() -> Self {
        ParamInputs {
            n: 7,
            a: 8,
            t: None,
            l_max: None,
            p_target: 1e-10,
            s_spec: SLevelSpec::EXPERIMENT,
            k: None,
            mode: TailMode::Squared,
        }
    }
}

impl ParamInputs {
    pub fn resolve(&self) -> Result<ProtocolParams> {
        if self.n < 2 {
            return Err(Error::invalid("n", format!("need at least 2 recipients, got {}", self.n)));
        }
        self.s_spec.validate()?;
        check_probability("p_target", self.p_target)?;
        let l_max = self.l_max.unwrap_or_else(|| compute_lmax(self.n));
        let d_r = compute_dr(l_max, self.n)?;
        if (l_max as f64 + 1.0) * d_r >= 0.5 {
            return Err(Error::invalid(
                "lmax",
                format!("l_max = {l_max} violates (l_max + 1) d_r < 1/2 for n = {}", self.n),
            ));
        }
        let s_levels = make_s_levels(l_max as i64, self.s_spec)?;
        let t = self.t.unwrap_or_else(|| default_tag_len(self.a));
        let k = match self.k {
            Some(0) => return Err(Error::invalid("k", "must be >= 1")),
            Some(k) => k,
            None => solve_k(self.p_target, self.n, l_max, self.s_spec, self.mode)?,
        };
        let params = ProtocolParams {
            n_recipients: self.n,
            msg_len_bits: self.a,
            tag_len_bits: t,
            l_max,
            d_r,
            s_levels,
            k,
            p_target: self.p_target,
            tail_mode: self.mode,
        };
        params.validate()?;
        Ok(params)
    }
}

/// `min(a, 32)`.
pub fn default_tag_len(a: u32) -> u32 {
    a.min(32)
}

fn check_probability(param: &'static str, p: f64) -> Result<()> {
    if p > 0.0 && p < 1.0 {
        Ok(())
    } else {
        Err(Error::invalid(param, format!("must lie in (0, 1), got {p}")))
    }
}

/// `d_R = l_max / N`.
pub fn compute_dr(l_max: u32, n: u32) -> Result<f64> {
    if n < 1 {
        return Err(Error::invalid("n", "must be >= 1"));
    }
    let d_r = l_max as f64 / n as f64;
    if d_r >= 0.5 {
        return Err(Error::invalid(
            "lmax",
            format!("d_r = {l_max}/{n} >= 1/2: no security with a dishonest majority"),
        ));
    }
    Ok(d_r)
}

/// Largest `l` with `l(l+1) < N/2`, i.e. `(l+1)·l/N < 1/2`.
pub fn compute_lmax(n: u32) -> u32 {
    let n = n as u64;
    let mut l = 0u64;
    // 2·(l+1)(l+2) < n  ⇔  (l+1)(l+2) < n/2
    while 2 * (l + 1) * (l + 2) < n {
        l += 1;
    }
    l as u32
}

/// Evenly spaced thresholds from `s_{l_max} = eps1` to `s_{-1} = 1/2 - eps2`.
pub fn make_s_levels(l_max: i64, spec: SLevelSpec) -> Result<SLevels> {
    if l_max < 0 {
        return Err(Error::invalid("lmax", format!("must be >= 0, got {l_max}")));
    }
    spec.validate()?;
    let top = spec.eps1;
    let bottom = 0.5 - spec.eps2;
    let steps = (l_max + 1) as f64;
    let mut map = BTreeMap::new();
    for l in -1..=l_max {
        // Number of gaps between level l and l_max.
        let i = (l_max - l) as f64;
        let s = if l == l_max {
            top
        } else if l == -1 {
            bottom
        } else {
            top + (bottom - top) * i / steps
        };
        map.insert(l as Level, s);
    }
    Ok(SLevels(map))
}

/// `δ_l = 1/2 + (l+1) d_R`.
pub fn compute_delta(level: Level, d_r: f64) -> Result<f64> {
    if level < -1 {
        return Err(Error::invalid("level", format!("must be >= -1, got {level}")));
    }
    let delta = 0.5 + (level as f64 + 1.0) * d_r;
    if delta > 1.0 {
        return Err(Error::invalid(
            "level",
            format!("δ_{level} = {delta} > 1 makes acceptance impossible"),
        ));
    }
    Ok(delta)
}

/// Natural log of the tail bound on `p_m` between levels `l` and `l-1`.
pub fn ln_tail_bound_pm(level: Level, k: u64, s_levels: &SLevels, mode: TailMode) -> Result<f64> {
    if k < 1 {
        return Err(Error::invalid("k", "must be >= 1"));
    }
    let gap = s_levels.gap(level)?;
    let exponent = match mode {
        TailMode::Literal => gap,
        TailMode::Squared => gap * gap,
    };
    Ok(-exponent * k as f64 / 2.0)
}

/// Upper bound on the probability `p_m` that a recipient's test outcome at
/// level `l` differs from another's at `l-1`.
pub fn tail_bound_pm(level: Level, k: u64, s_levels: &SLevels, mode: TailMode) -> Result<f64> {
    ln_tail_bound_pm(level, k, s_levels, mode).map(f64::exp)
}

/// `N²(1-d_R)² p_t`, clamped to `[0, 1]`.
pub fn p_forge(n: u32, d_r: f64, p_t: f64) -> f64 {
    let n = n as f64;
    (n * n * (1.0 - d_r).powi(2) * p_t).clamp(0.0, 1.0)
}

/// Number of honest recipient pairs, `⌊N(1-d_R)⌋(⌊N(1-d_R)⌋ - 1)/2`.
pub fn honest_pairs(n: u32, d_r: f64) -> u64 {
    let honest = (n as f64 * (1.0 - d_r) + 1e-9).floor().max(0.0) as u64;
    honest * honest.saturating_sub(1) / 2
}

/// Everything one needs to judge a level `l` of the protocol.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub level: Level,
    pub n_p: u64,
    pub p_m: f64,
    pub p_nontransfer: f64,
    pub p_forge: f64,
    /// Probability that uniform tag guessing passes one honest group test.
    pub p_t: f64,
    /// Unclamped natural log of the non-transferability bound.
    pub ln_p_nontransfer: f64,
}

fn ln_nontransfer(
    level: Level,
    n: u32,
    d_r: f64,
    s_levels: &SLevels,
    k: u64,
    mode: TailMode,
) -> Result<f64> {
    let ln_pm = ln_tail_bound_pm(level, k, s_levels, mode)?;
    let delta = compute_delta(level, d_r)?;
    let n_p = honest_pairs(n, d_r) as f64;
    let prefactor = n_p * (n as f64 * (delta - d_r) + 1.0);
    Ok(prefactor.ln() + ln_pm)
}

/// Non-transferability bound at level `l` (`l = 0` gives repudiation).
pub fn p_nontransfer(level: Level, params: &ProtocolParams, mode: TailMode) -> Result<BoundReport> {
    if level < 0 || level > params.l_max as Level {
        return Err(Error::invalid(
            "level",
            format!("must be in 0..={}, got {level}", params.l_max),
        ));
    }
    let ln_pm = ln_tail_bound_pm(level, params.k, &params.s_levels, mode)?;
    let ln_pnt = ln_nontransfer(
        level,
        params.n_recipients,
        params.d_r,
        &params.s_levels,
        params.k,
        mode,
    )?;
    let p_t = guess_pass_probability(params.k, params.tag_len_bits, params.s(level));
    Ok(BoundReport {
        level,
        n_p: honest_pairs(params.n_recipients, params.d_r),
        p_m: ln_pm.exp().clamp(0.0, 1.0),
        p_nontransfer: ln_pnt.exp().clamp(0.0, 1.0),
        p_forge: p_forge(params.n_recipients, params.d_r, p_t),
        p_t,
        ln_p_nontransfer: ln_pnt,
    })
}

/// Bound reports for every level `0..=l_max`.
pub fn all_bounds(params: &ProtocolParams) -> Result<Vec<BoundReport>> {
    (0..=params.l_max as Level)
        .map(|l| p_nontransfer(l, params, params.tail_mode))
        .collect()
}

/// Worst-case log bound over levels `0..=l_max` at a given `k`.
fn worst_ln_bound(n: u32, d_r: f64, s_levels: &SLevels, k: u64, mode: TailMode) -> Result<f64> {
    let mut worst = f64::NEG_INFINITY;
    for l in 0..=s_levels.l_max() {
        worst = worst.max(ln_nontransfer(l, n, d_r, s_levels, k, mode)?);
    }
    Ok(worst)
}

/// Smallest `k` whose worst-level non-transferability bound is at most
/// `p_target`.
pub fn solve_k(p_target: f64, n: u32, l_max: u32, spec: SLevelSpec, mode: TailMode) -> Result<u64> {
    check_probability("p_target", p_target)?;
    let d_r = compute_dr(l_max, n)?;
    let s_levels = make_s_levels(l_max as i64, spec)?;
    let ln_target = p_target.ln();
    let meets = |k: u64| -> Result<bool> { Ok(worst_ln_bound(n, d_r, &s_levels, k, mode)? <= ln_target) };

    if !meets(MAX_K)? {
        return Err(Error::Unsolvable { p_target });
    }
    let (mut lo, mut hi) = (1u64, MAX_K);
    if meets(lo)? {
        return Ok(1);
    }
    // Invariant: !meets(lo) && meets(hi).
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if meets(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    // Confirm with a short linear scan across the boundary.
    let start = hi.saturating_sub(8).max(1);
    let scanned = (start..=hi + 8)
        .find(|&k| meets(k).unwrap_or(false))
        .expect("hi meets the target");
    debug_assert_eq!(scanned, hi, "bound is not monotone near the solution");
    Ok(scanned)
}

/// `⌈log₂(N·k)⌉`, at least 1.
pub fn id_bits(n: u64, k: u64) -> u32 {
    let count = n.saturating_mul(k).max(1);
    let bits = 64 - (count - 1).leading_zeros();
    bits.max(1)
}

/// Largest number of mismatches `m` out of `k` with `m / k < s`.
pub fn max_tolerated_mismatches(k: u64, s: f64) -> u64 {
    let limit = s * k as f64;
    let mut m = limit.ceil() as u64;
    while m > 0 && !((m as f64) < limit - THRESHOLD_EPS * k as f64) {
        m -= 1;
    }
    m
}

/// Probability that guessing `k` tags of `t` bits uniformly at random passes
/// a group test with threshold `s`, i.e. `P[Bin(k, 1 - 2^-t) ≤ m]`.
pub fn guess_pass_probability(k: u64, t: u32, s: f64) -> f64 {
    let m = max_tolerated_mismatches(k, s);
    ln_binomial_cdf(k, m, t).exp().clamp(0.0, 1.0)
}

/// `ln P[X ≤ m]` for `X ~ Bin(k, 1 - 2^-t)`.
fn ln_binomial_cdf(k: u64, m: u64, t: u32) -> f64 {
    // p = 1 - 2^-t mismatch probability, 1 - p = 2^-t.
    let ln_q = -(t as f64) * std::f64::consts::LN_2;
    let ln_p = (-(2f64.powi(-(t as i32)))).ln_1p();
    let ratio = ln_p - ln_q;
    let mut term = k as f64 * ln_q;
    let mut acc = term;
    for j in 0..m.min(k) {
        term += ((k - j) as f64 / (j + 1) as f64).ln() + ratio;
        acc = log_add(acc, term);
    }
    acc
}

fn log_add(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a > b { (a, b) } else { (b, a) };
    if lo == f64::NEG_INFINITY {
        return hi;
    }
    hi + (lo - hi).exp().ln_1p()
}

/// Secret-bit cost of one distribution stage.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConsumptionReport {
    pub n: u32,
    pub k: u64,
    pub a: u32,
    pub t: u32,
    pub mode: CountingMode,
    #[serde(rename = "prep_bits")]
    pub preparation_bits: u64,
    #[serde(rename = "share_bits")]
    pub sharing_bits: u64,
    pub total_bits: u64,
    pub id_bits: u32,
}

impl ConsumptionReport {
    pub const CSV_HEADER: [&'static str; 9] = [
        "n", "k", "a", "t", "mode", "prep_bits", "share_bits", "total_bits", "id_bits",
    ];
}

/// Secret bits needed by one distribution stage.
pub fn consumption(params: &ProtocolParams, mode: CountingMode) -> ConsumptionReport {
    let n = params.n_recipients as u64;
    let k = params.k;
    let a = params.msg_len_bits as u64;
    let ids = params.id_bits();
    let (preparation_bits, sharing_bits) = match mode {
        CountingMode::Literal => (n * n * k * a, n * (n - 1) * (a + ids as u64)),
        CountingMode::Accounting => {
            let key = params.key_len_bits() as u64;
            (n * n * k * key, n * (n - 1) * k * (key + ids as u64))
        }
    };
    ConsumptionReport {
        n: params.n_recipients,
        k,
        a: params.msg_len_bits,
        t: params.tag_len_bits,
        mode,
        preparation_bits,
        sharing_bits,
        total_bits: preparation_bits + sharing_bits,
        id_bits: ids,
    }
}

/// Bits the distribution stage draws from each kind of link.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LinkDemand {
    /// Signer ↔ recipient: `N·k·(a+t)`.
    pub sender_link_bits: u64,
    /// Recipient ↔ recipient: `2·k·(a+t+id_bits)`.
    pub recipient_link_bits: u64,
}

pub fn link_demand(params: &ProtocolParams) -> LinkDemand {
    let n = params.n_recipients as u64;
    let key = params.key_len_bits() as u64;
    LinkDemand {
        sender_link_bits: n * params.k * key,
        recipient_link_bits: 2 * params.k * (key + params.id_bits() as u64),
    }
}
