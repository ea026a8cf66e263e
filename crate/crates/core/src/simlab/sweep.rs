use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use super::{random_message, Estimate};
use crate::error::{Error, Result};
use crate::keystore::{KeyNetwork, NetworkConfig};
use crate::protocol::{distribute, verify};
use crate::secparams::{
    consumption, default_tag_len, make_s_levels, solve_k, CountingMode, Level, ParamInputs, ProtocolParams,
    SLevelSpec,
};
use crate::seed::{derive_seed, Domain};

/// Margin added above the expected mismatch fraction when re-tuning
/// `s_{l_max}` for noisy keys.
pub const DEFAULT_MARGIN: f64 = 0.002;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    N,
    PTarget,
    MsgLen,
}

impl fmt::Display for SweepAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SweepAxis::N => "n",
            SweepAxis::PTarget => "p_target",
            SweepAxis::MsgLen => "msg_len",
        })
    }
}

impl FromStr for SweepAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "n" => Ok(SweepAxis::N),
            "p_target" | "p-target" => Ok(SweepAxis::PTarget),
            "msg_len" | "msg-len" | "a" => Ok(SweepAxis::MsgLen),
            other => Err(Error::invalid(
                "axis",
                format!("expected one of n, p_target, msg_len; got `{other}`"),
            )),
        }
    }
}

/// Axis values between `from` and `to` inclusive.
///
/// Integer axes step by one. The `p_target` axis takes `per_decade` points in
/// each decade on a log scale, in the direction from `from` to `to`.
pub fn axis_points(axis: SweepAxis, from: f64, to: f64, per_decade: u32) -> Result<Vec<f64>> {
    match axis {
        SweepAxis::N | SweepAxis::MsgLen => {
            let name = if axis == SweepAxis::N { "n" } else { "msg_len" };
            for v in [from, to] {
                if v.fract() != 0.0 || v < 1.0 {
                    return Err(Error::invalid(name, format!("axis bounds must be positive integers, got {v}")));
                }
            }
            let (lo, hi) = (from.min(to) as u64, from.max(to) as u64);
            let mut pts: Vec<f64> = (lo..=hi).map(|v| v as f64).collect();
            if from > to {
                pts.reverse();
            }
            Ok(pts)
        }
        SweepAxis::PTarget => {
            for v in [from, to] {
                if !(v > 0.0 && v < 1.0) {
                    return Err(Error::invalid("p_target", format!("axis bounds must lie in (0, 1), got {v}")));
                }
            }
            if per_decade == 0 {
                return Err(Error::invalid("points", "must be >= 1 per decade"));
            }
            let (a, b) = (from.log10(), to.log10());
            let steps = ((b - a).abs() * per_decade as f64).round() as i64;
            let sign = if b < a { -1.0 } else { 1.0 };
            Ok((0..=steps)
                .map(|i| {
                    let e = a + sign * i as f64 / per_decade as f64;
                    // Round-trip through text so that decade points equal
                    // the literal a user would type, e.g. `1e-10`.
                    let rounded = (e * 1e9).round() / 1e9;
                    if rounded.fract() == 0.0 {
                        format!("1e{}", rounded as i64).parse().expect("valid float")
                    } else {
                        10f64.powf(e)
                    }
                })
                .collect())
        }
    }
}

/// One point of a consumption sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConsumptionRow {
    pub axis_value: f64,
    pub n: u32,
    pub l_max: u32,
    pub band: String,
    pub d_r: f64,
    pub p_target: f64,
    pub a: u32,
    pub t: u32,
    pub k: u64,
    pub id_bits: u32,
    pub literal_bits: u64,
    pub accounting_bits: u64,
}

/// One point of an error-tolerance sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErrorToleranceRow {
    pub q: f64,
    pub trials: u64,
    pub passes: u64,
    pub pass_rate: f64,
    pub wilson_lo: f64,
    pub wilson_hi: f64,
    pub expected_mismatch: f64,
    pub s_lmax_adjusted: f64,
    pub k_adjusted: u64,
    pub id_bits: u32,
    pub prep_bits: u64,
    pub share_bits: u64,
    pub total_bits: u64,
}

/// Rows of one sweep plus the axis that generated them.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult<R> {
    pub axis: String,
    pub rows: Vec<R>,
}

impl<R: Serialize> SweepResult<R> {
    /// Writes `# `-prefixed comment lines, then a header row and one row per
    /// point.
    pub fn write_csv<W: Write>(&self, mut out: W, comments: &[String]) -> Result<()> {
        let io = |e: std::io::Error| Error::Config(format!("writing csv: {e}"));
        for c in comments {
            writeln!(out, "# {c}").map_err(io)?;
        }
        let mut w = csv::Writer::from_writer(out);
        for row in &self.rows {
            w.serialize(row).map_err(|e| Error::Config(format!("writing csv: {e}")))?;
        }
        w.flush().map_err(io)?;
        Ok(())
    }
}

/// Recompute `l_max`, `d_R`, s-levels, `k` and both consumption counts at
/// each axis value. Any `l_max` or `k` in `base` is ignored.
pub fn sweep_consumption(axis: SweepAxis, values: &[f64], base: &ParamInputs) -> Result<SweepResult<ConsumptionRow>> {
    if values.is_empty() {
        return Err(Error::invalid("range", "sweep range is empty"));
    }
    let rows = values
        .iter()
        .map(|&v| {
            let mut inputs = ParamInputs {
                l_max: None,
                k: None,
                ..base.clone()
            };
            match axis {
                SweepAxis::N => inputs.n = v as u32,
                SweepAxis::PTarget => inputs.p_target = v,
                SweepAxis::MsgLen => {
                    inputs.a = v as u32;
                    inputs.t = Some(base.t.unwrap_or_else(|| default_tag_len(inputs.a)).min(inputs.a));
                }
            }
            let p = inputs.resolve()?;
            Ok(ConsumptionRow {
                axis_value: v,
                n: p.n_recipients,
                l_max: p.l_max,
                band: format!("lmax={}", p.l_max),
                d_r: p.d_r,
                p_target: p.p_target,
                a: p.msg_len_bits,
                t: p.tag_len_bits,
                k: p.k,
                id_bits: p.id_bits(),
                literal_bits: consumption(&p, CountingMode::Literal).total_bits,
                accounting_bits: consumption(&p, CountingMode::Accounting).total_bits,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepResult {
        axis: axis.to_string(),
        rows,
    })
}

/// `e(q) = (1 - (1-q)^(a+t)) (1 - 2^-t)`: chance that a key with bit flips
/// at rate `q` yields a tag different from the signer's.
pub fn expected_mismatch_fraction(q: f64, a: u32, t: u32) -> f64 {
    (1.0 - (1.0 - q).powi((a + t) as i32)) * (1.0 - 2f64.powi(-(t as i32)))
}

/// For each `q`: the empirical rate at which recipients accept at `l_max`
/// when signer-link keys carry flips at rate `q` (over `runs` full protocol
/// runs), and the cost after raising `s_{l_max}` to `max(s_{l_max}, e(q) +
/// margin)` and re-solving `k`.
pub fn sweep_error_tolerance(
    q_values: &[f64],
    params: &ProtocolParams,
    margin: f64,
    runs: u64,
    seed: u64,
) -> Result<SweepResult<ErrorToleranceRow>> {
    params.validate()?;
    if q_values.is_empty() {
        return Err(Error::invalid("q", "sweep range is empty"));
    }
    if let Some(q) = q_values.iter().find(|q| !(0.0..0.5).contains(*q)) {
        return Err(Error::invalid("q", format!("{q} outside [0, 1/2)")));
    }
    if !(margin >= 0.0) {
        return Err(Error::invalid("margin", format!("must be >= 0, got {margin}")));
    }
    if runs == 0 {
        return Err(Error::invalid("runs", "must be >= 1"));
    }
    let (a, t) = (params.msg_len_bits, params.tag_len_bits);
    let top = params.l_max as Level;
    let base_spec = SLevelSpec {
        eps1: params.s(top),
        eps2: 0.5 - params.s(-1),
    };

    let mut rows = Vec::with_capacity(q_values.len());
    for (qi, &q) in q_values.iter().enumerate() {
        let q_seed = derive_seed(seed, Domain::Trial, qi as u64);
        let passes = (0..runs)
            .into_par_iter()
            .map(|run| -> Result<u64> {
                let run_seed = derive_seed(q_seed, Domain::Trial, run);
                let cfg = NetworkConfig::uniform(params.n_recipients + 1, 1.0, run_seed).with_signer_link_flips(q);
                let mut network = KeyNetwork::new(&cfg)?;
                let (signer, recipients) = distribute(&mut network, params)?;
                let sig = signer.sign(&random_message(run_seed, a))?;
                let mut ok = 0;
                for r in &recipients {
                    ok += verify(r, &sig, top, params)?.accepted as u64;
                }
                Ok(ok)
            })
            .try_reduce(|| 0, |x, y| Ok(x + y))?;
        let est = Estimate::new(passes, runs * params.n_recipients as u64);

        let e_q = expected_mismatch_fraction(q, a, t);
        let s_top = base_spec.eps1.max(e_q + margin);
        let spec = SLevelSpec {
            eps1: s_top,
            eps2: base_spec.eps2,
        };
        if spec.validate().is_err() || make_s_levels(params.l_max as i64, spec).is_err() {
            return Err(Error::invalid(
                "q",
                format!("adjusted s_lmax = {s_top:.4} leaves no room for lower levels at q = {q}"),
            ));
        }
        let k = solve_k(params.p_target, params.n_recipients, params.l_max, spec, params.tail_mode)?;
        let adjusted = ProtocolParams {
            k,
            s_levels: make_s_levels(params.l_max as i64, spec)?,
            ..params.clone()
        };
        let cost = consumption(&adjusted, CountingMode::Accounting);
        rows.push(ErrorToleranceRow {
            q,
            trials: est.trials,
            passes: est.successes,
            pass_rate: est.rate,
            wilson_lo: est.wilson_lo,
            wilson_hi: est.wilson_hi,
            expected_mismatch: e_q,
            s_lmax_adjusted: s_top,
            k_adjusted: k,
            id_bits: cost.id_bits,
            prep_bits: cost.preparation_bits,
            share_bits: cost.sharing_bits,
            total_bits: cost.total_bits,
        });
    }
    Ok(SweepResult {
        axis: "q".to_string(),
        rows,
    })
}
