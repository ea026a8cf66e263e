use std::collections::BTreeMap;
use std::fs::File;
use std::io::{self, BufWriter, Write};

use anyhow::{Context, Result};
use serde::Serialize;
use uss_core::keystore::{time_to_ready, LinkId, NetworkConfig};
use uss_core::secparams::{all_bounds, consumption, BoundReport, ConsumptionReport, CountingMode, Level};
use uss_core::simlab::{
    attack_forge, attack_repudiation, axis_points, run_honest, sweep_consumption, sweep_error_tolerance,
    ForgeSpec, RepudiationSpec, SweepAxis, SweepResult,
};
use uss_core::{Error, ParamInputs, ProtocolParams, SLevelSpec, VerificationReport, VERSION};

use crate::args::{AttackKind, Axis, Cli, Command, CommonArgs, SweepArgs};

/// Link rate used when no config file is given.
const DEFAULT_RATE_BPS: f64 = 1000.0;

pub fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Params(common) => params(&common),
        Command::Run(run) => honest(&run.common, run.q),
        Command::Attack(attack) => match attack.kind {
            AttackKind::Repudiation { common, gamma, trials } => repudiation(&common, &gamma, trials),
            AttackKind::Forge {
                common,
                forger,
                target,
                colluders,
                level,
                trials,
            } => forge(&common, forger, target, colluders, level, trials),
        },
        Command::Sweep(sweep) => match sweep.axis {
            Axis::Q => sweep_q(&sweep),
            Axis::N => sweep_cost(&sweep, SweepAxis::N),
            Axis::PTarget => sweep_cost(&sweep, SweepAxis::PTarget),
            Axis::MsgLen => sweep_cost(&sweep, SweepAxis::MsgLen),
        },
        Command::TimeToReady(common) => ready(&common),
    }
}

/// Parsed `--config` plus the effective seed.
struct Setup {
    config: Option<NetworkConfig>,
    seed: u64,
}

impl Setup {
    fn load(common: &CommonArgs) -> Result<Setup> {
        let config = match &common.config {
            Some(path) => Some(NetworkConfig::from_path(path)?),
            None => None,
        };
        let seed = common
            .seed
            .or(config.as_ref().map(|c| c.seed))
            .unwrap_or(0);
        Ok(Setup { config, seed })
    }

    fn inputs(&self, common: &CommonArgs) -> ParamInputs {
        let n = common
            .n
            .or(self.config.as_ref().map(|c| c.users.saturating_sub(1)))
            .unwrap_or(7);
        ParamInputs {
            n,
            a: common.a,
            t: common.t,
            l_max: common.lmax,
            p_target: common.p_target,
            s_spec: SLevelSpec {
                eps1: common.eps1,
                eps2: common.eps2,
            },
            k: common.k,
            mode: common.mode.into(),
        }
    }

    fn network(&self, n: u32) -> NetworkConfig {
        let mut cfg = self
            .config
            .clone()
            .unwrap_or_else(|| NetworkConfig::uniform(n + 1, DEFAULT_RATE_BPS, self.seed));
        cfg.seed = self.seed;
        cfg
    }
}

fn output(common: &CommonArgs) -> Result<Box<dyn Write>> {
    Ok(match &common.out {
        Some(path) => Box::new(BufWriter::new(
            File::create(path).with_context(|| format!("creating {}", path.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn write_json<T: Serialize>(common: &CommonArgs, value: &T) -> Result<()> {
    let mut out = output(common)?;
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    out.flush()?;
    Ok(())
}

fn describe(inputs: &ParamInputs, seed: u64) -> String {
    let opt = |v: Option<String>| v.unwrap_or_else(|| "auto".into());
    format!(
        "inputs: n={} a={} t={} lmax={} p_target={:e} eps1={} eps2={} k={} mode={} seed={seed}",
        inputs.n,
        inputs.a,
        opt(inputs.t.map(|v| v.to_string())),
        opt(inputs.l_max.map(|v| v.to_string())),
        inputs.p_target,
        inputs.s_spec.eps1,
        inputs.s_spec.eps2,
        opt(inputs.k.map(|v| v.to_string())),
        inputs.mode,
    )
}

fn csv_comments(inputs: &ParamInputs, resolved: Option<&ProtocolParams>, seed: u64) -> Result<Vec<String>> {
    let mut lines = vec![format!("uss {VERSION}"), describe(inputs, seed)];
    if let Some(p) = resolved {
        lines.push(format!("params: {}", serde_json::to_string(p)?));
    }
    Ok(lines)
}

fn write_csv<R: Serialize>(common: &CommonArgs, result: &SweepResult<R>, comments: &[String]) -> Result<()> {
    let mut out = output(common)?;
    result.write_csv(&mut out, comments)?;
    out.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct ParamsOutput<'a> {
    version: &'static str,
    params: &'a ProtocolParams,
    delta_levels: BTreeMap<Level, f64>,
    bounds: Vec<BoundReport>,
    consumption: Vec<ConsumptionReport>,
}

fn params(common: &CommonArgs) -> Result<()> {
    let setup = Setup::load(common)?;
    let p = setup.inputs(common).resolve()?;
    let delta_levels = (-1..=p.l_max as Level)
        .map(|l| Ok((l, p.delta(l)?)))
        .collect::<Result<_, Error>>()?;
    write_json(
        common,
        &ParamsOutput {
            version: VERSION,
            params: &p,
            delta_levels,
            bounds: all_bounds(&p)?,
            consumption: vec![
                consumption(&p, CountingMode::Literal),
                consumption(&p, CountingMode::Accounting),
            ],
        },
    )
}

#[derive(Serialize)]
struct LinkUse {
    link: String,
    bits: u64,
}

#[derive(Serialize)]
struct RunOutput<'a> {
    version: &'static str,
    seed: u64,
    params: &'a ProtocolParams,
    all_accepted: bool,
    reports: Vec<VerificationReport>,
    chain: Vec<VerificationReport>,
    consumed: Vec<LinkUse>,
}

fn honest(common: &CommonArgs, q: Option<f64>) -> Result<()> {
    let setup = Setup::load(common)?;
    let p = setup.inputs(common).resolve()?;
    let mut cfg = setup.network(p.n_recipients);
    if let Some(q) = q {
        if !(0.0..=1.0).contains(&q) {
            return Err(Error::InvalidParameter {
                param: "q",
                reason: format!("must be in [0, 1], got {q}"),
            }
            .into());
        }
        cfg = cfg.with_signer_link_flips(q);
    }
    let run = run_honest(&p, &cfg)?;
    write_json(
        common,
        &RunOutput {
            version: VERSION,
            seed: setup.seed,
            params: &p,
            all_accepted: run.all_accepted(),
            consumed: run
                .consumed
                .iter()
                .map(|(id, &bits)| LinkUse {
                    link: id.to_string(),
                    bits,
                })
                .collect(),
            reports: run.reports,
            chain: run.chain,
        },
    )
}

#[derive(Serialize)]
struct RepudiationRow {
    gamma: f64,
    k: u64,
    trials: u64,
    successes: u64,
    rate: f64,
    wilson_lo: f64,
    wilson_hi: f64,
    bound: f64,
    within_bound: bool,
}

fn repudiation(common: &CommonArgs, gammas: &[f64], trials: u64) -> Result<()> {
    let setup = Setup::load(common)?;
    let inputs = setup.inputs(common);
    let p = inputs.resolve()?;
    let mut rows = Vec::with_capacity(gammas.len());
    for (i, &gamma) in gammas.iter().enumerate() {
        let spec = RepudiationSpec::uniform(gamma, p.n_recipients, trials, setup.seed.wrapping_add(i as u64));
        let out = attack_repudiation(&spec, &p)?;
        rows.push(RepudiationRow {
            gamma,
            k: p.k,
            trials: out.estimate.trials,
            successes: out.estimate.successes,
            rate: out.estimate.rate,
            wilson_lo: out.estimate.wilson_lo,
            wilson_hi: out.estimate.wilson_hi,
            bound: out.analytic_bound,
            within_bound: out.within_bound(),
        });
    }
    let result = SweepResult {
        axis: "gamma".into(),
        rows,
    };
    write_csv(common, &result, &csv_comments(&inputs, Some(&p), setup.seed)?)
}

#[derive(Serialize)]
struct ForgeRow {
    forger: u32,
    target: u32,
    colluders: String,
    level: Level,
    trials: u64,
    successes: u64,
    rate: f64,
    wilson_lo: f64,
    wilson_hi: f64,
    p_t: f64,
    forge_bound: f64,
    union_bound: f64,
    within_threat_model: bool,
}

fn forge(common: &CommonArgs, forger: u32, target: u32, colluders: Vec<u32>, level: Level, trials: u64) -> Result<()> {
    let setup = Setup::load(common)?;
    let inputs = setup.inputs(common);
    let p = inputs.resolve()?;
    let spec = ForgeSpec {
        forger,
        colluders,
        target,
        level,
        trials,
        seed: setup.seed,
    };
    let out = attack_forge(&spec, &p)?;
    let row = ForgeRow {
        forger,
        target,
        colluders: spec.colluders.iter().map(u32::to_string).collect::<Vec<_>>().join(";"),
        level,
        trials: out.estimate.trials,
        successes: out.estimate.successes,
        rate: out.estimate.rate,
        wilson_lo: out.estimate.wilson_lo,
        wilson_hi: out.estimate.wilson_hi,
        p_t: out.p_t,
        forge_bound: out.forge_bound,
        union_bound: out.union_bound,
        within_threat_model: out.within_threat_model,
    };
    let result = SweepResult {
        axis: "forge".into(),
        rows: vec![row],
    };
    write_csv(common, &result, &csv_comments(&inputs, Some(&p), setup.seed)?)
}

fn sweep_cost(args: &SweepArgs, axis: SweepAxis) -> Result<()> {
    let setup = Setup::load(&args.common)?;
    let inputs = setup.inputs(&args.common);
    let values = axis_points(axis, args.from, args.to, args.points)?;
    let result = sweep_consumption(axis, &values, &inputs)?;
    let mut comments = csv_comments(&inputs, None, setup.seed)?;
    let range = match axis {
        SweepAxis::PTarget => format!("{:e} to {:e}", args.from, args.to),
        _ => format!("{} to {}", args.from, args.to),
    };
    comments.push(format!("axis: {axis} from {range} (l_max and k recomputed per point)"));
    write_csv(&args.common, &result, &comments)
}

fn sweep_q(args: &SweepArgs) -> Result<()> {
    let setup = Setup::load(&args.common)?;
    let inputs = setup.inputs(&args.common);
    let p = inputs.resolve()?;
    if args.points == 0 {
        return Err(Error::InvalidParameter {
            param: "points",
            reason: "must be >= 1".into(),
        }
        .into());
    }
    let steps = args.points as f64;
    let values: Vec<f64> = (0..=args.points)
        .map(|i| args.from + (args.to - args.from) * i as f64 / steps)
        .collect();
    let result = sweep_error_tolerance(&values, &p, args.margin, args.runs, setup.seed)?;
    let mut comments = csv_comments(&inputs, Some(&p), setup.seed)?;
    comments.push(format!("axis: q, margin {}, {} runs per point", args.margin, args.runs));
    write_csv(&args.common, &result, &comments)
}

#[derive(Serialize)]
struct ReadyOutput {
    version: &'static str,
    seconds: f64,
    binding_link: String,
    per_link: Vec<ReadyLink>,
}

#[derive(Serialize)]
struct ReadyLink {
    link: String,
    bits: u64,
    seconds: f64,
}

fn ready(common: &CommonArgs) -> Result<()> {
    let setup = Setup::load(common)?;
    let p = setup.inputs(common).resolve()?;
    let est = time_to_ready(&setup.network(p.n_recipients), &p)?;
    let name = |id: LinkId| id.to_string();
    write_json(
        common,
        &ReadyOutput {
            version: VERSION,
            seconds: est.seconds,
            binding_link: name(est.binding_link),
            per_link: est
                .per_link
                .into_iter()
                .map(|(id, bits, seconds)| ReadyLink {
                    link: name(id),
                    bits,
                    seconds,
                })
                .collect(),
        },
    )
}
