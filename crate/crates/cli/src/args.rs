use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use uss_core::TailMode;

#[derive(Debug, Parser)]
#[command(name = "uss", version, about = "Multi-recipient unconditionally secure signatures over simulated QKD links")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Resolve parameters and print thresholds, bounds and bit costs.
    Params(CommonArgs),
    /// One honest distribution, signature and verification by everyone.
    Run(RunArgs),
    /// Monte Carlo attack experiments, written as CSV.
    Attack(AttackArgs),
    /// Parameter sweeps, written as CSV.
    Sweep(SweepArgs),
    /// Worst-link time to gather the key material for one distribution.
    TimeToReady(CommonArgs),
}

/// Parameter overrides shared by every subcommand.
#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// Network config (JSON); `n` defaults to its user count minus one.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Number of recipients.
    #[arg(long)]
    pub n: Option<u32>,
    /// Highest transferability level; derived from n when omitted.
    #[arg(long)]
    pub lmax: Option<u32>,
    /// Message length in bits.
    #[arg(long, default_value_t = 8)]
    pub a: u32,
    /// Tag length in bits; defaults to min(a, 32).
    #[arg(long)]
    pub t: Option<u32>,
    #[arg(long, default_value_t = 1e-10)]
    pub p_target: f64,
    #[arg(long, default_value_t = 0.005)]
    pub eps1: f64,
    #[arg(long, default_value_t = 0.001)]
    pub eps2: f64,
    /// Keys per group; solved from p-target when omitted.
    #[arg(long)]
    pub k: Option<u64>,
    /// Exponent form of the tail bound used by the solver.
    #[arg(long, value_enum, default_value_t = Mode::Squared)]
    pub mode: Mode,
    /// Root seed; falls back to USS_SEED, then the config's seed, then 0.
    #[arg(long, env = "USS_SEED")]
    pub seed: Option<u64>,
    /// Write output here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Literal,
    Squared,
}

impl From<Mode> for TailMode {
    fn from(m: Mode) -> TailMode {
        match m {
            Mode::Literal => TailMode::Literal,
            Mode::Squared => TailMode::Squared,
        }
    }
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Bit-flip probability on every signer link, overriding the config.
    #[arg(long)]
    pub q: Option<f64>,
}

#[derive(Debug, Args)]
pub struct AttackArgs {
    #[command(subcommand)]
    pub kind: AttackKind,
}

#[derive(Debug, Subcommand)]
pub enum AttackKind {
    /// Dishonest signer corrupting a fraction of each origin block.
    Repudiation {
        #[command(flatten)]
        common: CommonArgs,
        /// Corruption fraction; repeat or comma-separate for one row each.
        #[arg(long, value_delimiter = ',', required = true)]
        gamma: Vec<f64>,
        #[arg(long, default_value_t = 10_000)]
        trials: u64,
    },
    /// Recipient coalition guessing the tags it cannot compute.
    Forge {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, default_value_t = 0)]
        forger: u32,
        #[arg(long)]
        target: u32,
        #[arg(long, value_delimiter = ',')]
        colluders: Vec<u32>,
        #[arg(long, default_value_t = 0, allow_negative_numbers = true)]
        level: i32,
        #[arg(long, default_value_t = 10_000)]
        trials: u64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Axis {
    N,
    #[value(name = "p_target", alias = "p-target")]
    PTarget,
    #[value(name = "msg_len", alias = "msg-len")]
    MsgLen,
    /// Signer-link flip probability: pass rate and adjusted cost.
    Q,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long, value_enum)]
    pub axis: Axis,
    #[arg(long)]
    pub from: f64,
    #[arg(long)]
    pub to: f64,
    /// Points per decade on the p_target axis, or the number of intervals on
    /// the q axis.
    #[arg(long, default_value_t = 1)]
    pub points: u32,
    /// Protocol runs per point on the q axis.
    #[arg(long, default_value_t = 100)]
    pub runs: u64,
    /// Margin above the expected mismatch fraction on the q axis.
    #[arg(long, default_value_t = uss_core::simlab::DEFAULT_MARGIN)]
    pub margin: f64,
}
