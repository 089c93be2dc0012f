use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use kcenter_coreset::{CenterUniverse, Distribution, Metric};

#[derive(Debug, Parser)]
#[command(
    name = "kcoreset",
    version,
    about = "Coresets for k-center with outliers"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Mini-ball covering of a point file.
    Offline(OfflineArgs),
    /// Insertion-only streaming coreset over a point file read in order.
    Stream(StreamArgs),
    /// Fully dynamic coreset over an update file.
    Dynamic(DynamicArgs),
    /// Simulated MPC protocols.
    Mpc(MpcArgs),
    /// Lower-bound instance generators.
    Gen(GenArgs),
    /// Check that a weighted point set is a coreset of a point file.
    Validate(ValidateArgs),
}

#[derive(Debug, Args)]
pub struct Problem {
    #[arg(long)]
    pub k: usize,
    #[arg(long)]
    pub z: u64,
    /// Accuracy, as a decimal or a fraction such as `1/4`.
    #[arg(long, value_parser = parse_fraction)]
    pub eps: f64,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum MetricArg {
    L2,
    Linf,
}

impl MetricArg {
    pub fn metric(self) -> Metric {
        match self {
            MetricArg::L2 => Metric::L2,
            MetricArg::Linf => Metric::Linf,
        }
    }
}

#[derive(Debug, Args)]
pub struct OfflineArgs {
    /// Point file.
    #[arg(long)]
    pub input: PathBuf,
    #[command(flatten)]
    pub problem: Problem,
    #[arg(long, value_enum, default_value = "l2")]
    pub metric: MetricArg,
    /// Coreset output file.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct StreamArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[command(flatten)]
    pub problem: Problem,
    /// Doubling dimension; defaults to the coordinate dimension.
    #[arg(long)]
    pub d: Option<usize>,
    #[arg(long, value_enum, default_value = "l2")]
    pub metric: MetricArg,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DynamicArgs {
    /// Update file.
    #[arg(long)]
    pub input: PathBuf,
    #[command(flatten)]
    pub problem: Problem,
    /// Failure probability of one report.
    #[arg(long, default_value_t = 0.1)]
    pub fail_prob: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Also keep exact cell counts and report the exact answer alongside.
    #[arg(long)]
    pub exact_shadow: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
#[allow(clippy::enum_variant_names)]
pub enum Algo {
    TwoRound,
    OneRound,
    RRound,
}

#[derive(Debug, Args)]
pub struct MpcArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[command(flatten)]
    pub problem: Problem,
    #[arg(long, value_enum)]
    pub algo: Algo,
    #[arg(long)]
    pub machines: usize,
    /// Number of rounds, r-round only.
    #[arg(long)]
    pub rounds: Option<usize>,
    /// `adversarial:<file>`, `roundrobin`, `random` or `random:<seed>`.
    #[arg(long, default_value = "roundrobin")]
    pub dist: String,
    /// Seed for `--dist random` without an explicit seed.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value = "l2")]
    pub metric: MetricArg,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Write the message transcript as JSON.
    #[arg(long)]
    pub transcript: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
#[allow(clippy::enum_variant_names)]
pub enum Family {
    InsertionLb,
    OneDimLb,
    DynamicLb,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long, value_enum)]
    pub family: Family,
    #[arg(long)]
    pub k: usize,
    #[arg(long)]
    pub z: u64,
    #[arg(long, value_parser = parse_fraction)]
    pub eps: Option<f64>,
    #[arg(long)]
    pub d: Option<usize>,
    /// Grid side for `dynamic-lb`.
    #[arg(long)]
    pub delta: Option<u64>,
    /// `insertion-lb`: probe around point `index` of cluster `cluster`,
    /// given as `cluster,index`.
    #[arg(long)]
    pub probe: Option<String>,
    /// `dynamic-lb`: emit the deletion scenario `cluster,m,index` instead
    /// of the plain insertions.
    #[arg(long)]
    pub scenario: Option<String>,
    /// `one-dim-lb`: append the extra point.
    #[arg(long)]
    pub extra: bool,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum UniverseArg {
    /// Distinct input locations.
    Input,
    /// Per-axis values and midpoints of the input (exact for L∞).
    MidpointGrid,
    /// Input locations together with the coreset locations.
    InputAndCoreset,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub coreset: PathBuf,
    #[command(flatten)]
    pub problem: Problem,
    /// Quality to check at; defaults to `--eps`.
    #[arg(long, value_parser = parse_fraction)]
    pub quality: Option<f64>,
    #[arg(long, value_enum, default_value = "input")]
    pub universe: UniverseArg,
    #[arg(long, value_enum, default_value = "l2")]
    pub metric: MetricArg,
}

pub fn parse_fraction(s: &str) -> Result<f64, String> {
    let v = match s.split_once('/') {
        Some((a, b)) => {
            let a: f64 = a
                .trim()
                .parse()
                .map_err(|_| format!("`{a}` is not a number"))?;
            let b: f64 = b
                .trim()
                .parse()
                .map_err(|_| format!("`{b}` is not a number"))?;
            a / b
        }
        None => s
            .trim()
            .parse()
            .map_err(|_| format!("`{s}` is not a number"))?,
    };
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("`{s}` is not a finite number"))
    }
}

/// Parses `a,b` or `a,b,c` into unsigned integers.
pub fn parse_tuple(s: &str, n: usize, what: &str) -> Result<Vec<u64>, String> {
    let parts: Result<Vec<u64>, _> = s.split(',').map(|p| p.trim().parse::<u64>()).collect();
    match parts {
        Ok(v) if v.len() == n => Ok(v),
        _ => Err(format!(
            "{what} must be {n} comma-separated integers, got `{s}`"
        )),
    }
}

/// Placement named by `--dist`; an adversarial file is read by the caller.
pub enum DistSpec {
    File(PathBuf),
    Ready(Distribution),
}

pub fn parse_dist(s: &str, seed: u64) -> Result<DistSpec, String> {
    match s.split_once(':') {
        None if s == "roundrobin" => Ok(DistSpec::Ready(Distribution::RoundRobin)),
        None if s == "random" => Ok(DistSpec::Ready(Distribution::Random(seed))),
        Some(("random", v)) => v
            .parse()
            .map(|seed| DistSpec::Ready(Distribution::Random(seed)))
            .map_err(|_| format!("`{v}` is not a seed")),
        Some(("adversarial", f)) if !f.is_empty() => Ok(DistSpec::File(PathBuf::from(f))),
        _ => Err(format!(
            "unknown distribution `{s}`; expected adversarial:<file>, roundrobin, random or random:<seed>"
        )),
    }
}

pub fn universe(
    arg: UniverseArg,
    input: &[kcenter_coreset::WeightedPoint],
    coreset: &[kcenter_coreset::WeightedPoint],
) -> CenterUniverse {
    match arg {
        UniverseArg::Input => CenterUniverse::InputPoints,
        UniverseArg::MidpointGrid => CenterUniverse::LinfMidpointGrid,
        UniverseArg::InputAndCoreset => CenterUniverse::ExplicitList(
            input
                .iter()
                .chain(coreset)
                .map(|w| w.point.clone())
                .collect(),
        ),
    }
}
