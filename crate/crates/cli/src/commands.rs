use std::path::Path;
use std::time::Instant;

use kcenter_coreset::dynamic::{sparsity_target, ReportSource};
use kcenter_coreset::io::{
    format_points, format_updates, read_assignment, read_points, read_updates, write_text,
};
use kcenter_coreset::lower_bounds::{gen_dynamic_lb, gen_insertion_lb, gen_one_dim_lb};
use kcenter_coreset::metric::{total_weight, unit_weights};
use kcenter_coreset::mpc::{run_one_round_randomized, run_r_round, run_two_round};
use kcenter_coreset::solvers::{mbc_size_bound, DEFAULT_SUBSET_CAP};
use kcenter_coreset::validate::check_coreset_at;
use kcenter_coreset::{
    mbc_construction, DynamicConfig, DynamicCoresetState, Error, GridConfig, Instance, MpcConfig,
    Result, StreamState, WeightedPoint,
};

use crate::args::{
    parse_dist, parse_tuple, universe, Algo, Cli, Command, DistSpec, DynamicArgs, Family, GenArgs,
    MetricArg, MpcArgs, OfflineArgs, Problem, StreamArgs, ValidateArgs,
};
use crate::stats::{Params, RunStats};

pub struct Outcome {
    pub stats: String,
    pub passed: bool,
}

pub fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Input(_) | Error::Degenerate(_) | Error::Config(_) => 3,
        Error::Capacity(_) => 4,
        Error::SketchFailure(_) => 5,
    }
}

pub fn run(cli: Cli) -> Result<Outcome> {
    let start = Instant::now();
    let (mut stats, passed) = match cli.command {
        Command::Offline(a) => (offline(a)?, true),
        Command::Stream(a) => (stream(a)?, true),
        Command::Dynamic(a) => (dynamic(a)?, true),
        Command::Mpc(a) => (mpc(a)?, true),
        Command::Gen(a) => (generate(a)?, true),
        Command::Validate(a) => validate(a)?,
    };
    stats.wall_time_ms = start.elapsed().as_secs_f64() * 1e3;
    let stats = serde_json::to_string(&stats).map_err(|e| Error::Input(e.to_string()))?;
    Ok(Outcome { stats, passed })
}

fn params(p: &Problem, metric: Option<MetricArg>, d: Option<usize>) -> Params {
    Params {
        k: Some(p.k),
        z: Some(p.z),
        eps: Some(p.eps),
        metric: metric.map(|m| match m {
            MetricArg::L2 => "l2",
            MetricArg::Linf => "linf",
        }),
        d,
    }
}

fn write_out(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => write_text(path, text),
        None => Ok(()),
    }
}

fn arg_error(msg: impl Into<String>) -> Error {
    Error::Input(msg.into())
}

fn dim_of(points: &[WeightedPoint]) -> Result<usize> {
    points
        .first()
        .map(|p| p.point.dim())
        .ok_or_else(|| arg_error("the point file holds no points"))
}

fn offline(a: OfflineArgs) -> Result<RunStats> {
    let points = read_points(&a.input)?;
    let d = dim_of(&points)?;
    let Problem { k, z, eps } = a.problem;
    let metric = a.metric.metric();
    let inst = Instance::new(points, k, z, eps, metric.clone())?;
    let mbc = mbc_construction(&inst)?;
    let mut stats = RunStats::new(
        "offline",
        "mini-ball-covering",
        params(&a.problem, Some(a.metric), Some(d)),
    );
    stats.radii(&inst.points, &mbc.representatives, k, z, &metric)?;
    stats.set("n", inst.points.len());
    stats.set("size_bound", mbc_size_bound(k, z, eps, d));
    stats.set("greedy_radius", mbc.greedy_radius);
    stats.set("ball_radius", mbc.ball_radius);
    write_out(a.out.as_deref(), &format_points(&mbc.representatives))?;
    Ok(stats)
}

fn stream(a: StreamArgs) -> Result<RunStats> {
    let points = read_points(&a.input)?;
    let d = a.d.unwrap_or(dim_of(&points)?);
    let Problem { k, z, eps } = a.problem;
    let metric = a.metric.metric();
    let mut state = StreamState::new(k, z, eps, d, metric.clone())?;
    // a weight-w line stands for w arrivals at that location
    for wp in &points {
        for _ in 0..wp.weight {
            state.handle_arrival(wp.point.clone())?;
        }
    }
    let mut stats = RunStats::new(
        "stream",
        "insertion-only",
        params(&a.problem, Some(a.metric), Some(d)),
    );
    stats.radii(&points, state.report(), k, z, &metric)?;
    stats.set("arrivals", state.arrivals());
    stats.set("final_r", state.r());
    stats.set("threshold", state.threshold());
    write_out(a.out.as_deref(), &format_points(state.report()))?;
    Ok(stats)
}

fn dynamic(a: DynamicArgs) -> Result<RunStats> {
    let updates = read_updates(&a.input)?;
    let grid = GridConfig::new(updates.delta, updates.dim)?;
    let Problem { k, z, eps } = a.problem;
    let cfg = DynamicConfig {
        k,
        z,
        epsilon: eps,
        delta: a.fail_prob,
        seed: a.seed,
        exact_shadow: a.exact_shadow,
    };
    let mut state = DynamicCoresetState::new(grid, cfg)?;
    for (i, u) in updates.updates.iter().enumerate() {
        state
            .update(&u.point, u.sign)
            .map_err(|e| arg_error(format!("update {}: {e}", i + 1)))?;
    }
    let report = state.report()?;
    let mut stats = RunStats::new(
        "dynamic",
        "turnstile-grid",
        params(&a.problem, None, Some(updates.dim)),
    );
    stats.seed = Some(a.seed);
    stats.coreset_size = Some(report.coreset.len());
    stats.set("ops", state.ops());
    stats.set("live_count", state.live_count());
    stats.set("level", report.level);
    stats.set("sketch_bytes", state.sketch_bytes());
    stats.set("s", sparsity_target(k, z, eps, updates.dim));
    stats.set("source", report.source);
    if a.exact_shadow {
        let exact = state.report_exact()?;
        stats.set("exact_level", exact.level);
        stats.set(
            "agrees_with_exact",
            exact.coreset == report.coreset && report.source == ReportSource::Sketch,
        );
        if let Some(live) = state.shadow_points() {
            stats.radii(&live, &report.coreset, k, z, &kcenter_coreset::Metric::L2)?;
        }
    }
    write_out(a.out.as_deref(), &format_points(&report.coreset))?;
    Ok(stats)
}

fn mpc(a: MpcArgs) -> Result<RunStats> {
    let points = read_points(&a.input)?;
    let d = dim_of(&points)?;
    let Problem { k, z, eps } = a.problem;
    let metric = a.metric.metric();
    let distribution = match parse_dist(&a.dist, a.seed).map_err(arg_error)? {
        DistSpec::Ready(dist) => dist,
        DistSpec::File(path) => kcenter_coreset::Distribution::Adversarial(read_assignment(path)?),
    };
    let seed = match distribution {
        kcenter_coreset::Distribution::Random(s) => Some(s),
        _ => None,
    };
    let cfg = MpcConfig::new(a.machines, distribution)?;
    let (run, name) = match a.algo {
        Algo::TwoRound => (
            run_two_round(&points, k, z, eps, &metric, &cfg)?,
            "two-round",
        ),
        Algo::OneRound => (
            run_one_round_randomized(&points, k, z, eps, &metric, &cfg)?,
            "one-round",
        ),
        Algo::RRound => {
            let rounds = a
                .rounds
                .ok_or_else(|| arg_error("--rounds is required for r-round"))?;
            (
                run_r_round(&points, k, z, eps, &metric, rounds, &cfg)?,
                "r-round",
            )
        }
    };
    let mut stats = RunStats::new("mpc", name, params(&a.problem, Some(a.metric), Some(d)));
    stats.seed = seed;
    stats.radii(&points, &run.coreset, k, z, &metric)?;
    stats.set("machines", a.machines);
    stats.set("rounds", run.rounds_used);
    stats.set("per_machine_peak_words", &run.per_machine_peak_words);
    stats.set("coordinator_peak_words", run.coordinator_peak_words);
    stats.set("messages_per_round", &run.messages_per_round);
    stats.set("words_per_round", &run.words_per_round);
    stats.set("r_hat", run.details.r_hat);
    stats.set("beta", run.details.beta);
    write_out(a.out.as_deref(), &format_points(&run.coreset))?;
    if let Some(path) = &a.transcript {
        let json =
            serde_json::to_string_pretty(&run.transcript).map_err(|e| arg_error(e.to_string()))?;
        write_text(path, &json)?;
    }
    Ok(stats)
}

fn required<T>(v: Option<T>, flag: &str, family: &str) -> Result<T> {
    v.ok_or_else(|| arg_error(format!("--{flag} is required for {family}")))
}

fn generate(a: GenArgs) -> Result<RunStats> {
    let base = Params {
        k: Some(a.k),
        z: Some(a.z),
        eps: a.eps,
        metric: None,
        d: a.d,
    };
    match a.family {
        Family::InsertionLb => {
            let eps = required(a.eps, "eps", "insertion-lb")?;
            let d = required(a.d, "d", "insertion-lb")?;
            let probe = match &a.probe {
                Some(s) => {
                    let v = parse_tuple(s, 2, "--probe").map_err(arg_error)?;
                    Some((v[0] as usize, v[1] as usize))
                }
                None => None,
            };
            let inst = gen_insertion_lb(a.k, a.z, eps, d, probe)?;
            let stream = inst.stream();
            let mut stats = RunStats::new("gen", "insertion-lb", base);
            stats.set("points", stream.len());
            stats.set("geometry", inst.geometry);
            if let Some(p) = &inst.probe {
                stats.set("p_star", &p.p_star);
            }
            write_text(&a.out, &format_points(&unit_weights(&stream)))?;
            Ok(stats)
        }
        Family::OneDimLb => {
            let pts = gen_one_dim_lb(a.k, a.z, a.extra)?;
            let mut stats = RunStats::new("gen", "one-dim-lb", base);
            stats.set("points", pts.len());
            write_text(&a.out, &format_points(&unit_weights(&pts)))?;
            Ok(stats)
        }
        Family::DynamicLb => {
            let eps = required(a.eps, "eps", "dynamic-lb")?;
            let d = required(a.d, "d", "dynamic-lb")?;
            let delta = required(a.delta, "delta", "dynamic-lb")?;
            let lb = gen_dynamic_lb(a.k, a.z, eps, d, delta)?;
            let mut stats = RunStats::new("gen", "dynamic-lb", base);
            let stream = match &a.scenario {
                Some(s) => {
                    let v = parse_tuple(s, 3, "--scenario").map_err(arg_error)?;
                    let m = u32::try_from(v[1])
                        .map_err(|_| arg_error("--scenario group is too large"))?;
                    let (stream, probe) = lb.scenario(v[0] as usize, m, v[2] as usize)?;
                    stats.set("p_star", &probe.p_star);
                    stream
                }
                None => lb.insertions(),
            };
            stats.set("updates", stream.updates.len());
            stats.set("delta", stream.delta);
            stats.set("groups", lb.g);
            stats.set("geometry", lb.geometry);
            write_text(&a.out, &format_updates(&stream))?;
            Ok(stats)
        }
    }
}

fn validate(a: ValidateArgs) -> Result<(RunStats, bool)> {
    let points = read_points(&a.input)?;
    let coreset = read_points(&a.coreset)?;
    let d = dim_of(&points)?;
    let Problem { k, z, eps } = a.problem;
    let quality = a.quality.unwrap_or(eps);
    let inst = Instance::new(points, k, z, eps, a.metric.metric())?;
    let uni = universe(a.universe, &inst.points, &coreset);
    let report = check_coreset_at(&inst, quality, &coreset, &uni, DEFAULT_SUBSET_CAP)?;
    let mut stats = RunStats::new(
        "validate",
        "coreset-check",
        params(&a.problem, Some(a.metric), Some(d)),
    );
    stats.coreset_size = Some(coreset.len());
    stats.oracle_opt = report.opt;
    stats.coreset_opt = report.coreset_opt;
    stats.set("quality", quality);
    stats.set("input_weight", total_weight(&inst.points));
    stats.set("coreset_weight", total_weight(&coreset));
    stats.set("passed", report.passed);
    stats.set("violated", report.violated);
    stats.set("witness", &report.witness);
    if let Some(v) = report.violated {
        eprintln!("violated: {v}: {}", report.witness);
    }
    Ok((stats, report.passed))
}
