//! Deterministic synchronous-round MPC simulator hosting the two-round,
//! randomized one-round and R-round coreset protocols.
//!
//! Machines are numbered from 0; machine 0 is the coordinator. A message
//! sent in round `t` is delivered at the start of round `t + 1` and inboxes
//! are sorted by sender, so a run never depends on scheduling. Storage is
//! counted in words: a weighted point costs `d + 1` words, a vector entry
//! one word.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{input, Error, Result};
use crate::metric::{Metric, WeightedPoint};
use crate::solvers::{check_params, check_weighted, greedy, mini_ball_covering};

/// How input points are placed on machines.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum Distribution {
    /// `assignment[i]` is the machine of point `i`.
    Adversarial(Vec<usize>),
    RoundRobin,
    /// Each point picks a machine uniformly at random.
    Random(u64),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MpcConfig {
    pub machines: usize,
    pub distribution: Distribution,
}

impl MpcConfig {
    pub fn new(machines: usize, distribution: Distribution) -> Result<Self> {
        if machines == 0 {
            return input("at least one machine is required");
        }
        Ok(MpcConfig {
            machines,
            distribution,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum Payload {
    Vector(Vec<f64>),
    Points(Vec<WeightedPoint>),
}

impl Payload {
    pub fn words(&self, d: usize) -> u64 {
        match self {
            Payload::Vector(v) => v.len() as u64,
            Payload::Points(p) => point_words(p.len(), d),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Message {
    pub sent_round: usize,
    pub delivered_round: usize,
    pub from: usize,
    pub to: usize,
    pub payload: Payload,
}

/// Protocol-specific quantities recorded for inspection.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct RunDetails {
    /// Outlier vectors `V_i`, two-round protocol only.
    pub outlier_vectors: Vec<Vec<f64>>,
    pub r_hat: Option<f64>,
    /// `ĵ_i` per machine, two-round protocol only.
    pub j_hat: Vec<u32>,
    /// Per-machine outlier budget used by the local coverings.
    pub local_z: Vec<u64>,
    /// Union of the coverings received by the coordinator.
    pub coordinator_union: Vec<WeightedPoint>,
    /// Branching factor, R-round protocol only.
    pub beta: Option<usize>,
    /// Active machines per round, R-round protocol only.
    pub active_per_round: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MpcRun {
    pub rounds_used: usize,
    pub per_machine_peak_words: Vec<u64>,
    /// Storage held by the coordinator while it aggregates the received
    /// coverings.
    pub coordinator_peak_words: u64,
    pub messages_per_round: Vec<usize>,
    pub words_per_round: Vec<u64>,
    pub coreset: Vec<WeightedPoint>,
    /// Machine of every input point.
    pub machine_of: Vec<usize>,
    pub transcript: Vec<Message>,
    pub details: RunDetails,
}

fn point_words(n: usize, d: usize) -> u64 {
    (n * (d + 1)) as u64
}

/// Entries in an outlier vector: `ceil(log2(z + 1)) + 1`.
pub fn outlier_vector_len(z: u64) -> usize {
    (z + 1).next_power_of_two().trailing_zeros() as usize + 1
}

/// Splits `points` over `cfg.machines` machines. Returns the parts and the
/// machine of every point.
pub fn distribute(
    points: &[WeightedPoint],
    cfg: &MpcConfig,
) -> Result<(Vec<Vec<WeightedPoint>>, Vec<usize>)> {
    let m = cfg.machines;
    let machine_of: Vec<usize> = match &cfg.distribution {
        Distribution::Adversarial(a) => {
            if a.len() != points.len() {
                return input(format!(
                    "assignment lists {} machines for {} points",
                    a.len(),
                    points.len()
                ));
            }
            if let Some(&bad) = a.iter().find(|&&i| i >= m) {
                return input(format!("machine {bad} does not exist (m = {m})"));
            }
            a.clone()
        }
        Distribution::RoundRobin => (0..points.len()).map(|i| i % m).collect(),
        Distribution::Random(seed) => {
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            (0..points.len()).map(|_| rng.gen_range(0..m)).collect()
        }
    };
    let mut parts = vec![Vec::new(); m];
    for (p, &i) in points.iter().zip(&machine_of) {
        parts[i].push(p.clone());
    }
    Ok((parts, machine_of))
}

/// `min { r in R : Σ_ℓ (2^{j_ℓ(r)} - 1) <= 2z }` where `j_ℓ(r)` is the first
/// index with `V_ℓ[j] <= r`. A machine with no such index excludes `r`.
/// Returns `r̂` and the indices `ĵ_ℓ = j_ℓ(r̂)`.
pub fn estimate_radius(vectors: &[Vec<f64>], z: u64) -> Result<(f64, Vec<u32>)> {
    let first_at = |v: &[f64], r: f64| v.iter().position(|&x| x <= r).map(|j| j as u32);
    let mut cands: Vec<f64> = vectors.iter().flatten().copied().collect();
    cands.sort_by(f64::total_cmp);
    cands.dedup();
    for r in cands {
        let js: Option<Vec<u32>> = vectors.iter().map(|v| first_at(v, r)).collect();
        let Some(js) = js else { continue };
        let total: u128 = js.iter().map(|&j| (1u128 << j) - 1).sum();
        if total <= 2 * z as u128 {
            return Ok((r, js));
        }
    }
    input("no candidate radius satisfies the outlier budget")
}

struct Sim {
    d: usize,
    round: usize,
    transcript: Vec<Message>,
    pending: Vec<Message>,
    peaks: Vec<u64>,
    messages_per_round: Vec<usize>,
    words_per_round: Vec<u64>,
}

impl Sim {
    fn new(m: usize, d: usize) -> Self {
        Sim {
            d,
            round: 0,
            transcript: Vec::new(),
            pending: Vec::new(),
            peaks: vec![0; m],
            messages_per_round: Vec::new(),
            words_per_round: Vec::new(),
        }
    }

    /// Starts the next round and hands out the messages sent in the
    /// previous one, grouped by receiver and sorted by sender.
    fn begin_round(&mut self) -> Vec<Vec<Message>> {
        self.round += 1;
        self.messages_per_round.push(0);
        self.words_per_round.push(0);
        self.deliver()
    }

    /// Delivers pending messages without opening a communication round
    /// (the coordinator's final local step).
    fn deliver(&mut self) -> Vec<Vec<Message>> {
        let mut inbox = vec![Vec::new(); self.peaks.len()];
        let mut pending = std::mem::take(&mut self.pending);
        pending.sort_by_key(|msg| (msg.to, msg.from));
        for mut msg in pending {
            msg.delivered_round = msg.sent_round + 1;
            self.transcript.push(msg.clone());
            inbox[msg.to].push(msg);
        }
        inbox
    }

    fn send(&mut self, from: usize, to: usize, payload: Payload) {
        let t = self.round - 1;
        self.messages_per_round[t] += 1;
        self.words_per_round[t] += payload.words(self.d);
        self.pending.push(Message {
            sent_round: self.round,
            delivered_round: 0,
            from,
            to,
            payload,
        });
    }

    fn meter(&mut self, machine: usize, words: u64) {
        self.peaks[machine] = self.peaks[machine].max(words);
    }
}

fn check_inputs(
    points: &[WeightedPoint],
    k: usize,
    epsilon: f64,
    metric: &Metric,
) -> Result<usize> {
    check_params(k, epsilon)?;
    check_weighted(points, metric)?;
    points
        .first()
        .map(|p| p.point.dim())
        .ok_or_else(|| Error::Input("the input is empty".into()))
}

fn points_of(msgs: Vec<Message>) -> Vec<WeightedPoint> {
    msgs.into_iter()
        .flat_map(|msg| match msg.payload {
            Payload::Points(p) => p,
            Payload::Vector(_) => Vec::new(),
        })
        .collect()
}

/// Two-round protocol. Round 1 broadcasts outlier vectors; round 2 picks
/// per-machine outlier budgets from them and sends local coverings to the
/// coordinator, which covers their union with budget `z`.
pub fn run_two_round(
    points: &[WeightedPoint],
    k: usize,
    z: u64,
    epsilon: f64,
    metric: &Metric,
    cfg: &MpcConfig,
) -> Result<MpcRun> {
    let d = check_inputs(points, k, epsilon, metric)?;
    let m = cfg.machines;
    if m < 2 {
        return Err(Error::Config(
            "the two-round protocol needs at least two machines".into(),
        ));
    }
    let (parts, machine_of) = distribute(points, cfg)?;
    let len = outlier_vector_len(z);
    let mut sim = Sim::new(m, d);

    sim.begin_round();
    let vectors: Vec<Vec<f64>> = parts
        .par_iter()
        .map(|part| {
            (0..len)
                .map(|j| greedy(part, k, (1u64 << j) - 1, metric).map(|g| g.radius))
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<_>>()?;
    for (i, v) in vectors.iter().enumerate() {
        sim.meter(i, point_words(parts[i].len(), d) + len as u64);
        for j in (0..m).filter(|&j| j != i) {
            sim.send(i, j, Payload::Vector(v.clone()));
        }
    }

    let inbox = sim.begin_round();
    // every machine evaluates the same rule on the same m vectors
    let mut estimates = Vec::with_capacity(m);
    for (i, msgs) in inbox.into_iter().enumerate() {
        let mut seen: Vec<Vec<f64>> = vec![Vec::new(); m];
        seen[i] = vectors[i].clone();
        for msg in msgs {
            if let Payload::Vector(v) = msg.payload {
                seen[msg.from] = v;
            }
        }
        estimates.push(estimate_radius(&seen, z)?);
    }
    let (r_hat, j_hat) = estimates[0].clone();
    debug_assert!(estimates.iter().all(|e| *e == estimates[0]));
    let local_z: Vec<u64> = j_hat.iter().map(|&j| (1u64 << j) - 1).collect();
    let coverings: Vec<Vec<WeightedPoint>> = parts
        .par_iter()
        .zip(&local_z)
        .map(|(part, &zi)| {
            mini_ball_covering(part, k, zi, epsilon, metric).map(|c| c.representatives)
        })
        .collect::<Result<_>>()?;
    let vec_words = (m * len) as u64;
    for (i, cov) in coverings.into_iter().enumerate() {
        sim.meter(
            i,
            point_words(parts[i].len(), d) + vec_words + point_words(cov.len(), d),
        );
        sim.send(i, 0, Payload::Points(cov));
    }

    let inbox = sim.deliver();
    let union = points_of(inbox.into_iter().next().unwrap_or_default());
    let coordinator_peak_words = point_words(union.len(), d) + vec_words;
    sim.meter(0, coordinator_peak_words);
    let coreset = mini_ball_covering(&union, k, z, epsilon, metric)?.representatives;

    Ok(MpcRun {
        rounds_used: sim.round,
        per_machine_peak_words: sim.peaks,
        coordinator_peak_words,
        messages_per_round: sim.messages_per_round,
        words_per_round: sim.words_per_round,
        coreset,
        machine_of,
        transcript: sim.transcript,
        details: RunDetails {
            outlier_vectors: vectors,
            r_hat: Some(r_hat),
            j_hat,
            local_z,
            coordinator_union: union,
            ..RunDetails::default()
        },
    })
}

/// Local outlier budget of the one-round protocol:
/// `min(ceil(6z/m + 3 log2 n), z)`.
pub fn one_round_budget(z: u64, m: usize, n: usize) -> u64 {
    let b = 6.0 * z as f64 / m as f64 + 3.0 * (n.max(1) as f64).log2();
    (b.ceil() as u64).min(z)
}

/// Randomized one-round protocol: every machine covers its random part with
/// the reduced budget `z'` and the coordinator covers the union with `z`.
/// With a single machine the local covering is the result.
pub fn run_one_round_randomized(
    points: &[WeightedPoint],
    k: usize,
    z: u64,
    epsilon: f64,
    metric: &Metric,
    cfg: &MpcConfig,
) -> Result<MpcRun> {
    let d = check_inputs(points, k, epsilon, metric)?;
    if !matches!(cfg.distribution, Distribution::Random(_)) {
        return Err(Error::Config(
            "the one-round protocol requires a random distribution".into(),
        ));
    }
    let m = cfg.machines;
    let (parts, machine_of) = distribute(points, cfg)?;
    let zp = one_round_budget(z, m, points.len());
    let mut sim = Sim::new(m, d);

    sim.begin_round();
    let coverings: Vec<Vec<WeightedPoint>> = parts
        .par_iter()
        .map(|part| mini_ball_covering(part, k, zp, epsilon, metric).map(|c| c.representatives))
        .collect::<Result<_>>()?;
    for (i, cov) in coverings.into_iter().enumerate() {
        sim.meter(i, point_words(parts[i].len() + cov.len(), d));
        sim.send(i, 0, Payload::Points(cov));
    }

    let inbox = sim.deliver();
    let union = points_of(inbox.into_iter().next().unwrap_or_default());
    let coordinator_peak_words = point_words(union.len(), d);
    sim.meter(0, coordinator_peak_words);
    let coreset = if m == 1 {
        union.clone()
    } else {
        mini_ball_covering(&union, k, z, epsilon, metric)?.representatives
    };

    Ok(MpcRun {
        rounds_used: sim.round,
        per_machine_peak_words: sim.peaks,
        coordinator_peak_words,
        messages_per_round: sim.messages_per_round,
        words_per_round: sim.words_per_round,
        coreset,
        machine_of,
        transcript: sim.transcript,
        details: RunDetails {
            local_z: vec![zp; m],
            coordinator_union: union,
            ..RunDetails::default()
        },
    })
}

/// Smallest `β` with `β^R >= m`.
pub fn branching_factor(m: usize, rounds: usize) -> usize {
    let mut beta = 1usize;
    while (beta as u128).pow(rounds as u32) < m as u128 {
        beta += 1;
    }
    beta
}

/// R-round protocol: in round `t` the first `ceil(m / β^{t-1})` machines
/// cover what they hold and forward it to machine `i / β`, so machine 0
/// holds the result after `R` rounds.
pub fn run_r_round(
    points: &[WeightedPoint],
    k: usize,
    z: u64,
    epsilon: f64,
    metric: &Metric,
    rounds: usize,
    cfg: &MpcConfig,
) -> Result<MpcRun> {
    let d = check_inputs(points, k, epsilon, metric)?;
    if rounds == 0 {
        return Err(Error::Config("at least one round is required".into()));
    }
    let m = cfg.machines;
    let beta = branching_factor(m, rounds);
    let (parts, machine_of) = distribute(points, cfg)?;
    let mut held = parts;
    let mut sim = Sim::new(m, d);
    let mut active_per_round = Vec::with_capacity(rounds);
    let mut active = m;

    for t in 0..rounds {
        let inbox = sim.begin_round();
        if t > 0 {
            held = inbox.into_iter().map(points_of).collect();
        }
        active_per_round.push(active);
        let coverings: Vec<Vec<WeightedPoint>> = held[..active]
            .par_iter()
            .map(|set| mini_ball_covering(set, k, z, epsilon, metric).map(|c| c.representatives))
            .collect::<Result<_>>()?;
        for (i, cov) in coverings.into_iter().enumerate() {
            sim.meter(i, point_words(held[i].len() + cov.len(), d));
            sim.send(i, i / beta, Payload::Points(cov));
        }
        active = active.div_ceil(beta);
    }

    let inbox = sim.deliver();
    let coreset = points_of(inbox.into_iter().next().unwrap_or_default());
    let coordinator_peak_words = point_words(coreset.len(), d);
    sim.meter(0, coordinator_peak_words);

    Ok(MpcRun {
        rounds_used: sim.round,
        per_machine_peak_words: sim.peaks,
        coordinator_peak_words,
        messages_per_round: sim.messages_per_round,
        words_per_round: sim.words_per_round,
        coreset: coreset.clone(),
        machine_of,
        transcript: sim.transcript,
        details: RunDetails {
            local_z: vec![z; m],
            coordinator_union: coreset,
            beta: Some(beta),
            active_per_round,
            ..RunDetails::default()
        },
    })
}

/// Coordinator storage bound of the two-round protocol in words:
/// `Σ_i (k (12/ε)^d + 2^{ĵ_i} - 1)(d + 1) + m (ceil(log2(z+1)) + 1)`.
pub fn two_round_coordinator_bound(run: &MpcRun, k: usize, z: u64, epsilon: f64, d: usize) -> f64 {
    let per = k as f64 * (12.0 / epsilon).powi(d as i32);
    let m = run.per_machine_peak_words.len();
    let cov: f64 = run
        .details
        .local_z
        .iter()
        .map(|&zi| (per + zi as f64) * (d + 1) as f64)
        .sum();
    cov + (m * outlier_vector_len(z)) as f64
}
