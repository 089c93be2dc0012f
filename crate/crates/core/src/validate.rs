//! Validators for mini-ball coverings and (ε,k,z)-coresets.
//!
//! Neither validator trusts the construction that produced its input. The
//! covering check decides whether *some* partition exists by solving a
//! transportation problem; the coreset check compares exhaustive optima and
//! then tests every candidate center set.

use std::collections::{HashSet, VecDeque};
use std::fmt;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{input, Error, Result};
use crate::metric::{
    le_tol, materialize_universe, total_weight, CenterUniverse, Metric, WeightedPoint,
    DEFAULT_UNIVERSE_CAP,
};
use crate::solvers::{
    binomial, check_weighted, for_each_subset_with_first, opt_over_candidates, DistTable, Instance,
    DEFAULT_SUBSET_CAP,
};

/// Largest total weight the flow checker accepts.
pub const MAX_FLOW_WEIGHT: u64 = 1_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Violation {
    WeightMismatch,
    CoveringDistance,
    RadiusBandLow,
    RadiusBandHigh,
    ExpandedCoverFails,
    WeightRestriction,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ValidationReport {
    pub passed: bool,
    pub violated: Option<Violation>,
    pub witness: String,
    /// Oracle optimum of the full set, when computed.
    pub opt: Option<f64>,
    /// Oracle optimum of the candidate coreset, when computed.
    pub coreset_opt: Option<f64>,
}

impl ValidationReport {
    fn pass() -> Self {
        ValidationReport {
            passed: true,
            violated: None,
            witness: String::new(),
            opt: None,
            coreset_opt: None,
        }
    }

    fn fail(v: Violation, witness: impl Into<String>) -> Self {
        ValidationReport {
            passed: false,
            violated: Some(v),
            witness: witness.into(),
            opt: None,
            coreset_opt: None,
        }
    }
}

/// Decides whether `pstar` is a mini-ball covering of `points` with
/// distance bound `bound`: the weight of every input can be routed to
/// representatives within `bound` so that each representative receives
/// exactly its own weight.
pub fn check_mini_ball_covering(
    points: &[WeightedPoint],
    pstar: &[WeightedPoint],
    bound: f64,
    metric: &Metric,
) -> Result<ValidationReport> {
    check_weighted(points, metric)?;
    check_weighted(pstar, metric)?;
    if bound.is_nan() || bound < 0.0 {
        return input(format!("bound must be nonnegative, got {bound}"));
    }
    if let (Some(a), Some(b)) = (points.first(), pstar.first()) {
        if a.point.dim() != b.point.dim() {
            return input("coreset and input have different dimensions");
        }
    }
    let locs: HashSet<Vec<u64>> = points.iter().map(|p| p.point.key()).collect();
    if let Some(q) = pstar.iter().find(|q| !locs.contains(&q.point.key())) {
        return input(format!(
            "representative {} is not an input location",
            q.point
        ));
    }
    let (wp, wq) = (total_weight(points), total_weight(pstar));
    if wp != wq {
        return Ok(ValidationReport::fail(
            Violation::WeightMismatch,
            format!("input weight {wp} but representative weight {wq}"),
        ));
    }
    if wp > MAX_FLOW_WEIGHT {
        return Err(Error::Capacity(format!(
            "total weight {wp} exceeds the validation cap {MAX_FLOW_WEIGHT}"
        )));
    }

    let (n, m) = (points.len(), pstar.len());
    let (src, sink) = (n + m, n + m + 1);
    let mut net = FlowNetwork::new(n + m + 2);
    for (i, p) in points.iter().enumerate() {
        net.add_edge(src, i, p.weight);
        let mut reachable = false;
        for (j, q) in pstar.iter().enumerate() {
            if le_tol(metric.dist(&p.point, &q.point), bound) {
                net.add_edge(i, n + j, p.weight);
                reachable = true;
            }
        }
        if !reachable {
            return Ok(ValidationReport::fail(
                Violation::CoveringDistance,
                format!("input {} has no representative within {bound}", p.point),
            ));
        }
    }
    for (j, q) in pstar.iter().enumerate() {
        net.add_edge(n + j, sink, q.weight);
    }
    let flow = net.max_flow(src, sink);
    if flow == wp {
        Ok(ValidationReport::pass())
    } else {
        Ok(ValidationReport::fail(
            Violation::CoveringDistance,
            format!("only {flow} of {wp} weight can be routed within distance {bound}"),
        ))
    }
}

/// Checks the (ε,k,z)-coreset conditions of `pstar` against `inst.points`
/// over a finite universe materialized from the input:
///
/// * weight restriction `w(P*) <= w(P)`;
/// * `(1-ε) opt(P) <= opt(P*) <= (1+ε) opt(P)`;
/// * for every k-subset `C` of the universe and every radius `r` at which
///   `C` leaves at most `z` weight of `P*` uncovered, radius
///   `r + ε opt(P)` leaves at most `z` weight of `P` uncovered.
///
/// Uncovered weight is a nonincreasing step function of `r`, so the last
/// condition holds for all admissible `r` exactly when it holds at the
/// smallest one, i.e. `cost(P, C) <= cost(P*, C) + ε opt(P)`.
pub fn check_coreset(
    inst: &Instance,
    pstar: &[WeightedPoint],
    universe: &CenterUniverse,
) -> Result<ValidationReport> {
    check_coreset_capped(inst, pstar, universe, DEFAULT_SUBSET_CAP)
}

pub fn check_coreset_capped(
    inst: &Instance,
    pstar: &[WeightedPoint],
    universe: &CenterUniverse,
    subset_cap: u64,
) -> Result<ValidationReport> {
    check_coreset_at(inst, inst.epsilon, pstar, universe, subset_cap)
}

/// [`check_coreset_capped`] with an explicit quality parameter in place of
/// `inst.epsilon`. Composed constructions (e.g. the MPC protocols) are only
/// guaranteed coresets at a multiple of ε, which may exceed 1.
pub fn check_coreset_at(
    inst: &Instance,
    quality: f64,
    pstar: &[WeightedPoint],
    universe: &CenterUniverse,
    subset_cap: u64,
) -> Result<ValidationReport> {
    if !(quality >= 0.0 && quality.is_finite()) {
        return input(format!(
            "quality must be a nonnegative number, got {quality}"
        ));
    }
    check_weighted(pstar, &inst.metric)?;
    if pstar.iter().any(|q| q.point.dim() != inst.dim()) {
        return input("coreset and input have different dimensions");
    }
    let (wp, wq) = (total_weight(&inst.points), total_weight(pstar));
    if wq > wp {
        return Ok(ValidationReport::fail(
            Violation::WeightRestriction,
            format!("coreset weight {wq} exceeds input weight {wp}"),
        ));
    }
    let cands = materialize_universe(&inst.points, universe, DEFAULT_UNIVERSE_CAP)?;
    let k = inst.k.min(cands.len());
    let count = binomial(cands.len() as u64, k as u64);
    if count > subset_cap {
        return Err(Error::Capacity(format!(
            "{count} candidate center sets exceed the cap {subset_cap}"
        )));
    }
    let (eps, z, metric) = (quality, inst.z, &inst.metric);
    let opt = opt_over_candidates(&inst.points, &cands, inst.k, z, metric, subset_cap)?.radius;
    let opt_star = if pstar.is_empty() {
        0.0
    } else {
        opt_over_candidates(pstar, &cands, inst.k, z, metric, subset_cap)?.radius
    };
    let with_opts = |mut r: ValidationReport| {
        r.opt = Some(opt);
        r.coreset_opt = Some(opt_star);
        r
    };
    if !le_tol((1.0 - eps) * opt, opt_star) {
        return Ok(with_opts(ValidationReport::fail(
            Violation::RadiusBandLow,
            format!("coreset optimum {opt_star} below (1-{eps})*{opt}"),
        )));
    }
    if !le_tol(opt_star, (1.0 + eps) * opt) {
        return Ok(with_opts(ValidationReport::fail(
            Violation::RadiusBandHigh,
            format!("coreset optimum {opt_star} above (1+{eps})*{opt}"),
        )));
    }

    let full = DistTable::new(&inst.points, &cands, metric);
    let core = DistTable::new(pstar, &cands, metric);
    let slack = eps * opt;
    let u = cands.len();
    let bad = (0..=u - k).into_par_iter().find_map_first(|first| {
        let mut scratch = Vec::new();
        let mut found: Option<(Vec<usize>, f64, f64)> = None;
        for_each_subset_with_first(u, k, first, |s| {
            if found.is_some() {
                return;
            }
            let r0 = if pstar.is_empty() {
                0.0
            } else {
                core.cost(s, z, &mut scratch)
            };
            let r = full.cost(s, z, &mut scratch);
            if !le_tol(r, r0 + slack) {
                found = Some((s.to_vec(), r0, r));
            }
        });
        found
    });
    Ok(with_opts(match bad {
        None => ValidationReport::pass(),
        Some((s, r0, r)) => {
            let centers: Vec<String> = s.iter().map(|&i| cands[i].to_string()).collect();
            ValidationReport::fail(
                Violation::ExpandedCoverFails,
                format!(
                    "centers [{}] cover the coreset at radius {r0} but the input needs {r} > {r0} + {slack}",
                    centers.join(", ")
                ),
            )
        }
    }))
}

/// Dinic max-flow over integer capacities.
struct FlowNetwork {
    adj: Vec<Vec<usize>>,
    to: Vec<usize>,
    cap: Vec<u64>,
}

impl FlowNetwork {
    fn new(n: usize) -> Self {
        FlowNetwork {
            adj: vec![Vec::new(); n],
            to: Vec::new(),
            cap: Vec::new(),
        }
    }

    fn add_edge(&mut self, u: usize, v: usize, c: u64) {
        self.adj[u].push(self.to.len());
        self.to.push(v);
        self.cap.push(c);
        self.adj[v].push(self.to.len());
        self.to.push(u);
        self.cap.push(0);
    }

    fn max_flow(&mut self, s: usize, t: usize) -> u64 {
        let n = self.adj.len();
        let mut total = 0;
        loop {
            let mut level = vec![usize::MAX; n];
            level[s] = 0;
            let mut q = VecDeque::from([s]);
            while let Some(u) = q.pop_front() {
                for &e in &self.adj[u] {
                    let v = self.to[e];
                    if self.cap[e] > 0 && level[v] == usize::MAX {
                        level[v] = level[u] + 1;
                        q.push_back(v);
                    }
                }
            }
            if level[t] == usize::MAX {
                return total;
            }
            let mut it = vec![0usize; n];
            loop {
                let f = self.augment(s, t, u64::MAX, &level, &mut it);
                if f == 0 {
                    break;
                }
                total += f;
            }
        }
    }

    fn augment(
        &mut self,
        u: usize,
        t: usize,
        limit: u64,
        level: &[usize],
        it: &mut [usize],
    ) -> u64 {
        if u == t {
            return limit;
        }
        while it[u] < self.adj[u].len() {
            let e = self.adj[u][it[u]];
            let v = self.to[e];
            if self.cap[e] > 0 && level[v] == level[u] + 1 {
                let f = self.augment(v, t, limit.min(self.cap[e]), level, it);
                if f > 0 {
                    self.cap[e] -= f;
                    self.cap[e ^ 1] += f;
                    return f;
                }
            }
            it[u] += 1;
        }
        0
    }
}
