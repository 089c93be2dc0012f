//! Offline solvers: cost evaluation, the exhaustive optimum oracle, the
//! greedy 3-approximation for k-center with outliers, and the two
//! mini-ball covering constructions.

use rayon::prelude::*;

use crate::error::{input, Error, Result};
use crate::metric::{
    le_tol, materialize_universe, total_weight, Ball, CenterUniverse, Metric, Point, WeightedPoint,
    DEFAULT_UNIVERSE_CAP,
};

/// Default cap on the number of candidate center sets enumerated by the
/// exhaustive oracle.
pub const DEFAULT_SUBSET_CAP: u64 = 2_000_000;

/// A validated k-center-with-outliers problem.
#[derive(Clone, Debug)]
pub struct Instance {
    pub points: Vec<WeightedPoint>,
    pub k: usize,
    pub z: u64,
    pub epsilon: f64,
    pub metric: Metric,
}

impl Instance {
    pub fn new(
        points: Vec<WeightedPoint>,
        k: usize,
        z: u64,
        epsilon: f64,
        metric: Metric,
    ) -> Result<Self> {
        check_params(k, epsilon)?;
        check_weighted(&points, &metric)?;
        if total_weight(&points) <= z {
            return input(format!(
                "total weight {} does not exceed z = {z}; the instance is vacuous",
                total_weight(&points)
            ));
        }
        Ok(Instance {
            points,
            k,
            z,
            epsilon,
            metric,
        })
    }

    pub fn dim(&self) -> usize {
        self.points[0].point.dim()
    }
}

pub(crate) fn check_params(k: usize, epsilon: f64) -> Result<()> {
    if k == 0 {
        return input("k must be at least 1");
    }
    if !(epsilon > 0.0 && epsilon <= 1.0) {
        return input(format!("epsilon must lie in (0, 1], got {epsilon}"));
    }
    Ok(())
}

pub(crate) fn check_weighted(points: &[WeightedPoint], metric: &Metric) -> Result<()> {
    if let Some(bad) = points.iter().find(|p| p.weight == 0) {
        return input(format!("point {} has weight 0", bad.point));
    }
    metric.check_points(points.iter().map(|p| &p.point))
}

/// An optimal (or oracle) solution.
#[derive(Clone, Debug, PartialEq)]
pub struct Solution {
    pub radius: f64,
    pub centers: Vec<Point>,
    pub outlier_weight: u64,
}

/// A weighted subset together with the assignment that witnesses the
/// covering: `assignment[i]` is the representative index of input `i`.
#[derive(Clone, Debug, PartialEq)]
pub struct MiniBallCovering {
    pub representatives: Vec<WeightedPoint>,
    pub assignment: Vec<usize>,
    /// Radius of the mini-balls (every input is within this distance of
    /// its representative).
    pub ball_radius: f64,
    /// Radius reported by the greedy step.
    pub greedy_radius: f64,
}

/// Smallest `r` such that the points farther than `r` from every center
/// weigh at most `z` in total.
pub fn evaluate_cost(
    points: &[WeightedPoint],
    centers: &[Point],
    z: u64,
    metric: &Metric,
) -> Result<f64> {
    if centers.is_empty() {
        return input("center list is empty");
    }
    metric.check_points(points.iter().map(|p| &p.point).chain(centers.iter()))?;
    let mut dw: Vec<(f64, u64)> = points
        .iter()
        .map(|p| {
            let d = centers
                .iter()
                .map(|c| metric.dist(&p.point, c))
                .fold(f64::INFINITY, f64::min);
            (d, p.weight)
        })
        .collect();
    Ok(peel_cost(&mut dw, z))
}

/// Cost from (nearest-center distance, weight) pairs: sort descending and
/// drop whole distance classes while the dropped weight stays within `z`.
pub(crate) fn peel_cost(dw: &mut [(f64, u64)], z: u64) -> f64 {
    dw.sort_unstable_by(|a, b| b.0.total_cmp(&a.0));
    let mut dropped = 0u64;
    let mut i = 0;
    while i < dw.len() {
        let d = dw[i].0;
        let mut w = 0;
        let mut j = i;
        while j < dw.len() && dw[j].0 == d {
            w += dw[j].1;
            j += 1;
        }
        if dropped + w > z {
            return d;
        }
        dropped += w;
        i = j;
    }
    0.0
}

/// Weight of points farther than `r` (with tolerance) from every center.
pub fn uncovered_weight(
    points: &[WeightedPoint],
    centers: &[Point],
    r: f64,
    metric: &Metric,
) -> u64 {
    points
        .iter()
        .filter(|p| !centers.iter().any(|c| le_tol(metric.dist(&p.point, c), r)))
        .map(|p| p.weight)
        .sum()
}

pub(crate) fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
        if acc > u64::MAX as u128 {
            return u64::MAX;
        }
    }
    acc as u64
}

/// Exhaustive optimum over all k-subsets of a materialized universe.
///
/// When the universe has fewer than `k` candidates the whole universe is
/// the only candidate set. Ties go to the lexicographically first subset.
pub fn brute_force_opt(inst: &Instance, universe: &CenterUniverse) -> Result<Solution> {
    brute_force_opt_capped(inst, universe, DEFAULT_SUBSET_CAP)
}

pub fn brute_force_opt_capped(
    inst: &Instance,
    universe: &CenterUniverse,
    subset_cap: u64,
) -> Result<Solution> {
    let cands = materialize_universe(&inst.points, universe, DEFAULT_UNIVERSE_CAP)?;
    opt_over_candidates(
        &inst.points,
        &cands,
        inst.k,
        inst.z,
        &inst.metric,
        subset_cap,
    )
}

/// Exhaustive optimum of `points` over k-subsets of `cands`.
pub fn opt_over_candidates(
    points: &[WeightedPoint],
    cands: &[Point],
    k: usize,
    z: u64,
    metric: &Metric,
    subset_cap: u64,
) -> Result<Solution> {
    if cands.is_empty() {
        return input("empty candidate universe");
    }
    let kk = k.min(cands.len());
    let count = binomial(cands.len() as u64, kk as u64);
    if count > subset_cap {
        return Err(Error::Capacity(format!(
            "{count} candidate center sets exceed the cap {subset_cap}"
        )));
    }
    let table = DistTable::new(points, cands, metric);
    let (radius, subset) = table.best_subset(kk, z);
    let centers: Vec<Point> = subset.iter().map(|&i| cands[i].clone()).collect();
    let outlier_weight = uncovered_weight(points, &centers, radius, metric);
    Ok(Solution {
        radius,
        centers,
        outlier_weight,
    })
}

/// Point-to-candidate distances, row-major by point.
pub(crate) struct DistTable {
    pub n: usize,
    pub u: usize,
    pub d: Vec<f64>,
    pub w: Vec<u64>,
}

impl DistTable {
    pub fn new(points: &[WeightedPoint], cands: &[Point], metric: &Metric) -> Self {
        let u = cands.len();
        let mut d = Vec::with_capacity(points.len() * u);
        for p in points {
            d.extend(cands.iter().map(|c| metric.dist(&p.point, c)));
        }
        DistTable {
            n: points.len(),
            u,
            d,
            w: points.iter().map(|p| p.weight).collect(),
        }
    }

    pub fn cost(&self, subset: &[usize], z: u64, scratch: &mut Vec<(f64, u64)>) -> f64 {
        scratch.clear();
        for i in 0..self.n {
            let row = &self.d[i * self.u..(i + 1) * self.u];
            let m = subset.iter().map(|&c| row[c]).fold(f64::INFINITY, f64::min);
            scratch.push((m, self.w[i]));
        }
        peel_cost(scratch, z)
    }

    /// Lexicographically first k-subset of minimum cost.
    pub fn best_subset(&self, k: usize, z: u64) -> (f64, Vec<usize>) {
        let u = self.u;
        (0..=u - k)
            .into_par_iter()
            .filter_map(|first| {
                let mut best: Option<(f64, Vec<usize>)> = None;
                let mut scratch = Vec::with_capacity(self.n);
                for_each_subset_with_first(u, k, first, |s| {
                    let c = self.cost(s, z, &mut scratch);
                    if best.as_ref().is_none_or(|(b, _)| c < *b) {
                        best = Some((c, s.to_vec()));
                    }
                });
                best
            })
            .reduce_with(|a, b| {
                if b.0 < a.0 || (b.0 == a.0 && b.1 < a.1) {
                    b
                } else {
                    a
                }
            })
            .expect("at least one subset")
    }
}

/// Calls `f` on every k-subset of `0..u` whose smallest element is
/// `first`, in lexicographic order.
pub(crate) fn for_each_subset_with_first(
    u: usize,
    k: usize,
    first: usize,
    mut f: impl FnMut(&[usize]),
) {
    let mut s: Vec<usize> = (first..first + k).collect();
    if s.last().is_some_and(|&l| l >= u) {
        return;
    }
    loop {
        f(&s);
        // advance positions 1..k, keeping s[0] fixed
        let mut i = k;
        loop {
            if i <= 1 {
                return;
            }
            i -= 1;
            if s[i] < u - (k - i) {
                s[i] += 1;
                for j in i + 1..k {
                    s[j] = s[j - 1] + 1;
                }
                break;
            }
        }
    }
}

/// Output of [`greedy`].
#[derive(Clone, Debug, PartialEq)]
pub struct GreedyResult {
    /// Common radius of the returned balls (three times the feasibility
    /// radius).
    pub radius: f64,
    /// Smallest candidate radius at which the feasibility test succeeded.
    pub feasibility_radius: f64,
    pub balls: Vec<Ball>,
    pub uncovered_weight: u64,
}

/// Greedy 3-approximation for weighted k-center with `z` outliers.
///
/// Candidate radii are `0`, every pairwise distance and every half
/// pairwise distance. The smallest feasible candidate is found by binary
/// search, where feasibility at `r` runs `k` rounds of "take the input
/// point whose `r`-ball holds the most uncovered weight (lowest index on
/// ties), then mark everything within `3r` of it as covered" and asks
/// that at most `z` weight stays uncovered. The returned balls have radius
/// `3r`.
///
/// A part whose total weight is at most `z` yields radius 0 and no balls.
pub fn greedy(points: &[WeightedPoint], k: usize, z: u64, metric: &Metric) -> Result<GreedyResult> {
    if k == 0 {
        return input("k must be at least 1");
    }
    check_weighted(points, metric)?;
    let total = total_weight(points);
    if total <= z {
        return Ok(GreedyResult {
            radius: 0.0,
            feasibility_radius: 0.0,
            balls: Vec::new(),
            uncovered_weight: total,
        });
    }
    let n = points.len();
    let dm = PairDistances::new(points, metric);
    let mut cands = Vec::with_capacity(n * (n - 1) + 1);
    cands.push(0.0);
    for i in 0..n {
        for j in i + 1..n {
            let d = dm.get(i, j);
            cands.push(d);
            cands.push(d / 2.0);
        }
    }
    cands.sort_unstable_by(f64::total_cmp);
    cands.dedup();

    let weights: Vec<u64> = points.iter().map(|p| p.weight).collect();
    let feasible = |r: f64| feasibility(&dm, &weights, k, z, r);

    // the largest candidate always covers everything with one ball
    let (mut lo, mut hi) = (0usize, cands.len() - 1);
    let mut best = feasible(cands[hi]).expect("largest candidate radius is feasible");
    if let Some(sol) = feasible(cands[0]) {
        hi = 0;
        best = sol;
    }
    while hi > lo + 1 {
        let mid = lo + (hi - lo) / 2;
        match feasible(cands[mid]) {
            Some(sol) => {
                hi = mid;
                best = sol;
            }
            None => lo = mid,
        }
    }
    let r = cands[hi];
    let (centers, uncovered) = best;
    Ok(GreedyResult {
        radius: 3.0 * r,
        feasibility_radius: r,
        balls: centers
            .into_iter()
            .map(|c| Ball {
                center: points[c].point.clone(),
                radius: 3.0 * r,
            })
            .collect(),
        uncovered_weight: uncovered,
    })
}

fn feasibility(
    dm: &PairDistances,
    w: &[u64],
    k: usize,
    z: u64,
    r: f64,
) -> Option<(Vec<usize>, u64)> {
    let n = w.len();
    let mut covered = vec![false; n];
    let mut uncovered_total: u64 = w.iter().sum();
    let mut centers = Vec::with_capacity(k);
    for _ in 0..k {
        if uncovered_total == 0 {
            break;
        }
        let mut best = (0u64, 0usize);
        for i in 0..n {
            let gain: u64 = (0..n)
                .filter(|&j| !covered[j] && dm.get(i, j) <= r)
                .map(|j| w[j])
                .sum();
            if gain > best.0 {
                best = (gain, i);
            }
        }
        let c = best.1;
        centers.push(c);
        for j in 0..n {
            if !covered[j] && le_tol(dm.get(c, j), 3.0 * r) {
                covered[j] = true;
                uncovered_total -= w[j];
            }
        }
    }
    (uncovered_total <= z).then_some((centers, uncovered_total))
}

/// Pairwise distances, cached for moderate sizes and computed on demand
/// beyond that.
struct PairDistances<'a> {
    points: &'a [WeightedPoint],
    metric: &'a Metric,
    cache: Option<Vec<f64>>,
}

const PAIR_CACHE_LIMIT: usize = 4096;

impl<'a> PairDistances<'a> {
    fn new(points: &'a [WeightedPoint], metric: &'a Metric) -> Self {
        let n = points.len();
        let cache = (n <= PAIR_CACHE_LIMIT).then(|| {
            let mut v = vec![0.0; n * n];
            for i in 0..n {
                for j in i + 1..n {
                    let d = metric.dist(&points[i].point, &points[j].point);
                    v[i * n + j] = d;
                    v[j * n + i] = d;
                }
            }
            v
        });
        PairDistances {
            points,
            metric,
            cache,
        }
    }

    #[inline]
    fn get(&self, i: usize, j: usize) -> f64 {
        match &self.cache {
            Some(v) => v[i * self.points.len() + j],
            None => self
                .metric
                .dist(&self.points[i].point, &self.points[j].point),
        }
    }
}

/// Greedy δ-net in input order: the first remaining point absorbs every
/// remaining point within `delta`, summing weights. Returns the
/// representatives and, for every input, the index of its representative.
pub fn net_cover(
    points: &[WeightedPoint],
    delta: f64,
    metric: &Metric,
) -> (Vec<WeightedPoint>, Vec<usize>) {
    const NONE: usize = usize::MAX;
    let n = points.len();
    let mut assignment = vec![NONE; n];
    let mut reps = Vec::new();
    for i in 0..n {
        if assignment[i] != NONE {
            continue;
        }
        let idx = reps.len();
        let mut weight = 0;
        for j in i..n {
            if assignment[j] == NONE
                && le_tol(metric.dist(&points[i].point, &points[j].point), delta)
            {
                assignment[j] = idx;
                weight += points[j].weight;
            }
        }
        reps.push(WeightedPoint::new(points[i].point.clone(), weight));
    }
    (reps, assignment)
}

/// Merges every point into the first earlier-unmerged point within
/// `delta` (first-in-input-order); total weight is preserved.
pub fn update_coreset(
    points: &[WeightedPoint],
    delta: f64,
    metric: &Metric,
) -> Result<Vec<WeightedPoint>> {
    if delta.is_nan() || delta < 0.0 {
        return input(format!("delta must be nonnegative, got {delta}"));
    }
    check_weighted(points, metric)?;
    Ok(net_cover(points, delta, metric).0)
}

/// Mini-ball covering of a validated instance.
pub fn mbc_construction(inst: &Instance) -> Result<MiniBallCovering> {
    mini_ball_covering(&inst.points, inst.k, inst.z, inst.epsilon, &inst.metric)
}

/// Mini-ball covering without the instance-level "total weight > z"
/// requirement: parts whose weight is at most `z` get greedy radius 0,
/// i.e. only exact duplicates are merged. An empty input yields an empty
/// covering.
pub fn mini_ball_covering(
    points: &[WeightedPoint],
    k: usize,
    z: u64,
    epsilon: f64,
    metric: &Metric,
) -> Result<MiniBallCovering> {
    check_params(k, epsilon)?;
    if points.is_empty() {
        return Ok(MiniBallCovering {
            representatives: Vec::new(),
            assignment: Vec::new(),
            ball_radius: 0.0,
            greedy_radius: 0.0,
        });
    }
    let g = greedy(points, k, z, metric)?;
    let ball_radius = epsilon * g.radius / 3.0;
    let (representatives, assignment) = net_cover(points, ball_radius, metric);
    Ok(MiniBallCovering {
        representatives,
        assignment,
        ball_radius,
        greedy_radius: g.radius,
    })
}

/// Size bound `k (12/ε)^d + z` for a mini-ball covering.
pub fn mbc_size_bound(k: usize, z: u64, epsilon: f64, d: usize) -> f64 {
    k as f64 * (12.0 / epsilon).powi(d as i32) + z as f64
}
