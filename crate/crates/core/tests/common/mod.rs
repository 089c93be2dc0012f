//! Test-side oracles. Nothing here calls the library's own cost or
//! optimum routines, so the integration tests compare two independent
//! computations.
#![allow(dead_code)]

use kcenter_coreset::{Metric, Point, WeightedPoint};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn dist(p: &Point, q: &Point, metric: &Metric) -> f64 {
    let diffs = p.0.iter().zip(&q.0).map(|(a, b)| (a - b).abs());
    match metric {
        Metric::L2 => diffs.map(|x| x * x).sum::<f64>().sqrt(),
        Metric::Linf => diffs.fold(0.0, f64::max),
        Metric::Explicit(m) => m.get(p.0[0] as usize, q.0[0] as usize),
    }
}

pub fn line(xs: &[f64]) -> Vec<WeightedPoint> {
    xs.iter()
        .map(|&x| WeightedPoint::unit(Point(vec![x])))
        .collect()
}

/// Random lattice points in `[1, side]^d` with weights in `1..=max_w`.
pub fn lattice(
    rng: &mut impl Rng,
    n: usize,
    d: usize,
    side: u32,
    max_w: u64,
) -> Vec<WeightedPoint> {
    (0..n)
        .map(|_| {
            let p = Point((0..d).map(|_| f64::from(rng.gen_range(1..=side))).collect());
            WeightedPoint::new(p, rng.gen_range(1..=max_w))
        })
        .collect()
}

/// Weight left uncovered by radius-`r` balls around `centers`.
pub fn uncovered(points: &[WeightedPoint], centers: &[&Point], r: f64, metric: &Metric) -> u64 {
    points
        .iter()
        .filter(|p| {
            centers
                .iter()
                .all(|c| dist(&p.point, c, metric) > r * (1.0 + 1e-12) + 1e-12)
        })
        .map(|p| p.weight)
        .sum()
}

fn subsets<T>(items: &[T], k: usize, f: &mut impl FnMut(&[&T]) -> bool) -> bool {
    fn go<'a, T>(
        items: &'a [T],
        k: usize,
        start: usize,
        cur: &mut Vec<&'a T>,
        f: &mut impl FnMut(&[&T]) -> bool,
    ) -> bool {
        if cur.len() == k {
            return f(cur);
        }
        for i in start..items.len() {
            cur.push(&items[i]);
            if go(items, k, i + 1, cur, f) {
                return true;
            }
            cur.pop();
        }
        false
    }
    go(items, k.min(items.len()), 0, &mut Vec::new(), f)
}

/// Optimal radius over center sets drawn from `cands`, by binary search
/// over all point-to-candidate distances with an exhaustive feasibility
/// test at each probe.
pub fn naive_opt(
    points: &[WeightedPoint],
    cands: &[Point],
    k: usize,
    z: u64,
    metric: &Metric,
) -> f64 {
    let mut radii: Vec<f64> = vec![0.0];
    for p in points {
        for c in cands {
            radii.push(dist(&p.point, c, metric));
        }
    }
    radii.sort_by(f64::total_cmp);
    radii.dedup();
    let feasible = |r: f64| {
        subsets(cands, k, &mut |cs: &[&Point]| {
            uncovered(points, cs, r, metric) <= z
        })
    };
    let (mut lo, mut hi) = (0, radii.len() - 1);
    while lo < hi {
        let mid = (lo + hi) / 2;
        if feasible(radii[mid]) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    radii[lo]
}

pub fn locations(points: &[WeightedPoint]) -> Vec<Point> {
    let mut v: Vec<Point> = Vec::new();
    for p in points {
        if !v.contains(&p.point) {
            v.push(p.point.clone());
        }
    }
    v
}

/// Componentwise all-coordinates-and-midpoints product.
pub fn midpoint_grid(points: &[WeightedPoint]) -> Vec<Point> {
    let d = points[0].point.dim();
    let axes: Vec<Vec<f64>> = (0..d)
        .map(|j| {
            let xs: Vec<f64> = points.iter().map(|p| p.point.0[j]).collect();
            let mut v = Vec::new();
            for a in &xs {
                for b in &xs {
                    v.push((a + b) / 2.0);
                }
            }
            v.sort_by(f64::total_cmp);
            v.dedup();
            v
        })
        .collect();
    let mut out = vec![Vec::new()];
    for axis in &axes {
        out = out
            .into_iter()
            .flat_map(|pre: Vec<f64>| {
                axis.iter().map(move |&x| {
                    let mut v = pre.clone();
                    v.push(x);
                    v
                })
            })
            .collect();
    }
    out.into_iter().map(Point).collect()
}
