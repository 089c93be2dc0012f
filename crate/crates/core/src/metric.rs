//! Points, weights, balls and the metrics they live in.
//!
//! Coordinates are `f64`. Explicit finite metrics reuse the same [`Point`]
//! type: a point is a one-dimensional vector holding its row index into the
//! distance table.

use std::collections::{BTreeSet, HashSet};
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{input, Error, Result};

/// Relative tolerance applied to every radius comparison.
pub const REL_TOL: f64 = 1e-9;

/// `a <= b` up to [`REL_TOL`] relative slack.
#[inline]
pub fn le_tol(a: f64, b: f64) -> bool {
    a <= b + REL_TOL * a.abs().max(b.abs())
}

/// A location in the metric space.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Point(pub Vec<f64>);

impl Point {
    pub fn new(coords: Vec<f64>) -> Self {
        Point(coords)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    /// Bit-exact identity key, with `-0.0` folded into `0.0`.
    pub fn key(&self) -> Vec<u64> {
        self.0
            .iter()
            .map(|&x| if x == 0.0 { 0u64 } else { x.to_bits() })
            .collect()
    }
}

impl From<Vec<f64>> for Point {
    fn from(v: Vec<f64>) -> Self {
        Point(v)
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, x) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{x}")?;
        }
        write!(f, ")")
    }
}

/// A point carrying a positive integer weight.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightedPoint {
    pub point: Point,
    pub weight: u64,
}

impl WeightedPoint {
    pub fn new(point: impl Into<Point>, weight: u64) -> Self {
        WeightedPoint {
            point: point.into(),
            weight,
        }
    }

    pub fn unit(point: impl Into<Point>) -> Self {
        Self::new(point, 1)
    }
}

/// Wraps plain points with weight 1.
pub fn unit_weights(points: &[Point]) -> Vec<WeightedPoint> {
    points.iter().cloned().map(WeightedPoint::unit).collect()
}

pub fn total_weight(points: &[WeightedPoint]) -> u64 {
    points.iter().map(|p| p.weight).sum()
}

/// A symmetric table of distances for an explicit finite metric.
#[derive(Clone, Debug, PartialEq)]
pub struct DistanceMatrix {
    n: usize,
    entries: Vec<f64>,
}

impl DistanceMatrix {
    /// Builds the table from rows and checks the metric axioms: symmetry,
    /// nonnegativity, zero diagonal, positive off-diagonal entries and the
    /// triangle inequality (on every triple for `n <= 40`, on a fixed
    /// stride of triples otherwise).
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return input("distance matrix must be square");
        }
        let entries: Vec<f64> = rows.into_iter().flatten().collect();
        let m = DistanceMatrix { n, entries };
        for i in 0..n {
            if m.get(i, i) != 0.0 {
                return input(format!("nonzero diagonal entry at {i}"));
            }
            for j in 0..n {
                let v = m.get(i, j);
                if !v.is_finite() || v < 0.0 {
                    return input(format!("entry ({i},{j}) is not a nonnegative real"));
                }
                if v != m.get(j, i) {
                    return input(format!("entries ({i},{j}) and ({j},{i}) differ"));
                }
                if i != j && v == 0.0 {
                    return input(format!("distinct indices {i} and {j} at distance 0"));
                }
            }
        }
        let step = if n <= 40 { 1 } else { n / 40 + 1 };
        for a in (0..n).step_by(step) {
            for b in (0..n).step_by(step) {
                for c in (0..n).step_by(step) {
                    if !le_tol(m.get(a, c), m.get(a, b) + m.get(b, c)) {
                        return input(format!("triangle inequality fails on ({a},{b},{c})"));
                    }
                }
            }
        }
        Ok(m)
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.n + j]
    }

    /// Point handle for row `i`.
    pub fn point(&self, i: usize) -> Point {
        Point(vec![i as f64])
    }
}

/// Distance function over [`Point`]s.
#[derive(Clone, Debug, PartialEq)]
pub enum Metric {
    L2,
    Linf,
    Explicit(Arc<DistanceMatrix>),
}

impl Metric {
    /// Checked distance: both points must have equal dimension, and
    /// explicit-metric handles must be valid row indices.
    pub fn distance(&self, p: &Point, q: &Point) -> Result<f64> {
        if p.dim() != q.dim() {
            return input(format!("dimension mismatch: {} vs {}", p.dim(), q.dim()));
        }
        if let Metric::Explicit(m) = self {
            self.index_of(p, m)?;
            self.index_of(q, m)?;
        }
        Ok(self.dist(p, q))
    }

    fn index_of(&self, p: &Point, m: &DistanceMatrix) -> Result<usize> {
        match p.coords() {
            [x] if x.fract() == 0.0 && *x >= 0.0 && (*x as usize) < m.len() => Ok(*x as usize),
            _ => input(format!("{p} is not a row index of the distance matrix")),
        }
    }

    /// Unchecked distance for inner loops; callers validate dimensions first.
    #[inline]
    pub(crate) fn dist(&self, p: &Point, q: &Point) -> f64 {
        match self {
            Metric::L2 => {
                p.0.iter()
                    .zip(&q.0)
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    .sqrt()
            }
            Metric::Linf => {
                p.0.iter()
                    .zip(&q.0)
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max)
            }
            Metric::Explicit(m) => m.get(p.0[0] as usize, q.0[0] as usize),
        }
    }

    /// Validates that every point has dimension `dim` (and, for explicit
    /// metrics, is a valid row handle).
    pub fn check_points<'a>(&self, points: impl IntoIterator<Item = &'a Point>) -> Result<()> {
        let mut dim = None;
        for p in points {
            match dim {
                None => dim = Some(p.dim()),
                Some(d) if d != p.dim() => {
                    return input(format!("dimension mismatch: {} vs {}", d, p.dim()))
                }
                _ => {}
            }
            if p.dim() == 0 {
                return input("points must have at least one coordinate");
            }
            if p.0.iter().any(|x| !x.is_finite()) {
                return input(format!("non-finite coordinate in {p}"));
            }
            if let Metric::Explicit(m) = self {
                self.index_of(p, m)?;
            }
        }
        Ok(())
    }
}

/// Checked distance between two points.
pub fn distance(p: &Point, q: &Point, m: &Metric) -> Result<f64> {
    m.distance(p, q)
}

/// A closed ball `b(center, radius)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ball {
    pub center: Point,
    pub radius: f64,
}

impl Ball {
    pub fn contains(&self, p: &Point, m: &Metric) -> bool {
        le_tol(m.dist(&self.center, p), self.radius)
    }
}

/// Distinct locations in first-occurrence order.
pub fn distinct_locations<'a>(points: impl IntoIterator<Item = &'a Point>) -> Vec<Point> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for p in points {
        if seen.insert(p.key()) {
            out.push(p.clone());
        }
    }
    out
}

/// Smallest nonzero distance among the given points.
///
/// Coinciding points are ignored; fewer than two distinct locations is a
/// [`Error::Degenerate`].
pub fn min_pairwise_distance(points: &[Point], m: &Metric) -> Result<f64> {
    m.check_points(points)?;
    let locs = distinct_locations(points);
    if locs.len() < 2 {
        return Err(Error::Degenerate(
            "fewer than two distinct locations".into(),
        ));
    }
    let mut best = f64::INFINITY;
    for i in 0..locs.len() {
        for j in i + 1..locs.len() {
            let d = m.dist(&locs[i], &locs[j]);
            if d > 0.0 && d < best {
                best = d;
            }
        }
    }
    Ok(best)
}

/// Finite set of candidate centers used by oracles and validators.
#[derive(Clone, Debug, PartialEq)]
pub enum CenterUniverse {
    /// The distinct input locations.
    InputPoints,
    /// Per coordinate, every input value and every midpoint of two input
    /// values; the universe is the Cartesian product. Exact for L∞.
    LinfMidpointGrid,
    /// A caller-supplied list.
    ExplicitList(Vec<Point>),
}

/// Default cap on materialized universe size.
pub const DEFAULT_UNIVERSE_CAP: usize = 1_000_000;

/// Materializes `universe` over the locations of `points`.
pub fn materialize_universe(
    points: &[WeightedPoint],
    universe: &CenterUniverse,
    cap: usize,
) -> Result<Vec<Point>> {
    if points.is_empty() {
        return input("cannot materialize a universe over an empty set");
    }
    let out = match universe {
        CenterUniverse::InputPoints => distinct_locations(points.iter().map(|p| &p.point)),
        CenterUniverse::ExplicitList(list) => distinct_locations(list.iter()),
        CenterUniverse::LinfMidpointGrid => {
            let d = points[0].point.dim();
            let axes: Vec<Vec<f64>> = (0..d)
                .map(|j| {
                    let vals: BTreeSet<u64> =
                        points.iter().map(|p| ordered_bits(p.point.0[j])).collect();
                    let vals: Vec<f64> = vals.into_iter().map(from_ordered_bits).collect();
                    let mut all: BTreeSet<u64> = vals.iter().map(|&x| ordered_bits(x)).collect();
                    for a in 0..vals.len() {
                        for b in a + 1..vals.len() {
                            all.insert(ordered_bits((vals[a] + vals[b]) / 2.0));
                        }
                    }
                    all.into_iter().map(from_ordered_bits).collect()
                })
                .collect();
            let size = axes
                .iter()
                .try_fold(1usize, |acc, a| acc.checked_mul(a.len()))
                .unwrap_or(usize::MAX);
            if size > cap {
                return Err(Error::Capacity(format!(
                    "midpoint grid has {size} candidates (cap {cap})"
                )));
            }
            let mut grid = vec![Vec::with_capacity(d)];
            for axis in &axes {
                grid = grid
                    .into_iter()
                    .flat_map(|prefix| {
                        axis.iter().map(move |&x| {
                            let mut c = prefix.clone();
                            c.push(x);
                            c
                        })
                    })
                    .collect();
            }
            grid.into_iter().map(Point).collect()
        }
    };
    if out.len() > cap {
        return Err(Error::Capacity(format!(
            "universe has {} candidates (cap {cap})",
            out.len()
        )));
    }
    Ok(out)
}

// Order-preserving map from f64 to u64 so BTreeSet sorts numerically.
fn ordered_bits(x: f64) -> u64 {
    let x = if x == 0.0 { 0.0 } else { x };
    let b = x.to_bits();
    if b >> 63 == 1 {
        !b
    } else {
        b | (1 << 63)
    }
}

fn from_ordered_bits(b: u64) -> f64 {
    if b >> 63 == 1 {
        f64::from_bits(b & !(1 << 63))
    } else {
        f64::from_bits(!b)
    }
}
