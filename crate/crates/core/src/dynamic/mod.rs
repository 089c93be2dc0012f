//! Fully dynamic (insert/delete) coreset maintenance over `[Δ]^d`.
//!
//! Every grid level keeps a sparse recovery sketch and an F0 estimator over
//! its cell-count vector. A report picks the finest level whose nonempty
//! cell count is at most `s = k (4√d/ε)^d + z` and returns the centers of
//! its nonempty cells weighted by their counts.
//!
//! An optional exact shadow (per-location and per-cell counts) enforces the
//! strict turnstile discipline and serves as the reference in tests.

pub mod f0;
pub mod grid;
pub mod hashing;
pub mod sparse_recovery;

use std::collections::{BTreeMap, HashMap};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

pub use f0::F0Sketch;
pub use grid::{CellId, GridConfig};
pub use sparse_recovery::{Recovery, SparseRecoverySketch};

use crate::error::{input, Error, Result};
use crate::metric::{Point, WeightedPoint};
use crate::solvers::check_params;

/// Relative error of the F0 estimators used for level selection.
pub const F0_EPSILON: f64 = 1.0 / 3.0;

/// `floor(k (4√d/ε)^d) + z`.
pub fn sparsity_target(k: usize, z: u64, epsilon: f64, d: usize) -> usize {
    let x = k as f64 * (4.0 * (d as f64).sqrt() / epsilon).powi(d as i32);
    // absorb rounding in e.g. (4√2)^2 = 32
    (x + 1e-9).floor() as usize + z as usize
}

/// One turnstile operation: `sign` is +1 for an insertion, -1 for a
/// deletion.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Update {
    pub point: Point,
    pub sign: i64,
}

/// A sequence of updates over `[Δ]^d`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct UpdateStream {
    pub delta: u64,
    pub dim: usize,
    pub updates: Vec<Update>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DynamicConfig {
    pub k: usize,
    pub z: u64,
    pub epsilon: f64,
    /// Overall failure budget for one report.
    pub delta: f64,
    pub seed: u64,
    pub exact_shadow: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
struct LevelSketches {
    sr: SparseRecoverySketch,
    f0: F0Sketch,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
struct Shadow {
    locations: HashMap<Vec<u64>, u64>,
    cells: Vec<BTreeMap<u64, u64>>,
}

/// Which machinery produced a report.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum ReportSource {
    Sketch,
    Exact,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DynamicReport {
    pub level: usize,
    pub source: ReportSource,
    /// Cell centers weighted by their point counts, in cell-key order.
    pub coreset: Vec<WeightedPoint>,
}

#[derive(Clone, Debug)]
pub struct DynamicCoresetState {
    grid: GridConfig,
    cfg: DynamicConfig,
    s: usize,
    levels: Vec<LevelSketches>,
    shadow: Option<Shadow>,
    ops: u64,
    live: i64,
}

impl DynamicCoresetState {
    pub fn new(grid: GridConfig, cfg: DynamicConfig) -> Result<Self> {
        check_params(cfg.k, cfg.epsilon)?;
        if !(cfg.delta > 0.0 && cfg.delta < 1.0) {
            return input(format!(
                "failure probability must lie in (0, 1), got {}",
                cfg.delta
            ));
        }
        let s = sparsity_target(cfg.k, cfg.z, cfg.epsilon, grid.dim());
        let n_levels = grid.levels();
        // union bound over the levels touched by one report
        let per_level = cfg.delta / n_levels as f64;
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let levels = (0..n_levels)
            .map(|i| {
                let universe = grid.cell_count(i);
                LevelSketches {
                    sr: SparseRecoverySketch::new(2 * s, per_level, universe, rng.gen()),
                    f0: F0Sketch::new(F0_EPSILON, per_level, universe, rng.gen()),
                }
            })
            .collect();
        let shadow = cfg.exact_shadow.then(|| Shadow {
            locations: HashMap::new(),
            cells: vec![BTreeMap::new(); n_levels],
        });
        Ok(DynamicCoresetState {
            grid,
            cfg,
            s,
            levels,
            shadow,
            ops: 0,
            live: 0,
        })
    }

    pub fn grid(&self) -> &GridConfig {
        &self.grid
    }

    pub fn config(&self) -> &DynamicConfig {
        &self.cfg
    }

    /// The sparsity target `s`.
    pub fn s(&self) -> usize {
        self.s
    }

    pub fn ops(&self) -> u64 {
        self.ops
    }

    /// Net number of points currently present.
    pub fn live_count(&self) -> i64 {
        self.live
    }

    pub fn sketch_bytes(&self) -> usize {
        self.levels
            .iter()
            .map(|l| l.sr.bytes() + l.f0.bytes())
            .sum()
    }

    pub fn has_shadow(&self) -> bool {
        self.shadow.is_some()
    }

    /// Applies `sign` (+1 insert, -1 delete) for `p` at every level.
    pub fn update(&mut self, p: &Point, sign: i64) -> Result<()> {
        if sign != 1 && sign != -1 {
            return input(format!("update sign must be +1 or -1, got {sign}"));
        }
        let coords = self.grid.coords_of(p)?;
        if let Some(sh) = &mut self.shadow {
            let c = sh.locations.entry(coords.clone()).or_insert(0);
            if sign < 0 && *c == 0 {
                return input(format!("deleting {p}, which is not present"));
            }
            if sign > 0 {
                *c += 1;
            } else {
                *c -= 1;
                if *c == 0 {
                    sh.locations.remove(&coords);
                }
            }
        }
        for (i, lvl) in self.levels.iter_mut().enumerate() {
            let key = self.grid.key(&self.grid.cell_of_coords(&coords, i));
            lvl.sr.update(key, sign);
            lvl.f0.update(key, sign);
            if let Some(sh) = &mut self.shadow {
                let e = sh.cells[i].entry(key).or_insert(0);
                if sign > 0 {
                    *e += 1;
                } else {
                    *e -= 1;
                    if *e == 0 {
                        sh.cells[i].remove(&key);
                    }
                }
            }
        }
        self.ops += 1;
        self.live += sign;
        Ok(())
    }

    /// Exact nonempty cells of `level` with counts (shadow mode only).
    pub fn shadow_cells(&self, level: usize) -> Option<Vec<(CellId, u64)>> {
        let sh = self.shadow.as_ref()?;
        Some(
            sh.cells[level]
                .iter()
                .map(|(&k, &c)| (self.grid.cell_from_key(level, k), c))
                .collect(),
        )
    }

    /// Raw sparse recovery result for `level`.
    pub fn recover_level(&self, level: usize) -> Recovery {
        self.levels[level].sr.query()
    }

    pub fn estimate_level(&self, level: usize) -> f64 {
        self.levels[level].f0.query()
    }

    fn weighted_centers(&self, level: usize, cells: &[(u64, u64)]) -> Vec<WeightedPoint> {
        cells
            .iter()
            .map(|&(key, count)| {
                WeightedPoint::new(
                    self.grid.center(&self.grid.cell_from_key(level, key)),
                    count,
                )
            })
            .collect()
    }

    /// Report from the sketches.
    ///
    /// Starts at the finest level whose F0 estimate is at most
    /// `(1 + F0_EPSILON) s`, then moves to coarser levels until a recovery
    /// completes with at most `s` cells.
    pub fn report(&self) -> Result<DynamicReport> {
        let cap = (1.0 + F0_EPSILON) * self.s as f64;
        let top = self.levels.len() - 1;
        let start = (0..=top)
            .find(|&i| self.levels[i].f0.query() <= cap)
            .unwrap_or(top);
        for level in start..=top {
            if let Some(cells) = self.levels[level].sr.query().complete() {
                if cells.is_empty() {
                    return input("no live points to report");
                }
                if cells.len() <= self.s {
                    return Ok(DynamicReport {
                        level,
                        source: ReportSource::Sketch,
                        coreset: self.weighted_centers(level, &cells),
                    });
                }
            }
        }
        Err(Error::SketchFailure(format!(
            "no level from {start} to {top} recovered at most {} cells",
            self.s
        )))
    }

    /// Report from the exact shadow: the finest level with at most `s`
    /// nonempty cells.
    pub fn report_exact(&self) -> Result<DynamicReport> {
        let sh = self
            .shadow
            .as_ref()
            .ok_or_else(|| Error::Input("exact report requires the exact shadow".into()))?;
        if self.live == 0 {
            return input("no live points to report");
        }
        let level = (0..sh.cells.len())
            .find(|&i| sh.cells[i].len() <= self.s)
            .expect("the top level has a single cell");
        let cells: Vec<(u64, u64)> = sh.cells[level].iter().map(|(&k, &c)| (k, c)).collect();
        Ok(DynamicReport {
            level,
            source: ReportSource::Exact,
            coreset: self.weighted_centers(level, &cells),
        })
    }

    /// Live points with multiplicity (shadow mode only).
    pub fn shadow_points(&self) -> Option<Vec<WeightedPoint>> {
        let sh = self.shadow.as_ref()?;
        let mut v: Vec<(&Vec<u64>, &u64)> = sh.locations.iter().collect();
        v.sort();
        Some(
            v.into_iter()
                .map(|(c, &w)| WeightedPoint::new(Point(c.iter().map(|&x| x as f64).collect()), w))
                .collect(),
        )
    }

    /// True when both states hold bucket-for-bucket identical sketches.
    pub fn same_sketches(&self, other: &Self) -> bool {
        self.levels == other.levels
    }

    /// Adds another state's sketches (same grid and seed) into this one.
    pub fn merge(&mut self, other: &Self) -> Result<()> {
        if self.grid != other.grid || self.cfg.seed != other.cfg.seed {
            return input("can only merge states with the same grid and seed");
        }
        for (a, b) in self.levels.iter_mut().zip(&other.levels) {
            a.sr.merge(&b.sr);
            a.f0.merge(&b.f0);
        }
        if let (Some(a), Some(b)) = (&mut self.shadow, &other.shadow) {
            for (loc, c) in &b.locations {
                *a.locations.entry(loc.clone()).or_insert(0) += c;
            }
            for (la, lb) in a.cells.iter_mut().zip(&b.cells) {
                for (k, c) in lb {
                    *la.entry(*k).or_insert(0) += c;
                }
            }
        }
        self.ops += other.ops;
        self.live += other.live;
        Ok(())
    }
}
