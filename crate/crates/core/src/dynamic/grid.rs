//! Grid hierarchy over the integer cube `[1, Δ]^d`.

use serde::{Deserialize, Serialize};

use crate::error::{input, Result};
use crate::metric::Point;

/// Levels `0..=log2 Δ`; level `i` cells have side `2^i`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridConfig {
    delta: u64,
    dim: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CellId {
    pub level: u32,
    pub index: Vec<u64>,
}

impl GridConfig {
    /// Rounds `delta` up to a power of two.
    pub fn new(delta: u64, dim: usize) -> Result<Self> {
        if delta == 0 || dim == 0 {
            return input("delta and dimension must be positive");
        }
        let delta = delta
            .checked_next_power_of_two()
            .ok_or_else(|| crate::error::Error::Input("delta too large".into()))?;
        // cell keys at level 0 must fit the sketch field (< 2^61)
        let bits = delta.trailing_zeros() as usize * dim;
        if bits > 60 {
            return input(format!(
                "delta^d = 2^{bits} exceeds the supported key range"
            ));
        }
        Ok(GridConfig { delta, dim })
    }

    pub fn delta(&self) -> u64 {
        self.delta
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of levels, `log2 Δ + 1`.
    pub fn levels(&self) -> usize {
        self.delta.trailing_zeros() as usize + 1
    }

    /// Cells per axis at `level`.
    pub fn cells_per_axis(&self, level: usize) -> u64 {
        self.delta >> level
    }

    /// Total number of cells at `level`, `(Δ / 2^level)^d`.
    pub fn cell_count(&self, level: usize) -> u64 {
        self.cells_per_axis(level).pow(self.dim as u32)
    }

    /// Integer coordinates of a point of `[1, Δ]^d`.
    pub fn coords_of(&self, p: &Point) -> Result<Vec<u64>> {
        if p.dim() != self.dim {
            return input(format!(
                "expected {} coordinates, got {}",
                self.dim,
                p.dim()
            ));
        }
        p.coords()
            .iter()
            .map(|&x| {
                if x.fract() != 0.0 || x < 1.0 || x > self.delta as f64 {
                    input(format!(
                        "coordinate {x} is not an integer in [1, {}]",
                        self.delta
                    ))
                } else {
                    Ok(x as u64)
                }
            })
            .collect()
    }

    /// Cell of `p` at `level`: `index_j = (p_j - 1) >> level`.
    pub fn cell_of(&self, p: &Point, level: usize) -> Result<CellId> {
        if level >= self.levels() {
            return input(format!("level {level} out of range"));
        }
        Ok(self.cell_of_coords(&self.coords_of(p)?, level))
    }

    pub(crate) fn cell_of_coords(&self, coords: &[u64], level: usize) -> CellId {
        CellId {
            level: level as u32,
            index: coords.iter().map(|&x| (x - 1) >> level).collect(),
        }
    }

    /// Row-major key of a cell within its level.
    pub fn key(&self, c: &CellId) -> u64 {
        let n = self.cells_per_axis(c.level as usize);
        c.index.iter().rev().fold(0, |acc, &i| acc * n + i)
    }

    pub fn cell_from_key(&self, level: usize, mut key: u64) -> CellId {
        let n = self.cells_per_axis(level);
        let index = (0..self.dim)
            .map(|_| {
                let i = key % n;
                key /= n;
                i
            })
            .collect();
        CellId {
            level: level as u32,
            index,
        }
    }

    /// Center of a cell: `v 2^i + (2^i + 1)/2` per axis.
    pub fn center(&self, c: &CellId) -> Point {
        let side = (1u64 << c.level) as f64;
        Point(
            c.index
                .iter()
                .map(|&v| v as f64 * side + (side + 1.0) / 2.0)
                .collect(),
        )
    }
}
