//! Turnstile distinct-count (F0) estimation by nested subsampling.
//!
//! A key lives at levels `0..=t` where `t` is the number of trailing zero
//! bits of a pairwise independent hash of the key, so level `l` samples
//! each key with probability about `2^-l`. Each level is a small sparse
//! recovery sketch of capacity `ceil(8/eps^2)`. The estimate is
//! `2^l * |recovered|` at the lowest level whose recovery completes.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::hashing::PairwiseHash;
use super::sparse_recovery::SparseRecoverySketch;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct F0Sketch {
    level_hash: PairwiseHash,
    levels: Vec<SparseRecoverySketch>,
    capacity: usize,
}

/// Per-level capacity for relative error `eps`.
pub fn f0_capacity(eps: f64) -> usize {
    (8.0 / (eps * eps)).ceil() as usize
}

impl F0Sketch {
    /// Estimator for keys in `0..universe` with relative error `eps` and
    /// failure probability `delta`.
    pub fn new(eps: f64, delta: f64, universe: u64, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let level_hash = PairwiseHash::random(&mut rng);
        let capacity = f0_capacity(eps);
        let n_levels = 64 - universe.max(1).leading_zeros() as usize + 2;
        let rows = ((1.0 / delta).log2().ceil() as usize + 1).clamp(3, 8);
        let levels = (0..n_levels)
            .map(|_| SparseRecoverySketch::with_rows(capacity, rows, universe, rng.gen()))
            .collect();
        F0Sketch {
            level_hash,
            levels,
            capacity,
        }
    }

    fn top_level(&self, key: u64) -> usize {
        let h = self.level_hash.hash(key);
        (h.trailing_zeros() as usize).min(self.levels.len() - 1)
    }

    pub fn update(&mut self, key: u64, delta: i64) {
        let top = self.top_level(key);
        for level in &mut self.levels[..=top] {
            level.update(key, delta);
        }
    }

    pub fn merge(&mut self, other: &Self) {
        for (a, b) in self.levels.iter_mut().zip(&other.levels) {
            a.merge(b);
        }
    }

    /// Estimated number of keys with nonzero count; exactly 0 when empty.
    pub fn query(&self) -> f64 {
        for (l, sk) in self.levels.iter().enumerate() {
            if let Some(items) = sk.query().complete() {
                return items.len() as f64 * (1u64 << l) as f64;
            }
        }
        // unreachable in practice: the top level holds almost nothing
        f64::INFINITY
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn bytes(&self) -> usize {
        self.levels.iter().map(SparseRecoverySketch::bytes).sum()
    }
}
