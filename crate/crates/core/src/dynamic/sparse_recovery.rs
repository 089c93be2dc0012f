//! Linear s-sparse recovery over integer keys.
//!
//! Each of `rows` hash rows maps a key to one of `width = 2s` buckets. A
//! bucket keeps the net count, the count-weighted key sum, and a
//! count-weighted fingerprint `base^key` over the prime field. A bucket
//! holding a single key is recognized by the fingerprint and peeled out of
//! every row; recovery is complete when all buckets drain to zero.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::hashing::{add_mod, from_signed, mul_mod, pow_mod, sub_mod, PairwiseHash, P61};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
struct Bucket {
    count: i64,
    key_sum: i128,
    fingerprint: u64,
}

impl Bucket {
    fn is_zero(&self) -> bool {
        self.count == 0 && self.key_sum == 0 && self.fingerprint == 0
    }
}

/// Outcome of [`SparseRecoverySketch::query`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Recovery {
    /// Every nonzero key with its exact count, sorted by key.
    Complete(Vec<(u64, u64)>),
    /// Peeling stalled. The listed pairs were verified before it stalled
    /// and are exact, but other nonzero keys remain.
    Incomplete(Vec<(u64, u64)>),
}

impl Recovery {
    pub fn complete(self) -> Option<Vec<(u64, u64)>> {
        match self {
            Recovery::Complete(v) => Some(v),
            Recovery::Incomplete(_) => None,
        }
    }

    pub fn pairs(&self) -> &[(u64, u64)] {
        match self {
            Recovery::Complete(v) | Recovery::Incomplete(v) => v,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SparseRecoverySketch {
    s: usize,
    rows: usize,
    width: usize,
    universe: u64,
    hashes: Vec<PairwiseHash>,
    base: u64,
    buckets: Vec<Bucket>,
}

/// Rows used for sparsity `s` and failure probability `delta`:
/// `ceil(log2(s / delta))`, clamped to `[3, 24]`.
pub fn rows_for(s: usize, delta: f64) -> usize {
    ((s.max(1) as f64 / delta).log2().ceil() as usize).clamp(3, 24)
}

impl SparseRecoverySketch {
    /// Sketch for keys in `0..universe`.
    pub fn new(s: usize, delta: f64, universe: u64, seed: u64) -> Self {
        Self::with_rows(s, rows_for(s, delta), universe, seed)
    }

    pub fn with_rows(s: usize, rows: usize, universe: u64, seed: u64) -> Self {
        assert!(universe < P61, "key universe must fit the field");
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let hashes = (0..rows).map(|_| PairwiseHash::random(&mut rng)).collect();
        let base = PairwiseHash::random(&mut rng).hash(0x9e37_79b9).max(2);
        let width = (2 * s).max(4);
        SparseRecoverySketch {
            s,
            rows,
            width,
            universe,
            hashes,
            base,
            buckets: vec![Bucket::default(); rows * width],
        }
    }

    pub fn sparsity(&self) -> usize {
        self.s
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    /// Memory held by the buckets.
    pub fn bytes(&self) -> usize {
        self.buckets.len() * std::mem::size_of::<Bucket>()
    }

    pub fn is_empty(&self) -> bool {
        self.buckets.iter().all(Bucket::is_zero)
    }

    pub fn update(&mut self, key: u64, delta: i64) {
        debug_assert!(key < self.universe);
        let fp = mul_mod(from_signed(delta), pow_mod(self.base, key));
        for (row, h) in self.hashes.iter().enumerate() {
            let b = &mut self.buckets[row * self.width + h.bucket(key, self.width)];
            b.count += delta;
            b.key_sum += key as i128 * delta as i128;
            b.fingerprint = add_mod(b.fingerprint, fp);
        }
    }

    /// Bucket-wise sum with a sketch built from the same seed.
    pub fn merge(&mut self, other: &Self) {
        assert_eq!(self.hashes, other.hashes, "sketches must share seeds");
        for (a, b) in self.buckets.iter_mut().zip(&other.buckets) {
            a.count += b.count;
            a.key_sum += b.key_sum;
            a.fingerprint = add_mod(a.fingerprint, b.fingerprint);
        }
    }

    fn decode(&self, row: usize, idx: usize, b: &Bucket) -> Option<(u64, i64)> {
        if b.count == 0 || b.key_sum % b.count as i128 != 0 {
            return None;
        }
        let key = b.key_sum / b.count as i128;
        if key < 0 || key >= self.universe as i128 {
            return None;
        }
        let key = key as u64;
        if self.hashes[row].bucket(key, self.width) != idx {
            return None;
        }
        let want = mul_mod(from_signed(b.count), pow_mod(self.base, key));
        (want == b.fingerprint).then_some((key, b.count))
    }

    /// Peels single-key buckets until none are left.
    pub fn query(&self) -> Recovery {
        let mut work = self.buckets.clone();
        let mut found: Vec<(u64, u64)> = Vec::new();
        let mut poisoned = false;
        loop {
            let mut progress = false;
            for i in 0..work.len() {
                let (row, idx) = (i / self.width, i % self.width);
                let Some((key, count)) = self.decode(row, idx, &work[i]) else {
                    continue;
                };
                if count < 0 {
                    // strict turnstile violated, or a fingerprint collision
                    poisoned = true;
                    continue;
                }
                let fp = mul_mod(from_signed(count), pow_mod(self.base, key));
                for (r, h) in self.hashes.iter().enumerate() {
                    let b = &mut work[r * self.width + h.bucket(key, self.width)];
                    b.count -= count;
                    b.key_sum -= key as i128 * count as i128;
                    b.fingerprint = sub_mod(b.fingerprint, fp);
                }
                found.push((key, count as u64));
                progress = true;
            }
            if !progress {
                break;
            }
        }
        found.sort_unstable();
        if !poisoned && work.iter().all(Bucket::is_zero) {
            Recovery::Complete(found)
        } else {
            Recovery::Incomplete(found)
        }
    }
}
