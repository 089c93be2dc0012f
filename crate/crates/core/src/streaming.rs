//! One-pass insertion-only coreset maintenance.
//!
//! The state keeps a lower bound `r` on the optimal radius and a weighted
//! set of representatives. Arrivals join the first representative within
//! `(ε/2) r`; whenever the representative count reaches
//! `k (16/ε)^d + z` the bound doubles and the set is re-netted at the new
//! `(ε/2) r`.

use std::collections::HashMap;

use crate::error::{input, Error, Result};
use crate::metric::{le_tol, min_pairwise_distance, Metric, Point, WeightedPoint};
use crate::solvers::{check_params, net_cover};

#[derive(Clone, Debug)]
pub struct StreamState {
    k: usize,
    z: u64,
    epsilon: f64,
    d: usize,
    metric: Metric,
    r: f64,
    pstar: Vec<WeightedPoint>,
    threshold: usize,
    arrivals: u64,
    dim: Option<usize>,
    trace: Option<Trace>,
}

/// Assignment history: every arrival points at a representative id, and
/// ids absorbed by a re-netting point at the id that absorbed them.
#[derive(Clone, Debug, Default)]
struct Trace {
    ids: Vec<u64>,
    next_id: u64,
    merged_into: HashMap<u64, u64>,
    arrivals: Vec<(Point, u64)>,
}

impl Trace {
    fn current(&self, mut id: u64) -> u64 {
        while let Some(&next) = self.merged_into.get(&id) {
            id = next;
        }
        id
    }
}

/// `floor(k (16/ε)^d) + z`, refusing values beyond 2^53.
pub fn stream_threshold(k: usize, z: u64, epsilon: f64, d: usize) -> Result<usize> {
    let base = k as f64 * (16.0 / epsilon).powi(d as i32);
    let t = base.floor() + z as f64;
    if !t.is_finite() || t > (1u64 << 53) as f64 {
        return Err(Error::Config(format!(
            "size threshold k(16/eps)^d + z = {t:e} exceeds 2^53; use a larger epsilon"
        )));
    }
    Ok(t as usize)
}

impl StreamState {
    /// Fresh state with `r = 0` and no representatives.
    pub fn new(k: usize, z: u64, epsilon: f64, d: usize, metric: Metric) -> Result<Self> {
        check_params(k, epsilon)?;
        if d == 0 {
            return input("doubling dimension must be at least 1");
        }
        let threshold = stream_threshold(k, z, epsilon, d)?;
        Ok(StreamState {
            k,
            z,
            epsilon,
            d,
            metric,
            r: 0.0,
            pstar: Vec::new(),
            threshold,
            arrivals: 0,
            dim: None,
            trace: None,
        })
    }

    /// Records the full assignment history so that
    /// [`StreamState::max_assignment_distance`] can replay it. Costs memory
    /// linear in the stream length; meant for tests and audits.
    pub fn with_trace(mut self) -> Self {
        self.trace = Some(Trace::default());
        self
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn threshold(&self) -> usize {
        self.threshold
    }

    pub fn arrivals(&self) -> u64 {
        self.arrivals
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn z(&self) -> u64 {
        self.z
    }

    pub fn doubling_dimension(&self) -> usize {
        self.d
    }

    pub fn metric(&self) -> &Metric {
        &self.metric
    }

    /// Current coreset.
    pub fn report(&self) -> &[WeightedPoint] {
        &self.pstar
    }

    pub fn handle_arrival(&mut self, p: Point) -> Result<()> {
        self.metric.check_points([&p])?;
        match self.dim {
            Some(d) if d != p.dim() => {
                return input(format!("dimension mismatch: expected {d}, got {}", p.dim()))
            }
            None => self.dim = Some(p.dim()),
            _ => {}
        }
        self.arrivals += 1;

        let reach = self.epsilon / 2.0 * self.r;
        let hit = self
            .pstar
            .iter()
            .position(|q| le_tol(self.metric.dist(&p, &q.point), reach));
        let rep = match hit {
            Some(i) => {
                self.pstar[i].weight += 1;
                i
            }
            None => {
                self.pstar.push(WeightedPoint::unit(p.clone()));
                if let Some(t) = &mut self.trace {
                    t.ids.push(t.next_id);
                    t.next_id += 1;
                }
                self.pstar.len() - 1
            }
        };
        if let Some(t) = &mut self.trace {
            let id = t.ids[rep];
            t.arrivals.push((p, id));
        }

        if self.r == 0.0 && self.pstar.len() > self.k + self.z as usize {
            let locs: Vec<Point> = self.pstar.iter().map(|q| q.point.clone()).collect();
            self.r = min_pairwise_distance(&locs, &self.metric)? / 2.0;
        }

        while self.pstar.len() >= self.threshold {
            self.r *= 2.0;
            let (reps, assignment) =
                net_cover(&self.pstar, self.epsilon / 2.0 * self.r, &self.metric);
            if let Some(t) = &mut self.trace {
                let old = std::mem::take(&mut t.ids);
                let mut new_ids = vec![u64::MAX; reps.len()];
                for (i, &a) in assignment.iter().enumerate() {
                    if new_ids[a] == u64::MAX {
                        new_ids[a] = old[i];
                    } else {
                        t.merged_into.insert(old[i], new_ids[a]);
                    }
                }
                t.ids = new_ids;
            }
            self.pstar = reps;
        }
        Ok(())
    }

    /// Replays the recorded history and returns the largest distance from
    /// an arrival to its current representative. `None` without a trace.
    pub fn max_assignment_distance(&self) -> Option<f64> {
        let t = self.trace.as_ref()?;
        let loc: HashMap<u64, &Point> = t
            .ids
            .iter()
            .zip(&self.pstar)
            .map(|(&id, q)| (id, &q.point))
            .collect();
        Some(
            t.arrivals
                .iter()
                .map(|(p, id)| self.metric.dist(p, loc[&t.current(*id)]))
                .fold(0.0, f64::max),
        )
    }
}
