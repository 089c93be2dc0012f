use serde::Serialize;
use serde_json::{Map, Value};

use kcenter_coreset::metric::distinct_locations;
use kcenter_coreset::solvers::opt_over_candidates;
use kcenter_coreset::{Error, Metric, WeightedPoint};

/// Work budget for the optional oracle radii, in point-subset evaluations.
const ORACLE_BUDGET: u64 = 20_000_000;

#[derive(Debug, Default, Serialize)]
pub struct Params {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub z: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub metric: Option<&'static str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d: Option<usize>,
}

/// One JSON record per command. Command-specific fields are flattened in
/// after the common ones.
#[derive(Debug, Serialize)]
pub struct RunStats {
    pub command: &'static str,
    pub algorithm: &'static str,
    pub params: Params,
    pub seed: Option<u64>,
    pub coreset_size: Option<usize>,
    /// Optimum of the coreset over its own locations.
    pub coreset_opt: Option<f64>,
    /// Optimum of the input over its own locations.
    pub oracle_opt: Option<f64>,
    #[serde(flatten)]
    pub extra: Map<String, Value>,
    pub wall_time_ms: f64,
}

impl RunStats {
    pub fn new(command: &'static str, algorithm: &'static str, params: Params) -> Self {
        RunStats {
            command,
            algorithm,
            params,
            seed: None,
            coreset_size: None,
            coreset_opt: None,
            oracle_opt: None,
            extra: Map::new(),
            wall_time_ms: 0.0,
        }
    }

    pub fn set(&mut self, key: &str, value: impl Serialize) {
        let v = serde_json::to_value(value).expect("stats values serialize");
        self.extra.insert(key.to_string(), v);
    }

    /// Fills `coreset_size` and, when the exhaustive oracle fits the work
    /// budget, both optimum radii.
    pub fn radii(
        &mut self,
        input: &[WeightedPoint],
        coreset: &[WeightedPoint],
        k: usize,
        z: u64,
        metric: &Metric,
    ) -> Result<(), Error> {
        self.coreset_size = Some(coreset.len());
        self.oracle_opt = small_opt(input, k, z, metric)?;
        self.coreset_opt = small_opt(coreset, k, z, metric)?;
        Ok(())
    }
}

fn small_opt(
    points: &[WeightedPoint],
    k: usize,
    z: u64,
    metric: &Metric,
) -> Result<Option<f64>, Error> {
    if points.is_empty() {
        return Ok(None);
    }
    let cands = distinct_locations(points.iter().map(|p| &p.point));
    let cap = ORACLE_BUDGET / points.len() as u64;
    match opt_over_candidates(points, &cands, k, z, metric, cap) {
        Ok(sol) => Ok(Some(sol.radius)),
        Err(Error::Capacity(_)) => Ok(None),
        Err(e) => Err(e),
    }
}
