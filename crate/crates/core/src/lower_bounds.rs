//! Adversarial instances from the lower-bound constructions: the grid
//! clusters with probe points that defeat insertion-only coresets, the
//! one-dimensional `k + z + 1` instance, and the scaled group hierarchy
//! used against fully dynamic coresets.

use serde::Serialize;

use crate::dynamic::{Update, UpdateStream};
use crate::error::{Error, Result};
use crate::metric::Point;

/// `λ = 1/(4dε)`, `h = d(λ+2)/2`, `r = √(h² - 2h + d)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LbGeometry {
    pub epsilon: f64,
    pub d: usize,
    pub lambda: u64,
    pub h: f64,
    pub r: f64,
}

impl LbGeometry {
    /// `(1 - ε)(r + h)/2`, which must exceed `r`.
    pub fn r_bound(&self) -> f64 {
        (1.0 - self.epsilon) * (self.r + self.h) / 2.0
    }
}

/// Requires `0 < ε <= 1/(8d)` and `1/(4dε)` to be an integer.
pub fn lb_geometry(epsilon: f64, d: usize) -> Result<LbGeometry> {
    if d == 0 {
        return Err(Error::Config("dimension must be positive".into()));
    }
    if !(epsilon > 0.0 && epsilon <= 1.0 / (8.0 * d as f64)) {
        return Err(Error::Config(format!(
            "epsilon {epsilon} exceeds 1/(8d) = {}",
            1.0 / (8.0 * d as f64)
        )));
    }
    let raw = 1.0 / (4.0 * d as f64 * epsilon);
    let lambda = raw.round();
    if (raw - lambda).abs() > 1e-9 * raw {
        return Err(Error::Config(format!(
            "1/(4d epsilon) = {raw} is not an integer"
        )));
    }
    let h = d as f64 * (lambda + 2.0) / 2.0;
    let r = (h * h - 2.0 * h + d as f64).sqrt();
    let g = LbGeometry {
        epsilon,
        d,
        lambda: lambda as u64,
        h,
        r,
    };
    if g.r.is_nan() || g.r >= g.r_bound() {
        return Err(Error::Config(format!(
            "r = {r} is not below (1-eps)(r+h)/2 = {}",
            g.r_bound()
        )));
    }
    Ok(g)
}

/// All points of `{0, step, ..., n step}^d` in lexicographic order.
fn grid_points(d: usize, n: u64, step: f64) -> Vec<Vec<f64>> {
    let mut out = vec![Vec::new()];
    for _ in 0..d {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                (0..=n).map(move |i| {
                    let mut v = prefix.clone();
                    v.push(i as f64 * step);
                    v
                })
            })
            .collect();
    }
    out
}

fn offset(p: &Point, axis: usize, by: f64) -> Point {
    let mut c = p.0.clone();
    c[axis] += by;
    Point(c)
}

/// A probe around `p_star`: for every axis `j`, `p* + s e_j` and
/// `p* - s e_j`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Probe {
    pub cluster: usize,
    pub p_star: Point,
    pub plus: Vec<Point>,
    pub minus: Vec<Point>,
}

impl Probe {
    fn around(cluster: usize, p_star: Point, step: f64) -> Self {
        let d = p_star.dim();
        Probe {
            cluster,
            plus: (0..d).map(|j| offset(&p_star, j, step)).collect(),
            minus: (0..d).map(|j| offset(&p_star, j, -step)).collect(),
            p_star,
        }
    }

    /// Probe points, each twice, plus side first.
    pub fn arrivals(&self) -> Vec<Point> {
        self.plus
            .iter()
            .chain(&self.minus)
            .flat_map(|p| [p.clone(), p.clone()])
            .collect()
    }
}

/// The insertion-only instance: `z` outliers on the negative first axis and
/// `k - 2d + 1` integer grids `{0..λ}^d` spaced `4(h + r)` apart.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InsertionLb {
    pub geometry: LbGeometry,
    pub outliers: Vec<Point>,
    pub clusters: Vec<Vec<Point>>,
    pub probe: Option<Probe>,
}

impl InsertionLb {
    /// Outliers, then clusters in order, then the probe points (each
    /// twice).
    pub fn stream(&self) -> Vec<Point> {
        let mut out: Vec<Point> = self
            .outliers
            .iter()
            .chain(self.clusters.iter().flatten())
            .cloned()
            .collect();
        if let Some(p) = &self.probe {
            out.extend(p.arrivals());
        }
        out
    }

    /// `k + z + 1` pairwise far points: one point of every other cluster,
    /// `p*`, the probe points and the outliers.
    pub fn witness(&self) -> Option<Vec<Point>> {
        let p = self.probe.as_ref()?;
        let mut w: Vec<Point> = self
            .clusters
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != p.cluster)
            .map(|(_, c)| c[0].clone())
            .collect();
        w.push(p.p_star.clone());
        w.extend(p.plus.iter().chain(&p.minus).cloned());
        w.extend(self.outliers.iter().cloned());
        Some(w)
    }

    /// Centers `p* ± h e_j` of the radius-`r` balls that cover the probe
    /// points and the probed cluster without `p*`.
    pub fn probe_centers(&self) -> Option<Vec<Point>> {
        let p = self.probe.as_ref()?;
        let h = self.geometry.h;
        let d = self.geometry.d;
        Some(
            (0..d)
                .map(|j| offset(&p.p_star, j, h))
                .chain((0..d).map(|j| offset(&p.p_star, j, -h)))
                .collect(),
        )
    }
}

/// Builds the insertion-only instance. `probe = Some((cluster, index))`
/// picks `p*` as the `index`-th point (lexicographic order) of that
/// cluster.
pub fn gen_insertion_lb(
    k: usize,
    z: u64,
    epsilon: f64,
    d: usize,
    probe: Option<(usize, usize)>,
) -> Result<InsertionLb> {
    let geometry = lb_geometry(epsilon, d)?;
    if k < 2 * d {
        return Err(Error::Config(format!(
            "k = {k} must be at least 2d = {}",
            2 * d
        )));
    }
    let hr = geometry.h + geometry.r;
    let lambda = geometry.lambda;
    let outliers = (1..=z)
        .map(|i| {
            let mut c = vec![0.0; d];
            c[0] = -4.0 * hr * i as f64;
            Point(c)
        })
        .collect();
    let base = grid_points(d, lambda, 1.0);
    let shift = lambda as f64 + 4.0 * hr;
    let clusters: Vec<Vec<Point>> = (0..k - 2 * d + 1)
        .map(|i| {
            base.iter()
                .map(|c| offset(&Point(c.clone()), 0, shift * i as f64))
                .collect()
        })
        .collect();
    let probe = match probe {
        None => None,
        Some((ci, pi)) => {
            let p_star = clusters
                .get(ci)
                .and_then(|c| c.get(pi))
                .ok_or_else(|| Error::Input(format!("probe ({ci}, {pi}) is out of range")))?
                .clone();
            Some(Probe::around(ci, p_star, hr))
        }
    };
    Ok(InsertionLb {
        geometry,
        outliers,
        clusters,
        probe,
    })
}

/// Points `1, ..., k + z`, followed by `k + z + 1` when `extra` is set.
pub fn gen_one_dim_lb(k: usize, z: u64, extra: bool) -> Result<Vec<Point>> {
    if k == 0 {
        return Err(Error::Config("k must be at least 1".into()));
    }
    let n = k as u64 + z + u64::from(extra);
    Ok((1..=n).map(|i| Point(vec![i as f64])).collect())
}

/// The fully dynamic instance over `[Δ]^d`. Cluster `i` consists of groups
/// `G_i^1..G_i^g`; group `m` is the grid `{0, 2^m, ..., λ 2^m}^d` without
/// its lexicographically smallest octant, which holds the smaller groups.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DynamicLb {
    pub geometry: LbGeometry,
    pub delta: u64,
    pub g: u32,
    /// Integer gap between consecutive clusters and outliers.
    pub spacing: u64,
    pub outliers: Vec<Point>,
    /// `clusters[i][m - 1]` is group `G_i^m`.
    pub clusters: Vec<Vec<Vec<Point>>>,
}

impl DynamicLb {
    /// Inserts the outliers, then every cluster group by group.
    pub fn insertions(&self) -> UpdateStream {
        let updates = self
            .outliers
            .iter()
            .chain(self.clusters.iter().flatten().flatten())
            .map(|p| Update {
                point: p.clone(),
                sign: 1,
            })
            .collect();
        UpdateStream {
            delta: self.delta,
            dim: self.geometry.d,
            updates,
        }
    }

    /// The insertions followed by the adversarial tail for
    /// `p* = G_{cluster}^{m*}[index]`: delete every group above `m*` in
    /// every cluster, then insert each point `p* ± ceil(2^{m*}(h + r)) e_j`
    /// twice.
    pub fn scenario(
        &self,
        cluster: usize,
        m_star: u32,
        index: usize,
    ) -> Result<(UpdateStream, Probe)> {
        if m_star == 0 || m_star > self.g {
            return Err(Error::Input(format!(
                "group {m_star} is not in 1..={}",
                self.g
            )));
        }
        let p_star = self
            .clusters
            .get(cluster)
            .and_then(|c| c[m_star as usize - 1].get(index))
            .ok_or_else(|| {
                Error::Input(format!(
                    "probe ({cluster}, {m_star}, {index}) is out of range"
                ))
            })?
            .clone();
        let step = (f64::from(1u32 << m_star) * (self.geometry.h + self.geometry.r)).ceil();
        let probe = Probe::around(cluster, p_star, step);
        let mut stream = self.insertions();
        for c in &self.clusters {
            for p in c[m_star as usize..].iter().flatten() {
                stream.updates.push(Update {
                    point: p.clone(),
                    sign: -1,
                });
            }
        }
        stream.updates.extend(
            probe
                .arrivals()
                .into_iter()
                .map(|point| Update { point, sign: 1 }),
        );
        Ok((stream, probe))
    }
}

/// Builds the fully dynamic instance. Requires `ε <= 1/(8d)`, `k >= 2d`,
/// `λ/2` integral and `Δ >= ((2k + z)(1/(4ε) + d))²`; the layout is shifted
/// into `[1, Δ]^d` (with room for any probe) and rejected if it does not
/// fit.
pub fn gen_dynamic_lb(k: usize, z: u64, epsilon: f64, d: usize, delta: u64) -> Result<DynamicLb> {
    let geometry = lb_geometry(epsilon, d)?;
    if k < 2 * d {
        return Err(Error::Config(format!(
            "k = {k} must be at least 2d = {}",
            2 * d
        )));
    }
    let lambda = geometry.lambda;
    if lambda % 2 != 0 {
        return Err(Error::Config(format!("lambda = {lambda} must be even")));
    }
    let need = ((2 * k) as f64 + z as f64) * (1.0 / (4.0 * epsilon) + d as f64);
    if (delta as f64) < need * need {
        return Err(Error::Config(format!(
            "delta = {delta} is below the required {}",
            need * need
        )));
    }
    let delta = delta
        .checked_next_power_of_two()
        .ok_or_else(|| Error::Config("delta too large".into()))?;
    let log_delta = delta.trailing_zeros();
    let g = (log_delta / 2).saturating_sub(2);
    if g == 0 {
        return Err(Error::Config(format!(
            "delta = {delta} leaves no group levels"
        )));
    }
    let hr = geometry.h + geometry.r;
    let spacing = (f64::from(1u32 << (g + 2)) * hr).ceil() as u64;
    let margin = (f64::from(1u32 << g) * hr).ceil() as u64;
    let width = lambda << g;

    let mut shift = vec![1 + margin; d];
    shift[0] = 1 + margin.max(z * spacing);
    let at = |coords: &[f64], first: u64| {
        Point(
            coords
                .iter()
                .zip(&shift)
                .enumerate()
                .map(|(j, (&x, &s))| x + s as f64 + if j == 0 { first as f64 } else { 0.0 })
                .collect(),
        )
    };

    let outliers: Vec<Point> = (1..=z)
        .map(|i| {
            let mut c = vec![0.0; d];
            c[0] = -((i * spacing) as f64);
            at(&c, 0)
        })
        .collect();
    let half = lambda / 2;
    let clusters: Vec<Vec<Vec<Point>>> = (0..(k - 2 * d + 1) as u64)
        .map(|i| {
            let first = i * (width + spacing);
            (1..=g)
                .map(|m| {
                    let step = f64::from(1u32 << m);
                    grid_points(d, lambda, 1.0)
                        .into_iter()
                        .filter(|idx| idx.iter().any(|&v| v as u64 > half))
                        .map(|idx| at(&idx.iter().map(|&v| v * step).collect::<Vec<_>>(), first))
                        .collect()
                })
                .collect()
        })
        .collect();

    let top = clusters
        .iter()
        .flatten()
        .flatten()
        .flat_map(|p| p.0.iter().copied())
        .fold(0.0f64, f64::max)
        + margin as f64;
    if top > delta as f64 {
        return Err(Error::Config(format!(
            "the construction spans {top} > delta = {delta}"
        )));
    }
    Ok(DynamicLb {
        geometry,
        delta,
        g,
        spacing,
        outliers,
        clusters,
    })
}
