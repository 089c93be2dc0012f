//! Coresets for k-center clustering with outliers.
//!
//! A weighted point set `P*` is an `(ε, k, z)`-coreset of `P` when solving
//! k-center with `z` outliers on `P*` gives nearly the same answer as on `P`.
//! This crate builds such coresets offline, in an insertion-only stream, in
//! a fully dynamic (insert/delete) stream over an integer grid, and in three
//! simulated massively parallel protocols. It also ships exhaustive oracles
//! and validators that decide the coreset conditions on small instances,
//! and generators for the adversarial instances that make large coresets
//! unavoidable.
//!
//! ```
//! use kcenter_coreset::{mbc_construction, Instance, Metric, Point, WeightedPoint};
//!
//! let points: Vec<WeightedPoint> = [0.0, 0.1, 0.2, 10.0, 10.1, 50.0]
//!     .iter()
//!     .map(|&x| WeightedPoint::unit(Point(vec![x])))
//!     .collect();
//! let inst = Instance::new(points, 2, 1, 0.5, Metric::L2).unwrap();
//! let cover = mbc_construction(&inst).unwrap();
//! assert!(cover.representatives.len() <= 6);
//! let total: u64 = cover.representatives.iter().map(|q| q.weight).sum();
//! assert_eq!(total, 6);
//! ```

pub mod dynamic;
pub mod error;
pub mod io;
pub mod lower_bounds;
pub mod metric;
pub mod mpc;
pub mod solvers;
pub mod streaming;
pub mod validate;

/// Guide chapters, compiled as doctests so the book's snippets stay in sync
/// with the API.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/problem.md")]
    mod problem {}
    #[doc = include_str!("../../../book/src/offline.md")]
    mod offline {}
    #[doc = include_str!("../../../book/src/streaming.md")]
    mod streaming {}
    #[doc = include_str!("../../../book/src/dynamic.md")]
    mod dynamic {}
    #[doc = include_str!("../../../book/src/mpc.md")]
    mod mpc {}
    #[doc = include_str!("../../../book/src/lower-bounds.md")]
    mod lower_bounds {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}

pub use dynamic::{
    DynamicConfig, DynamicCoresetState, DynamicReport, GridConfig, Update, UpdateStream,
};
pub use error::{Error, Result};
pub use metric::{
    distance, materialize_universe, min_pairwise_distance, Ball, CenterUniverse, DistanceMatrix,
    Metric, Point, WeightedPoint,
};
pub use mpc::{Distribution, MpcConfig, MpcRun};
pub use solvers::{
    brute_force_opt, evaluate_cost, greedy, mbc_construction, update_coreset, GreedyResult,
    Instance, MiniBallCovering, Solution,
};
pub use streaming::StreamState;
pub use validate::{check_coreset, check_mini_ball_covering, ValidationReport, Violation};
