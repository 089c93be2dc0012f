mod common;

use common::{lattice, locations, naive_opt, rng};
use kcenter_coreset::metric::total_weight;
use kcenter_coreset::mpc::{
    estimate_radius, run_one_round_randomized, run_r_round, run_two_round,
    two_round_coordinator_bound, Distribution, MpcConfig, Payload,
};
use kcenter_coreset::validate::check_coreset_at;
use kcenter_coreset::{
    check_mini_ball_covering, CenterUniverse, Instance, Metric, MpcRun, Point, WeightedPoint,
};
use rand::Rng;

fn synchronous(run: &MpcRun) -> bool {
    run.transcript
        .iter()
        .all(|m| m.delivered_round == m.sent_round + 1)
        && run
            .transcript
            .windows(2)
            .all(|w| (w[0].sent_round, w[0].to, w[0].from) <= (w[1].sent_round, w[1].to, w[1].from))
}

/// `r̂` by direct search over every value appearing in the vectors.
fn radius_by_definition(v: &[Vec<f64>], z: u64) -> f64 {
    let mut best = f64::INFINITY;
    for r in v.iter().flatten() {
        let mut total = 0u64;
        let mut ok = true;
        for vi in v {
            match vi.iter().position(|&x| x <= *r) {
                Some(j) => total += (1 << j) - 1,
                None => ok = false,
            }
        }
        if ok && total <= 2 * z && *r < best {
            best = *r;
        }
    }
    best
}

#[test]
fn radius_estimate_matches_definition() {
    let mut r = rng(1);
    for _ in 0..500 {
        let m = r.gen_range(1..6);
        let z = r.gen_range(0..8u64);
        let len = (z + 1).next_power_of_two().trailing_zeros() as usize + 1;
        let v: Vec<Vec<f64>> = (0..m)
            .map(|_| {
                let mut x: Vec<f64> = (0..len).map(|_| f64::from(r.gen_range(0..20u32))).collect();
                x.sort_by(|a, b| b.total_cmp(a));
                x
            })
            .collect();
        let (rh, js) = estimate_radius(&v, z).unwrap();
        assert_eq!(rh, radius_by_definition(&v, z));
        for (vi, &j) in v.iter().zip(&js) {
            assert_eq!(j as usize, vi.iter().position(|&x| x <= rh).unwrap());
        }
    }
}

#[test]
fn two_round_pipeline_properties() {
    for seed in 0..12u64 {
        let mut r = rng(seed);
        let d = 1 + (seed % 2) as usize;
        let (k, z, eps) = (2, r.gen_range(0..=3u64), 0.5);
        let pts = lattice(&mut r, 18, d, 25, 1);
        let m = Metric::L2;
        let dists = [
            Distribution::RoundRobin,
            Distribution::Adversarial(vec![1; pts.len()]),
            Distribution::Adversarial((0..pts.len()).map(|i| i % 2).collect()),
        ];
        let opt = naive_opt(&pts, &locations(&pts), k, z, &m);
        for dist in dists {
            let cfg = MpcConfig::new(3, dist).unwrap();
            let run = run_two_round(&pts, k, z, eps, &m, &cfg).unwrap();
            assert_eq!(run.rounds_used, 2);
            assert!(synchronous(&run));
            let rh = run.details.r_hat.unwrap();
            assert!(rh / 3.0 <= opt + 1e-9, "r_hat {rh} opt {opt}");
            assert!(run.details.local_z.iter().sum::<u64>() <= 2 * z);
            let union = &run.details.coordinator_union;
            assert_eq!(total_weight(union), total_weight(&pts));
            let union_check = check_mini_ball_covering(&pts, union, eps * opt, &m).unwrap();
            assert!(union_check.passed, "seed {seed}: {}", union_check.witness);
            let bound = two_round_coordinator_bound(&run, k, z, eps, d);
            assert!(run.coordinator_peak_words as f64 <= bound);
            let inst = Instance::new(pts.clone(), k, z, eps, m.clone()).unwrap();
            let rep = check_coreset_at(
                &inst,
                3.0 * eps,
                &run.coreset,
                &CenterUniverse::InputPoints,
                1 << 22,
            )
            .unwrap();
            assert!(
                rep.passed,
                "seed {seed}: {:?} {}",
                rep.violated, rep.witness
            );
        }
    }
}

#[test]
fn empty_machine_sends_zero_vector() {
    let pts = common::line(&[1.0, 2.0, 3.0, 10.0]);
    let cfg = MpcConfig::new(2, Distribution::Adversarial(vec![1; 4])).unwrap();
    let run = run_two_round(&pts, 1, 1, 1.0, &Metric::L2, &cfg).unwrap();
    assert!(run.details.outlier_vectors[0].iter().all(|&x| x == 0.0));
    assert_eq!(total_weight(&run.coreset), 4);
}

#[test]
fn worker_storage_bound() {
    let mut r = rng(3);
    let pts = lattice(&mut r, 40, 2, 30, 1);
    let cfg = MpcConfig::new(4, Distribution::RoundRobin).unwrap();
    let (k, z, eps) = (2, 3, 0.5);
    let run = run_two_round(&pts, k, z, eps, &Metric::L2, &cfg).unwrap();
    let len = run.details.outlier_vectors[0].len() as u64;
    for i in 1..4 {
        let part = run.machine_of.iter().filter(|&&j| j == i).count() as u64;
        let cover_words = run
            .transcript
            .iter()
            .find(|m| m.from == i && matches!(m.payload, Payload::Points(_)))
            .unwrap()
            .payload
            .words(2);
        assert!(run.per_machine_peak_words[i] <= part * 3 + 4 * len + cover_words);
    }
}

#[test]
fn runs_are_deterministic() {
    let mut r = rng(4);
    let pts = lattice(&mut r, 50, 2, 40, 2);
    let m = Metric::Linf;
    let cfg = MpcConfig::new(4, Distribution::Random(17)).unwrap();
    assert_eq!(
        run_two_round(&pts, 2, 2, 0.5, &m, &cfg).unwrap(),
        run_two_round(&pts, 2, 2, 0.5, &m, &cfg).unwrap()
    );
    assert_eq!(
        run_one_round_randomized(&pts, 2, 2, 0.5, &m, &cfg).unwrap(),
        run_one_round_randomized(&pts, 2, 2, 0.5, &m, &cfg).unwrap()
    );
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .unwrap();
    let single = pool.install(|| run_r_round(&pts, 2, 2, 0.5, &m, 2, &cfg).unwrap());
    assert_eq!(single, run_r_round(&pts, 2, 2, 0.5, &m, 2, &cfg).unwrap());
}

#[test]
fn r_round_example_passes_at_composed_quality() {
    let mut r = rng(6);
    let pts: Vec<WeightedPoint> = (0..60)
        .map(|_| WeightedPoint::unit(Point(vec![r.gen_range(0.0..100.0)])))
        .collect();
    let cfg = MpcConfig::new(4, Distribution::RoundRobin).unwrap();
    let run = run_r_round(&pts, 2, 2, 0.5, &Metric::L2, 2, &cfg).unwrap();
    assert_eq!(run.rounds_used, 2);
    assert_eq!(run.details.active_per_round, vec![4, 2]);
    assert!(synchronous(&run));
    let inst = Instance::new(pts, 2, 2, 0.5, Metric::L2).unwrap();
    let rep = check_coreset_at(
        &inst,
        1.25,
        &run.coreset,
        &CenterUniverse::InputPoints,
        1 << 22,
    )
    .unwrap();
    assert!(rep.passed, "{:?} {}", rep.violated, rep.witness);
}

#[test]
fn one_round_requires_random_placement() {
    let pts = common::line(&[1.0, 2.0]);
    let cfg = MpcConfig::new(2, Distribution::RoundRobin).unwrap();
    assert!(run_one_round_randomized(&pts, 1, 0, 1.0, &Metric::L2, &cfg).is_err());
    let cfg = MpcConfig::new(1, Distribution::RoundRobin).unwrap();
    assert!(run_two_round(&pts, 1, 0, 1.0, &Metric::L2, &cfg).is_err());
}
