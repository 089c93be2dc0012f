mod common;

use common::{dist, lattice, midpoint_grid, naive_opt, rng};
use kcenter_coreset::lower_bounds::{gen_insertion_lb, gen_one_dim_lb};
use kcenter_coreset::metric::total_weight;
use kcenter_coreset::{
    check_coreset, CenterUniverse, Instance, Metric, Point, StreamState, WeightedPoint,
};
use rand::seq::SliceRandom;

/// Checks every per-arrival invariant while feeding `stream`; returns the
/// final state.
fn run_checked(
    stream: &[Point],
    k: usize,
    z: u64,
    eps: f64,
    d: usize,
    m: &Metric,
    oracle: bool,
) -> StreamState {
    let mut s = StreamState::new(k, z, eps, d, m.clone())
        .unwrap()
        .with_trace();
    let mut seen: Vec<WeightedPoint> = Vec::new();
    for (t, p) in stream.iter().enumerate() {
        s.handle_arrival(p.clone()).unwrap();
        seen.push(WeightedPoint::unit(p.clone()));
        let reps = s.report();
        assert!(
            reps.len() < s.threshold(),
            "size {} at arrival {t}",
            reps.len()
        );
        assert_eq!(total_weight(reps), t as u64 + 1);
        if s.r() > 0.0 {
            for i in 0..reps.len() {
                for j in 0..i {
                    assert!(dist(&reps[i].point, &reps[j].point, m) > eps / 2.0 * s.r());
                }
            }
        }
        let worst = s.max_assignment_distance().unwrap();
        assert!(
            worst <= eps * s.r() * (1.0 + 1e-9),
            "arrival {t}: {worst} > eps r = {}",
            eps * s.r()
        );
        if oracle && total_weight(&seen) > z {
            let opt = naive_opt(&seen, &midpoint_grid(&seen), k, z, m);
            assert!(
                s.r() <= opt * (1.0 + 1e-9),
                "arrival {t}: r = {} > opt = {opt}",
                s.r()
            );
        }
    }
    s
}

#[test]
fn invariants_under_adversarial_orders() {
    for seed in 0..12u64 {
        let mut r = rng(seed);
        let d = 1 + (seed % 2) as usize;
        let side = if d == 1 { 60 } else { 12 };
        let pts: Vec<Point> = lattice(&mut r, 30, d, side, 1)
            .into_iter()
            .map(|w| w.point)
            .collect();
        let (k, z, eps) = (if d == 1 { 2 } else { 1 }, seed % 3, 0.5);
        let mut sorted = pts.clone();
        sorted.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        let mut reversed = sorted.clone();
        reversed.reverse();
        let mut shuffled = pts.clone();
        shuffled.shuffle(&mut r);
        for order in [&pts, &sorted, &reversed, &shuffled] {
            run_checked(order, k, z, eps, d, &Metric::Linf, true);
        }
    }
}

#[test]
fn compression_kicks_in_on_long_streams() {
    let mut r = rng(77);
    let pts: Vec<Point> = (0..400)
        .map(|_| Point(vec![f64::from(rand::Rng::gen_range(&mut r, 1..=1000u32))]))
        .collect();
    let s = run_checked(&pts, 1, 1, 1.0, 1, &Metric::L2, false);
    assert!(s.r() > 0.0);
    assert!(s.report().len() < s.threshold());
    let inst = Instance::new(
        pts.iter().cloned().map(WeightedPoint::unit).collect(),
        1,
        1,
        1.0,
        Metric::L2,
    )
    .unwrap();
    let rep = check_coreset(&inst, s.report(), &CenterUniverse::LinfMidpointGrid).unwrap();
    assert!(rep.passed, "{:?}: {}", rep.violated, rep.witness);
}

#[test]
fn reports_pass_the_coreset_check() {
    for seed in 0..10u64 {
        let mut r = rng(100 + seed);
        let pts: Vec<Point> = lattice(&mut r, 80, 1, 60, 1)
            .into_iter()
            .map(|w| w.point)
            .collect();
        let (k, z, eps) = (2, 1 + seed % 3, [1.0, 0.5][(seed % 2) as usize]);
        let s = run_checked(&pts, k, z, eps, 1, &Metric::Linf, false);
        let inst = Instance::new(
            pts.into_iter().map(WeightedPoint::unit).collect(),
            k,
            z,
            eps,
            Metric::Linf,
        )
        .unwrap();
        let rep = check_coreset(&inst, s.report(), &CenterUniverse::LinfMidpointGrid).unwrap();
        assert!(
            rep.passed,
            "seed {seed}: {:?} {}",
            rep.violated, rep.witness
        );
    }
}

#[test]
fn generator_streams_keep_the_invariants() {
    let inst = gen_insertion_lb(2, 2, 1.0 / 8.0, 1, Some((0, 1))).unwrap();
    let mut stream = inst.stream();
    run_checked(&stream, 2, 2, 1.0 / 8.0, 1, &Metric::L2, true);
    stream.shuffle(&mut rng(3));
    run_checked(&stream, 2, 2, 1.0 / 8.0, 1, &Metric::L2, true);

    let inst = gen_insertion_lb(4, 1, 1.0 / 16.0, 2, Some((0, 4))).unwrap();
    run_checked(&inst.stream(), 4, 1, 1.0 / 16.0, 2, &Metric::L2, false);

    let one = gen_one_dim_lb(3, 2, true).unwrap();
    let s = run_checked(&one, 3, 2, 1.0, 1, &Metric::L2, true);
    assert_eq!(s.r(), 0.5);
}

#[test]
fn few_distinct_arrivals_are_kept_verbatim() {
    let mut s = StreamState::new(2, 2, 1.0, 1, Metric::L2).unwrap();
    for x in [5.0, 1.0, 5.0, 3.0] {
        s.handle_arrival(Point(vec![x])).unwrap();
    }
    assert_eq!(s.r(), 0.0);
    let want = vec![
        WeightedPoint::new(Point(vec![5.0]), 2),
        WeightedPoint::unit(Point(vec![1.0])),
        WeightedPoint::unit(Point(vec![3.0])),
    ];
    assert_eq!(s.report(), want.as_slice());
}
