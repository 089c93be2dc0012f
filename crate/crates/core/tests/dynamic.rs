mod common;

use std::collections::BTreeMap;

use common::rng;
use kcenter_coreset::dynamic::{F0Sketch, Recovery, SparseRecoverySketch};
use kcenter_coreset::lower_bounds::gen_dynamic_lb;
use kcenter_coreset::{DynamicConfig, DynamicCoresetState, GridConfig, Point};
use rand::seq::SliceRandom;
use rand::Rng;

fn cfg(k: usize, z: u64, eps: f64, seed: u64) -> DynamicConfig {
    DynamicConfig {
        k,
        z,
        epsilon: eps,
        delta: 0.1,
        seed,
        exact_shadow: true,
    }
}

#[test]
fn interleaved_updates_that_cancel_leave_nothing() {
    for seed in 0..50 {
        let mut r = rng(seed);
        let mut sk = SparseRecoverySketch::new(8, 0.1, 1 << 30, seed);
        let fresh = sk.clone();
        let mut ops: Vec<(u64, i64)> = Vec::new();
        for _ in 0..40 {
            let key = r.gen_range(0..1 << 30);
            let c = r.gen_range(1..4);
            ops.extend(std::iter::repeat_n((key, 1), c));
            ops.extend(std::iter::repeat_n((key, -1), c));
        }
        ops.shuffle(&mut r);
        for (key, s) in ops {
            sk.update(key, s);
        }
        assert_eq!(sk, fresh);
        assert_eq!(sk.query(), Recovery::Complete(vec![]));
    }
}

#[test]
fn recovery_is_exact_or_partial_but_never_wrong() {
    for seed in 0..200 {
        let mut r = rng(seed);
        let mut sk = SparseRecoverySketch::new(8, 0.1, 1 << 20, seed);
        let mut truth: BTreeMap<u64, u64> = BTreeMap::new();
        let n = r.gen_range(1..=32);
        for _ in 0..n {
            let key = r.gen_range(0..1 << 20);
            let c = r.gen_range(1..=3);
            sk.update(key, c as i64);
            *truth.entry(key).or_default() += c;
        }
        let got = sk.query();
        for &(key, c) in got.pairs() {
            assert_eq!(
                truth.get(&key),
                Some(&c),
                "seed {seed}: wrong pair ({key}, {c})"
            );
        }
        if let Recovery::Complete(v) = got {
            assert_eq!(v, truth.into_iter().collect::<Vec<_>>());
        }
    }
}

#[test]
fn f0_is_close_at_moderate_counts() {
    let mut ok = 0;
    for seed in 0..40u64 {
        let mut sk = F0Sketch::new(0.2, 0.1, 1 << 24, seed);
        let mut r = rng(seed);
        let mut keys: Vec<u64> = (0..3000).map(|_| r.gen_range(0..1 << 24)).collect();
        keys.sort_unstable();
        keys.dedup();
        keys.truncate(2000);
        for &k in &keys {
            sk.update(k, 1);
            sk.update(k, 1);
        }
        for &k in &keys[1000..] {
            sk.update(k, -2);
        }
        let est = sk.query();
        if (est - 1000.0).abs() <= 200.0 {
            ok += 1;
        }
    }
    assert!(ok >= 36, "{ok}/40 within 20%");
}

#[test]
fn update_order_does_not_change_the_sketches() {
    let grid = GridConfig::new(64, 2).unwrap();
    let mut r = rng(4);
    let pts: Vec<Point> = (0..60)
        .map(|_| {
            Point(vec![
                f64::from(r.gen_range(1..=64u32)),
                f64::from(r.gen_range(1..=64u32)),
            ])
        })
        .collect();
    let mut a = DynamicCoresetState::new(grid, cfg(2, 1, 0.5, 9)).unwrap();
    let mut b = a.clone();
    for p in &pts {
        a.update(p, 1).unwrap();
    }
    let mut shuffled = pts.clone();
    shuffled.shuffle(&mut r);
    for p in &shuffled {
        b.update(p, 1).unwrap();
    }
    assert!(a.same_sketches(&b));

    let mut left = DynamicCoresetState::new(grid, cfg(2, 1, 0.5, 9)).unwrap();
    let mut right = left.clone();
    for (i, p) in pts.iter().enumerate() {
        if i % 2 == 0 { &mut left } else { &mut right }
            .update(p, 1)
            .unwrap();
    }
    left.merge(&right).unwrap();
    assert!(left.same_sketches(&a));
    assert_eq!(left.report_exact().unwrap(), a.report_exact().unwrap());
}

#[test]
fn shadow_replay_matches_recomputation() {
    let grid = GridConfig::new(32, 2).unwrap();
    let mut st = DynamicCoresetState::new(grid, cfg(1, 2, 1.0, 5)).unwrap();
    let mut r = rng(8);
    let mut live: Vec<Point> = Vec::new();
    for _ in 0..1000 {
        if live.is_empty() || r.gen_bool(0.6) {
            let p = Point(vec![
                f64::from(r.gen_range(1..=32u32)),
                f64::from(r.gen_range(1..=32u32)),
            ]);
            st.update(&p, 1).unwrap();
            live.push(p);
        } else {
            let i = r.gen_range(0..live.len());
            let p = live.swap_remove(i);
            st.update(&p, -1).unwrap();
        }
    }
    assert_eq!(st.live_count(), live.len() as i64);
    for level in 0..grid.levels() {
        let mut want: BTreeMap<Vec<u64>, u64> = BTreeMap::new();
        for p in &live {
            let idx = p.0.iter().map(|&x| (x as u64 - 1) >> level).collect();
            *want.entry(idx).or_default() += 1;
        }
        let got: BTreeMap<Vec<u64>, u64> = st
            .shadow_cells(level)
            .unwrap()
            .into_iter()
            .map(|(c, n)| (c.index, n))
            .collect();
        assert_eq!(got, want, "level {level}");
        if let Recovery::Complete(cells) = st.recover_level(level) {
            let keyed: BTreeMap<Vec<u64>, u64> = cells
                .into_iter()
                .map(|(k, n)| (grid.cell_from_key(level, k).index, n))
                .collect();
            assert_eq!(keyed, want, "sketch disagrees with shadow at level {level}");
        }
    }
    let rep = st.report_exact().unwrap();
    assert_eq!(
        rep.coreset.iter().map(|w| w.weight).sum::<u64>(),
        live.len() as u64
    );
    if let Ok(sk) = st.report() {
        assert_eq!(sk.coreset, rep.coreset);
    }
}

#[test]
fn dynamic_lower_bound_scenario_replays_cleanly() {
    let lb = gen_dynamic_lb(2, 1, 1.0 / 8.0, 1, 1 << 10).unwrap();
    let (stream, probe) = lb.scenario(0, 2, 0).unwrap();
    let grid = GridConfig::new(stream.delta, stream.dim).unwrap();
    let mut st = DynamicCoresetState::new(grid, cfg(2, 1, 1.0 / 8.0, 1)).unwrap();
    for u in &stream.updates {
        st.update(&u.point, u.sign).unwrap();
    }
    let live = st.shadow_points().unwrap();
    let total: u64 = live.iter().map(|w| w.weight).sum();
    assert_eq!(total as i64, st.live_count());
    assert!(live.iter().any(|w| w.point == probe.p_star));
    for p in probe.plus.iter().chain(&probe.minus) {
        assert!(live.iter().any(|w| &w.point == p && w.weight == 2));
    }
    assert!(st.report_exact().is_ok());
}
