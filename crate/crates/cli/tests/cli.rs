use std::path::Path;
use std::process::{Command, Output};

use kcenter_coreset::io::{parse_points, read_points};
use kcenter_coreset::lower_bounds::gen_insertion_lb;
use kcenter_coreset::metric::unit_weights;
use kcenter_coreset::{Point, WeightedPoint};
use serde_json::Value;
use tempfile::TempDir;

fn kcoreset(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kcoreset"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn stats(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!(
            "stdout is not JSON ({e}): {}",
            String::from_utf8_lossy(&out.stdout)
        )
    })
}

fn write(dir: &Path, name: &str, text: &str) {
    std::fs::write(dir.join(name), text).unwrap();
}

#[test]
fn single_point_file_gives_one_unit_point() {
    let t = TempDir::new().unwrap();
    write(t.path(), "p.txt", "3.5,-1\n");
    let out = kcoreset(
        t.path(),
        &[
            "offline", "--input", "p.txt", "--k", "1", "--z", "0", "--eps", "1", "--out", "c.txt",
        ],
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let c = read_points(t.path().join("c.txt")).unwrap();
    assert_eq!(c, vec![WeightedPoint::unit(Point(vec![3.5, -1.0]))]);
}

#[test]
fn offline_on_the_one_dim_instance_respects_the_size_bound() {
    let t = TempDir::new().unwrap();
    let gen = kcoreset(
        t.path(),
        &[
            "gen",
            "--family",
            "one-dim-lb",
            "--k",
            "2",
            "--z",
            "1",
            "--out",
            "p.txt",
        ],
    );
    assert!(gen.status.success());
    let out = kcoreset(
        t.path(),
        &[
            "offline", "--input", "p.txt", "--k", "2", "--z", "1", "--eps", "1", "--out", "c.txt",
        ],
    );
    assert!(out.status.success());
    let s = stats(&out);
    assert!(s["coreset_size"].as_u64().unwrap() <= 25);
    assert_eq!(s["size_bound"].as_f64().unwrap(), 25.0);
}

#[test]
fn malformed_line_is_named() {
    let t = TempDir::new().unwrap();
    write(t.path(), "p.txt", "1,2\n3,4\n5;6\n");
    let out = kcoreset(
        t.path(),
        &[
            "offline", "--input", "p.txt", "--k", "1", "--z", "0", "--eps", "1",
        ],
    );
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));
}

#[test]
fn validate_exit_codes() {
    let t = TempDir::new().unwrap();
    write(t.path(), "p.txt", "0,0\n1,0\n5,5\n9,9,w=2\n");
    let ok = kcoreset(
        t.path(),
        &[
            "validate",
            "--input",
            "p.txt",
            "--coreset",
            "p.txt",
            "--k",
            "2",
            "--z",
            "1",
            "--eps",
            "1/2",
        ],
    );
    assert_eq!(ok.status.code(), Some(0));
    assert_eq!(stats(&ok)["passed"], Value::Bool(true));

    write(t.path(), "heavy.txt", "0,0,w=9\n");
    let bad = kcoreset(
        t.path(),
        &[
            "validate",
            "--input",
            "p.txt",
            "--coreset",
            "heavy.txt",
            "--k",
            "2",
            "--z",
            "1",
            "--eps",
            "1/2",
        ],
    );
    assert_eq!(bad.status.code(), Some(2));
    assert_eq!(
        stats(&bad)["violated"],
        Value::String("WeightRestriction".into())
    );
    assert!(String::from_utf8_lossy(&bad.stderr).contains("WeightRestriction"));
}

#[test]
fn oversized_universe_is_a_capacity_error() {
    let t = TempDir::new().unwrap();
    let text: String = (0..60)
        .map(|i| format!("{i},{},{},{}\n", i * 7 % 61, i * 13 % 59, i * 3 % 53))
        .collect();
    write(t.path(), "p.txt", &text);
    let out = kcoreset(
        t.path(),
        &[
            "validate",
            "--input",
            "p.txt",
            "--coreset",
            "p.txt",
            "--k",
            "1",
            "--z",
            "0",
            "--eps",
            "1",
            "--universe",
            "midpoint-grid",
        ],
    );
    assert_eq!(
        out.status.code(),
        Some(4),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn stream_on_a_shuffled_generator_stream_stays_below_threshold() {
    let t = TempDir::new().unwrap();
    let mut pts = gen_insertion_lb(3, 2, 1.0 / 16.0, 1, Some((0, 2)))
        .unwrap()
        .stream();
    pts.reverse();
    pts.rotate_left(5);
    write(
        t.path(),
        "s.txt",
        &kcenter_coreset::io::format_points(&unit_weights(&pts)),
    );
    let out = kcoreset(
        t.path(),
        &[
            "stream", "--input", "s.txt", "--k", "3", "--z", "2", "--eps", "1/16", "--out", "c.txt",
        ],
    );
    assert!(out.status.success());
    let s = stats(&out);
    let size = s["coreset_size"].as_u64().unwrap() as f64;
    assert!(size < 3.0 * 256.0 + 2.0);
    assert_eq!(s["arrivals"].as_u64().unwrap(), pts.len() as u64);
    let c = read_points(t.path().join("c.txt")).unwrap();
    assert_eq!(c.iter().map(|w| w.weight).sum::<u64>(), pts.len() as u64);
}

#[test]
fn dynamic_on_a_generated_scenario() {
    let t = TempDir::new().unwrap();
    let gen = kcoreset(
        t.path(),
        &[
            "gen",
            "--family",
            "dynamic-lb",
            "--k",
            "2",
            "--z",
            "1",
            "--eps",
            "1/8",
            "--d",
            "1",
            "--delta",
            "1024",
            "--scenario",
            "0,2,0",
            "--out",
            "u.txt",
        ],
    );
    assert!(
        gen.status.success(),
        "{}",
        String::from_utf8_lossy(&gen.stderr)
    );
    let out = kcoreset(
        t.path(),
        &[
            "dynamic",
            "--input",
            "u.txt",
            "--k",
            "2",
            "--z",
            "1",
            "--eps",
            "1/8",
            "--seed",
            "7",
            "--exact-shadow",
            "--out",
            "c.txt",
        ],
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let s = stats(&out);
    assert!(s["level"].is_u64());
    assert_eq!(s["seed"].as_u64(), Some(7));
    assert_eq!(s["agrees_with_exact"], Value::Bool(true));
    let c = read_points(t.path().join("c.txt")).unwrap();
    assert_eq!(
        c.iter().map(|w| w.weight as i64).sum::<i64>(),
        s["live_count"].as_i64().unwrap()
    );
}

#[test]
fn deleting_an_absent_point_is_an_input_error() {
    let t = TempDir::new().unwrap();
    write(t.path(), "u.txt", "delta=8 d=1\n+ 1\n- 2\n");
    let out = kcoreset(
        t.path(),
        &[
            "dynamic",
            "--input",
            "u.txt",
            "--k",
            "1",
            "--z",
            "0",
            "--eps",
            "1",
            "--exact-shadow",
        ],
    );
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("update 2"));
}

#[test]
fn mpc_algorithms_and_distributions() {
    let t = TempDir::new().unwrap();
    let text: String = (0..30).map(|i| format!("{}\n", (i * 17) % 41)).collect();
    write(t.path(), "p.txt", &text);
    let assignment: String = (0..30).map(|i| format!("{}\n", 1 + i % 2)).collect();
    write(t.path(), "a.txt", &assignment);
    let base = [
        "mpc",
        "--input",
        "p.txt",
        "--k",
        "2",
        "--z",
        "2",
        "--eps",
        "1/2",
        "--machines",
        "3",
    ];
    let cases: [&[&str]; 4] = [
        &["--algo", "two-round", "--dist", "adversarial:a.txt"],
        &["--algo", "two-round"],
        &["--algo", "one-round", "--dist", "random", "--seed", "4"],
        &["--algo", "r-round", "--rounds", "2", "--dist", "random:9"],
    ];
    for extra in cases {
        let args: Vec<&str> = base
            .iter()
            .chain(extra)
            .copied()
            .chain(["--out", "c.txt"])
            .collect();
        let out = kcoreset(t.path(), &args);
        assert!(
            out.status.success(),
            "{extra:?}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
        let s = stats(&out);
        let c = read_points(t.path().join("c.txt")).unwrap();
        assert_eq!(c.iter().map(|w| w.weight).sum::<u64>(), 30);
        assert_eq!(s["coreset_size"].as_u64(), Some(c.len() as u64));
        assert_eq!(s["per_machine_peak_words"].as_array().unwrap().len(), 3);
    }
    let out = kcoreset(t.path(), &[&base[..], &["--algo", "one-round"]].concat());
    assert_eq!(out.status.code(), Some(3));
    let out = kcoreset(
        t.path(),
        &[&base[..], &["--algo", "two-round", "--dist", "blocks"]].concat(),
    );
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn written_coresets_reparse_identically() {
    let t = TempDir::new().unwrap();
    write(
        t.path(),
        "p.txt",
        "0.1,0.2\n0.30000000000000004,1e-7,w=3\n-2.5,7\n0.1,0.2\n",
    );
    let out = kcoreset(
        t.path(),
        &[
            "offline", "--input", "p.txt", "--k", "1", "--z", "1", "--eps", "1/3", "--out", "c.txt",
        ],
    );
    assert!(out.status.success());
    let text = std::fs::read_to_string(t.path().join("c.txt")).unwrap();
    let once = parse_points(&text).unwrap();
    assert_eq!(kcenter_coreset::io::format_points(&once), text);
}

#[test]
fn bad_flags_exit_with_input_code() {
    let t = TempDir::new().unwrap();
    let out = kcoreset(
        t.path(),
        &[
            "offline", "--input", "p.txt", "--k", "1", "--z", "0", "--eps", "a/b",
        ],
    );
    assert_eq!(out.status.code(), Some(3));
    let out = kcoreset(
        t.path(),
        &[
            "gen",
            "--family",
            "insertion-lb",
            "--k",
            "2",
            "--z",
            "0",
            "--out",
            "x.txt",
        ],
    );
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--eps"));
    let help = kcoreset(t.path(), &["--help"]);
    assert_eq!(help.status.code(), Some(0));
}
