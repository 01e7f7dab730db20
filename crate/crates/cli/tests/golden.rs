//! End-to-end tests of the `wassquant` binary: printed numbers are compared
//! byte-for-byte and reruns must reproduce output files exactly.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::tempdir;

use wassquant::io::read_measure;
use wassquant::transport::wasserstein;
use wassquant_cli::sig12;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_wassquant"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    assert!(
        out.status.success(),
        "exit {:?}, stderr: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout.clone()).unwrap()
}

/// Deterministic low-grade generator so fixtures need no extra deps.
fn lcg(state: &mut u64) -> f64 {
    *state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
    (*state >> 11) as f64 / (1u64 << 53) as f64
}

fn write_sample(path: &Path, n: usize, dim: usize, seed: u64) {
    let mut s = seed;
    let points: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..dim).map(|_| lcg(&mut s)).collect())
        .collect();
    let file = serde_json::json!({ "dim": dim, "points": points });
    fs::write(path, serde_json::to_string(&file).unwrap()).unwrap();
}

#[test]
fn identical_measures_print_zero() {
    let dir = tempdir().unwrap();
    let mu = dir.path().join("mu.json");
    write_sample(&mu, 12, 2, 7);
    let out = run(&[
        "ot",
        mu.to_str().unwrap(),
        mu.to_str().unwrap(),
    ]);
    assert_eq!(stdout(&out), "0.00000000000\n");
}

#[test]
fn unit_distance_atoms_print_one() {
    let dir = tempdir().unwrap();
    let mu = dir.path().join("mu.json");
    let nu = dir.path().join("nu.json");
    fs::write(&mu, r#"{"dim": 1, "points": [[0.0]]}"#).unwrap();
    fs::write(&nu, r#"{"dim": 1, "points": [[1.0]]}"#).unwrap();
    let out = run(&["ot", mu.to_str().unwrap(), nu.to_str().unwrap()]);
    assert_eq!(stdout(&out), "1.00000000000\n");
    let out = run(&["ot", mu.to_str().unwrap(), nu.to_str().unwrap(), "--p", "1"]);
    assert_eq!(stdout(&out), "1.00000000000\n");
}

#[test]
fn ot_matches_the_library_and_writes_a_consistent_plan() {
    let dir = tempdir().unwrap();
    let mu_path = dir.path().join("mu.json");
    let nu_path = dir.path().join("nu.json");
    let plan_path = dir.path().join("plan.json");
    write_sample(&mu_path, 9, 2, 21);
    write_sample(&nu_path, 14, 2, 22);

    let out = run(&[
        "ot",
        mu_path.to_str().unwrap(),
        nu_path.to_str().unwrap(),
        "--plan",
        plan_path.to_str().unwrap(),
    ]);

    let mu = read_measure(&mu_path).unwrap();
    let nu = read_measure(&nu_path).unwrap();
    let res = wasserstein(&mu, &nu, 2.0).unwrap();
    assert_eq!(stdout(&out), format!("{}\n", sig12(res.cost)));

    let plan: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&plan_path).unwrap()).unwrap();
    assert_eq!(plan["p"].as_f64().unwrap(), 2.0);
    assert_eq!(plan["cost"].as_f64().unwrap(), res.cost);
    assert_eq!(plan["source_len"].as_u64().unwrap() as usize, mu.len());
    assert_eq!(plan["target_len"].as_u64().unwrap() as usize, nu.len());
    let entries = plan["entries"].as_array().unwrap();
    assert!(entries.len() <= mu.len() + nu.len() - 1);
    let mut row_mass = vec![0.0; mu.len()];
    for e in entries {
        let mass = e["mass"].as_f64().unwrap();
        assert!(mass >= 0.0);
        row_mass[e["row"].as_u64().unwrap() as usize] += mass;
    }
    for (got, want) in row_mass.iter().zip(mu.weights()) {
        assert!((got - want).abs() <= 1e-9);
    }
}

#[test]
fn quantize_reruns_byte_identically_and_prices_out() {
    let dir = tempdir().unwrap();
    let sample = dir.path().join("sample.json");
    write_sample(&sample, 30, 2, 99);
    let out_a = dir.path().join("a");
    let out_b = dir.path().join("b");

    let run_q = |out_dir: &Path| {
        run(&[
            "quantize",
            sample.to_str().unwrap(),
            "4",
            "--seed",
            "17",
            "--out-dir",
            out_dir.to_str().unwrap(),
        ])
    };
    let first = stdout(&run_q(&out_a));
    let second = stdout(&run_q(&out_b));
    assert_eq!(first, second);
    for name in ["codebook.json", "induced_measure.json"] {
        assert_eq!(
            fs::read(out_a.join(name)).unwrap(),
            fs::read(out_b.join(name)).unwrap(),
            "{name} differs between reruns"
        );
    }

    // The printed mean squared distance must equal the squared transport
    // distance between the sample and the induced measure.
    let induced = out_a.join("induced_measure.json");
    let ot_out = stdout(&run(&[
        "ot",
        sample.to_str().unwrap(),
        induced.to_str().unwrap(),
    ]));
    let cost: f64 = first.trim().parse().unwrap();
    let dist: f64 = ot_out.trim().parse().unwrap();
    assert!(
        (cost - dist * dist).abs() <= 1e-9,
        "quantize cost {cost} vs ot distance squared {}",
        dist * dist
    );
}

#[test]
fn quantize_with_k_equal_n_reproduces_the_sample() {
    let dir = tempdir().unwrap();
    let sample = dir.path().join("sample.json");
    write_sample(&sample, 8, 2, 5);
    let out_dir = dir.path().join("q");
    let out = run(&[
        "quantize",
        sample.to_str().unwrap(),
        "8",
        "--out-dir",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(stdout(&out), "0.00000000000\n");

    let original = read_measure(&sample).unwrap();
    let induced = read_measure(&out_dir.join("induced_measure.json")).unwrap();
    assert_eq!(induced.len(), original.len());
    let key = |m: &wassquant::Measure64| {
        let mut v: Vec<(Vec<u64>, u64)> = m
            .support()
            .iter()
            .zip(m.weights())
            .map(|(p, &w)| {
                (
                    p.coords().iter().map(|c| c.to_bits()).collect(),
                    w.to_bits(),
                )
            })
            .collect();
        v.sort();
        v
    };
    assert_eq!(key(&induced), key(&original));
}

#[test]
fn rates_reruns_byte_identically_and_k_follows_the_schedule() {
    let dir = tempdir().unwrap();
    let config = dir.path().join("config.json");
    fs::write(
        &config,
        r#"{
            "schema": "v1",
            "sampler": "uniform-cube:d=1",
            "mode": "kmeans",
            "n_grid": [16, 32, 64],
            "trials": 3,
            "ref_multiplier": 4,
            "kmeans_constant": 1.0,
            "seed": 13
        }"#,
    )
    .unwrap();
    let out_a = dir.path().join("a");
    let out_b = dir.path().join("b");
    let first = stdout(&run(&["rates", config.to_str().unwrap(), "--out-dir", out_a.to_str().unwrap()]));
    let second = stdout(&run(&["rates", config.to_str().unwrap(), "--out-dir", out_b.to_str().unwrap()]));
    assert_eq!(first, second);
    let csv_a = fs::read_to_string(out_a.join("rates.csv")).unwrap();
    let csv_b = fs::read_to_string(out_b.join("rates.csv")).unwrap();
    assert_eq!(csv_a, csv_b);
    assert_eq!(
        fs::read(out_a.join("summary.json")).unwrap(),
        fs::read(out_b.join("summary.json")).unwrap()
    );

    // In kmeans mode the codebook size column must follow
    // ceil(C * n^{d/(2d+4)}) clamped to [1, n]; here d = 1 and C = 1.
    let mut lines = csv_a.lines();
    assert_eq!(lines.next().unwrap(), "mode,sampler,d,D,n,k,trial,distance,seed");
    for line in lines {
        let cols: Vec<&str> = line.split(',').collect();
        let n: usize = cols[4].parse().unwrap();
        let k: usize = cols[5].parse().unwrap();
        let expect = ((n as f64).powf(1.0 / 6.0).ceil() as usize).clamp(1, n);
        assert_eq!(k, expect, "row: {line}");
    }
}

#[test]
fn error_classes_map_to_exit_codes() {
    let dir = tempdir().unwrap();
    let d1 = dir.path().join("d1.json");
    let d2 = dir.path().join("d2.json");
    write_sample(&d1, 4, 1, 1);
    write_sample(&d2, 4, 2, 2);

    // Malformed JSON and a bad schema are parse failures.
    let broken = dir.path().join("broken.json");
    fs::write(&broken, "{ nope").unwrap();
    let out = run(&["ot", broken.to_str().unwrap(), d1.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));

    let config = dir.path().join("config.json");
    fs::write(
        &config,
        r#"{"schema": "v9", "sampler": "uniform-cube:d=1", "mode": "empirical", "n_grid": [8, 16, 32], "seed": 0}"#,
    )
    .unwrap();
    let out = run(&["rates", config.to_str().unwrap(), "--out-dir", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));

    // Mismatched ambient dimensions.
    let out = run(&["ot", d1.to_str().unwrap(), d2.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));

    // More centers than distinct sample points.
    let out = run(&[
        "quantize",
        d1.to_str().unwrap(),
        "40",
        "--out-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(4));

    // Missing operand is a usage error.
    let out = run(&["ot", d1.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}
