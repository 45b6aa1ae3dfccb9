use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use stepopt_cli::ScheduleFile;
use tempfile::TempDir;

fn stepopt(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_stepopt"))
        .args(args)
        .env_remove("STEPOPT_THREADS")
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> Output {
    let out = stepopt(args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn exit_code(args: &[&str]) -> i32 {
    stepopt(args).status.code().expect("exit code")
}

fn read_schedule(path: &Path) -> ScheduleFile {
    ScheduleFile::from_json(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

struct Scratch(TempDir);

impl Scratch {
    fn new() -> Self {
        Scratch(tempfile::tempdir().unwrap())
    }

    fn path(&self, name: &str) -> PathBuf {
        self.0.path().join(name)
    }

    fn arg(&self, name: &str) -> String {
        self.path(name).to_str().unwrap().to_string()
    }
}

fn mixture_file() -> String {
    concat!(env!("CARGO_MANIFEST_DIR"), "/data/standard_mixture.json").to_string()
}

#[test]
fn uniform_t_baseline_example() {
    let out = ok(&[
        "baseline",
        "--scheme",
        "uniform-t",
        "--schedule",
        "vp-linear",
        "--N",
        "2",
        "--T",
        "1.0",
        "--eps",
        "0.001",
    ]);
    let file = ScheduleFile::from_json(&String::from_utf8(out.stdout).unwrap()).unwrap();
    assert_eq!(file.t, vec![1.0, 0.5005, 0.001]);
    assert_eq!(file.orders, vec![1, 2]);
    assert_eq!(file.init, "uniform-t");
    assert!(file.objective > 0.0);
}

#[test]
fn edm_and_uniform_lambda_on_ve() {
    let dir = Scratch::new();
    ok(&[
        "baseline",
        "--scheme",
        "edm",
        "--rho",
        "7",
        "--schedule",
        "ve-edm",
        "--N",
        "2",
        "--out",
        &dir.arg("edm.json"),
    ]);
    let t1 = read_schedule(&dir.path("edm.json")).t[1];
    // (80^{1/7} + (0.002^{1/7} − 80^{1/7}) / 2)^7
    let want = (0.5 * (80f64.powf(1.0 / 7.0) + 0.002f64.powf(1.0 / 7.0))).powi(7);
    assert!((t1 - want).abs() < 1e-12 * want, "{t1} vs {want}");

    ok(&[
        "baseline",
        "--scheme",
        "uniform-lambda",
        "--schedule",
        "ve-edm",
        "--N",
        "2",
        "--out",
        &dir.arg("ul.json"),
    ]);
    assert!((read_schedule(&dir.path("ul.json")).t[1] - 0.4).abs() < 1e-14);
}

#[test]
fn optimize_ve_two_steps_gives_lambda_midpoint() {
    let dir = Scratch::new();
    let out = ok(&[
        "optimize",
        "--schedule",
        "ve-edm",
        "--N",
        "2",
        "--order",
        "1",
        "--p",
        "1",
        "--out",
        &dir.arg("opt.json"),
    ]);
    let file = read_schedule(&dir.path("opt.json"));
    let l = &file.lambda;
    assert!((l[1] - 0.5 * (l[0] + l[2])).abs() <= 1e-6);
    assert_eq!(file.converged, Some(true));
    let log = String::from_utf8(out.stderr).unwrap();
    assert!(
        log.contains("objective") && log.contains("wall time"),
        "{log}"
    );
}

#[test]
fn fifteen_steps_within_budget_for_every_family() {
    let dir = Scratch::new();
    for family in ["vp-linear", "vp-cosine", "ve-edm"] {
        let out = dir.arg(&format!("{family}.json"));
        ok(&[
            "optimize",
            "--schedule",
            family,
            "--N",
            "15",
            "--order",
            "3",
            "--out",
            &out,
        ]);
        let file = read_schedule(Path::new(&out));
        assert!(file.wall_time_seconds.unwrap() <= 15.0);
        assert!(file.objective <= file.initial_objective.unwrap());
    }
}

#[test]
fn best_of_three_is_no_worse_than_each_start() {
    let dir = Scratch::new();
    let common = ["--schedule", "vp-linear", "--N", "6", "--order", "3"];
    let run = |init: &str| {
        let out = dir.arg(&format!("{init}.json"));
        let mut args = vec!["optimize", "--init", init, "--out", &out];
        args.extend(common);
        ok(&args);
        read_schedule(Path::new(&out))
    };
    let best = run("best-of-3");
    assert!(best.init.starts_with("best-of-3:"));
    for init in ["uniform-t", "uniform-lambda", "edm"] {
        assert!(best.objective <= run(init).objective, "{init}");
    }
}

#[test]
fn optimized_schedule_wins_on_the_standard_mixture() {
    let dir = Scratch::new();
    let spec = ["--schedule", "vp-linear", "--N", "5", "--order", "3"];
    let mut steps = Vec::new();
    let opt = dir.arg("optimized.json");
    let mut args = vec!["optimize", "--init", "best-of-3", "--out", &opt];
    args.extend(spec);
    ok(&args);
    steps.push(opt.clone());
    for scheme in ["uniform-t", "uniform-lambda", "edm"] {
        let out = dir.arg(&format!("{scheme}.json"));
        let mut args = vec!["baseline", "--scheme", scheme, "--out", &out];
        args.extend(spec);
        ok(&args);
        steps.push(out);
    }
    let report = dir.arg("report.json");
    let csv = dir.arg("report.csv");
    let model = mixture_file();
    let mut args = vec![
        "simulate",
        "--model",
        &model,
        "--seeds",
        "1024",
        "--rng-seed",
        "0",
        "--out",
        &report,
        "--csv",
        &csv,
    ];
    for s in &steps {
        args.extend(["--steps", s.as_str()]);
    }
    ok(&args);

    let rows = read_json(Path::new(&report))["reports"]
        .as_array()
        .unwrap()
        .clone();
    assert_eq!(rows.len(), 4);
    let means: Vec<f64> = rows
        .iter()
        .map(|r| r["mean_l2"].as_f64().unwrap())
        .collect();
    assert!(means[1..].iter().all(|&m| means[0] < m), "{means:?}");
    assert_eq!(rows[0]["label"], "optimized");

    let mut reader = csv::Reader::from_path(&csv).unwrap();
    assert_eq!(
        reader.headers().unwrap(),
        vec!["label", "N", "mean_l2", "median_l2"]
    );
    let records: Vec<csv::StringRecord> = reader.records().map(Result::unwrap).collect();
    assert_eq!(records.len(), 4);
    for (record, row) in records.iter().zip(&rows) {
        assert_eq!(&record[0], row["label"].as_str().unwrap());
        assert_eq!(&record[1], "5");
        assert_eq!(
            record[2].parse::<f64>().unwrap(),
            row["mean_l2"].as_f64().unwrap()
        );
    }
}

#[test]
fn same_schedule_twice_gives_identical_rows_and_runs_are_deterministic() {
    let dir = Scratch::new();
    let (a, b) = (dir.arg("a.json"), dir.arg("b.json"));
    ok(&[
        "baseline",
        "--scheme",
        "uniform-lambda",
        "--N",
        "6",
        "--out",
        &a,
    ]);
    std::fs::copy(&a, &b).unwrap();
    let run = |out: &str, seeds: &str| {
        ok(&[
            "simulate",
            "--steps",
            &a,
            "--steps",
            &b,
            "--seeds",
            seeds,
            "--rng-seed",
            "42",
            "--out",
            out,
        ]);
        read_json(Path::new(out))
    };
    let first = run(&dir.arg("r1.json"), "16");
    let rows = first["reports"].as_array().unwrap();
    assert_eq!(rows[0]["per_seed_errors"], rows[1]["per_seed_errors"]);
    assert_eq!(rows[0]["mean_l2"], rows[1]["mean_l2"]);

    let single = run(&dir.arg("s1.json"), "1");
    let again = run(&dir.arg("s2.json"), "1");
    assert_eq!(
        single["reports"][0]["per_seed_errors"]
            .as_array()
            .unwrap()
            .len(),
        1
    );
    assert_eq!(single, again);
}

#[test]
fn worker_count_does_not_change_results() {
    let dir = Scratch::new();
    let grid = dir.arg("g.json");
    ok(&["baseline", "--scheme", "edm", "--N", "7", "--out", &grid]);
    let run = |threads: &str| {
        let out = Command::new(env!("CARGO_BIN_EXE_stepopt"))
            .args(["simulate", "--steps", &grid, "--seeds", "64"])
            .env("STEPOPT_THREADS", threads)
            .output()
            .unwrap();
        assert!(out.status.success());
        out.stdout
    };
    assert_eq!(run("1"), run("3"));
    let bad = Command::new(env!("CARGO_BIN_EXE_stepopt"))
        .args(["simulate", "--steps", &grid, "--seeds", "4"])
        .env("STEPOPT_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn optimize_is_deterministic() {
    let dir = Scratch::new();
    let run = |name: &str| {
        let out = dir.arg(name);
        ok(&["optimize", "--N", "8", "--init", "edm", "--out", &out]);
        let mut file = read_schedule(Path::new(&out));
        file.wall_time_seconds = None;
        file
    };
    assert_eq!(run("x.json"), run("y.json"));
}

#[test]
fn usage_errors_exit_with_two() {
    let dir = Scratch::new();
    assert_eq!(exit_code(&["baseline", "--scheme", "edm", "--N", "0"]), 2);
    assert_eq!(
        exit_code(&[
            "baseline",
            "--scheme",
            "edm",
            "--N",
            "3",
            "--schedule",
            "vp-quadratic"
        ]),
        2
    );
    assert_eq!(
        exit_code(&["baseline", "--scheme", "edm", "--N", "3", "--T", "0.001", "--eps", "1.0"]),
        2
    );
    assert_eq!(
        exit_code(&[
            "baseline",
            "--scheme",
            "uniform-t",
            "--N",
            "3",
            "--order",
            "1,2"
        ]),
        2
    );
    assert_eq!(
        exit_code(&[
            "baseline",
            "--scheme",
            "uniform-t",
            "--N",
            "4",
            "--order",
            "4",
            "--kind",
            "taylor"
        ]),
        2
    );
    assert_eq!(
        exit_code(&[
            "baseline",
            "--scheme",
            "uniform-t",
            "--N",
            "3",
            "--cosine-s",
            "0.01"
        ]),
        2
    );
    assert_eq!(exit_code(&["optimize", "--N", "3", "--grad-tol", "0"]), 2);
    assert_eq!(
        exit_code(&["optimize", "--N", "3", "--init", "sideways"]),
        2
    );
    assert_eq!(
        exit_code(&["simulate", "--steps", &dir.arg("missing.json")]),
        2
    );
    assert_eq!(exit_code(&["no-such-command"]), 2);

    let garbage = dir.path("garbage.json");
    std::fs::write(&garbage, "{not json").unwrap();
    assert_eq!(
        exit_code(&["dump-weights", "--steps", garbage.to_str().unwrap()]),
        2
    );
}

#[test]
fn endpoint_mismatch_exits_with_two() {
    let dir = Scratch::new();
    let (a, b) = (dir.arg("a.json"), dir.arg("b.json"));
    ok(&[
        "baseline",
        "--scheme",
        "uniform-t",
        "--N",
        "5",
        "--eps",
        "0.001",
        "--out",
        &a,
    ]);
    ok(&[
        "baseline",
        "--scheme",
        "uniform-t",
        "--N",
        "5",
        "--eps",
        "0.002",
        "--out",
        &b,
    ]);
    let out = stepopt(&["simulate", "--steps", &a, "--steps", &b, "--seeds", "2"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("endpoints"));
}

#[test]
fn numeric_failures_exit_with_one() {
    // 50 steps with a margin of 1 cannot fit in a λ span of about 9.6.
    assert_eq!(exit_code(&["optimize", "--N", "50", "--margin", "1.0"]), 1);
}

#[test]
fn dump_weights_rows_sum_to_exponential_increments() {
    let dir = Scratch::new();
    let grid = dir.arg("g.json");
    let side = dir.arg("side.json");
    ok(&[
        "baseline",
        "--scheme",
        "uniform-lambda",
        "--N",
        "5",
        "--order",
        "3",
        "--out",
        &grid,
        "--dump-weights",
        &side,
    ]);
    let out = ok(&["dump-weights", "--steps", &grid]);
    let dump: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(dump, read_json(Path::new(&side)));

    let file = read_schedule(Path::new(&grid));
    let l = &file.lambda;
    let anchor = dump["anchor"].as_f64().unwrap();
    let steps = dump["steps"].as_array().unwrap();
    assert_eq!(steps.len(), 5);
    for (n, row) in steps.iter().enumerate() {
        let pairs = row.as_array().unwrap();
        assert!(pairs
            .iter()
            .enumerate()
            .all(|(j, p)| p[0].as_u64() == Some(j as u64)));
        let row: Vec<f64> = pairs.iter().map(|p| p[1].as_f64().unwrap()).collect();
        assert_eq!(row.len(), file.orders[n]);
        let want = (l[n + 1] - anchor).exp() - (l[n] - anchor).exp();
        assert!((row.iter().sum::<f64>() - want).abs() <= 1e-9 * want);
    }
}
