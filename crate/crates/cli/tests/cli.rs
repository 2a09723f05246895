use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_rte-rbm"));
    c.env_remove("RTE_RBM_THREADS");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = run(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn train_h1(dir: &Path, extra: &[&str]) {
    let out = dir.to_str().unwrap();
    let mut args = vec![
        "train",
        "--problem",
        "homogeneous-1d",
        "--rom",
        "g-l1",
        "--tol-sratio",
        "1e-8",
        "--test-count",
        "8",
        "--out",
        out,
    ];
    args.extend_from_slice(extra);
    ok(&args);
}

/// Drops the three timing columns of errors.csv and greedy_log.csv.
fn without_timings(path: &Path) -> Vec<Vec<String>> {
    let mut r = csv::Reader::from_path(path).unwrap();
    let header: Vec<String> = r.headers().unwrap().iter().map(String::from).collect();
    let keep: Vec<usize> = (0..header.len())
        .filter(|&i| !header[i].starts_with("t_"))
        .collect();
    let mut rows = vec![keep.iter().map(|&i| header[i].clone()).collect()];
    for rec in r.records() {
        let rec = rec.unwrap();
        rows.push(keep.iter().map(|&i| rec[i].to_string()).collect());
    }
    rows
}

#[test]
fn train_writes_run_files() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("h1");
    train_h1(&dir, &[]);
    for f in [
        "errors.csv",
        "greedy_log.csv",
        "selected_params.csv",
        "basis.meta",
        "rom.json",
        "basis.bin",
    ] {
        assert!(dir.join(f).is_file(), "{f} missing");
    }
    let text = std::fs::read_to_string(dir.join("errors.csv")).unwrap();
    assert_eq!(
        text.lines().next().unwrap(),
        "m,e_l2_train,e_res_train,e_l2_test,e_res_test,spectral_ratio,max_cond,t_fom_s,t_sweep_s,t_update_s"
    );
    let rows = text.lines().count() - 1;
    assert!(rows >= 2);
    let meta: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("basis.meta")).unwrap()).unwrap();
    assert_eq!(meta["plan"]["problem"], "homogeneous-1d");
    assert_eq!(meta["plan"]["seed"], 0);
    assert_eq!(meta["basis_size"].as_u64().unwrap() as usize, rows);
    assert_eq!(meta["test_solves"], 8);
}

#[test]
fn identical_runs_give_identical_files() {
    let tmp = tempfile::tempdir().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    train_h1(&a, &["--seed", "7"]);
    train_h1(&b, &["--seed", "7", "--threads", "1"]);
    for f in ["errors.csv", "greedy_log.csv"] {
        assert_eq!(
            without_timings(&a.join(f)),
            without_timings(&b.join(f)),
            "{f} differs"
        );
    }
    for f in ["selected_params.csv", "basis.bin", "rom.json"] {
        assert_eq!(
            std::fs::read(a.join(f)).unwrap(),
            std::fs::read(b.join(f)).unwrap(),
            "{f} differs"
        );
    }
    let c = tmp.path().join("c");
    train_h1(&c, &["--seed", "8"]);
    assert_ne!(
        without_timings(&a.join("errors.csv")),
        without_timings(&c.join("errors.csv"))
    );
}

#[test]
fn predict_prints_coefficients_and_lifts() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("h1");
    train_h1(&dir, &[]);
    let lift = tmp.path().join("f.txt");
    let out = ok(&[
        "predict",
        "--artifacts",
        dir.to_str().unwrap(),
        "--mu",
        "1.3,5.2",
        "--lift",
        lift.to_str().unwrap(),
    ]);
    let coeffs: Vec<f64> = out
        .lines()
        .skip(1)
        .filter(|l| !l.starts_with('#'))
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    let meta: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("basis.meta")).unwrap()).unwrap();
    assert_eq!(coeffs.len() as u64, meta["basis_size"].as_u64().unwrap());
    assert!(coeffs.iter().all(|c| c.is_finite()));
    let values = std::fs::read_to_string(&lift).unwrap();
    assert_eq!(
        values.lines().count() as u64,
        meta["full_order_len"].as_u64().unwrap()
    );

    let out = ok(&[
        "predict",
        "--artifacts",
        dir.to_str().unwrap(),
        "--mu",
        "1.3,5.2",
        "--m",
        "2",
    ]);
    assert_eq!(out.lines().filter(|l| !l.starts_with('#')).count(), 3);
    assert!(!run(&[
        "predict",
        "--artifacts",
        dir.to_str().unwrap(),
        "--mu",
        "3,5.2"
    ])
    .status
    .success());
    assert!(!run(&[
        "predict",
        "--artifacts",
        dir.to_str().unwrap(),
        "--mu",
        "1.3"
    ])
    .status
    .success());
}

#[test]
fn evaluate_writes_curve() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("h1");
    train_h1(&dir, &[]);
    let out = tmp.path().join("eval");
    ok(&[
        "evaluate",
        "--artifacts",
        dir.to_str().unwrap(),
        "--test-count",
        "4",
        "--out",
        out.to_str().unwrap(),
    ]);
    let text = std::fs::read_to_string(out.join("evaluate.csv")).unwrap();
    assert_eq!(
        text.lines().next().unwrap(),
        "m,e_l2_test,e_res_test,max_cond"
    );
    let last: Vec<f64> = text
        .lines()
        .last()
        .unwrap()
        .split(',')
        .map(|v| v.parse().unwrap())
        .collect();
    assert!(last[1] < 1e-6 && last[2] < 1e-5);
}

#[test]
fn bad_input_fails() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("x");
    let o = out.to_str().unwrap();
    assert!(!run(&["train", "--problem", "no-such", "--out", o])
        .status
        .success());
    assert!(!run(&[
        "train",
        "--problem",
        "homogeneous-1d",
        "--rom",
        "g-l3",
        "--out",
        o
    ])
    .status
    .success());
    assert!(!run(&[
        "train",
        "--problem",
        "homogeneous-1d",
        "--variant",
        "odd",
        "--out",
        o
    ])
    .status
    .success());
    assert!(!run(&[
        "train",
        "--problem",
        "homogeneous-1d",
        "--tol-sratio",
        "0",
        "--out",
        o
    ])
    .status
    .success());
    assert!(!run(&[
        "train",
        "--problem",
        "homogeneous-1d",
        "--mu1",
        "9,9",
        "--out",
        o
    ])
    .status
    .success());
    assert!(!run(&["predict", "--artifacts", o, "--mu", "1,5"])
        .status
        .success());
    let bad_env = bin()
        .args(["registry-dump"])
        .env("RTE_RBM_THREADS", "zero")
        .output()
        .unwrap();
    assert!(!bad_env.status.success());
}

#[test]
fn thread_variable_overrides_flag() {
    let out = bin()
        .args(["--threads", "0", "registry-dump"])
        .env("RTE_RBM_THREADS", "1")
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(!run(&["--threads", "0", "registry-dump"]).status.success());
}

#[test]
fn registry_dump_lists_six_benchmarks() {
    let v: serde_json::Value = serde_json::from_str(&ok(&["registry-dump"])).unwrap();
    let names: Vec<&str> = v
        .as_array()
        .unwrap()
        .iter()
        .map(|b| b["name"].as_str().unwrap())
        .collect();
    assert_eq!(
        names,
        [
            "homogeneous-1d",
            "two-material-1d",
            "varying-scattering-1d",
            "lattice-2d",
            "line-source-2d",
            "pin-cell-2d"
        ]
    );
}

#[test]
fn explicit_first_parameter_is_used() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("h1");
    train_h1(&dir, &["--mu1", "1,5", "--max-m", "3"]);
    let text = std::fs::read_to_string(dir.join("selected_params.csv")).unwrap();
    let first: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(first[2].parse::<f64>().unwrap(), 1.0);
    assert_eq!(first[3].parse::<f64>().unwrap(), 5.0);
    assert!(text.lines().count() <= 4);
}

#[test]
fn online_and_warm_start_studies_run() {
    let tmp = tempfile::tempdir().unwrap();
    let o = tmp.path().to_str().unwrap();
    let out = ok(&[
        "bench-online",
        "--problem",
        "homogeneous-1d",
        "--n-list",
        "2560,5120",
        "--repeat",
        "2",
        "--max-m",
        "3",
        "--test-count",
        "3",
        "--out",
        o,
    ]);
    assert!(out.contains("N=2560") && out.contains("N=5120"));
    let text = std::fs::read_to_string(tmp.path().join("online.csv")).unwrap();
    assert_eq!(text.lines().count(), 1 + 2 * 5);

    let out = ok(&[
        "dsa-study",
        "--problem",
        "pin-cell-2d",
        "--fine-cells",
        "8",
        "--coarse-cells",
        "4",
        "--m-list",
        "2,3",
        "--test-count",
        "2",
        "--out",
        o,
    ]);
    assert!(out.contains("zero"));
    let text = std::fs::read_to_string(tmp.path().join("dsa_study.csv")).unwrap();
    assert_eq!(text.lines().count(), 1 + 1 + 2 * 2);
}
