//! End-to-end tests of the `confspace` binary: flags, formats, exit codes,
//! determinism.

use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_confspace"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn run_env(args: &[&str], key: &str, value: &str) -> Output {
    Command::new(env!("CARGO_BIN_EXE_confspace"))
        .args(args)
        .env(key, value)
        .output()
        .expect("binary runs")
}

fn stdout_json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!(
            "invalid JSON ({e}): {}",
            String::from_utf8_lossy(&out.stdout)
        )
    })
}

fn exit_code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

#[test]
fn compute_unordered_punctured_plane() {
    let out = run(&[
        "compute",
        "--catalog",
        "affine_space:1",
        "--punctures",
        "1",
        "--space",
        "unordered",
        "--n-max",
        "2",
    ]);
    assert_eq!(exit_code(&out), 0);
    let v = stdout_json(&out);
    assert_eq!(v["schema"], 1);
    // h^1(Conf^2(C*)) has two classes of type (1,1)
    let rows = v["rows"].as_array().unwrap();
    assert!(rows.iter().any(|r| {
        r["n"] == 2 && r["i"] == 1 && r["p"] == 1 && r["q"] == 1 && r["dim"] == 2
    }));
}

#[test]
fn compute_paper_table() {
    let out = run(&[
        "compute",
        "--catalog",
        "elliptic",
        "--punctures",
        "1",
        "--space",
        "unordered",
        "--n-max",
        "2",
    ]);
    assert_eq!(exit_code(&out), 0);
    let v = stdout_json(&out);
    let rows: Vec<(u64, u64, u64, u64, u64)> = v["rows"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|r| r["n"] == 2)
        .map(|r| {
            (
                r["n"].as_u64().unwrap(),
                r["i"].as_u64().unwrap(),
                r["p"].as_u64().unwrap(),
                r["q"].as_u64().unwrap(),
                r["dim"].as_u64().unwrap(),
            )
        })
        .collect();
    assert_eq!(
        rows,
        vec![
            (2, 0, 0, 0, 1),
            (2, 1, 0, 1, 1),
            (2, 1, 1, 0, 1),
            (2, 2, 1, 2, 1),
            (2, 2, 2, 1, 1),
        ]
    );
}

#[test]
fn compute_ordered_braid() {
    let out = run(&[
        "compute",
        "--catalog",
        "affine_space:1",
        "--punctures",
        "0",
        "--space",
        "ordered",
        "--n-max",
        "3",
        "--format",
        "csv",
    ]);
    assert_eq!(exit_code(&out), 0);
    let text = String::from_utf8_lossy(&out.stdout);
    let mut h = [0u64; 3];
    for line in text.lines().skip(1) {
        let parts: Vec<u64> = line.split(',').map(|x| x.parse().unwrap()).collect();
        if parts[0] == 3 {
            h[parts[1] as usize] += parts[4];
        }
    }
    assert_eq!(h, [1, 3, 2]);
}

#[test]
fn identical_configs_are_byte_identical() {
    let args = [
        "compute",
        "--catalog",
        "elliptic",
        "--punctures",
        "1",
        "--n-max",
        "2",
    ];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(exit_code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn verify_examples_pass() {
    for args in [
        vec!["verify", "splitting-hodge", "--catalog", "elliptic", "--punctures", "1", "--n-max", "3"],
        vec!["verify", "splitting-betti", "--catalog", "affine_space:1", "--punctures", "1", "--n-max", "3"],
        vec!["verify", "napolitano", "--catalog", "affine_space:1", "--punctures", "1", "--n-max", "3"],
        vec!["verify", "vakilwood", "--catalog", "affine_space:1", "--punctures", "1", "--n-max", "3"],
        vec!["verify", "theorem-c", "--catalog", "affine_space:1", "--punctures", "1", "--n-max", "3"],
        vec!["verify", "purity", "--catalog", "torus:1", "--punctures", "0", "--n-max", "3"],
        vec!["verify", "phi", "--catalog", "elliptic", "--punctures", "2", "--n-max", "2"],
    ] {
        let out = run(&args);
        assert_eq!(exit_code(&out), 0, "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
        let v = stdout_json(&out);
        assert_eq!(v["pass"], true, "{args:?}");
    }
}

#[test]
fn full_checks_level_runs_the_oracles() {
    let out = run(&[
        "compute",
        "--catalog",
        "affine_space:1",
        "--punctures",
        "1",
        "--n-max",
        "2",
        "--checks",
        "2",
    ]);
    assert_eq!(exit_code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    // an out-of-range level is a usage error
    let out = run(&["compute", "--catalog", "affine_space:1", "--checks", "3"]);
    assert_ne!(exit_code(&out), 0);
}

#[test]
fn verify_detects_nonpurity() {
    // two punctures of an elliptic curve mix weights
    let out = run(&[
        "verify", "purity", "--catalog", "elliptic", "--punctures", "2", "--n-max", "2",
    ]);
    assert_eq!(exit_code(&out), 1);
    let v = stdout_json(&out);
    assert_eq!(v["pass"], false);
}

#[test]
fn uncertified_needs_override() {
    let args = [
        "compute",
        "--catalog",
        "curve_open:1,2",
        "--punctures",
        "0",
        "--n-max",
        "1",
    ];
    let out = run(&args);
    assert_eq!(exit_code(&out), 1);
    let mut with_flag: Vec<&str> = args.to_vec();
    with_flag.push("--allow-uncertified");
    let out = run(&with_flag);
    assert_eq!(exit_code(&out), 0);
    let v = stdout_json(&out);
    assert!(!v["warnings"].as_array().unwrap().is_empty());
}

#[test]
fn input_errors_exit_2() {
    let out = run(&["compute", "--catalog", "nonsense", "--n-max", "1"]);
    assert_eq!(exit_code(&out), 2);
    let out = run(&["compute", "--n-max", "1"]);
    assert_eq!(exit_code(&out), 2);
    let out = run(&["verify", "napolitano", "--catalog", "p2_minus_curve:1", "--punctures", "1", "--n-max", "1"]);
    assert_eq!(exit_code(&out), 2);
}

#[test]
fn resource_guard_exits_3() {
    let out = run_env(
        &["compute", "--catalog", "elliptic", "--punctures", "1", "--n-max", "2"],
        "CONFSPACE_MAX_BASIS",
        "5",
    );
    assert_eq!(exit_code(&out), 3);
}

#[test]
fn model_file_round_trip() {
    let dir = std::env::temp_dir().join("confspace-cli-test");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("torus.json");
    std::fs::write(
        &path,
        r#"{
            "dim_c": 1,
            "compact": false,
            "classes": [
                {"name": "1", "degree": 0, "p": 0, "q": 0},
                {"name": "e", "degree": 1, "p": 1, "q": 1}
            ],
            "slope": "2"
        }"#,
    )
    .unwrap();
    let out = run(&[
        "compute",
        "--model",
        path.to_str().unwrap(),
        "--punctures",
        "0",
        "--n-max",
        "2",
    ]);
    assert_eq!(exit_code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let v = stdout_json(&out);
    assert_eq!(v["model"], "torus");
    // same space as the built-in torus:1
    let builtin = run(&["compute", "--catalog", "torus:1", "--punctures", "0", "--n-max", "2"]);
    assert_eq!(stdout_json(&builtin)["rows"], v["rows"]);

    // unknown fields are rejected
    let bad = dir.join("bad.json");
    std::fs::write(
        &bad,
        r#"{"dim_c": 1, "compact": false, "classes": [{"name": "1", "degree": 0, "p": 0, "q": 0}], "extra": 1}"#,
    )
    .unwrap();
    let out = run(&["compute", "--model", bad.to_str().unwrap(), "--n-max", "1"]);
    assert_eq!(exit_code(&out), 2);
}

#[test]
fn catalog_lists_models() {
    let out = run(&["catalog"]);
    assert_eq!(exit_code(&out), 0);
    let v = stdout_json(&out);
    let models = v["models"].as_array().unwrap();
    let names: Vec<&str> = models.iter().map(|m| m["name"].as_str().unwrap()).collect();
    assert!(names.contains(&"affine_space:1"));
    assert!(names.contains(&"elliptic"));
    assert!(names.contains(&"p2_minus_curve:1"));
    let elliptic = models.iter().find(|m| m["name"] == "elliptic").unwrap();
    assert_eq!(elliptic["slope"], "1");
    assert_eq!(elliptic["compact"], true);
    let p2 = models.iter().find(|m| m["name"] == "p2_minus_curve:1").unwrap();
    assert_eq!(p2["slope"], "3/2");
}

#[test]
fn out_flag_writes_file() {
    let dir = std::env::temp_dir().join("confspace-cli-test");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("table.csv");
    let out = run(&[
        "compute",
        "--catalog",
        "affine_space:1",
        "--punctures",
        "0",
        "--n-max",
        "2",
        "--format",
        "csv",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&out), 0);
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("n,i,p,q,dim"));
}
