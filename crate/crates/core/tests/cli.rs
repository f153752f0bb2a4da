use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use intrinsic_select::cli::{ingest_csv, write_dataset_csv, InterceptPolicy, ResponseColumn};
use intrinsic_select::evaluation::{Design, Scenario};
use intrinsic_select::linear::{projection_gap_matrix, ModelSpec};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::Value;
use tempfile::TempDir;

const BIN: &str = env!("CARGO_BIN_EXE_intrinsic-select");

fn run(args: &[&str]) -> Output {
    Command::new(BIN)
        .args(args)
        .env_remove("INTRINSIC_SELECT_SEED")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    assert!(
        o.status.success(),
        "exit {:?}: {}",
        o.status.code(),
        String::from_utf8_lossy(&o.stderr)
    );
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn csv_rows(text: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let header = r.headers().unwrap().iter().map(str::to_string).collect();
    let rows = r
        .records()
        .map(|rec| rec.unwrap().iter().map(str::to_string).collect())
        .collect();
    (header, rows)
}

/// Writes the four-covariate strong-signal dataset (truth: intercept, x1, x3).
fn signal_csv(dir: &Path, n: usize, seed: u64) -> PathBuf {
    let scenario = Scenario {
        design: Design::Gaussian { covariates: 4 },
        true_model: ModelSpec::new(vec![0, 1, 3]).unwrap(),
        true_coeffs: vec![1.0, 2.0, -1.5],
        sigma: 1.0,
    };
    let ds = scenario
        .sample(n, &mut ChaCha8Rng::seed_from_u64(seed))
        .unwrap();
    let path = dir.join(format!("signal_{n}_{seed}.csv"));
    write_dataset_csv(&ds, "y", std::fs::File::create(&path).unwrap()).unwrap();
    path
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn error_record(o: &Output) -> Value {
    let text = String::from_utf8(o.stderr.clone()).unwrap();
    let line = text.lines().next().expect("one error line");
    serde_json::from_str(line).expect("stderr is a JSON record")
}

#[test]
fn errors_reproduces_the_smallest_table_cell() {
    let out = stdout(&run(&["errors", "--j", "2", "--n", "7"]));
    let (header, rows) = csv_rows(&out);
    assert_eq!(header, ["j", "n", "method", "type1", "power", "lambda"]);
    let cell = |m: &str| -> f64 {
        rows.iter().find(|r| r[2] == m).unwrap()[3].parse().unwrap()
    };
    assert!((cell("intrinsic") - 0.1587).abs() <= 0.005);
    assert!((cell("schwarz") - 0.2613).abs() <= 0.005);
}

#[test]
fn frozen_csv_headers() {
    let dir = TempDir::new().unwrap();
    let data = signal_csv(dir.path(), 40, 1);
    let data = data.to_str().unwrap();
    let cases: [(&[&str], &str); 6] = [
        (&["select", "--input", data], "rank,model,log_score,probability"),
        (
            &["bf", "--input", data, "--inner", "x1"],
            "method,i,j,n,b,log_bf_ij,quad_nodes,est_abs_error",
        ),
        (
            &["search", "--input", data, "--chain-length", "200"],
            "rank,model,log_score,visits",
        ),
        (&["errors", "--j", "3", "--n", "10"], "j,n,method,type1,power,lambda"),
        (&["power", "--n-max", "8"], "j,n,method,type1,power,lambda"),
        (
            &["consistency", "--n", "20", "--replicates", "3"],
            "n,median_posterior,frac_top,seed",
        ),
    ];
    for (args, header) in cases {
        let out = stdout(&run(args));
        assert_eq!(out.lines().next().unwrap(), header, "{args:?}");
    }
}

#[test]
fn identical_models_give_zero_under_every_method() {
    let dir = TempDir::new().unwrap();
    let data = signal_csv(dir.path(), 30, 2);
    let out = stdout(&run(&[
        "bf",
        "--input",
        data.to_str().unwrap(),
        "--inner",
        "x1,x2",
        "--outer",
        "x2,x1",
    ]));
    let (_, rows) = csv_rows(&out);
    assert_eq!(rows.len(), 4);
    for r in rows {
        assert_eq!(r[4], "1");
        assert_eq!(r[5].parse::<f64>().unwrap(), 0.0, "{r:?}");
    }
}

#[test]
fn bf_methods_agree_with_the_oracle() {
    let dir = TempDir::new().unwrap();
    let data = signal_csv(dir.path(), 25, 3);
    let out = stdout(&run(&[
        "--format",
        "json",
        "bf",
        "--input",
        data.to_str().unwrap(),
        "--inner",
        "x1",
    ]));
    let v: Value = serde_json::from_str(&out).unwrap();
    let by = |m: &str| {
        v["results"]
            .as_array()
            .unwrap()
            .iter()
            .find(|r| r["method"] == m)
            .unwrap()["log_bf_ij"]
            .as_f64()
            .unwrap()
    };
    assert!((by("intrinsic_quadrature") - by("appendix_oracle")).abs() < 1e-8);
}

#[test]
fn select_ranks_the_generating_model_first() {
    let dir = TempDir::new().unwrap();
    let data = signal_csv(dir.path(), 120, 0x5EED);
    for scheme in ["vsa", "vsb"] {
        let out = stdout(&run(&[
            "select",
            "--input",
            data.to_str().unwrap(),
            "--scheme",
            scheme,
        ]));
        let (_, rows) = csv_rows(&out);
        assert_eq!(rows.len(), 16);
        assert_eq!(rows[0][1], "(Intercept)+x1+x3", "{scheme}");
        let total: f64 = rows.iter().map(|r| r[3].parse::<f64>().unwrap()).sum();
        assert!((total - 1.0).abs() < 1e-12);
    }
}

#[test]
fn repeated_runs_are_byte_identical() {
    let dir = TempDir::new().unwrap();
    let data = signal_csv(dir.path(), 60, 4);
    let data = data.to_str().unwrap();
    let commands: [&[&str]; 3] = [
        &["--seed", "17", "search", "--input", data, "--chain-length", "2000"],
        &["--seed", "17", "consistency", "--n", "20,40", "--replicates", "20"],
        &["--format", "json", "select", "--input", data],
    ];
    for args in commands {
        let a = run(args);
        let b = run(args);
        assert!(a.status.success());
        assert_eq!(a.stdout, b.stdout, "{args:?}");
    }
}

#[test]
fn seed_can_come_from_the_environment() {
    let args = ["consistency", "--n", "20", "--replicates", "10"];
    let flag = stdout(&run(&[&["--seed", "0x2A"][..], &args[..]].concat()));
    let env = Command::new(BIN)
        .args(args)
        .env("INTRINSIC_SELECT_SEED", "42")
        .output()
        .unwrap();
    assert_eq!(stdout(&env), flag);
    let default = stdout(&run(&args));
    assert!(default.contains(",24301\n") || default.ends_with(",24301"));
    assert_ne!(default, flag);
}

#[test]
fn validation_failures_exit_with_two() {
    let dir = TempDir::new().unwrap();
    let bad_cell = write(dir.path(), "bad.csv", "y,a\n1,2\n2,x\n3,5\n4,1\n");
    let dup = write(
        dir.path(),
        "dup.csv",
        "y,a,b\n1,1,1\n2,2,2\n3,3,3\n5,4,4\n4,5,5\n",
    );
    let data = signal_csv(dir.path(), 30, 5);
    let cases: [(&[&str], &str); 6] = [
        (&["select", "--input", "/no/such/file.csv"], "io"),
        (&["select", "--input", bad_cell.to_str().unwrap()], "parse"),
        (&["select", "--input", dup.to_str().unwrap()], "singular_design"),
        (
            &["bf", "--input", data.to_str().unwrap(), "--inner", "x1", "--outer", "x2"],
            "nesting_violation",
        ),
        (&["errors", "--j", "2"], "config"),
        (&["select", "--bogus"], "config"),
    ];
    for (args, kind) in cases {
        let o = run(args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        assert!(o.stdout.is_empty());
        let rec = error_record(&o);
        assert_eq!(rec["error"]["kind"], kind, "{args:?}");
        assert_eq!(rec["error"]["exit_code"], 2);
    }
}

#[test]
fn parse_errors_name_row_and_column() {
    let dir = TempDir::new().unwrap();
    let bad = write(dir.path(), "bad.csv", "y,a\n1,2\n2,x\n3,5\n4,1\n");
    let rec = error_record(&run(&["select", "--input", bad.to_str().unwrap()]));
    let msg = rec["error"]["message"].as_str().unwrap();
    assert!(msg.contains("row 3") && msg.contains("column 2"), "{msg}");
}

#[test]
fn numerical_failures_exit_with_three() {
    let dir = TempDir::new().unwrap();
    let flat = write(
        dir.path(),
        "flat.csv",
        "y,a,b\n2,1,0.3\n2,2,0.1\n2,3,0.7\n2,4,0.2\n2,5,0.9\n2,6,0.4\n",
    );
    let o = run(&["select", "--input", flat.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    assert_eq!(error_record(&o)["error"]["kind"], "degenerate_fit");
}

#[test]
fn help_exits_cleanly() {
    let o = run(&["--help"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&o.stdout).contains("consistency"));
}

#[test]
fn json_output_matches_the_schema() {
    let schema: Value = serde_json::from_str(include_str!("../schema/output.schema.json")).unwrap();
    let validator = jsonschema::validator_for(&schema).unwrap();
    let dir = TempDir::new().unwrap();
    let data = signal_csv(dir.path(), 40, 6);
    let data = data.to_str().unwrap();
    let commands: [&[&str]; 7] = [
        &["select", "--input", data, "--top", "3"],
        &["select", "--input", data, "--scheme", "vsa", "--method", "schwarz"],
        &["bf", "--input", data, "--inner", "x1"],
        &["search", "--input", data, "--chain-length", "300"],
        &["errors", "--j", "2,3", "--n", "9"],
        &["power", "--n-max", "9"],
        &["consistency", "--scenario", "null", "--n", "20", "--replicates", "5"],
    ];
    for args in commands {
        let full = [&["--format", "json"][..], args].concat();
        let v: Value = serde_json::from_str(&stdout(&run(&full))).unwrap();
        let errors: Vec<String> = validator.iter_errors(&v).map(|e| e.to_string()).collect();
        assert!(errors.is_empty(), "{args:?}: {errors:?}");
    }
    let bogus = serde_json::json!({ "command": "select", "rows": [] });
    assert!(!validator.is_valid(&bogus));
}

#[test]
fn two_group_design_survives_a_round_trip() {
    let delta = 0.5;
    let n = 401;
    let scenario = Scenario::slope(delta, [1.0, 1.0], 1.0);
    let ds = scenario
        .sample(n, &mut ChaCha8Rng::seed_from_u64(9))
        .unwrap();
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("two_group.csv");
    write_dataset_csv(&ds, "y", std::fs::File::create(&path).unwrap()).unwrap();
    let back = ingest_csv(
        &path,
        &ResponseColumn::Name("y".into()),
        InterceptPolicy::Prepend,
    )
    .unwrap();
    assert_eq!(back.x(), ds.x());
    let s = projection_gap_matrix(&back, &ModelSpec::intercept(), &[1]).unwrap();
    // Group fractions are ≈ ½, so the slope column's centred second moment is ≈ δ²/4.
    assert!((s[(0, 0)] - delta * delta / 4.0).abs() < 0.005, "{}", s[(0, 0)]);
}
