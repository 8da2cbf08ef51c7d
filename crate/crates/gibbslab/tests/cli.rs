//! End-to-end tests of the `gibbslab` binary: output shapes, determinism and
//! exit codes.

use std::collections::BTreeMap;
use std::path::Path;
use std::process::{Command, Output};

use gibbslab::{solve_homogeneous, splitting_field, CayleyTree};

fn gibbslab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gibbslab"))
        .args(args)
        .env_remove("GIBBSLAB_MAX_STATES")
        .output()
        .expect("binary runs")
}

fn stdout_json(output: &Output) -> serde_json::Value {
    assert!(
        output.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&output.stderr)
    );
    serde_json::from_slice(&output.stdout).expect("stdout is JSON")
}

#[test]
fn tree_info_reports_sizes() {
    let output = gibbslab(&["tree", "--k", "2", "--depth", "3", "info"]);
    assert!(output.status.success());
    let text = String::from_utf8(output.stdout).unwrap();
    assert!(text.contains("|W_3|"));
    assert!(text.contains("22"));

    let output = gibbslab(&[
        "tree", "--k", "3", "--depth", "2", "info", "--format", "json",
    ]);
    let value = stdout_json(&output);
    assert_eq!(value["k"], 3);
    assert_eq!(value["sphere_sizes"], serde_json::json!([1, 4, 12]));
    assert_eq!(value["ball_size"], 17);
}

#[test]
fn solve_output_is_deterministic() {
    let args = ["solve", "--k", "2", "--theta", "0.8"];
    let first = gibbslab(&args);
    let second = gibbslab(&args);
    assert!(first.status.success());
    assert_eq!(first.stdout, second.stdout);

    let value: serde_json::Value = serde_json::from_slice(&first.stdout).unwrap();
    let solutions = value["solutions"].as_array().unwrap();
    assert_eq!(solutions.len(), 3);
    assert_eq!(value["stability"][1], "unstable");
    assert_eq!(value["params"]["theta_source"], "given");
}

#[test]
fn solve_subcritical_has_single_solution() {
    let output = gibbslab(&["solve", "--k", "2", "--theta", "0.3"]);
    let value = stdout_json(&output);
    assert_eq!(value["solutions"], serde_json::json!([0.0]));
    assert_eq!(value["stability"], serde_json::json!(["stable"]));
}

#[test]
fn scan_csv_shows_the_bifurcation() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("scan.csv");
    let output = gibbslab(&[
        "scan",
        "--k",
        "2",
        "--theta-min",
        "0.4",
        "--theta-max",
        "0.6",
        "--steps",
        "21",
        "--output",
        path.to_str().unwrap(),
    ]);
    assert!(output.status.success());
    let csv = std::fs::read_to_string(&path).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "theta,n_solutions,h_min,h_mid,h_max,stable_flags");
    assert_eq!(lines.len(), 22);

    // counts switch from 1 to 3 at the row nearest theta = 0.5
    let counts: Vec<usize> = lines[1..]
        .iter()
        .map(|line| line.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    for (i, &count) in counts.iter().enumerate() {
        let expected = if i <= 10 { 1 } else { 3 };
        assert_eq!(count, expected, "row {i}: {}", lines[i + 1]);
    }
    // single-solution rows leave h_min/h_max empty and flag the middle root
    let row1: Vec<&str> = lines[1].split(',').collect();
    assert_eq!(row1[2], "");
    assert!(!row1[3].is_empty());
    assert_eq!(row1[5], "S");
    let row_last: Vec<&str> = lines[21].split(',').collect();
    assert_eq!(row_last[5], "SUS");
}

#[test]
fn verify_spec_accepts_the_boltzmann_family() {
    let output = gibbslab(&[
        "verify-spec",
        "--k",
        "2",
        "--depth",
        "3",
        "--model",
        "ising",
        "--J",
        "1",
        "--beta",
        "0.5",
        "--m",
        "2",
        "--n",
        "1",
        "--boundary",
        "uniform:+1",
        "--tol",
        "1e-10",
    ]);
    let value = stdout_json(&output);
    assert_eq!(value["verdict"], serde_json::json!(true));
    assert!(value["residual"].as_f64().unwrap() <= 1e-12);
    assert!(value["logZ"].get("V2").is_some());
}

#[test]
fn verify_compat_distinguishes_solutions_from_noise() {
    let zero = gibbslab(&[
        "verify-compat",
        "--k",
        "2",
        "--depth",
        "2",
        "--theta",
        "0.8",
        "--n",
        "2",
        "--field",
        "homogeneous:0",
    ]);
    assert_eq!(zero.status.code(), Some(0));
    let value = stdout_json(&zero);
    assert!(value["a"].as_object().unwrap().len() == 3); // W_1 vertices
    assert_eq!(
        value["params"]["theta_source"],
        "given; converted via J = atanh(theta), beta = 1"
    );

    let noisy = gibbslab(&[
        "verify-compat",
        "--k",
        "2",
        "--depth",
        "2",
        "--theta",
        "0.8",
        "--n",
        "2",
        "--field",
        "homogeneous:1",
    ]);
    assert_eq!(noisy.status.code(), Some(1));
}

#[test]
fn check_law_accepts_a_field_file_with_the_splitting_solution() {
    let theta: f64 = 0.8;
    let tree = CayleyTree::build(2, 2).unwrap();
    let h_star = solve_homogeneous(2, theta, 1e-13).unwrap().solutions[2];
    let field = splitting_field(&tree, h_star, theta).unwrap();
    let map: BTreeMap<String, f64> = (0..tree.vertex_count())
        .map(|v| (v.to_string(), field.value_at(v).unwrap()))
        .collect();

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("field.json");
    std::fs::write(&path, serde_json::to_string(&map).unwrap()).unwrap();

    let output = gibbslab(&[
        "check-law",
        "--k",
        "2",
        "--depth",
        "2",
        "--theta",
        "0.8",
        "--field",
        path.to_str().unwrap(),
    ]);
    assert_eq!(output.status.code(), Some(0));
    let value = stdout_json(&output);
    assert_eq!(value["verdict"], serde_json::json!(true));
    // leaves are excluded, not silently passed
    assert_eq!(value["excluded"].as_array().unwrap().len(), 6);

    // the homogeneous value without the root correction must fail at the root
    let bad = gibbslab(&[
        "check-law",
        "--k",
        "2",
        "--depth",
        "2",
        "--theta",
        "0.8",
        "--field",
        &format!("homogeneous:{h_star}"),
    ]);
    assert_eq!(bad.status.code(), Some(1));
}

#[test]
fn marginals_csv_covers_every_vertex() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("marginals.csv");
    let output = gibbslab(&[
        "marginals",
        "--k",
        "2",
        "--depth",
        "2",
        "--model",
        "ising",
        "--J",
        "1",
        "--beta",
        "0.6",
        "--field",
        "homogeneous:0.5",
        "--observable",
        "magnetization",
        "--output",
        path.to_str().unwrap(),
    ]);
    assert!(output.status.success());
    let csv = std::fs::read_to_string(&path).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "vertex_index,generation,magnetization");
    assert_eq!(lines.len(), 11); // header + |V_2| = 10
    assert!(lines[1].starts_with("0,0,"));
    assert!(lines[10].starts_with("9,2,"));
    // 15-significant-digit scientific format
    let m_root: f64 = lines[1].split(',').nth(2).unwrap().parse().unwrap();
    assert!(m_root > 0.0);
}

#[test]
fn model_and_boundary_files_are_accepted() {
    let dir = tempfile::tempdir().unwrap();
    let model_path = dir.path().join("model.json");
    std::fs::write(
        &model_path,
        r#"{"spins": [-1.0, 1.0], "rho": [[1.0, -1.0], [-1.0, 1.0]], "J": 1.0, "beta": 0.5}"#,
    )
    .unwrap();

    // boundary configuration on W_3 of the k = 2 tree: vertices 10..=21
    let boundary_path = dir.path().join("boundary.json");
    let boundary: BTreeMap<String, f64> = (10..22)
        .map(|v| (v.to_string(), if v % 2 == 0 { 1.0 } else { -1.0 }))
        .collect();
    std::fs::write(&boundary_path, serde_json::to_string(&boundary).unwrap()).unwrap();

    let output = gibbslab(&[
        "verify-spec",
        "--k",
        "2",
        "--depth",
        "3",
        "--model",
        model_path.to_str().unwrap(),
        "--m",
        "2",
        "--n",
        "1",
        "--boundary",
        boundary_path.to_str().unwrap(),
    ]);
    assert_eq!(output.status.code(), Some(0));
    let value = stdout_json(&output);
    assert_eq!(value["params"]["theta_source"], "model file");

    // an incomplete boundary file is a usage error
    let partial_path = dir.path().join("partial.json");
    std::fs::write(&partial_path, r#"{"10": 1.0}"#).unwrap();
    let output = gibbslab(&[
        "verify-spec",
        "--k",
        "2",
        "--depth",
        "3",
        "--model",
        model_path.to_str().unwrap(),
        "--m",
        "2",
        "--n",
        "1",
        "--boundary",
        partial_path.to_str().unwrap(),
    ]);
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn usage_errors_exit_2() {
    // unknown observable
    let output = gibbslab(&[
        "marginals",
        "--k",
        "2",
        "--depth",
        "1",
        "--J",
        "1",
        "--beta",
        "1",
        "--field",
        "homogeneous:0",
        "--observable",
        "susceptibility",
        "--output",
        "/tmp/never-written.csv",
    ]);
    assert_eq!(output.status.code(), Some(2));
    assert!(!Path::new("/tmp/never-written.csv").exists());

    // clap-level parse failure
    let output = gibbslab(&["solve", "--k", "2"]);
    assert_eq!(output.status.code(), Some(2));

    // theta outside (-1, 1)
    let output = gibbslab(&["solve", "--k", "2", "--theta", "1.5"]);
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn capacity_errors_exit_3() {
    let output = gibbslab(&[
        "verify-spec",
        "--k",
        "2",
        "--depth",
        "3",
        "--J",
        "1",
        "--beta",
        "0.5",
        "--m",
        "2",
        "--n",
        "1",
        "--boundary",
        "uniform:+1",
        "--max-states",
        "8",
    ]);
    assert_eq!(output.status.code(), Some(3));

    // the environment variable mirrors --max-states
    let output = Command::new(env!("CARGO_BIN_EXE_gibbslab"))
        .args([
            "verify-spec",
            "--k",
            "2",
            "--depth",
            "3",
            "--J",
            "1",
            "--beta",
            "0.5",
            "--m",
            "2",
            "--n",
            "1",
            "--boundary",
            "uniform:+1",
        ])
        .env("GIBBSLAB_MAX_STATES", "8")
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(3));
}
