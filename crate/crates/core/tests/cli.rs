use std::process::{Command, Output};

fn cli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tree-heat")).args(args).output().expect("binary runs")
}

fn value_column(out: &Output) -> Vec<f64> {
    String::from_utf8_lossy(&out.stdout)
        .lines()
        .skip(2)
        .map(|l| l.split(',').nth(2).unwrap().parse().unwrap())
        .collect()
}

#[test]
fn kernel_table_has_one_row_per_distance() {
    let out = cli(&["kernel", "--q", "2", "--family", "heat", "--t", "1", "--radius", "25"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert!(lines[0].starts_with("# q=2,family=heat"));
    assert_eq!(lines[1], "k,sphere_size,value,cumulative_mass");
    assert_eq!(lines.len(), 2 + 26);
    assert!(!text.contains('\r'));
}

#[test]
fn wave_half_matches_stable_one() {
    let w = cli(&["kernel", "--q", "2", "--family", "wave", "--nu", "0.5", "--t", "0.7"]);
    let p = cli(&["kernel", "--q", "2", "--family", "stable", "--alpha", "1", "--t", "0.7"]);
    for (a, b) in value_column(&w).iter().zip(value_column(&p)) {
        assert!((a - b).abs() < 1e-8);
    }
}

#[test]
fn stable_on_z_tracks_the_comparator() {
    let out = cli(&["kernel", "--q", "1", "--family", "stable", "--alpha", "1", "--t", "0.5", "--radius", "40"]);
    let vals = value_column(&out);
    let ratios: Vec<f64> = vals
        .iter()
        .enumerate()
        .map(|(k, v)| v / tree_heat::kernels::comparator_z(1.0, 0.5, k as i64))
        .collect();
    let (lo, hi) = ratios.iter().fold((f64::INFINITY, 0.0f64), |(a, b), r| (a.min(*r), b.max(*r)));
    assert!(hi / lo <= 100.0, "[{lo}, {hi}]");
}

#[test]
fn exit_codes() {
    assert_eq!(cli(&["kernel", "--q", "2"]).status.code(), Some(1));
    assert_eq!(cli(&["kernel", "--q", "2", "--family", "stable", "--t", "1"]).status.code(), Some(1));
    assert_eq!(cli(&["kernel", "--q", "2", "--family", "heat", "--t", "1", "--radius", "1"]).status.code(), Some(2));
    assert_eq!(cli(&["--help"]).status.code(), Some(0));
    assert_eq!(cli(&["verify", "--check", "no-such-check"]).status.code(), Some(1));
}

#[test]
fn apply_reports_the_offending_row() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("f.csv");
    std::fs::write(&input, "vertex,value\no,1\no.1,2\no.7,3\n").unwrap();
    let out = cli(&["apply", "--q", "2", "--family", "heat", "--t", "0.5", "--radius", "2", "--input", input.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("row 3"));
}

#[test]
fn apply_writes_rows_in_ball_order() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("f.csv");
    let output = dir.path().join("g.csv");
    std::fs::write(&input, "vertex,value\no,1\n").unwrap();
    let args = ["apply", "--q", "1", "--family", "heat", "--t", "0.5", "--radius", "1", "--input", input.to_str().unwrap(), "--out", output.to_str().unwrap()];
    assert_eq!(cli(&args).status.code(), Some(0));
    let text = std::fs::read_to_string(&output).unwrap();
    let verts: Vec<&str> = text.lines().skip(1).map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(verts, ["o", "o.0", "o.1"]);
    let h1 = tree_heat::kernels::heat_kernel_z(0.5, 1).unwrap();
    let v: f64 = text.lines().nth(2).unwrap().split(',').nth(1).unwrap().parse().unwrap();
    assert!((v - h1).abs() < 1e-15);
}

#[test]
fn weights_verdict_json() {
    let out = cli(&["weights", "--q", "2", "--condition", "thm1-i", "--p", "2", "--alpha", "1", "--weight", "q^(-2*k)"]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["verdict"], "not-admissible");
    assert_eq!(v["tail"], "unbounded-tail");
    let out = cli(&["weights", "--q", "3", "--condition", "thm2-i", "--p", "1", "--nu", "1", "--preset", "critical"]);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["verdict"], "admissible");
}

#[test]
fn single_check_report() {
    let out = cli(&["verify", "--check", "stochasticity", "--q", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let arr = v.as_array().unwrap();
    assert_eq!(arr.len(), 1);
    assert_eq!(arr[0]["check_id"], "stochasticity");
    assert_eq!(arr[0]["parameter_grid"]["q"], serde_json::json!([1]));
}

#[test]
fn tolerance_env_override_is_validated() {
    let out = Command::new(env!("CARGO_BIN_EXE_tree-heat"))
        .args(["kernel", "--q", "2", "--family", "heat", "--t", "1"])
        .env("TREE_HEAT_REL_TOL", "-1")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}
