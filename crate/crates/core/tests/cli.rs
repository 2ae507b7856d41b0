use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use covsel::generators::write_matrix_csv;
use covsel::reference::four_node_sigma;

fn covsel(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_covsel")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn write_four_node(dir: &Path) -> String {
    let path = dir.join("sigma.csv");
    write_matrix_csv(&path, &four_node_sigma()).unwrap();
    path.to_str().unwrap().to_owned()
}

#[test]
fn analyze_chow_liu_json() {
    let dir = tempfile::tempdir().unwrap();
    let m = write_four_node(dir.path());
    let o = covsel(&["analyze", &m, "--chow-liu"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["n"], 4);
    assert_eq!(v["edges"].as_array().unwrap().len(), 3);
    let auc = v["auc"].as_f64().unwrap();
    assert!(v["auc_lower"].as_f64().unwrap() <= auc && auc <= v["auc_upper"].as_f64().unwrap());
    assert!((v["cam_trace"].as_f64().unwrap() - 4.0).abs() < 1e-8);
    assert!(v.get("mc_auc").is_none());
}

#[test]
fn analyze_tree_file_with_monte_carlo_to_file() {
    let dir = tempfile::tempdir().unwrap();
    let m = write_four_node(dir.path());
    let tree = dir.path().join("tree.txt");
    fs::write(&tree, "# star at 0\n0,1\n0,2\n0,3\n").unwrap();
    let out = dir.path().join("report.csv");
    let o = covsel(&[
        "analyze",
        &m,
        "--tree",
        tree.to_str().unwrap(),
        "--mc",
        "20000",
        "--seed",
        "3",
        "--format",
        "csv",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(o.stdout.is_empty());
    let text = fs::read_to_string(&out).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 2);
    let header: Vec<&str> = lines[0].split(',').collect();
    let row: Vec<&str> = lines[1].split(',').collect();
    assert_eq!(header.len(), row.len());
    assert_eq!(header.last(), Some(&"mc_se"));
    let get = |k: &str| row[header.iter().position(|h| *h == k).unwrap()].parse::<f64>().unwrap();
    assert!((get("auc") - get("mc_auc")).abs() < 4.0 * get("mc_se"));
}

#[test]
fn input_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.csv");
    fs::write(&bad, "1,0.5\n0.4,1\n").unwrap();
    let o = covsel(&["analyze", bad.to_str().unwrap(), "--chow-liu"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).starts_with("error: "));

    let m = write_four_node(dir.path());
    let cyclic = dir.path().join("cycle.txt");
    fs::write(&cyclic, "0,1\n1,2\n2,0\n").unwrap();
    let o = covsel(&["analyze", &m, "--tree", cyclic.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));

    let o = covsel(&["analyze", dir.path().join("nope.csv").to_str().unwrap(), "--chow-liu"]);
    assert_eq!(o.status.code(), Some(2));

    let o = covsel(&["feasible-region", "--a-grid", "1:x:3"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn trees_enumerate_csv() {
    let dir = tempfile::tempdir().unwrap();
    let m = write_four_node(dir.path());
    let o = covsel(&["trees", &m, "--enumerate"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert_eq!(text.lines().count(), 1 + 16);
    assert!(text.starts_with("tree_id,edges,kl,auc,log10_one_minus_auc"));

    let o = covsel(&["trees", &m, "--samples", "25", "--mcmc", "--seed", "1", "--format", "json"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["metrics"].as_array().unwrap().len(), 25);
}

#[test]
fn sweep_and_feasible_region() {
    let o = covsel(&["sweep", "--family", "toeplitz-chain", "--n-min", "3", "--n-max", "8", "--rho", "0.5"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert_eq!(text.lines().count(), 1 + 6);
    assert!(text.starts_with(covsel::report::SWEEP_HEADER));

    let o = covsel(&["sweep", "--family", "kernel-2d", "--n-min", "4", "--n-max", "5", "--runs", "5", "--format", "json"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rows: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(rows.as_array().unwrap().len(), 2);

    let o = covsel(&["feasible-region", "--a-grid", "0.1,1,10", "--format", "json"]);
    assert!(o.status.success());
    let pts: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let pts = pts.as_array().unwrap();
    assert_eq!(pts.len(), 3);
    let aucs: Vec<f64> = pts.iter().map(|p| p["auc"].as_f64().unwrap()).collect();
    assert!(aucs.windows(2).all(|w| w[0] < w[1]));
}
