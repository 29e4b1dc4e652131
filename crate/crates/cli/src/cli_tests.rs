use std::fs;
use std::path::Path;

use serde_json::Value;

use crate::main_with_args;

fn run(args: &[&str]) -> u8 {
    main_with_args(std::iter::once("toa-outage").chain(args.iter().copied()).map(str::to_string))
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<f64>>) {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap().split(',').map(str::to_string).collect();
    let rows = lines
        .map(|l| l.split(',').map(|c| c.parse::<f64>().unwrap()).collect())
        .collect();
    (header, rows)
}

fn manifest(dir: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap()
}

#[test]
fn argument_errors_exit_with_code_two() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().to_str().unwrap();
    let cases: Vec<Vec<&str>> = vec![
        vec!["ccdf", "--n", "2", "--out", out],
        vec!["ccdf", "--n", "3", "--methods", "mc,nope", "--out", out],
        vec!["ccdf", "--n", "3", "--u-min", "1", "--out", out],
        vec!["ccdf", "--n", "3", "--u-min", "5", "--u-max", "1", "--out", out],
        vec!["ccdf", "--n", "3", "--dmin", "4", "--dmax", "2", "--out", out],
        vec!["design", "--eps-th", "-1", "--p-out", "0.1", "--out", out],
        vec!["design", "--eps-th", "0", "--p-out", "0.1", "--out", out],
        vec!["design", "--eps-th", "1", "--p-out", "1.5", "--out", out],
        vec!["validate", "--n-range", "8..3", "--out", out],
        vec!["moments", "--n-range", "x", "--out", out],
        vec!["--threads", "0", "moments", "--n-range", "3", "--out", out],
        vec!["ccdf", "--out", out],
    ];
    for args in cases {
        assert_eq!(run(&args), 2, "{args:?}");
    }
}

#[test]
fn single_sample_column_is_binary() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(run(&["ccdf", "--n", "3", "--methods", "mc", "--samples", "1", "--seed", "4", "--out", path(tmp.path())]), 0);
    let (header, rows) = read_csv(&tmp.path().join("ccdf.csv"));
    assert_eq!(header, vec!["speb_times_ts", "mc"]);
    assert_eq!(rows.len(), 400);
    assert!(rows.iter().all(|r| r[1] == 0.0 || r[1] == 1.0));
    let m = manifest(tmp.path());
    assert_eq!(m["seed"], 4);
    assert_eq!(m["seed_source"], "flag");
    assert!(tmp.path().join("plot_ccdf.gp").exists());
}

#[test]
fn values_below_the_support_are_one_and_reruns_match() {
    let tmp = tempfile::tempdir().unwrap();
    let first = tmp.path().join("first");
    let code = run(&[
        "--threads", "1", "ccdf", "--n", "3", "--methods", "gdop,mc,bounds", "--samples", "50000",
        "--u-min", "0.5", "--u-max", "1000", "--u-points", "120", "--out", path(&first),
    ]);
    assert_eq!(code, 0);
    let (header, rows) = read_csv(&first.join("ccdf.csv"));
    assert_eq!(header, vec!["speb_times_ts", "gdop", "mc", "gdop_lower", "gdop_upper"]);
    assert_eq!(rows[0][0], 0.5);
    let mut below = 0;
    for r in rows.iter().filter(|r| r[0] < 4.0 / 3.0) {
        below += 1;
        assert!(r[1..].iter().all(|v| *v == 1.0), "{r:?}");
    }
    assert!(below > 0);
    // entropy seed recorded, then replayed at another thread count
    let m = manifest(&first);
    assert_eq!(m["seed_source"], "entropy");
    assert!(m["seed"].is_u64());
    assert_eq!(m["outputs"][0], "ccdf.csv");
    let second = tmp.path().join("second");
    let manifest_path = first.join("manifest.json");
    assert_eq!(run(&["--threads", "3", "rerun", "--manifest", path(&manifest_path), "--out", path(&second)]), 0);
    assert_eq!(fs::read(first.join("ccdf.csv")).unwrap(), fs::read(second.join("ccdf.csv")).unwrap());
    assert_eq!(manifest(&second)["seed"], m["seed"]);
}

#[test]
fn design_prunes_and_reports_candidates() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("infeasible");
    assert_eq!(run(&["design", "--eps-th", "0.5", "--p-out", "0.1", "--n-max", "7", "--out", path(&dir)]), 0);
    let (header, rows) = read_csv(&dir.join("design.csv"));
    assert_eq!(header, vec!["n", "speb_support_min", "pruned", "ccdf_approx", "meets_target"]);
    assert_eq!(rows.len(), 5);
    assert!(rows.iter().all(|r| r[2] == 1.0 && r[3] == 1.0 && r[4] == 0.0));
    let report: Value = serde_json::from_str(&fs::read_to_string(dir.join("design.json")).unwrap()).unwrap();
    assert!(report["n"].is_null());

    let dir = tmp.path().join("easy");
    assert_eq!(run(&["design", "--eps-th", "1e6", "--p-out", "0.5", "--out", path(&dir)]), 0);
    let report: Value = serde_json::from_str(&fs::read_to_string(dir.join("design.json")).unwrap()).unwrap();
    assert_eq!(report["n"], 3);
    let (_, rows) = read_csv(&dir.join("design.csv"));
    assert_eq!(rows.len(), 1);
    assert!(rows[0][3] <= 0.5 && rows[0][2] == 0.0);
}

#[test]
fn moments_table_columns() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(run(&["moments", "--n-range", "4..5", "--samples", "200000", "--seed", "2", "--out", path(tmp.path())]), 0);
    let (header, rows) = read_csv(&tmp.path().join("moments.csv"));
    assert_eq!(header.len(), 7);
    assert_eq!(rows.len(), 2);
    for r in &rows {
        let n = r[0];
        assert_eq!(r[5], 1.0 / n);
        assert!(((r[1] - r[2]) / r[2]).abs() < 1e-2);
        assert!(r[4] < 0.0);
        assert!(r[3] > 0.0);
    }
}
