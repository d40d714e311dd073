use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use sweepcoal::sweep::SweepSpec;

fn run(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sweepcoal"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .unwrap()
}

fn csv_column(path: &Path, name: &str) -> Vec<String> {
    let mut r = csv::Reader::from_path(path).unwrap();
    let idx = r.headers().unwrap().iter().position(|h| h == name).unwrap();
    r.records().map(|rec| rec.unwrap()[idx].to_string()).collect()
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o");
    assert_eq!(run(&["sweep", "--twoN", "200"], &out).status.code(), Some(2));
    assert_eq!(run(&["bogus"], &out).status.code(), Some(2));
    assert_eq!(run(&["sweep", "--twoN", "200", "--s", "1.5", "--r", "0", "--n", "3"], &out).status.code(), Some(3));

    let bad = dir.path().join("bad.json");
    fs::write(&bad, r#"{"L": 1.0, "atoms": [{"rate": 1.0, "x": 1.0, "s": 0.0}], "r_table": [[-1, 0.1], [0, 0], [1, 0.1]]}"#).unwrap();
    let o = run(&["recurrent", "--spec", bad.to_str().unwrap(), "--twoN", "200", "--n", "3", "--times", "0.3"], &out);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("atoms[0].s"));

    let spec = dir.path().join("spec.json");
    fs::write(&spec, SweepSpec::single_site(1.0, 0.5, 0.1).unwrap().to_json()).unwrap();
    let o = run(&["recurrent", "--spec", spec.to_str().unwrap(), "--twoN", "100000", "--n", "3", "--times", "0.3"], &out);
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn time_zero_is_all_singletons() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("spec.json");
    fs::write(&spec, SweepSpec::single_site(1.0, 0.5, 0.1).unwrap().to_json()).unwrap();
    let out = dir.path().join("o");
    let o = run(
        &["recurrent", "--spec", spec.to_str().unwrap(), "--twoN", "200", "--n", "4", "--times", "0", "--reps", "200"],
        &out,
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(csv_column(&out.join("replicates.csv"), "psi_0").iter().all(|p| p == "{1}{2}{3}{4}"));
}

#[test]
fn no_recombination_gives_single_block_on_fixation() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o");
    let o = run(&["sweep", "--twoN", "200", "--s", "0.3", "--r", "0", "--n", "4", "--tv", "--reps", "500"], &out);
    assert!(o.status.success());
    let fixed = csv_column(&out.join("replicates.csv"), "fixed");
    let theta = csv_column(&out.join("replicates.csv"), "theta");
    assert!(fixed.iter().any(|f| f == "true"));
    for (f, t) in fixed.iter().zip(&theta) {
        if f == "true" {
            assert_eq!(t, "{1,2,3,4}");
        }
    }
}

#[test]
fn rate_tables() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("star");
    assert!(run(&["rates", "--measure", "star", "--n", "4"], &out).status.success());
    let g = csv_column(&out.join("totals.csv"), "G_n_b");
    assert!((g[0].parse::<f64>().unwrap() - 9.0 / 14.0).abs() < 1e-15);

    let out = dir.path().join("kingman");
    assert!(run(&["rates", "--measure", "kingman", "--n", "10"], &out).status.success());
    let s = csv_column(&out.join("totals.csv"), "expected_S_b");
    assert!((s.last().unwrap().parse::<f64>().unwrap() - 5.657936507936508).abs() < 1e-12);
}
