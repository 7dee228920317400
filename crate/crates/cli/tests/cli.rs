use std::process::{Command, Output};

fn secrecy(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_secrecy")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

/// Column `name` of every data row.
fn column(csv: &str, name: &str) -> Vec<f64> {
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let idx = header.iter().position(|h| *h == name).unwrap_or_else(|| panic!("no column {name}"));
    lines.map(|l| l.split(',').nth(idx).unwrap().parse().unwrap()).collect()
}

const SYMMETRIC: &[&str] = &["--m1", "1", "--m2", "1", "--k1", "1", "--k2", "1", "--rho", "0", "--snr-b-db", "4", "--snr-e-db", "4"];

fn with(base: &[&'static str], extra: &[&'static str]) -> Vec<&'static str> {
    base.iter().chain(extra).copied().collect()
}

#[test]
fn symmetric_outage_is_one_half() {
    let o = secrecy(&with(&["sop"], &with(SYMMETRIC, &["--rate", "0"])));
    assert!(o.status.success());
    let v = column(&stdout(&o), "value")[0];
    assert!((v - 0.5).abs() < 1e-6, "{v}");
}

#[test]
fn huge_rate_is_certain_outage() {
    let o = secrecy(&with(&["sop"], &with(SYMMETRIC, &["--rate", "30"])));
    assert!(column(&stdout(&o), "value")[0] >= 1.0 - 1e-6);
}

#[test]
fn series_and_reference_routes_agree() {
    let args = ["--m1", "4", "--m2", "4", "--k1", "1", "--k2", "1", "--rho", "0.9", "--snr-b-db", "4", "--snr-e-db", "4", "--rate", "1"];
    let a = column(&stdout(&secrecy(&with(&["sop"], &args))), "value")[0];
    let b = column(&stdout(&secrecy(&with(&["sop"], &with(&args, &["--method", "oracle"])))), "value")[0];
    assert!((a - b).abs() < 1e-3, "{a} vs {b}");
    let o = secrecy(&with(&["sop"], &with(&args, &["--guard", "1e-4"])));
    assert!(o.status.success());
}

#[test]
fn pnzsc_columns_complement() {
    let o = secrecy(&with(&["pnzsc"], SYMMETRIC));
    let csv = stdout(&o);
    let p = column(&csv, "pzero")[0];
    let q = column(&csv, "pnzsc")[0];
    assert!((p - 0.5).abs() < 1e-6);
    assert!((p + q - 1.0).abs() < 1e-11);
}

#[test]
fn asymptote_scales_with_doubled_snr() {
    let base = ["--m1", "2", "--k1", "1", "--m2", "2", "--k2", "1", "--rho", "0.5", "--asymptotic"];
    let a = column(&stdout(&secrecy(&with(&["pnzsc"], &with(&base, &["--snr-b-db", "40"])))), "pzero")[0];
    let db = format!("{}", 40.0 + 10.0 * 2f64.log10());
    let db: &'static str = Box::leak(db.into_boxed_str());
    let b = column(&stdout(&secrecy(&with(&["pnzsc"], &with(&base, &["--snr-b-db", db])))), "pzero")[0];
    assert!((a / b - 2.0).abs() < 1e-9, "{}", a / b);
    let o = secrecy(&["pnzsc", "--m1", "2", "--k1", "2", "--asymptotic"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn monte_carlo_is_reproducible() {
    let args = with(&["mc"], &with(SYMMETRIC, &["--rate", "0", "--samples", "1000000", "--seed", "17", "--streams", "3"]));
    let a = secrecy(&args);
    let b = secrecy(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let csv = stdout(&a);
    let (mean, se) = (column(&csv, "mean")[0], column(&csv, "std_err")[0]);
    assert!((mean - 0.5).abs() <= 3.0 * se, "{mean} ± {se}");
}

#[test]
fn rate_sweep_with_manifest_and_plot() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("fig1.csv");
    let plot = dir.path().join("fig1.gp");
    let o = secrecy(&[
        "sweep", "--variable", "rate", "--start", "0", "--stop", "4", "--points", "17", "--m1", "4", "--m2", "4", "--rho", "0.9",
        "--snr-b-db", "4", "--snr-e-db", "4", "--out", out.to_str().unwrap(), "--plot-script", plot.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(&out).unwrap();
    let v = column(&csv, "value");
    assert_eq!(v.len(), 17);
    assert!(v.windows(2).all(|w| w[1] >= w[0]));
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("fig1.csv.manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["points"].as_array().unwrap().len(), 17);
    assert_eq!(manifest["parameters"]["rho"], 0.9);
    assert_eq!(manifest["sweep"]["variable"], "rate");
    assert!(std::fs::read_to_string(&plot).unwrap().contains("fig1.csv"));
}

#[test]
fn snr_sweep_of_pzero_decreases() {
    let o = secrecy(&[
        "sweep", "--variable", "snr-b-db", "--start", "0", "--stop", "50", "--points", "11", "--quantity", "pzero", "--m1", "4",
        "--m2", "4", "--k1", "1", "--k2", "2", "--rho", "0.5", "--snr-e-db", "0",
    ]);
    assert!(o.status.success());
    let v = column(&stdout(&o), "pzero");
    assert!(v.windows(2).all(|w| w[1] <= w[0]));
}

#[test]
fn csv_is_byte_stable() {
    let args = ["sweep", "--variable", "rho", "--start", "0", "--stop", "0.8", "--points", "3", "--rate", "1"];
    assert_eq!(secrecy(&args).stdout, secrecy(&args).stdout);
}

#[test]
fn config_file_supplies_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "m1 = 1\nm2 = 1\nk1 = 1\nk2 = 1\nrho = 0.7\nsnr_b_db = 4\nsnr_e_db = 4\nrate = 5\n").unwrap();
    let o = secrecy(&["sop", "--config", cfg.to_str().unwrap(), "--rate", "0"]);
    let csv = stdout(&o);
    assert_eq!(column(&csv, "rho")[0], 0.7);
    assert!((column(&csv, "value")[0] - 0.5).abs() < 1e-6);
    std::fs::write(&cfg, "colour = red\n").unwrap();
    assert_eq!(secrecy(&["sop", "--config", cfg.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(secrecy(&["sop", "--rate", "-1"]).status.code(), Some(2));
    assert_eq!(secrecy(&["sop", "--rho", "1.5"]).status.code(), Some(2));
    assert_eq!(secrecy(&["sop", "--method", "asymptotic"]).status.code(), Some(2));
    assert_eq!(secrecy(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(secrecy(&["sweep", "--variable", "rate", "--start", "1", "--stop", "0", "--points", "3"]).status.code(), Some(2));
}

#[test]
fn numeric_failure_exits_one() {
    let o = secrecy(&["sop", "--rho", "0.995", "--rate", "1", "--max-terms", "50"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("0.99"));
}

#[test]
fn validation_negative_control() {
    let o = secrecy(&["validate", "--quick", "--tol-oracle", "0", "--tol-pzero", "0", "--mc-sigmas", "0"]);
    assert_eq!(o.status.code(), Some(3));
    let report = stdout(&o);
    assert!(report.lines().skip(1).all(|l| l.ends_with(",fail")), "{report}");
}
