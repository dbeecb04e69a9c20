use std::path::Path;
use std::process::{Command, Output};

use gss4d::constellation::{deserialize, papr};
use tempfile::TempDir;

fn gss4d(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gss4d"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write(dir: &TempDir, name: &str, text: &str) -> String {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p.display().to_string()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(text: &str) -> serde_json::Value {
    serde_json::from_str(text).expect("valid json")
}

/// Data rows of a CSV emitted by the tool, header comment stripped.
fn csv_rows(text: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let mut lines = text.lines();
    let header = lines.next().unwrap();
    assert!(header.starts_with("# {"), "missing run header: {header}");
    let meta = json(&header[2..]);
    assert_eq!(meta["tool"], "gss4d");
    let columns = lines.next().unwrap().split(',').map(String::from).collect();
    let rows = lines.map(|l| l.split(',').map(String::from).collect()).collect();
    (columns, rows)
}

fn column(columns: &[String], name: &str) -> usize {
    columns.iter().position(|c| c == name).unwrap_or_else(|| panic!("no column {name}"))
}

const FAST: &str = "steps_per_span = 20\nsymbols = 2^12\nfinal_symbols = 2^12\n";

#[test]
fn export_reports_gss_structure() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "run.cfg", "constellation = gss\nm = 8\nt = 4\n");
    let out = dir.path().join("c.txt");
    let o = gss4d(&["export", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let s = json(&stdout(&o));
    assert_eq!(s["dof"], 28);
    assert_eq!(s["bits"], 8);
    let c = deserialize(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(c.size(), 256);
    assert_eq!(c.shells(), Some(4));
}

#[test]
fn export_pm16qam_papr() {
    let o = gss4d(&["export"]);
    assert!(o.status.success());
    let c = deserialize(&stdout(&o)).unwrap();
    assert!((papr(&c) - 1.8).abs() < 1e-12);
    let s = json(&String::from_utf8(o.stderr).unwrap());
    assert!((s["papr"].as_f64().unwrap() - 1.8).abs() < 1e-12);
}

#[test]
fn exported_file_reloads_identically() {
    let dir = TempDir::new().unwrap();
    let first = dir.path().join("a.txt");
    let cfg = write(&dir, "a.cfg", "constellation = ps-pm16qam\np_low = 0.7\n");
    assert!(gss4d(&["export", "--config", &cfg, "--out", first.to_str().unwrap()]).status.success());
    let cfg = write(
        &dir,
        "b.cfg",
        &format!("constellation = file\nconstellation_file = {}\n", first.display()),
    );
    let second = dir.path().join("b.txt");
    assert!(gss4d(&["export", "--config", &cfg, "--out", second.to_str().unwrap()]).status.success());
    assert_eq!(std::fs::read(&first).unwrap(), std::fs::read(&second).unwrap());
}

#[test]
fn config_errors_exit_with_code_two() {
    let dir = TempDir::new().unwrap();
    for text in [
        "launch_power = 10\n",
        "symbols = 2^12\nsymbols = 2^13\n",
        "p_low = 0.5\n",
        "constellation = gss\nm = 8\nt = 3\n",
        "metric = gmi\n",
        "constellation = file\nconstellation_file = /nonexistent\n",
    ] {
        let cfg = write(&dir, "bad.cfg", text);
        let o = gss4d(&["evaluate", "--config", &cfg]);
        assert_eq!(o.status.code(), Some(2), "config {text:?}");
        assert!(!o.stderr.is_empty());
    }
    assert_eq!(gss4d(&["export", "--config", "/nonexistent.cfg"]).status.code(), Some(2));
}

#[test]
fn evaluate_is_deterministic_and_flags_the_optimum() {
    let dir = TempDir::new().unwrap();
    let cfg = write(
        &dir,
        "run.cfg",
        &format!("{FAST}distances_km = 160\nlaunch_powers_dbm = 8:16:2\n"),
    );
    let a = gss4d(&["evaluate", "--config", &cfg, "--seed", "3", "--workers", "2"]);
    let b = gss4d(&["evaluate", "--config", &cfg, "--seed", "3", "--workers", "1"]);
    assert!(a.status.success(), "{}", String::from_utf8_lossy(&a.stderr));
    let (ta, tb) = (stdout(&a), stdout(&b));
    let body = |t: &str| t.lines().skip(1).map(String::from).collect::<Vec<_>>();
    assert_eq!(body(&ta), body(&tb));
    let (columns, rows) = csv_rows(&ta);
    assert_eq!(rows.len(), 5);
    let optimal = column(&columns, "optimal");
    assert_eq!(rows.iter().filter(|r| r[optimal] == "1").count(), 1);
    for k in 1..=8 {
        column(&columns, &format!("bitwise_mi_b{k}"));
    }
    let c = gss4d(&["evaluate", "--config", &cfg, "--seed", "4"]);
    assert_ne!(body(&stdout(&c)), body(&ta));
}

#[test]
fn noiseless_fec_ber_passes() {
    let dir = TempDir::new().unwrap();
    let cfg = write(
        &dir,
        "run.cfg",
        &format!(
            "{FAST}distances_km = 80\nlaunch_powers_dbm = 4\ntx_osnr_db = off\nrx_noise_power_dbm = off\ngamma_per_w_km = 0\n"
        ),
    );
    let o = gss4d(&["fec-ber", "--config", &cfg]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let (columns, rows) = csv_rows(&stdout(&o));
    assert_eq!(rows.len(), 1);
    let r = &rows[0];
    assert_eq!(r[column(&columns, "post_fec_ber_hd")].parse::<f64>().unwrap(), 0.0);
    assert_eq!(r[column(&columns, "post_fec_ber_sd")].parse::<f64>().unwrap(), 0.0);
    assert_eq!(r[column(&columns, "pass_sd")], "1");
}

fn read_trace(path: &Path) -> Vec<f64> {
    let text = std::fs::read_to_string(path).unwrap();
    let (columns, rows) = csv_rows(&text);
    let objective = column(&columns, "objective");
    let accepted = column(&columns, "accepted");
    rows.iter()
        .filter(|r| r[accepted] == "1")
        .map(|r| r[objective].parse().unwrap())
        .collect()
}

#[test]
fn toy_optimization_writes_loadable_result() {
    let dir = TempDir::new().unwrap();
    let cfg = write(
        &dir,
        "run.cfg",
        &format!(
            "{FAST}constellation = gss\nm = 7\nt = 2\ndistances_km = 160\nlaunch_powers_dbm = 13\nmax_evaluations = 50\n"
        ),
    );
    let out = dir.path().join("opt.txt");
    let o = gss4d(&["optimize", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let s = json(&stdout(&o));
    assert!(s["evaluations"].as_u64().unwrap() <= 50);
    assert!(s["best_objective"].as_f64().unwrap() >= s["initial_objective"].as_f64().unwrap());
    let c = deserialize(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!((c.size(), c.shells()), (128, Some(2)));
    let accepted = read_trace(&dir.path().join("opt.txt.trace.csv"));
    assert!(!accepted.is_empty());
    assert!(accepted.windows(2).all(|w| w[1] >= w[0]));
}

#[test]
fn optimize_needs_a_single_operating_point() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "run.cfg", &format!("{FAST}launch_powers_dbm = 10,12\n"));
    assert_eq!(gss4d(&["optimize", "--config", &cfg]).status.code(), Some(2));
}
