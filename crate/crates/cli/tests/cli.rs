use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn qfpsim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qfpsim")).args(args).env_remove("QFPSIM_OUT").output().unwrap()
}

fn stdout(o: &Output) -> String {
    assert!(o.status.success(), "stderr: {}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn field(line: &str, i: usize) -> f64 {
    line.split(',').nth(i).unwrap().parse().unwrap()
}

#[test]
fn gate_metrics_single_depth() {
    let s = stdout(&qfpsim(&["gate-metrics", "--theta", "0.8169"]));
    let row = s.lines().nth(2).unwrap();
    assert!((field(row, 1) - 0.478133).abs() < 1e-5);
    assert!((field(row, 2) - 0.497869).abs() < 1e-5);
    assert!((field(row, 5) - 0.99990).abs() < 1e-4);
}

#[test]
fn gate_sweep_row_count() {
    let s = stdout(&qfpsim(&["gate-metrics", "--sweep", "0:2:0.01"]));
    assert_eq!(s.lines().count(), 2 + 201);
}

#[test]
fn vacuum_summary() {
    let s = stdout(&qfpsim(&["schwinger"]));
    let row = s.lines().nth(2).unwrap();
    let cols: Vec<&str> = row.split(',').collect();
    assert_eq!(cols[0], "vac");
    let d_sym: usize = row.rsplit(',').nth(6).unwrap().parse().unwrap();
    assert_eq!(d_sym, 9);
    let e: f64 = row.rsplit(',').nth(5).unwrap().parse().unwrap();
    assert!((e + 2.0158).abs() < 1e-4);
}

#[test]
fn vqe_is_deterministic_per_seed() {
    let args = ["schwinger", "--charges", "0", "--vqe", "--systematic", "0.01", "--seed", "4", "--iterations", "60"];
    assert_eq!(stdout(&qfpsim(&args)), stdout(&qfpsim(&args)));
}

#[test]
fn json_lines_are_tagged() {
    let s = stdout(&qfpsim(&["--format", "json-lines", "gate-metrics", "--theta", "0.5,0.8"]));
    let lines: Vec<&str> = s.lines().collect();
    assert_eq!(lines.len(), 2);
    let v: serde_json::Value = serde_json::from_str(lines[0]).unwrap();
    assert_eq!(v["table"], "gate_metrics");
    assert_eq!(v["theta"], 0.5);
}

#[test]
fn energies_then_analyze() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    stdout(&qfpsim(&["--out", d, "energies"]));
    let table = dir.path().join("energy_table.csv");
    let s = stdout(&qfpsim(&["analyze", table.to_str().unwrap(), "--fit", "none"]));
    let mh = s.lines().find(|l| l.starts_with("M_H")).unwrap();
    assert!((field(mh, 1) - 1.282536).abs() < 1e-5);
}

#[test]
fn empty_table_is_missing_entry() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("empty.csv");
    fs::write(&p, "config,value,stat_sigma,sys_sigma\n").unwrap();
    let o = qfpsim(&["analyze", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn unknown_config_needs_lambda() {
    let o = qfpsim(&["schwinger", "--charges", "1,2,3,4"]);
    assert_eq!(o.status.code(), Some(5));
}

fn write_problem(dir: &Path, stem: &str, matrix: &str, meta: &str) {
    fs::write(dir.join(format!("{stem}.mat")), matrix).unwrap();
    fs::write(dir.join(format!("{stem}.toml")), meta).unwrap();
}

#[test]
fn missing_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("a.mat"), "1 1\n0 0 -1.0\n").unwrap();
    let o = qfpsim(&["nuclear", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn one_by_one_nucleus() {
    let dir = tempfile::tempdir().unwrap();
    let meta = "nucleus = \"X\"\nn_max = 0\nl_fm = 10.0\nhbar_omega = 20.0\nunits = \"MeV\"\n";
    write_problem(dir.path(), "x", "1 1\n0 0 -7.25\n", meta);
    let s = stdout(&qfpsim(&["nuclear", dir.path().to_str().unwrap(), "--vqe"]));
    let row = s.lines().nth(2).unwrap();
    assert!((field(row, 4) + 7.25).abs() < 1e-12);
    // only the per-run systematic shift remains
    assert!((field(row, 5) + 7.25).abs() <= 0.01 * 7.25 + 1e-12);
    assert!(field(row, 7) > 0.0);
}

#[test]
fn extrapolation_needs_threshold() {
    let dir = tempfile::tempdir().unwrap();
    for (i, (l, e)) in [(6.0, -7.0), (8.0, -7.5), (10.0, -7.7)].iter().enumerate() {
        let meta = format!("nucleus = \"X\"\nn_max = {i}\nl_fm = {l}\nhbar_omega = 20.0\nunits = \"MeV\"\n");
        write_problem(dir.path(), &format!("x{i}"), &format!("1 1\n0 0 {e}\n"), &meta);
    }
    let o = qfpsim(&["nuclear", dir.path().to_str().unwrap(), "--extrapolate"]);
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn phase_shift_couplings() {
    let s = stdout(&qfpsim(&["phase-shift", "--channel", "triplet", "--p-max", "20"]));
    let row = s.lines().nth(2).unwrap();
    assert!((field(row, 2) - 5.785).abs() < 1e-2);
    assert!(row.contains("-2.2246"));
}
