use std::path::Path;
use std::process::{Command, Output};

fn relaylink(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_relaylink")).args(args).output().expect("run relaylink")
}

fn stdout_of(args: &[&str]) -> String {
    let out = relaylink(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

/// Header and rows of a CSV with numeric cells.
fn table(csv: &str) -> (Vec<String>, Vec<Vec<f64>>) {
    let mut lines = csv.lines();
    let header = lines.next().unwrap().split(',').map(str::to_owned).collect();
    let rows = lines
        .map(|l| l.split(',').map(|v| if v == "inf" { f64::INFINITY } else { v.parse().unwrap() }).collect())
        .collect();
    (header, rows)
}

fn col(header: &[String], name: &str) -> usize {
    header.iter().position(|h| h == name).unwrap_or_else(|| panic!("no column {name} in {header:?}"))
}

#[test]
fn ber_reproduces_figure_layout() {
    let csv = stdout_of(&["ber", "--modulation", "cbpsk,nbfsk", "--xi", "1,6.7", "--grid", "0:40:5"]);
    assert!(!csv.contains('\r'));
    let (h, rows) = table(&csv);
    assert_eq!(h[0], "gbar1_db");
    assert_eq!(rows.len(), 9);
    for r in &rows {
        for xi in ["1", "6.7"] {
            assert!(r[col(&h, &format!("ber_cbpsk_xi{xi}"))] < r[col(&h, &format!("ber_nbfsk_xi{xi}"))]);
        }
        for m in ["cbpsk", "nbfsk"] {
            assert!(r[col(&h, &format!("ber_{m}_xi1"))] > r[col(&h, &format!("ber_{m}_xi6.7"))]);
        }
    }
}

#[test]
fn capacity_over_xi_matches_oracle() {
    let csv = stdout_of(&["capacity", "--over", "xi", "--xi", "1,2,6.7", "--gbar1-db", "12"]);
    let (h, rows) = table(&csv);
    assert_eq!(h, ["xi", "capacity", "capacity_oracle"]);
    assert_eq!(rows.iter().map(|r| r[0]).collect::<Vec<_>>(), [1.0, 2.0, 6.7]);
    for r in &rows {
        assert!(((r[1] - r[2]) / r[2]).abs() < 1e-3, "{r:?}");
    }
}

#[test]
fn repeat_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let path = dir.path().join(name);
        let p = path.to_str().unwrap();
        stdout_of(&["ser", "--modulation", "mpsk:8", "--grid", "0:20:10", "--mc", "--samples", "20000", "--seed", "7", "--out", p]);
        std::fs::read(&path).unwrap()
    };
    let a = run("a.csv");
    assert_eq!(a, run("b.csv"));
    let text = String::from_utf8(a).unwrap();
    assert!(text.starts_with("gbar1_db,ser_mpsk8_xi1,ser_mpsk8_xi1_mc,ser_mpsk8_xi1_mc_std_error\n"));
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    std::fs::write(&cfg, r#"{"xi": ["inf"], "grid": "1:3:1", "grid_scale": "linear", "alpha": 4.0}"#).unwrap();
    let csv = stdout_of(&["cdf", "--config", cfg.to_str().unwrap(), "--alpha", "2.1"]);
    let flagged = stdout_of(&["cdf", "--xi", "inf", "--grid", "1:3:1"]);
    assert_eq!(csv, flagged);
    assert!(csv.starts_with("gamma,cdf_xiinf\n"));
}

#[test]
fn invalid_input_is_reported() {
    for args in [
        &["ber", "--alpha", "-1"][..],
        &["ber", "--modulation", "mpsk:4"],
        &["ser", "--modulation", "mqam:8"],
        &["cdf", "--grid", "3:1:1"],
        &["pdf", "--mc"],
        &["capacity", "--xi", "zero"],
    ] {
        let out = relaylink(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(String::from_utf8_lossy(&out.stderr).starts_with("error: "), "{args:?}");
    }
}

#[test]
fn svg_from_csv() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("ber.csv");
    let svg = dir.path().join("ber.svg");
    stdout_of(&["ber", "--grid", "0:30:10", "--out", csv.to_str().unwrap()]);
    stdout_of(&["svg", "--input", csv.to_str().unwrap(), "--out", svg.to_str().unwrap()]);
    let text = std::fs::read_to_string(&svg).unwrap();
    assert_eq!(text.matches("<polyline").count(), 4);
}

fn validate(dir: &Path, samples: &str) -> (Output, String, String) {
    let report = dir.join(format!("report-{samples}.txt"));
    let csv = dir.join(format!("capacity-{samples}.csv"));
    let out = relaylink(&[
        "validate",
        "--samples",
        samples,
        "--out",
        report.to_str().unwrap(),
        "--csv",
        csv.to_str().unwrap(),
    ]);
    (out, std::fs::read_to_string(report).unwrap(), std::fs::read_to_string(csv).unwrap())
}

#[test]
fn validate_exit_status_follows_checks() {
    let dir = tempfile::tempdir().unwrap();
    let (out, report, csv) = validate(dir.path(), "1000000");
    assert!(out.status.success(), "{report}");
    assert!(report.ends_with("failed: PASS\n"));
    for line in report.lines().filter(|l| !l.starts_with('#')) {
        let fields: Vec<&str> = line.split(" | ").collect();
        assert_eq!(fields.len(), 4, "{line}");
        assert_eq!(fields[3], "PASS", "{line}");
    }
    assert!(csv.starts_with("xi,capacity,capacity_oracle,capacity_mc,capacity_mc_std_error\n"));

    // Far too few draws for the statistical checks.
    let (out, report, _) = validate(dir.path(), "64");
    assert_eq!(out.status.code(), Some(1));
    assert!(report.contains("| FAIL"));
}
