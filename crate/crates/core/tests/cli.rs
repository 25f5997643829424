//! End-to-end checks of the `sdrkit` binary: flag parsing, file
//! interfaces, output shapes, exit codes and error prefixes.

use std::fs;
use std::path::Path;
use std::process::Command;

fn sdrkit(args: &[&str]) -> (i32, String, String) {
    sdrkit_env(args, &[])
}

fn sdrkit_env(args: &[&str], envs: &[(&str, &str)]) -> (i32, String, String) {
    let mut command = Command::new(env!("CARGO_BIN_EXE_sdrkit"));
    command.args(args).env_remove("SDRKIT_TOL");
    for (key, value) in envs {
        command.env(key, value);
    }
    let output = command.output().expect("binary runs");
    (
        output.status.code().unwrap_or(-1),
        String::from_utf8(output.stdout).expect("stdout is UTF-8"),
        String::from_utf8(output.stderr).expect("stderr is UTF-8"),
    )
}

fn write(dir: &Path, name: &str, contents: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, contents).expect("fixture writes");
    path.to_str().expect("utf-8 path").to_string()
}

#[test]
fn rate_stpr_uk_parameterization() {
    let (code, out, err) = sdrkit(&[
        "rate", "stpr", "--delta", "0.005", "--hazard", "0.01", "--mu", "1.0", "--growth", "0.02",
    ]);
    assert_eq!(code, 0, "{err}");
    assert_eq!(out, "0.035000\n");
}

#[test]
fn npv_with_flat_rate_and_schedule_file() {
    let dir = tempfile::tempdir().unwrap();
    let cashflow = write(dir.path(), "cf.csv", "t,amount\n0,-100\n1,60\n2,60\n");
    let (code, out, _) = sdrkit(&["npv", "--cashflow", &cashflow, "--rate", "0"]);
    assert_eq!(code, 0);
    assert_eq!(out, "GBP 20.0000\n");

    let schedule = write(
        dir.path(),
        "sched.json",
        r#"[{"start_year":0.0,"rate":0.035},{"start_year":1.5,"rate":0.03}]"#,
    );
    let (code, out, _) = sdrkit(&[
        "npv",
        "--cashflow",
        &cashflow,
        "--schedule",
        &schedule,
        "--compounding",
        "continuous",
        "--currency",
        "USD",
    ]);
    assert_eq!(code, 0);
    assert!(out.starts_with("USD "), "{out}");

    // --rate and --schedule are mutually exclusive.
    let (code, _, err) = sdrkit(&[
        "npv",
        "--cashflow",
        &cashflow,
        "--rate",
        "0.05",
        "--schedule",
        &schedule,
    ]);
    assert_eq!(code, 1);
    assert!(err.starts_with("E_PARSE:"), "{err}");
}

#[test]
fn npv_missing_file_is_validation_error() {
    let (code, _, err) = sdrkit(&["npv", "--cashflow", "/nonexistent.csv", "--rate", "0.05"]);
    assert_eq!(code, 1);
    assert!(err.starts_with("E_VALIDATE:"), "{err}");
    assert_eq!(err.lines().count(), 1, "single-line error: {err}");
}

#[test]
fn npv_bad_csv_is_parse_error_with_line() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.csv", "0,-100\n1,60\n");
    let (code, _, err) = sdrkit(&["npv", "--cashflow", &bad, "--rate", "0.05"]);
    assert_eq!(code, 1);
    assert!(err.starts_with("E_PARSE:"), "{err}");
    assert!(err.contains("line 1"), "{err}");
}

#[test]
fn compare_emits_six_rows_in_column_order() {
    let dir = tempfile::tempdir().unwrap();
    let pfi = write(dir.path(), "pfi.csv", "t,amount\n1,40\n2,40\n3,40\n");
    let psc = write(dir.path(), "psc.csv", "t,amount\n0,105\n");
    let (code, out, err) = sdrkit(&[
        "compare",
        "--pfi",
        &pfi,
        "--psc",
        &psc,
        "--rates",
        "0.06,0.055,0.05,0.045,0.04,0.03",
    ]);
    assert_eq!(code, 0, "{err}");
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines.len(), 7);
    assert_eq!(lines[0], "rate,npv_pfi,npv_psc,difference_in_favour_of_pfi");
    assert!(lines[1].starts_with("0.06,"));
    assert!(lines[6].starts_with("0.03,"));
    // PSC pays everything at t = 0, so its NPV column is constant.
    for line in &lines[1..] {
        let fields: Vec<&str> = line.split(',').collect();
        assert_eq!(fields.len(), 4);
        assert_eq!(fields[2], "105.0000");
    }
}

#[test]
fn compare_psc_risk_adjustment_is_added() {
    let dir = tempfile::tempdir().unwrap();
    let pfi = write(dir.path(), "pfi.csv", "t,amount\n0,100\n");
    let psc = write(dir.path(), "psc.csv", "t,amount\n0,95\n");
    let risk = write(dir.path(), "risk.csv", "t,amount\n0,10\n");
    let (code, out, _) = sdrkit(&[
        "compare", "--pfi", &pfi, "--psc", &psc, "--psc-risk", &risk, "--rates", "0.05",
    ]);
    assert_eq!(code, 0);
    assert!(out.contains("0.05,100.0000,105.0000,5.0000\n"), "{out}");
}

#[test]
fn breakeven_analytic_and_no_sign_change() {
    let dir = tempfile::tempdir().unwrap();
    let pfi = write(dir.path(), "pfi.csv", "t,amount\n1,110\n");
    let psc = write(dir.path(), "psc.csv", "t,amount\n0,104.7619\n");
    let (code, out, _) = sdrkit(&["breakeven", "--pfi", &pfi, "--psc", &psc, "--bracket", "0.01,0.10"]);
    assert_eq!(code, 0);
    let found: f64 = out.trim().parse().unwrap();
    let root = 110.0 / 104.7619 - 1.0;
    assert!((found - root).abs() <= 1e-6, "{found} vs {root}");

    // Identical inputs: difference is identically zero.
    let (code, _, err) = sdrkit(&["breakeven", "--pfi", &pfi, "--psc", &pfi, "--bracket", "0.01,0.10"]);
    assert_eq!(code, 2);
    assert!(err.starts_with("E_NOSIGN:"), "{err}");
    assert_eq!(err.lines().count(), 1);
}

#[test]
fn breakeven_tolerance_sources() {
    let dir = tempfile::tempdir().unwrap();
    let pfi = write(dir.path(), "pfi.csv", "t,amount\n1,110\n");
    let psc = write(dir.path(), "psc.csv", "t,amount\n0,104.7619\n");

    // A malformed env override is a validation error...
    let (code, _, err) = sdrkit_env(
        &["breakeven", "--pfi", &pfi, "--psc", &psc, "--bracket", "0.01,0.10"],
        &[("SDRKIT_TOL", "not-a-number")],
    );
    assert_eq!(code, 1);
    assert!(err.starts_with("E_VALIDATE:"), "{err}");

    // ...unless the flag takes precedence.
    let (code, _, _) = sdrkit_env(
        &[
            "breakeven", "--pfi", &pfi, "--psc", &psc, "--bracket", "0.01,0.10", "--tol", "1e-7",
        ],
        &[("SDRKIT_TOL", "not-a-number")],
    );
    assert_eq!(code, 0);

    // A valid env override is honoured.
    let (code, _, _) = sdrkit_env(
        &["breakeven", "--pfi", &pfi, "--psc", &psc, "--bracket", "0.01,0.10"],
        &[("SDRKIT_TOL", "1e-8")],
    );
    assert_eq!(code, 0);
}

#[test]
fn swf_value_optimal_classify() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write(
        dir.path(),
        "spec.json",
        r#"{"family":"utilitarian","weight_a":1.0,"weight_b":1.0}"#,
    );
    let (code, out, _) = sdrkit(&["swf", "value", "--spec", &spec, "--ua", "3", "--ub", "5"]);
    assert_eq!(code, 0);
    assert_eq!(out, "8.000000\n");

    // Egalitarian off the diagonal: value plus a warning.
    let egalitarian = write(dir.path(), "egal.json", r#"{"family":"egalitarian"}"#);
    let (code, out, err) = sdrkit(&["swf", "value", "--spec", &egalitarian, "--ua", "3", "--ub", "5"]);
    assert_eq!(code, 0);
    assert_eq!(out, "3.000000\n");
    assert!(err.contains("W_EQUAL_REQUIRED"), "{err}");

    let mut frontier = String::from("u_a,u_b\n");
    for i in 0..=1000 {
        let u_a = i as f64 / 1000.0;
        frontier.push_str(&format!("{},{}\n", u_a, (1.0 - u_a * u_a).sqrt()));
    }
    let frontier = write(dir.path(), "frontier.csv", &frontier);
    let (code, out, _) = sdrkit(&["swf", "optimal", "--frontier", &frontier, "--spec", &spec]);
    assert_eq!(code, 0);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "u_a,u_b");
    let coords: Vec<f64> = lines[1].split(',').map(|v| v.parse().unwrap()).collect();
    let sqrt_half = 0.5_f64.sqrt();
    assert!((coords[0] - sqrt_half).abs() < 2e-3, "{out}");
    assert!((coords[1] - sqrt_half).abs() < 2e-3, "{out}");

    let (code, out, _) = sdrkit(&["swf", "classify", "--rate", "0.035"]);
    assert_eq!(code, 0);
    assert_eq!(out, "between-weighted-utilitarian-and-Rawlsian\n");

    // A custom mapping file.
    let mapping = write(
        dir.path(),
        "mapping.json",
        r#"{"thresholds":[{"min_rate":0.0,"label":"Rawlsian-leaning"},{"min_rate":0.1,"label":"libertarian"}]}"#,
    );
    let (code, out, _) = sdrkit(&["swf", "classify", "--rate", "0.05", "--mapping", &mapping]);
    assert_eq!(code, 0);
    assert_eq!(out, "Rawlsian-leaning\n");
}

#[test]
fn swf_optimal_no_crossing_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let frontier = write(dir.path(), "above.csv", "u_a,u_b\n0.1,0.9\n0.2,0.8\n0.3,0.7\n");
    let egalitarian = write(dir.path(), "egal.json", r#"{"family":"egalitarian"}"#);
    let (code, _, err) = sdrkit(&["swf", "optimal", "--frontier", &frontier, "--spec", &egalitarian]);
    assert_eq!(code, 2);
    assert!(err.starts_with("E_NOSIGN:"), "{err}");
}

#[test]
fn equity_subcommands() {
    let (code, out, _) = sdrkit(&["equity", "gini", "--holdings", "1,0,0,0"]);
    assert_eq!(code, 0);
    assert_eq!(out, "0.750000\n");

    let (code, out, _) = sdrkit(&[
        "equity",
        "topshare",
        "--holdings",
        "45,6.1111,6.1111,6.1111,6.1111,6.1111,6.1111,6.1111,6.1111,6.1111",
        "--fraction",
        "0.1",
    ]);
    assert_eq!(code, 0);
    assert_eq!(out, "0.450000\n"); // 45 / 99.9999, shown to six decimals

    let (code, out, _) = sdrkit(&["equity", "muweight", "--ratio", "2.0", "--mu", "1.5"]);
    assert_eq!(code, 0);
    assert_eq!(out, "0.353553\n");
}

fn register_fixture() -> &'static str {
    r#"{
  "currency": "GBP",
  "entries": [
    {
      "id": "hospital",
      "amount": "100",
      "incurred": "2020-01-01",
      "balance_sheet": "on",
      "contingent": false,
      "payments": [{"date": "2020-06-01", "amount": "30"}]
    },
    {
      "id": "guarantee",
      "amount": "50",
      "incurred": "2020-02-01",
      "balance_sheet": "off",
      "contingent": true,
      "payments": []
    }
  ]
}"#
}

#[test]
fn fiscal_recognize_ratio_alert() {
    let dir = tempfile::tempdir().unwrap();
    let register = write(dir.path(), "register.json", register_fixture());

    let (code, out, _) = sdrkit(&[
        "fiscal", "recognize", "--register", &register, "--basis", "accrual", "--as-of",
        "2020-03-01",
    ]);
    assert_eq!(code, 0);
    // The untriggered guarantee stays unrecognized.
    assert_eq!(out, "GBP 100.0000\n");

    let (code, out, _) = sdrkit(&[
        "fiscal", "recognize", "--register", &register, "--basis", "cash", "--as-of",
        "2020-12-31",
    ]);
    assert_eq!(code, 0);
    assert_eq!(out, "GBP 30.0000\n");

    let (code, out, _) = sdrkit(&[
        "fiscal", "ratio", "--register", &register, "--gdp", "10000", "--gdp-date", "2020-12-31",
        "--scope", "on-balance-only", "--basis", "accrual", "--as-of", "2020-12-31",
    ]);
    assert_eq!(code, 0);
    assert_eq!(out, "0.010000\n");

    // Period mismatch is refused.
    let (code, _, err) = sdrkit(&[
        "fiscal", "ratio", "--register", &register, "--gdp", "10000", "--gdp-date", "2019-12-31",
        "--scope", "on-balance-only", "--basis", "accrual", "--as-of", "2020-12-31",
    ]);
    assert_eq!(code, 1);
    assert!(err.starts_with("E_VALIDATE:"), "{err}");

    let (code, out, _) = sdrkit(&["fiscal", "alert", "--ratio", "1.851"]);
    assert_eq!(code, 0);
    assert_eq!(out, "alert\n");

    let (code, out, _) = sdrkit(&["fiscal", "alert", "--ratio", "0.015"]);
    assert_eq!(code, 0);
    assert_eq!(out, "clear\n");
}

#[test]
fn report_round_trips_compare_output() {
    let dir = tempfile::tempdir().unwrap();
    let pfi = write(dir.path(), "pfi.csv", "t,amount\n1,40\n2,40\n3,40\n");
    let psc = write(dir.path(), "psc.csv", "t,amount\n0,105\n");
    let (code, csv, _) = sdrkit(&[
        "compare", "--pfi", &pfi, "--psc", &psc, "--rates", "0.06,0.03",
    ]);
    assert_eq!(code, 0);

    let table_file = write(dir.path(), "table.csv", &csv);
    let (code, rendered, _) = sdrkit(&["report", "--table", &table_file, "--format", "csv"]);
    assert_eq!(code, 0);
    assert_eq!(rendered, csv);

    let (code, rendered, _) = sdrkit(&["report", "--table", &table_file, "--format", "table"]);
    assert_eq!(code, 0);
    assert!(rendered.starts_with("Discount Rate (%) | PFI | PSC | Difference in Favour of PFI\n"));
}

#[test]
fn report_carlisle_table_rows() {
    let (code, out, _) = sdrkit(&["report", "--carlisle", "--format", "table"]);
    assert_eq!(code, 0);
    assert!(out.contains("5.5 | 186.7 | 185.8 | -0.9\n"), "{out}");

    let (code, out, _) = sdrkit(&["report", "--carlisle", "--format", "csv"]);
    assert_eq!(code, 0);
    assert!(out.contains("0.06,173.1000,174.3000,1.2000\n"), "{out}");
}

#[test]
fn help_exits_zero() {
    let (code, out, _) = sdrkit(&["--help"]);
    assert_eq!(code, 0);
    assert!(out.contains("sdrkit"));
}
