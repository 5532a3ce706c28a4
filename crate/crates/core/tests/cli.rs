use std::path::Path;
use std::process::{Command, Output};

use epr_optomech::output::{read_csv, read_jsonlines, Cell};

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_epr-optomech"))
        .current_dir(dir)
        .args(args)
        .output()
        .unwrap()
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = run(dir, args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

#[test]
fn spectrum_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["--omega-points", "21", "spectrum"];
    assert_eq!(ok(dir.path(), &args), ok(dir.path(), &args));
}

#[test]
fn out_flag_writes_the_same_table() {
    let dir = tempfile::tempdir().unwrap();
    let stdout = ok(dir.path(), &["--omega-points", "5", "spectrum"]);
    ok(dir.path(), &["--omega-points", "5", "--out", "s.csv", "spectrum"]);
    assert_eq!(std::fs::read_to_string(dir.path().join("s.csv")).unwrap(), stdout);
}

#[test]
fn jsonlines_and_csv_carry_the_same_numbers() {
    let dir = tempfile::tempdir().unwrap();
    let csv = read_csv(&ok(dir.path(), &["--omega-points", "7", "spectrum"])).unwrap();
    let json = read_jsonlines(&ok(
        dir.path(),
        &["--omega-points", "7", "--format", "jsonlines", "spectrum"],
    ))
    .unwrap();
    assert_eq!(csv.columns, json.columns);
    assert_eq!(csv.rows.len(), 7);
    for (a, b) in csv.rows.iter().flatten().zip(json.rows.iter().flatten()) {
        match (a, b) {
            (Cell::Num(x), Cell::Num(y)) => assert!(x == y || (x.is_nan() && y.is_nan())),
            _ => assert_eq!(a, b),
        }
    }
}

#[test]
fn overrides_change_the_result() {
    let dir = tempfile::tempdir().unwrap();
    let warm = read_csv(&ok(dir.path(), &["--omega-points", "1", "spectrum"])).unwrap();
    let cold = read_csv(&ok(
        dir.path(),
        &["--omega-points", "1", "--set", "temperature_k=0", "spectrum"],
    ))
    .unwrap();
    let eof = |t: &epr_optomech::output::Table| t.num(0, "eof").unwrap();
    assert!(eof(&cold) > eof(&warm));
}

#[test]
fn config_file_and_flags_agree() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("run.cfg"),
        "defaults: baseline\ntemperature_k = 77\nomega_points = 3\n",
    )
    .unwrap();
    let from_file = ok(dir.path(), &["--config", "run.cfg", "spectrum"]);
    let from_flags = ok(
        dir.path(),
        &["--set", "temperature_k=77", "--omega-points", "3", "spectrum"],
    );
    assert_eq!(from_file, from_flags);
}

#[test]
fn verify_reports_deviations() {
    let dir = tempfile::tempdir().unwrap();
    let t = read_csv(&ok(dir.path(), &["--omega-points", "3", "verify"])).unwrap();
    assert!(t.columns.iter().any(|c| c == "dev_adiabatic"));
    assert!(t.columns.iter().any(|c| c == "dev_full6"));
    assert_eq!(t.rows.len(), 9);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let code = |args: &[&str]| run(dir.path(), args).status.code();
    assert_eq!(code(&["--set", "eta=abc", "derive"]), Some(2));
    assert_eq!(code(&["--set", "no_such_key=1", "derive"]), Some(2));
    assert_eq!(code(&["--config", "missing.cfg", "derive"]), Some(2));
    assert_eq!(code(&["sweep", "--axis", "nope"]), Some(2));
    assert_eq!(code(&["--set", "alpha=1e9", "spectrum"]), Some(3));
    assert_eq!(code(&["--out", "no/such/dir/x.csv", "derive"]), Some(4));
    let out = run(dir.path(), &["--set", "eta=abc", "derive"]);
    assert!(out.stdout.is_empty());
    assert!(String::from_utf8_lossy(&out.stderr).contains("eta"));
}

#[test]
fn sweep_writes_summary_and_spectra() {
    let dir = tempfile::tempdir().unwrap();
    let summary = read_csv(&ok(
        dir.path(),
        &[
            "--omega-points",
            "11",
            "sweep",
            "--axis",
            "T",
            "--values",
            "0,300",
            "--spectra",
            "spectra.csv",
        ],
    ))
    .unwrap();
    assert_eq!(summary.rows.len(), 2);
    assert!(summary.num(0, "peak_eof").unwrap() > summary.num(1, "peak_eof").unwrap());
    let spectra = read_csv(&std::fs::read_to_string(dir.path().join("spectra.csv")).unwrap()).unwrap();
    assert_eq!(spectra.rows.len(), 22);
}
