//! End-to-end runs of the `abscvx` binary.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_abscvx"))
}

fn specs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../specs")
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn run_spec(cmd: &str, spec: &Path, extra: &[&str]) -> (i32, String) {
    let out = bin()
        .arg(cmd)
        .arg("--spec")
        .arg(spec)
        .args(extra)
        .output()
        .expect("binary runs");
    (
        out.status.code().expect("exit code"),
        String::from_utf8(out.stdout).unwrap(),
    )
}

fn sample(cmd: &str, name: &str) -> (i32, String) {
    run_spec(cmd, &specs().join(name), &[])
}

fn inline(cmd: &str, toml: &str) -> (i32, String, String) {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("spec.toml");
    std::fs::write(&path, toml).unwrap();
    let out = bin().arg(cmd).arg("--spec").arg(&path).output().unwrap();
    (
        out.status.code().unwrap(),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

/// Value of `key = ...` inside `[section]`.
fn field<'a>(report: &'a str, section: &str, key: &str) -> &'a str {
    let head = format!("[{section}]");
    let mut inside = false;
    for line in report.lines() {
        if line.starts_with('[') {
            inside = line == head;
            continue;
        }
        if inside {
            if let Some(rest) = line.strip_prefix(key).and_then(|r| r.strip_prefix(" = ")) {
                return rest;
            }
        }
    }
    panic!("no {key} in [{section}]:\n{report}");
}

fn num(report: &str, section: &str, key: &str) -> f64 {
    field(report, section, key).parse().unwrap()
}

#[test]
fn kink_hull_gap_peaks_at_origin() {
    let (code, rep) = sample("hull", "kink_hull.toml");
    assert_eq!(code, 0);
    assert_eq!(field(&rep, "hull", "max_gap_at"), "[0]");
    assert!((num(&rep, "hull", "max_gap") - 0.0625).abs() < 1e-12);

    let (_, csv) = run_spec("hull", &specs().join("kink_hull.toml"), &["--csv"]);
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("x,f,hull,envelope,gap"));
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|s| s.parse().unwrap()).collect())
        .collect();
    let peak = rows.iter().max_by(|a, b| a[4].total_cmp(&b[4])).unwrap();
    assert_eq!(peak[0], 0.0);
    for r in &rows {
        assert!(r[2] <= r[1] + 1e-12 && r[3] <= r[1] + 1e-12);
    }
}

#[test]
fn smooth_function_is_phi_convex() {
    let (code, rep, _) = inline("hull", "[problem]\nf = \"exp(x)\"\nh = 0.0625\n");
    assert_eq!(code, 0);
    assert_eq!(field(&rep, "hull", "is_phi_convex"), "true");
}

#[test]
fn pow32_has_no_subgradient_at_origin() {
    let (code, rep) = sample("subgrad", "pow32_subgrad.toml");
    assert_eq!(code, 0);
    assert_eq!(field(&rep, "subgrad", "result"), "not_found");
}

#[test]
fn user_witness_for_downward_parabola() {
    let spec =
        "[problem]\nf = \"-x*x+4\"\nh = 0.05\n\n[subgrad]\npoint = [0.7]\na = 1.0\nv = [0.0]\n";
    let (code, rep, _) = inline("subgrad", spec);
    assert_eq!(code, 0, "{rep}");
    assert!(rep.contains("verified_on_grid"));
}

#[test]
fn refuted_user_witness_exits_3() {
    let spec = "[problem]\nf = \"-x*x+4\"\n\n[subgrad]\npoint = [0.5]\na = 0.0\nv = [0.0]\n";
    let (code, rep, _) = inline("subgrad", spec);
    assert_eq!(code, 3, "{rep}");
}

#[test]
fn two_wells_globalize_with_positive_curvature() {
    let (code, rep) = sample("subgrad", "twowells_local.toml");
    assert_eq!(code, 0, "{rep}");
    let (code, rep) = sample("globalize", "twowells_globalize.toml");
    assert_eq!(code, 0, "{rep}");
    let line = rep
        .lines()
        .find(|l| l.starts_with("global.a = "))
        .expect("global witness");
    let a: f64 = line["global.a = ".len()..].parse().unwrap();
    assert!(a >= 0.25, "{a}");
}

#[test]
fn paraconvexity_constant_of_negative_square() {
    let (code, rep) = sample("paraconvex", "negsq_paraconvex.toml");
    assert_eq!(code, 0);
    assert!((num(&rep, "paraconvex", "constant") - 1.0).abs() < 1e-9);
    assert_eq!(field(&rep, "gamma", "holds"), "true");
}

#[test]
fn example1_intersection_is_empty_and_zs_fails() {
    let (code, rep) = sample("intersect", "example1_intersect.toml");
    assert_eq!(code, 0);
    assert_eq!(field(&rep, "intersect", "result"), "empty");

    let (code, rep) = sample("zs", "example1_zs.toml");
    assert_eq!(code, 0);
    assert_eq!(field(&rep, "zs", "holds"), "0");
    assert_eq!(field(&rep, "zs", "fails_on_sample"), "64");
}

#[test]
fn bilinear_saddle_is_certified() {
    let (code, rep) = sample("minimax", "bilinear_minimax.toml");
    assert_eq!(code, 0, "{rep}");
    assert_eq!(field(&rep, "certificate", "verdict"), "certified");
    assert_eq!(num(&rep, "certificate", "gap"), 0.0);
}

#[test]
fn quadratic_saddle_is_certified() {
    let spec = "[minimax]\ncatalog = \"saddle.quadratic\"\n";
    let (code, rep, err) = inline("minimax", spec);
    assert_eq!(code, 0, "{rep}{err}");
    assert_eq!(field(&rep, "certificate", "verdict"), "certified");
}

#[test]
fn example1_minimax_needs_the_sweep() {
    let (code, rep) = sample("minimax", "example1_minimax.toml");
    assert_eq!(code, 0);
    assert_eq!(field(&rep, "certificate", "verdict"), "not_found");
    let (code, rep) = sample("minimax", "example1_minimax_sweep.toml");
    assert_eq!(code, 0);
    assert_eq!(field(&rep, "certificate", "verdict"), "certified");
}

#[test]
fn envelopes_are_ordered() {
    let (code, rep) = sample("envelope", "abs_envelope.toml");
    assert_eq!(code, 0);
    assert_eq!(field(&rep, "envelope", "ordered"), "true");
}

#[test]
fn parse_error_reports_column() {
    let out = run(&[
        "hull",
        "--spec",
        specs().join("bad_expr.toml").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(
        err.contains("problem.f") && err.contains("column 4"),
        "{err}"
    );
}

#[test]
fn unknown_key_is_rejected() {
    let (code, _, err) = inline("hull", "[problem]\nf = \"x\"\nfoo = 1\n");
    assert_eq!(code, 2);
    assert!(err.contains("foo"), "{err}");
}

#[test]
fn missing_spec_is_an_input_error() {
    assert_eq!(run(&["hull"]).status.code(), Some(2));
}

#[test]
fn missing_file_is_an_io_error() {
    let out = run(&["hull", "--spec", "/nonexistent/spec.toml"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn reports_are_deterministic_and_embed_config() {
    let spec = specs().join("kink_hull.toml");
    let (_, a) = run_spec("hull", &spec, &["--seed", "3"]);
    let (_, b) = run_spec("hull", &spec, &["--seed", "3"]);
    assert_eq!(a, b);
    assert_eq!(field(&a, "config", "seed"), "3");
    assert_eq!(field(&a, "config", "command"), "\"hull\"");
    assert_eq!(field(&a, "config.hull", "schedule"), "[0.0, 1.0, 2.0, 4.0]");
}

#[test]
fn out_dir_receives_report_and_csv() {
    let dir = tempfile::tempdir().unwrap();
    let (code, stdout) = run_spec(
        "hull",
        &specs().join("kink_hull.toml"),
        &["--csv", "--out", dir.path().to_str().unwrap()],
    );
    assert_eq!(code, 0);
    assert!(stdout.is_empty());
    let txt = std::fs::read_to_string(dir.path().join("hull.txt")).unwrap();
    let csv = std::fs::read_to_string(dir.path().join("hull.csv")).unwrap();
    assert!(txt.contains("[hull]"));
    assert!(csv.starts_with("x,f,hull,envelope,gap\n"));
}

#[test]
fn selftest_passes_and_repeats() {
    let a = run(&["selftest", "--seed", "11"]);
    let b = run(&["selftest", "--seed", "11"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let rep = String::from_utf8(a.stdout).unwrap();
    assert_eq!(field(&rep, "summary", "status"), "pass");
}
