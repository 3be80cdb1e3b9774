//! End-to-end tests of the installed binary: exit codes, config precedence,
//! CSV/SVG artifacts, and byte determinism.

use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_plaplace"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).expect("utf-8 stdout")
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).expect("utf-8 stderr")
}

const LEVEL_ONE: [&str; 12] = [
    "--p", "2", "--N", "3", "--R1", "0", "--R2", "4", "--q", "4", "--r", "2",
];

#[test]
fn help_lists_every_subcommand() {
    let o = run(&["--help"]);
    assert!(o.status.success());
    let text = stdout(&o);
    for sub in ["check-f", "shoot", "eigen", "scan", "solve", "verify", "plot"] {
        assert!(text.contains(sub), "missing subcommand {sub} in help");
    }
}

#[test]
fn missing_parameter_is_a_config_error() {
    let o = run(&["shoot", "--p", "2"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("missing required"));
}

#[test]
fn conflicting_geometry_is_rejected() {
    let mut args = vec!["shoot"];
    args.extend_from_slice(&[
        "--p", "2", "--N", "3", "--R1", "1", "--R2", "2", "--kind", "ball", "--q", "4", "--r",
        "2", "--d", "2",
    ]);
    let o = run(&args);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("conflicting geometry"));
}

#[test]
fn unknown_config_key_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "p = 2\nbogus = 1\n").unwrap();
    let o = run(&["shoot", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("bogus"));
}

#[test]
fn constant_datum_emits_flat_profile_and_single_point_svg() {
    let dir = tempfile::tempdir().unwrap();
    let svg_path = dir.path().join("portrait.svg");
    let mut args = vec!["shoot"];
    args.extend_from_slice(&LEVEL_ONE);
    args.extend_from_slice(&["--d", "1", "--svg", svg_path.to_str().unwrap()]);
    let o = run(&args);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("r,u,uprime,v,H,rho,theta"));
    for row in lines {
        let fields: Vec<&str> = row.split(',').collect();
        assert_eq!(fields[1].parse::<f64>().unwrap(), 1.0, "u must stay at 1");
        assert_eq!(fields[3].parse::<f64>().unwrap(), 0.0, "v must stay at 0");
    }
    let svg = std::fs::read_to_string(&svg_path).unwrap();
    assert!(svg.contains("<circle"));
    assert!(!svg.contains("<path"), "constant orbit must render as a point");
}

#[test]
fn flags_override_config_file_values() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(
        &cfg,
        "p = 2\nn = 3\nr1 = 0\nr2 = 4\nq = 4\nr = 2\nd = 2.0\n",
    )
    .unwrap();
    let o = run(&["shoot", "--config", cfg.to_str().unwrap(), "--d", "1"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    let row = text.lines().nth(1).expect("data row");
    let u: f64 = row.split(',').nth(1).unwrap().parse().unwrap();
    assert_eq!(u, 1.0, "the command-line datum must win over the file datum");
}

#[test]
fn shoot_output_is_byte_deterministic() {
    let mut args = vec!["shoot"];
    args.extend_from_slice(&LEVEL_ONE);
    args.extend_from_slice(&["--d", "2"]);
    let a = run(&args);
    let b = run(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert!(!a.stdout.is_empty());
}

#[test]
fn eigen_matches_the_one_dimensional_closed_form() {
    let o = run(&[
        "eigen", "--p", "2", "--N", "1", "--R1", "0", "--R2", "1", "--kmax", "3",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("k,lambda"));
    let values: Vec<f64> = lines
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    let pi = std::f64::consts::PI;
    assert_eq!(values[0], 0.0);
    assert!((values[1] / (pi * pi) - 1.0).abs() <= 1e-6);
    assert!((values[2] / (4.0 * pi * pi) - 1.0).abs() <= 1e-6);
}

#[test]
fn unreachable_eigenvalue_is_a_numeric_error() {
    let o = run(&[
        "eigen", "--p", "2", "--N", "1", "--R1", "0", "--R2", "1e-9", "--kmax", "2",
    ]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn scan_emits_one_row_per_grid_datum() {
    let mut args = vec!["scan"];
    args.extend_from_slice(&LEVEL_ONE);
    args.extend_from_slice(&["--d-min", "1.5", "--d-max", "3", "--grid", "9"]);
    let o = run(&args);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    assert_eq!(text.lines().count(), 10, "header plus nine rows");
    assert!(text.starts_with("d,thetaR2\n"));
    assert!(stderr(&o).contains("descent threshold"));
}

#[test]
fn solve_writes_deterministic_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let run_once = |name: &str| -> Vec<u8> {
        let out_dir = dir.path().join(name);
        let mut args = vec!["solve"];
        args.extend_from_slice(&LEVEL_ONE);
        let out_str = out_dir.to_str().unwrap().to_string();
        args.extend_from_slice(&["--k", "1", "--tol", "1e-9", "--out-dir", &out_str]);
        let o = run(&args);
        assert!(o.status.success(), "{}", stderr(&o));
        assert!(stdout(&o).contains("records:"));
        let solutions = std::fs::read(out_dir.join("solutions.csv")).unwrap();
        assert!(out_dir.join("scan.csv").exists());
        let profiles = std::fs::read_dir(&out_dir)
            .unwrap()
            .filter(|e| {
                e.as_ref()
                    .unwrap()
                    .file_name()
                    .to_string_lossy()
                    .starts_with("profile_")
            })
            .count();
        assert!(profiles >= 2, "expected at least two profile CSVs");
        solutions
    };
    let a = run_once("a");
    let b = run_once("b");
    assert_eq!(a, b, "solution tables differ between identical runs");
    let header = String::from_utf8(a).unwrap();
    assert!(header.starts_with("d,side,branch,j,residual,umin,umax\n"));
}

#[test]
fn verify_ptrig_passes() {
    let o = run(&["verify", "ptrig"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.contains("PASS"));
    assert!(text.contains("0 failures"));
}

#[test]
fn verify_appendix_prints_the_chain_and_certified_radius() {
    let o = run(&["verify", "appendix"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.contains("R*"));
    assert!(text.contains("l-check"));
    assert!(text.contains("PASS  appendix sandwich"));
}

#[test]
fn verify_rejects_unknown_suites() {
    let o = run(&["verify", "bogus"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn worker_count_env_is_validated() {
    let o = bin()
        .args(["verify", "ptrig"])
        .env("PLAPLACE_THREADS", "abc")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("PLAPLACE_THREADS"));

    let o = bin()
        .args(["verify", "ptrig"])
        .env("PLAPLACE_THREADS", "1")
        .output()
        .unwrap();
    assert!(o.status.success());
}

#[test]
fn plot_writes_a_phase_portrait() {
    let dir = tempfile::tempdir().unwrap();
    let svg_path = dir.path().join("orbit.svg");
    let mut args = vec!["plot"];
    args.extend_from_slice(&LEVEL_ONE);
    args.extend_from_slice(&["--d", "2", "--svg", svg_path.to_str().unwrap()]);
    let o = run(&args);
    assert!(o.status.success(), "{}", stderr(&o));
    let svg = std::fs::read_to_string(&svg_path).unwrap();
    assert!(svg.contains("<svg"));
    assert!(svg.contains("<path"), "a winding orbit must draw a curve");
}

#[test]
fn check_f_reports_derived_quantities() {
    let o = run(&["check-f", "--p", "2", "--N", "3", "--q", "4", "--r", "2"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.contains("admissible"));
    assert!(text.contains("p*"));
    assert!(text.contains("eta"));
}

#[test]
fn tabulated_nonlinearity_shoots() {
    let dir = tempfile::tempdir().unwrap();
    let table = dir.path().join("f.tsv");
    let mut rows = String::new();
    let n = 240;
    for i in 0..=n {
        let s = 6.0 * i as f64 / n as f64;
        rows.push_str(&format!("{s} {}\n", s * s * s - s));
    }
    std::fs::write(&table, rows).unwrap();
    let o = run(&[
        "shoot", "--p", "2", "--N", "3", "--R1", "0", "--R2", "2", "--f-table",
        table.to_str().unwrap(), "--d", "2",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).starts_with("r,u,uprime,v,H,rho,theta\n"));
}
