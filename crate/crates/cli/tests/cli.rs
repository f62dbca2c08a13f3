//! End-to-end tests of the `ortho3r` binary: exit codes, output formats,
//! config-file precedence and determinism.

use std::fs;
use std::process::{Command, Output};

fn ortho3r(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ortho3r"))
        .args(args)
        .output()
        .expect("binary should run")
}

fn stdout_str(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("stdout is UTF-8")
}

fn stderr_str(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).expect("stderr is UTF-8")
}

fn assert_code(out: &Output, code: i32) {
    assert_eq!(
        out.status.code(),
        Some(code),
        "stdout: {}\nstderr: {}",
        stdout_str(out),
        stderr_str(out)
    );
}

#[test]
fn rdw_reports_json_with_fixed_field_order() {
    let out = ortho3r(&["rdw", "--type", "C", "--d4", "1.5", "--r2", "1"]);
    assert_code(&out, 0);
    let text = stdout_str(&out);
    let json: serde_json::Value = serde_json::from_str(&text).expect("stdout is JSON");

    assert_eq!(json["type"], "C");
    assert_eq!(json["params"]["d4"].as_f64().unwrap(), 1.5);
    assert_eq!(json["params"]["r2"].as_f64().unwrap(), 1.0);
    assert_eq!(json["params"]["d3"].as_f64().unwrap(), 0.0);
    assert_eq!(json["k_min_inv"].as_f64().unwrap(), 0.25);

    let edge = json["free_square"]["edge"].as_f64().unwrap();
    assert!((edge - 1.727).abs() <= 0.03, "free edge {edge}");
    let eta = json["eta"].as_f64().unwrap();
    assert!(eta.is_finite() && eta > 0.0, "eta {eta}");
    let rho_max = json["rho_max"].as_f64().unwrap();
    assert!((rho_max - 2.5).abs() <= 0.02, "rho_max {rho_max}");
    assert!(json["scan_step"].as_f64().unwrap() > 0.0);
    assert!(json["singular_samples"].as_u64().unwrap() > 100);
    assert!(json["rdw_square"]["edge"].as_f64().unwrap() > 0.0);

    let order = [
        "\"type\"",
        "\"params\"",
        "\"free_square\"",
        "\"rdw_square\"",
        "\"k_min_inv\"",
        "\"rho_max\"",
        "\"eta\"",
        "\"scan_step\"",
        "\"singular_samples\"",
    ];
    let mut last = 0;
    for key in order {
        let pos = text.find(key).unwrap_or_else(|| panic!("{key} missing"));
        assert!(pos >= last, "{key} out of order");
        last = pos;
    }
}

#[test]
fn rdw_rejects_geometry_violating_the_declared_type() {
    let out = ortho3r(&["rdw", "--type", "C", "--d4", "1.5", "--r2", "1", "--d3", "2"]);
    assert_code(&out, 1);
    assert!(stdout_str(&out).is_empty());
    let msg = stderr_str(&out);
    assert!(msg.contains("d3") && msg.contains("must be 0"), "message: {msg}");
}

#[test]
fn rdw_rejects_unknown_type_flag_and_threshold() {
    let out = ortho3r(&["rdw", "--type", "q3", "--d4", "1"]);
    assert_code(&out, 1);
    assert!(stderr_str(&out).contains("unknown manipulator type"));

    let out = ortho3r(&["rdw", "--type", "C", "--d4", "1.5", "--r2", "1", "--frobnicate"]);
    assert_code(&out, 1);
    assert!(stderr_str(&out).contains("frobnicate"));

    let out = ortho3r(&["rdw", "--type", "C", "--d4", "1.5", "--r2", "1", "--kmin", "0"]);
    assert_code(&out, 1);
    assert!(stderr_str(&out).contains("kmin"));
}

#[test]
fn rdw_degenerate_geometry_is_a_computation_error() {
    // A bare wrist (only d4 non-zero) traces a sphere: the determinant
    // vanishes identically and the singularity scan rejects it.
    let out = ortho3r(&["rdw", "--d4", "1"]);
    assert_code(&out, 2);
    assert!(!stderr_str(&out).is_empty());
}

#[test]
fn singular_emits_sample_csv() {
    let out = ortho3r(&["singular", "--type", "C", "--d4", "1.5", "--r2", "1"]);
    assert_code(&out, 0);
    let text = stdout_str(&out);
    assert!(text.starts_with("rho,z,theta2,theta3\n"), "header missing");
    assert!(text.lines().count() > 100, "too few samples");

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sing.csv");
    let out = ortho3r(&[
        "singular",
        "--type",
        "C",
        "--d4",
        "1.5",
        "--r2",
        "1",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_code(&out, 0);
    assert_eq!(fs::read_to_string(&path).unwrap(), text);
}

const TINY_SWEEP: &[&str] = &[
    "sweep",
    "--type",
    "C",
    "--min",
    "1",
    "--max",
    "2",
    "--step",
    "0.5",
    "--grid-n",
    "128",
    "--n-scan",
    "20",
    "--spacing-div",
    "100",
    "--hj-evals",
    "4000",
];

#[test]
fn sweep_output_is_deterministic_and_independent_of_jobs() {
    let mut one_job = TINY_SWEEP.to_vec();
    one_job.extend(["--jobs", "1"]);
    let mut two_jobs = TINY_SWEEP.to_vec();
    two_jobs.extend(["--jobs", "2"]);

    let a = ortho3r(&one_job);
    let b = ortho3r(&two_jobs);
    let c = ortho3r(&one_job);
    assert_code(&a, 0);
    assert_code(&b, 0);
    assert_code(&c, 0);
    let text = stdout_str(&a);
    assert_eq!(text, stdout_str(&b), "worker count changed the data");
    assert_eq!(text, stdout_str(&c), "repeated run changed the data");
    assert!(
        text.starts_with("p1,p2,eta,a_rdw,rho_max,center_rho,center_z,mask_reason\n"),
        "header missing"
    );
    assert_eq!(text.lines().count(), 1 + 9, "3x3 grid expected");
    assert!(stderr_str(&a).contains('%'), "progress counter missing");
}

#[test]
fn sweep_requires_type_and_grid_flags() {
    let out = ortho3r(&["sweep", "--type", "C"]);
    assert_code(&out, 1);
    assert!(stderr_str(&out).contains("--min"));

    let out = ortho3r(&["sweep", "--min", "1", "--max", "2", "--step", "1"]);
    assert_code(&out, 1);
    assert!(stderr_str(&out).contains("--type"));
}

#[test]
fn contour_round_trips_sweep_output_byte_identically() {
    let dir = tempfile::tempdir().unwrap();
    let sweep_path = dir.path().join("sweep.csv");
    let mut sweep = TINY_SWEEP.to_vec();
    sweep.extend(["--out", sweep_path.to_str().unwrap()]);
    assert_code(&ortho3r(&sweep), 0);

    let c1 = dir.path().join("c1.csv");
    let c2 = dir.path().join("c2.csv");
    for path in [&c1, &c2] {
        let out = ortho3r(&[
            "contour",
            "--in",
            sweep_path.to_str().unwrap(),
            "--levels",
            "0.3,0.5",
            "--out",
            path.to_str().unwrap(),
        ]);
        assert_code(&out, 0);
    }
    let first = fs::read(&c1).unwrap();
    assert_eq!(first, fs::read(&c2).unwrap(), "contour output not reproducible");
    assert!(first.starts_with(b"level,poly_id,p1,p2\n"));

    let svg_path = dir.path().join("plot.svg");
    let out = ortho3r(&[
        "contour",
        "--in",
        sweep_path.to_str().unwrap(),
        "--levels",
        "0.3,0.5",
        "--out",
        svg_path.to_str().unwrap(),
    ]);
    assert_code(&out, 0);
    assert!(fs::read_to_string(&svg_path).unwrap().starts_with("<svg"));

    // Default output: CSV on stdout.
    let out = ortho3r(&[
        "contour",
        "--in",
        sweep_path.to_str().unwrap(),
        "--levels",
        "0.5",
    ]);
    assert_code(&out, 0);
    assert!(stdout_str(&out).starts_with("level,poly_id,p1,p2\n"));
}

#[test]
fn contour_rejects_bad_inputs() {
    let out = ortho3r(&["contour", "--in", "no_such_file.csv", "--levels", "0.5"]);
    assert_code(&out, 1);
    assert!(stderr_str(&out).contains("cannot read input file"));

    let dir = tempfile::tempdir().unwrap();
    let bogus = dir.path().join("bogus.csv");
    fs::write(&bogus, "not,a,sweep\n1,2,3\n").unwrap();
    let out = ortho3r(&["contour", "--in", bogus.to_str().unwrap(), "--levels", "0.5"]);
    assert_code(&out, 1);

    fs::write(&bogus, "p1,p2,eta,a_rdw,rho_max,center_rho,center_z,mask_reason\n").unwrap();
    let out = ortho3r(&[
        "contour",
        "--in",
        bogus.to_str().unwrap(),
        "--levels",
        "1.5",
    ]);
    assert_code(&out, 1);
    assert!(stderr_str(&out).contains("outside (0, 1)"));
}

#[test]
fn config_file_supplies_defaults_but_flags_win() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, "# geometry\ntype=C\nd4=9\nr2=1\n\nkmin=0.3\n").unwrap();

    let out = ortho3r(&["rdw", "--config", cfg.to_str().unwrap(), "--d4", "1.5"]);
    assert_code(&out, 0);
    let json: serde_json::Value = serde_json::from_str(&stdout_str(&out)).unwrap();
    assert_eq!(json["type"], "C");
    assert_eq!(json["params"]["d4"].as_f64().unwrap(), 1.5, "flag must win");
    assert_eq!(json["params"]["r2"].as_f64().unwrap(), 1.0);
    assert_eq!(json["k_min_inv"].as_f64().unwrap(), 0.3);

    let bad = dir.path().join("bad.cfg");
    fs::write(&bad, "bogus=1\n").unwrap();
    let out = ortho3r(&["rdw", "--config", bad.to_str().unwrap(), "--d4", "1.5"]);
    assert_code(&out, 1);
    assert!(stderr_str(&out).contains("bogus"));

    let out = ortho3r(&["rdw", "--config", "missing.cfg", "--d4", "1.5"]);
    assert_code(&out, 1);
    assert!(stderr_str(&out).contains("cannot read config file"));
}

#[test]
fn help_lists_every_flag() {
    let out = ortho3r(&["--help"]);
    assert_code(&out, 0);
    let text = stdout_str(&out);
    for sub in ["rdw", "singular", "sweep", "contour"] {
        assert!(text.contains(sub), "--help misses {sub}");
    }

    let out = ortho3r(&["rdw", "--help"]);
    assert_code(&out, 0);
    let text = stdout_str(&out);
    for flag in [
        "--type", "--d2", "--d3", "--d4", "--r2", "--r3", "--kmin", "--grid-n", "--n-scan",
        "--spacing-div", "--hj-evals", "--config", "--jobs", "--out",
    ] {
        assert!(text.contains(flag), "rdw --help misses {flag}");
    }

    let out = ortho3r(&["sweep", "--help"]);
    let text = stdout_str(&out);
    for flag in ["--min", "--max", "--step"] {
        assert!(text.contains(flag), "sweep --help misses {flag}");
    }

    let out = ortho3r(&["contour", "--help"]);
    let text = stdout_str(&out);
    for flag in ["--in", "--levels", "--format"] {
        assert!(text.contains(flag), "contour --help misses {flag}");
    }
}
