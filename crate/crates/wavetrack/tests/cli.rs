//! End-to-end checks of the command line: exit codes, file layout, config
//! merging, and rerun reproducibility.

use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_wavetrack"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("no signal")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn help_and_version_succeed() {
    let help = run(&["--help"]);
    assert_eq!(code(&help), 0);
    let text = String::from_utf8_lossy(&help.stdout);
    for sub in ["uniform", "adaptive", "control", "u4-study"] {
        assert!(text.contains(sub), "help lacks {sub}");
    }
    let version = run(&["--version"]);
    assert_eq!(code(&version), 0);
    assert!(String::from_utf8_lossy(&version.stdout).contains("wavetrack"));

    let sub_help = run(&["uniform", "--help"]);
    assert_eq!(code(&sub_help), 0);
}

#[test]
fn tiny_uniform_run_writes_the_documented_layout() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "uniform",
        "--target",
        "u3",
        "--reg",
        "energy",
        "--levels",
        "1",
        "--cells",
        "2",
        "--solver",
        "lu",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    let run_dir = dir.path().join("u3_energy_uniform");
    assert!(run_dir.join("records.csv").is_file());
    assert!(run_dir.join("state_L0.vtk").is_file());
    assert!(run_dir.join("state_L1.vtk").is_file());
    // Mesh dumps only appear with --dump-meshes.
    assert!(!run_dir.join("mesh_L0.vtk").exists());

    let csv = std::fs::read_to_string(run_dir.join("records.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "level,dofs,elements,h,rho,error,eoc");
    let level0: Vec<&str> = lines.next().unwrap().split(',').collect();
    // --cells 2 gives a 2 x 2 criss-cross grid: 16 elements at level 0.
    assert_eq!(level0[0], "0");
    assert_eq!(level0[2], "16");
    assert_eq!(lines.next().unwrap().split(',').next().unwrap(), "1");
    assert!(lines.next().is_none());
}

#[test]
fn dump_meshes_adds_mesh_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "uniform",
        "--target",
        "u3",
        "--reg",
        "energy",
        "--levels",
        "0",
        "--cells",
        "2",
        "--solver",
        "lu",
        "--dump-meshes",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    assert!(dir.path().join("u3_energy_uniform/mesh_L0.vtk").is_file());
}

#[test]
fn control_run_writes_control_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "control",
        "--target",
        "u3",
        "--reg",
        "energy",
        "--levels",
        "2",
        "--cells",
        "2",
        "--solver",
        "lu",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    let run_dir = dir.path().join("u3_energy_control");
    assert!(run_dir.join("records.csv").is_file());
    assert!(run_dir.join("control_L2.vtk").is_file());
    let stats = std::fs::read_to_string(run_dir.join("control_stats.csv")).unwrap();
    let mut lines = stats.lines();
    assert_eq!(
        lines.next().unwrap(),
        "level,n_controls,min,max,l2_norm,constraint_residual"
    );
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(row[0], "2");
    // Controls live on the coarser mesh: a 2 x 2 grid refined once has
    // 64 elements.
    assert_eq!(row[1], "64");
    assert!(!row[5].is_empty(), "energy control reports its residual");
}

#[test]
fn usage_errors_exit_with_one() {
    let cases: Vec<Vec<&str>> = vec![
        // Unknown enum values.
        vec!["uniform", "--target", "u9"],
        vec!["uniform", "--target", "u3", "--reg", "h2"],
        vec!["uniform", "--target", "u3", "--solver", "qr"],
        // Validation failures.
        vec!["adaptive", "--target", "u3", "--theta", "1.5"],
        vec!["uniform", "--target", "u3", "--cells", "0"],
        vec!["uniform", "--target", "u3", "--rho", "-1.0"],
        vec!["uniform", "--target", "u3", "--rho-power", "7"],
        vec!["uniform", "--target", "u3", "--reg", "l2", "--variable-rho"],
        vec![
            "uniform",
            "--target",
            "u3",
            "--variable-rho",
            "--rho",
            "0.5",
        ],
        // Per-command rules.
        vec!["control", "--target", "u3", "--levels", "0"],
        vec!["u4-study", "--variable-rho"],
        // Unknown flag is a clap-level usage error.
        vec!["uniform", "--frobnicate"],
        // Missing subcommand.
        vec![],
    ];
    for args in cases {
        let out = run(&args);
        assert_eq!(code(&out), 1, "args {args:?}: stderr {}", stderr(&out));
    }
}

#[test]
fn runtime_failures_exit_with_two() {
    // /dev/null is not a directory, so creating the output tree fails
    // after argument handling succeeded.
    let out = run(&[
        "uniform",
        "--target",
        "u3",
        "--reg",
        "energy",
        "--levels",
        "0",
        "--cells",
        "2",
        "--solver",
        "lu",
        "--out",
        "/dev/null/nested",
    ]);
    assert_eq!(code(&out), 2, "stderr: {}", stderr(&out));
    assert!(stderr(&out).contains("error"));
}

fn write_config(path: &Path, text: &str) {
    std::fs::write(path, text).unwrap();
}

#[test]
fn config_file_supplies_defaults_and_flags_win() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    let out_a = dir.path().join("a");
    write_config(
        &cfg,
        &format!(
            "# defaults for the smoke study\n\
             target = u3\n\
             reg = energy\n\
             levels = 1\n\
             cells = 2\n\
             solver = lu\n\
             out = {}\n",
            out_a.display()
        ),
    );
    // Config alone drives the run.
    let out = run(&["uniform", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    assert!(out_a.join("u3_energy_uniform/records.csv").is_file());

    // An explicit flag overrides the config value for the same key.
    let out_b = dir.path().join("b");
    let out = run(&[
        "uniform",
        "--config",
        cfg.to_str().unwrap(),
        "--target",
        "u2",
        "--out",
        out_b.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    assert!(out_b.join("u2_energy_uniform/records.csv").is_file());
    assert!(!out_b.join("u3_energy_uniform").exists());
}

#[test]
fn bad_config_files_are_usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");

    // Unparsable value for a known key.
    write_config(&cfg, "levels = thirty\n");
    assert_eq!(
        code(&run(&["uniform", "--config", cfg.to_str().unwrap()])),
        1
    );

    // Unknown key.
    write_config(&cfg, "solvers = lu\n");
    assert_eq!(
        code(&run(&["uniform", "--config", cfg.to_str().unwrap()])),
        1
    );

    // Line without '='.
    write_config(&cfg, "just some words\n");
    assert_eq!(
        code(&run(&["uniform", "--config", cfg.to_str().unwrap()])),
        1
    );

    // Missing file.
    let missing = dir.path().join("nope.cfg");
    assert_eq!(
        code(&run(&["uniform", "--config", missing.to_str().unwrap()])),
        1
    );
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let args = |out: &Path| {
        vec![
            "uniform".to_string(),
            "--target".into(),
            "u2".into(),
            "--reg".into(),
            "energy".into(),
            "--levels".into(),
            "2".into(),
            "--cells".into(),
            "2".into(),
            "--solver".into(),
            "lu".into(),
            "--out".into(),
            out.to_str().unwrap().into(),
        ]
    };
    let out_a = dir.path().join("a");
    let out_b = dir.path().join("b");
    assert_eq!(code(&bin().args(args(&out_a)).output().unwrap()), 0);
    assert_eq!(code(&bin().args(args(&out_b)).output().unwrap()), 0);
    for file in ["records.csv", "state_L0.vtk", "state_L2.vtk"] {
        let a = std::fs::read(out_a.join("u2_energy_uniform").join(file)).unwrap();
        let b = std::fs::read(out_b.join("u2_energy_uniform").join(file)).unwrap();
        assert_eq!(a, b, "{file} differs between reruns");
    }
}
