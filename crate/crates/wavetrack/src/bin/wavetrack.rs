//! Command line front end for the tracking-control solver.
//!
//! Exit codes: 0 on success, 1 on usage errors (bad flags or config), 2 on
//! numerical failures (singular systems, iteration limits).

use std::collections::HashMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use wavetrack::driver::{run_adaptive, run_control, run_u4_study, run_uniform, RunConfig};
use wavetrack::optcontrol::{Regularization, SolverPath};
use wavetrack::targets::TargetKind;

#[derive(Parser)]
#[command(
    name = "wavetrack",
    version,
    about = "Space-time tracking control of the wave equation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Uniform refinement convergence study.
    Uniform(CommonArgs),
    /// Adaptive refinement study driven by element error indicators.
    Adaptive(CommonArgs),
    /// Solve at the finest level and reconstruct the control.
    Control(CommonArgs),
    /// Scalar-rho rate study for the fourth target: an h^2 pass and a
    /// remedy pass (h^3 by default) side by side.
    #[command(name = "u4-study")]
    U4Study(CommonArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// Target state: u1, u2, u3, or u4.
    #[arg(long)]
    target: Option<String>,
    /// Cost functional: energy or l2.
    #[arg(long)]
    reg: Option<String>,
    /// Highest refinement level (levels 0..=L are solved).
    #[arg(long)]
    levels: Option<usize>,
    /// Marking threshold in (0,1) for adaptive runs.
    #[arg(long)]
    theta: Option<f64>,
    /// Explicit regularization parameter; wins over --rho-power.
    #[arg(long)]
    rho: Option<f64>,
    /// Use rho = h^POWER (2, 3, or 4).
    #[arg(long, value_name = "POWER")]
    rho_power: Option<u32>,
    /// Element-wise rho scaled by local mesh size (energy cost only).
    #[arg(long)]
    variable_rho: bool,
    /// Initial mesh cells per side.
    #[arg(long)]
    cells: Option<usize>,
    /// Output directory root.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write mesh_L<k>.vtk for every level.
    #[arg(long)]
    dump_meshes: bool,
    /// Linear solver: lu or schur-cg.
    #[arg(long)]
    solver: Option<String>,
    /// Evaluate u1 verbatim (raw bump, printed case) instead of the
    /// boundary-compatible default.
    #[arg(long)]
    u1_verbatim: bool,
    /// Read defaults from a key=value file; explicit flags win.
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version requests are successes, not usage errors.
            let code = if matches!(
                e.kind(),
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion
            ) {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            };
            let _ = e.print();
            return code;
        }
    };

    let (args, mode) = match &cli.command {
        Command::Uniform(a) => (a, Mode::Uniform),
        Command::Adaptive(a) => (a, Mode::Adaptive),
        Command::Control(a) => (a, Mode::Control),
        Command::U4Study(a) => (a, Mode::U4Study),
    };

    let cfg = match resolve(args) {
        Ok(cfg) => cfg,
        Err(msg) => return usage_error(&msg),
    };
    if let Err(msg) = cfg.validate() {
        return usage_error(&msg);
    }
    match mode {
        Mode::Control if cfg.levels == 0 => {
            return usage_error("control runs need --levels of at least 1");
        }
        Mode::U4Study if cfg.variable_rho => {
            return usage_error("u4-study is a scalar-rho experiment; drop --variable-rho");
        }
        _ => {}
    }

    let result = match mode {
        Mode::Uniform => run_uniform(&cfg).map(|_| ()),
        Mode::Adaptive => run_adaptive(&cfg).map(|_| ()),
        Mode::Control => run_control(&cfg),
        Mode::U4Study => run_u4_study(&cfg),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

#[derive(Clone, Copy)]
enum Mode {
    Uniform,
    Adaptive,
    Control,
    U4Study,
}

fn usage_error(msg: &str) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(1)
}

/// Merge config-file defaults and explicit flags into a RunConfig.
fn resolve(args: &CommonArgs) -> Result<RunConfig, String> {
    let file = match &args.config {
        Some(path) => parse_config_file(path)?,
        None => HashMap::new(),
    };
    const KNOWN_KEYS: [&str; 12] = [
        "target",
        "reg",
        "levels",
        "theta",
        "rho",
        "rho-power",
        "variable-rho",
        "cells",
        "out",
        "dump-meshes",
        "solver",
        "u1-verbatim",
    ];
    for key in file.keys() {
        if !KNOWN_KEYS.contains(&key.as_str()) {
            return Err(format!("unknown config key {key:?}"));
        }
    }
    let get = |key: &str| file.get(key).map(String::as_str);

    let mut cfg = RunConfig::default();

    if let Some(s) = args.target.as_deref().or_else(|| get("target")) {
        cfg.target =
            TargetKind::parse(s).ok_or_else(|| format!("unknown target {s:?}; expected u1..u4"))?;
    }
    if let Some(s) = args.reg.as_deref().or_else(|| get("reg")) {
        cfg.regularization = Regularization::parse(s)
            .ok_or_else(|| format!("unknown cost {s:?}; expected energy or l2"))?;
    }
    if let Some(v) = opt_from(args.levels, get("levels"), "levels")? {
        cfg.levels = v;
    }
    if let Some(v) = opt_from(args.theta, get("theta"), "theta")? {
        cfg.theta = v;
    }
    cfg.rho = opt_from(args.rho, get("rho"), "rho")?;
    cfg.rho_power = opt_from(args.rho_power, get("rho-power"), "rho-power")?;
    cfg.variable_rho = args.variable_rho || flag_from(get("variable-rho"), "variable-rho")?;
    if let Some(v) = opt_from(args.cells, get("cells"), "cells")? {
        cfg.cells = v;
    }
    if let Some(p) = args.out.clone().or_else(|| get("out").map(PathBuf::from)) {
        cfg.out_dir = p;
    }
    cfg.dump_meshes = args.dump_meshes || flag_from(get("dump-meshes"), "dump-meshes")?;
    if let Some(s) = args.solver.as_deref().or_else(|| get("solver")) {
        cfg.solver = match s {
            "lu" => SolverPath::BlockLu,
            "schur-cg" => SolverPath::schur_default(),
            other => return Err(format!("unknown solver {other:?}; expected lu or schur-cg")),
        };
    }
    cfg.u1_verbatim = args.u1_verbatim || flag_from(get("u1-verbatim"), "u1-verbatim")?;
    Ok(cfg)
}

/// Flag value if present, else the config-file value parsed as T.
fn opt_from<T: std::str::FromStr>(
    flag: Option<T>,
    file: Option<&str>,
    key: &str,
) -> Result<Option<T>, String> {
    if flag.is_some() {
        return Ok(flag);
    }
    match file {
        Some(s) => s
            .parse()
            .map(Some)
            .map_err(|_| format!("config key {key}: cannot parse {s:?}")),
        None => Ok(None),
    }
}

fn flag_from(file: Option<&str>, key: &str) -> Result<bool, String> {
    match file {
        None => Ok(false),
        Some("true") | Some("1") => Ok(true),
        Some("false") | Some("0") => Ok(false),
        Some(other) => Err(format!(
            "config key {key}: expected true or false, got {other:?}"
        )),
    }
}

fn parse_config_file(path: &std::path::Path) -> Result<HashMap<String, String>, String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    let mut map = HashMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(format!(
                "{}:{}: expected key=value, got {line:?}",
                path.display(),
                idx + 1
            ));
        };
        map.insert(key.trim().to_string(), value.trim().to_string());
    }
    Ok(map)
}
