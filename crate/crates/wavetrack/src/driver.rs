//! Experiment harness: the runs exposed by the command line.
//!
//! Each run writes into `<out>/<target>_<reg>_<mode>/`: a `records.csv`
//! with the convergence study (schema `level,dofs,elements,h,rho,error,
//! eoc`), per-level `state_L<k>.vtk` dumps with the solved state and the
//! element error indicators, `mesh_L<k>.vtk` when mesh dumps are enabled,
//! and for control runs `control_L<k>.vtk` plus `control_stats.csv`.
//! Failures are reported after writing the records accumulated so far, so
//! a crashed study still leaves a usable partial CSV.

use std::path::{Path, PathBuf};

use crate::adapt::{adaptive_loop, AdaptiveConfig, RhoMode};
use crate::mesh::{make_initial_mesh, mesh_size, Mesh, MeshHierarchy};
use crate::optcontrol::{
    build_system, default_quadrature, regularization_scale, solve, variable_rho_system,
    OptimalitySystem, Regularization, Solution, SolverPath,
};
use crate::postproc::{
    compute_eoc, element_errors, reconstruct_control, write_records_csv, ConvergenceRecord,
    ErrorField, ReconstructedControl,
};
use crate::targets::{TargetFunction, TargetKind};
use crate::vtk::write_vtk;
use crate::{Error, Result};

/// Fully resolved run parameters. The command line (or a config file)
/// produces one of these; usage validation happens before a run starts.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub target: TargetKind,
    pub regularization: Regularization,
    /// Highest refinement level: levels 0..=levels are solved.
    pub levels: usize,
    /// Marking threshold for adaptive runs.
    pub theta: f64,
    /// Explicit regularization parameter; wins over `rho_power`.
    pub rho: Option<f64>,
    /// Use rho = h^power instead of the per-cost default.
    pub rho_power: Option<u32>,
    /// Element-wise rho (energy cost only).
    pub variable_rho: bool,
    /// Initial mesh cells per side.
    pub cells: usize,
    pub out_dir: PathBuf,
    pub dump_meshes: bool,
    pub solver: SolverPath,
    /// Evaluate u1 verbatim (raw bump with the printed case) instead of
    /// the boundary-compatible default.
    pub u1_verbatim: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            target: TargetKind::U1Smooth,
            regularization: Regularization::Energy,
            levels: 5,
            theta: 0.5,
            rho: None,
            rho_power: None,
            variable_rho: false,
            cells: 4,
            out_dir: PathBuf::from("out"),
            dump_meshes: false,
            solver: SolverPath::BlockLu,
            u1_verbatim: false,
        }
    }
}

impl RunConfig {
    /// Usage-level validation shared by all commands; per-command rules
    /// (control needs levels >= 1, u4-study is scalar-rho) sit with the
    /// command line parser.
    pub fn validate(&self) -> std::result::Result<(), String> {
        if !(self.theta > 0.0 && self.theta < 1.0) {
            return Err(format!("--theta must lie in (0,1), got {}", self.theta));
        }
        if self.cells == 0 {
            return Err("--cells must be at least 1".into());
        }
        if let Some(r) = self.rho {
            if r <= 0.0 || r.is_nan() {
                return Err(format!("--rho must be positive, got {r}"));
            }
        }
        if let Some(p) = self.rho_power {
            if !(2..=4).contains(&p) {
                return Err(format!("--rho-power must be 2, 3, or 4, got {p}"));
            }
        }
        if self.variable_rho && self.regularization != Regularization::Energy {
            return Err("--variable-rho requires --reg energy".into());
        }
        if self.variable_rho && (self.rho.is_some() || self.rho_power.is_some()) {
            return Err("--variable-rho conflicts with --rho/--rho-power".into());
        }
        Ok(())
    }

    fn target_function(&self) -> TargetFunction {
        TargetFunction::new(self.target).with_u1_verbatim(self.u1_verbatim)
    }

    /// Output directory for a run mode, created on demand.
    pub fn run_dir(&self, mode: &str) -> PathBuf {
        self.out_dir.join(format!(
            "{}_{}_{}",
            self.target.name(),
            self.regularization.name(),
            mode
        ))
    }
}

fn prepare_dir(cfg: &RunConfig, mode: &str) -> Result<PathBuf> {
    let dir = cfg.run_dir(mode);
    std::fs::create_dir_all(&dir)?;
    Ok(dir)
}

/// rho for one uniform level: an explicit pass override beats --rho beats
/// --rho-power beats the per-cost default (None).
fn uniform_rho(cfg: &RunConfig, pass_power: Option<u32>, h: f64) -> Option<f64> {
    if let Some(p) = pass_power {
        Some(h.powi(p as i32))
    } else if let Some(r) = cfg.rho {
        Some(r)
    } else {
        cfg.rho_power.map(|p| h.powi(p as i32))
    }
}

fn dump_level(
    dir: &Path,
    level: usize,
    mesh: &Mesh,
    system: &OptimalitySystem,
    solution: &Solution,
    errors: &ErrorField,
    dump_meshes: bool,
) -> Result<()> {
    let nodal = system.dofmap_x().scatter_to_nodes(&solution.state)?;
    write_vtk(
        &dir.join(format!("state_L{level}.vtk")),
        mesh,
        &[("state", &nodal)],
        &[("indicator", errors.per_element())],
    )?;
    if dump_meshes {
        write_vtk(&dir.join(format!("mesh_L{level}.vtk")), mesh, &[], &[])?;
    }
    Ok(())
}

/// One sequence of uniform levels; returns the records plus the error that
/// stopped the pass early, if any.
fn uniform_pass(
    cfg: &RunConfig,
    dir: &Path,
    pass_power: Option<u32>,
    dump: bool,
) -> (Vec<ConvergenceRecord>, Option<Error>) {
    let target = cfg.target_function();
    let quad = default_quadrature();
    let mut hierarchy = MeshHierarchy::new(make_initial_mesh(cfg.cells));
    let mut records = Vec::new();
    for level in 0..=cfg.levels {
        if level > 0 {
            hierarchy.refine_uniformly();
        }
        let step = (|| -> Result<()> {
            let mesh = hierarchy.mesh(level);
            let (h_max, _) = mesh_size(mesh);
            let system = if cfg.variable_rho {
                variable_rho_system(&hierarchy, level, &target, cfg.regularization)?
            } else {
                let rho = uniform_rho(cfg, pass_power, regularization_scale(mesh));
                build_system(&hierarchy, level, &target, cfg.regularization, rho)?
            };
            let solution = solve(&system, cfg.solver)?;
            let errors = element_errors(
                mesh,
                system.dofmap_x(),
                &solution.state,
                |x, t| target.eval(x, t),
                &quad,
            )?;
            records.push(ConvergenceRecord {
                level,
                dofs: system.num_state(),
                elements: mesh.num_elements(),
                h: h_max,
                rho: system.rho(),
                error: errors.global(),
                eoc: None,
            });
            if dump {
                dump_level(
                    dir,
                    level,
                    mesh,
                    &system,
                    &solution,
                    &errors,
                    cfg.dump_meshes,
                )?;
            }
            Ok(())
        })();
        if let Err(e) = step {
            compute_eoc(&mut records);
            return (records, Some(e));
        }
    }
    compute_eoc(&mut records);
    (records, None)
}

fn finish(
    dir: &Path,
    csv_name: &str,
    records: &[ConvergenceRecord],
    failure: Option<Error>,
) -> Result<Vec<ConvergenceRecord>> {
    write_records_csv(&dir.join(csv_name), records)?;
    match failure {
        Some(e) => Err(e),
        None => Ok(records.to_vec()),
    }
}

/// Uniform refinement study (`uniform` subcommand).
pub fn run_uniform(cfg: &RunConfig) -> Result<Vec<ConvergenceRecord>> {
    let dir = prepare_dir(cfg, "uniform")?;
    let (records, failure) = uniform_pass(cfg, &dir, None, true);
    finish(&dir, "records.csv", &records, failure)
}

/// Adaptive refinement study (`adaptive` subcommand).
pub fn run_adaptive(cfg: &RunConfig) -> Result<Vec<ConvergenceRecord>> {
    let dir = prepare_dir(cfg, "adaptive")?;
    let target = cfg.target_function();
    let config = AdaptiveConfig {
        theta: cfg.theta,
        max_level: cfg.levels,
        max_dofs: 500_000,
        rho_mode: if cfg.variable_rho {
            RhoMode::Variable
        } else {
            RhoMode::Scalar
        },
        solver: cfg.solver,
    };
    let dump_meshes = cfg.dump_meshes;
    let dir_ref = &dir;
    let outcome = adaptive_loop(
        make_initial_mesh(cfg.cells),
        &target,
        cfg.regularization,
        &config,
        |state| {
            dump_level(
                dir_ref,
                state.level,
                state.mesh,
                state.system,
                state.solution,
                state.errors,
                dump_meshes,
            )
        },
    );
    finish(&dir, "records.csv", &outcome.records, outcome.failure)
}

/// Control reconstruction at the finest level (`control` subcommand).
/// Refines uniformly to `levels`, solves there, reconstructs the control,
/// and writes the control field plus summary statistics.
pub fn run_control(cfg: &RunConfig) -> Result<()> {
    assert!(cfg.levels >= 1, "control runs need at least one level");
    let dir = prepare_dir(cfg, "control")?;
    let target = cfg.target_function();
    let quad = default_quadrature();
    let mut hierarchy = MeshHierarchy::new(make_initial_mesh(cfg.cells));
    for _ in 0..cfg.levels {
        hierarchy.refine_uniformly();
    }
    let level = cfg.levels;
    let mesh = hierarchy.mesh(level);
    let (h_max, _) = mesh_size(mesh);
    let system = if cfg.variable_rho {
        variable_rho_system(&hierarchy, level, &target, cfg.regularization)?
    } else {
        let rho = uniform_rho(cfg, None, regularization_scale(mesh));
        build_system(&hierarchy, level, &target, cfg.regularization, rho)?
    };
    let solution = solve(&system, cfg.solver)?;
    let errors = element_errors(
        mesh,
        system.dofmap_x(),
        &solution.state,
        |x, t| target.eval(x, t),
        &quad,
    )?;
    let mut records = vec![ConvergenceRecord {
        level,
        dofs: system.num_state(),
        elements: mesh.num_elements(),
        h: h_max,
        rho: system.rho(),
        error: errors.global(),
        eoc: None,
    }];
    compute_eoc(&mut records);
    write_records_csv(&dir.join("records.csv"), &records)?;
    dump_level(
        &dir,
        level,
        mesh,
        &system,
        &solution,
        &errors,
        cfg.dump_meshes,
    )?;

    let control = reconstruct_control(&hierarchy, level, &system, &solution)?;
    let stats = match &control {
        ReconstructedControl::Elementwise {
            coarse_level,
            values,
            constraint_residual,
            ..
        } => {
            let coarse = hierarchy.mesh(*coarse_level);
            write_vtk(
                &dir.join(format!("control_L{level}.vtk")),
                coarse,
                &[],
                &[("control", values)],
            )?;
            let mut l2 = 0.0;
            for (r, z) in values.iter().enumerate() {
                l2 += coarse.element_area(r) * z * z;
            }
            ControlStats {
                level,
                n_controls: values.len(),
                min: fold_min(values),
                max: fold_max(values),
                l2_norm: l2.sqrt(),
                constraint_residual: Some(*constraint_residual),
            }
        }
        ReconstructedControl::Nodal { level, values } => {
            let fine = hierarchy.mesh(*level);
            write_vtk(
                &dir.join(format!("control_L{level}.vtk")),
                fine,
                &[("control", values)],
                &[],
            )?;
            ControlStats {
                level: *level,
                n_controls: system.num_adjoint(),
                min: fold_min(values),
                max: fold_max(values),
                l2_norm: nodal_l2_norm(fine, values),
                constraint_residual: None,
            }
        }
    };
    write_control_stats(&dir.join("control_stats.csv"), &stats)?;
    Ok(())
}

/// Rate study for the fourth target (`u4-study` subcommand): a scalar
/// rho = h^2 pass into records.csv and a rho = h^3 remedy pass into
/// records_remedy.csv (the remedy power can be overridden by --rho-power).
pub fn run_u4_study(cfg: &RunConfig) -> Result<()> {
    let mut study_cfg = cfg.clone();
    study_cfg.target = TargetKind::U4Sine;
    study_cfg.regularization = Regularization::Energy;
    study_cfg.variable_rho = false;
    study_cfg.rho = None;
    let dir = prepare_dir(&study_cfg, "u4study")?;
    let (records, failure) = uniform_pass(&study_cfg, &dir, Some(2), true);
    finish(&dir, "records.csv", &records, failure)?;
    let remedy_power = cfg.rho_power.unwrap_or(3);
    let (remedy, failure) = uniform_pass(&study_cfg, &dir, Some(remedy_power), false);
    finish(&dir, "records_remedy.csv", &remedy, failure)?;
    Ok(())
}

struct ControlStats {
    level: usize,
    n_controls: usize,
    min: f64,
    max: f64,
    l2_norm: f64,
    constraint_residual: Option<f64>,
}

fn write_control_stats(path: &Path, s: &ControlStats) -> Result<()> {
    let residual = match s.constraint_residual {
        Some(r) => format!("{r:.16e}"),
        None => String::new(),
    };
    let out = format!(
        "level,n_controls,min,max,l2_norm,constraint_residual\n{},{},{:.16e},{:.16e},{:.16e},{}\n",
        s.level, s.n_controls, s.min, s.max, s.l2_norm, residual
    );
    std::fs::write(path, out)?;
    Ok(())
}

fn fold_min(values: &[f64]) -> f64 {
    values.iter().cloned().fold(f64::INFINITY, f64::min)
}

fn fold_max(values: &[f64]) -> f64 {
    values.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
}

/// Exact L2 norm of the P1 field with the given nodal values.
fn nodal_l2_norm(mesh: &Mesh, nodal: &[f64]) -> f64 {
    let mut sum = 0.0;
    for k in 0..mesh.num_elements() {
        let area = mesh.element_area(k);
        let [a, b, c] = mesh.element(k);
        let v = [nodal[a], nodal[b], nodal[c]];
        // v^T (local mass) v with the exact P1 mass matrix.
        let mut q = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                let factor = if i == j { 2.0 } else { 1.0 };
                q += factor * v[i] * v[j];
            }
        }
        sum += area / 12.0 * q;
    }
    sum.max(0.0).sqrt()
}
