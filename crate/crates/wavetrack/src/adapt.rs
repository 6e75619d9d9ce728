//! The adaptive loop: solve, indicate, mark, refine.
//!
//! Marking uses the maximum criterion: element k is refined when
//! eta_k >= theta * max_l eta_l, with theta = 0.5 by default. A
//! bulk-chasing variant ([`mark_bulk`]) marks a minimal set carrying a
//! theta fraction of the squared error, for comparison runs.

use crate::mesh::{mesh_size, Mesh, MeshHierarchy};
use crate::optcontrol::{
    build_system, default_quadrature, solve, variable_rho_system, OptimalitySystem, Regularization,
    Solution, SolverPath,
};
use crate::postproc::{compute_eoc, element_errors, ConvergenceRecord, ErrorField};
use crate::targets::TargetFunction;
use crate::{Error, Result};

/// How the regularization parameter follows the mesh.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RhoMode {
    /// Scalar rho = h_min^2 (h_min^4 for L2 cost) per level.
    Scalar,
    /// Element-wise rho_tau = h_tau^2, energy cost only.
    Variable,
}

/// Adaptive-loop parameters.
#[derive(Clone, Copy, Debug)]
pub struct AdaptiveConfig {
    /// Marking threshold, strictly between 0 and 1.
    pub theta: f64,
    /// Highest level index to solve (levels 0..=max_level).
    pub max_level: usize,
    /// Stop before solving a mesh whose trial space exceeds this.
    pub max_dofs: usize,
    pub rho_mode: RhoMode,
    pub solver: SolverPath,
}

impl Default for AdaptiveConfig {
    fn default() -> Self {
        AdaptiveConfig {
            theta: 0.5,
            max_level: 10,
            max_dofs: 500_000,
            rho_mode: RhoMode::Scalar,
            solver: SolverPath::BlockLu,
        }
    }
}

impl AdaptiveConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.theta > 0.0 && self.theta < 1.0) {
            return Err(Error::Unsupported(format!(
                "marking threshold must lie in (0,1), got {}",
                self.theta
            )));
        }
        Ok(())
    }
}

/// Maximum-criterion marking: all k with eta_k >= theta * max eta.
/// Never empty (the maximal element qualifies); all-zero indicators signal
/// convergence instead.
pub fn mark(errors: &ErrorField, theta: f64) -> Result<Vec<usize>> {
    assert!(theta > 0.0 && theta < 1.0, "theta must lie in (0,1)");
    let max = errors.per_element().iter().cloned().fold(0.0, f64::max);
    if max == 0.0 {
        return Err(Error::AlreadyConverged);
    }
    let cut = theta * max;
    Ok(errors
        .per_element()
        .iter()
        .enumerate()
        .filter(|(_, &eta)| eta >= cut)
        .map(|(k, _)| k)
        .collect())
}

/// Bulk-chasing (classic Doerfler) marking: the smallest prefix of elements
/// in decreasing indicator order with sum of eta^2 >= theta * total.
pub fn mark_bulk(errors: &ErrorField, theta: f64) -> Result<Vec<usize>> {
    assert!(theta > 0.0 && theta < 1.0, "theta must lie in (0,1)");
    let total: f64 = errors.per_element().iter().map(|e| e * e).sum();
    if total == 0.0 {
        return Err(Error::AlreadyConverged);
    }
    let mut order: Vec<usize> = (0..errors.len()).collect();
    order.sort_unstable_by(|&a, &b| {
        let (ea, eb) = (errors.per_element()[a], errors.per_element()[b]);
        eb.partial_cmp(&ea)
            .expect("indicators are finite")
            .then(a.cmp(&b))
    });
    let mut marked = Vec::new();
    let mut acc = 0.0;
    for k in order {
        marked.push(k);
        let eta = errors.per_element()[k];
        acc += eta * eta;
        if acc >= theta * total {
            break;
        }
    }
    marked.sort_unstable();
    Ok(marked)
}

/// Everything computed for one adaptive level, lent to the visitor.
pub struct LevelState<'a> {
    pub level: usize,
    pub mesh: &'a Mesh,
    pub system: &'a OptimalitySystem,
    pub solution: &'a Solution,
    pub errors: &'a ErrorField,
}

/// Result of an adaptive run; `failure` carries the error that stopped the
/// loop early, with the records accumulated so far preserved.
pub struct AdaptiveOutcome {
    pub records: Vec<ConvergenceRecord>,
    pub hierarchy: MeshHierarchy,
    pub failure: Option<Error>,
}

/// Runs solve -> indicate -> record -> mark -> refine until the level or
/// DoF budget is reached, indicators vanish, or an error occurs. The
/// visitor sees each completed level (for dumping state and meshes).
pub fn adaptive_loop<F>(
    initial: Mesh,
    target: &TargetFunction,
    regularization: Regularization,
    config: &AdaptiveConfig,
    mut visit: F,
) -> AdaptiveOutcome
where
    F: FnMut(&LevelState<'_>) -> Result<()>,
{
    let mut hierarchy = MeshHierarchy::new(initial);
    let mut records: Vec<ConvergenceRecord> = Vec::new();
    let mut failure = None;

    if let Err(e) = config.validate() {
        return AdaptiveOutcome {
            records,
            hierarchy,
            failure: Some(e),
        };
    }

    let quad = default_quadrature();
    for level in 0..=config.max_level {
        let step = (|| -> Result<Option<Vec<usize>>> {
            let (_, h_min) = mesh_size(hierarchy.mesh(level));
            let system = match config.rho_mode {
                // The build_system default already keys rho to the smallest
                // element, which is the right notion on a locally refined mesh.
                RhoMode::Scalar => build_system(&hierarchy, level, target, regularization, None)?,
                RhoMode::Variable => {
                    variable_rho_system(&hierarchy, level, target, regularization)?
                }
            };
            let solution = solve(&system, config.solver)?;
            let mesh = hierarchy.mesh(level);
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
                h: h_min,
                rho: system.rho(),
                error: errors.global(),
                eoc: None,
            });
            visit(&LevelState {
                level,
                mesh,
                system: &system,
                solution: &solution,
                errors: &errors,
            })?;
            if level == config.max_level {
                return Ok(None);
            }
            match mark(&errors, config.theta) {
                Ok(marked) => Ok(Some(marked)),
                Err(Error::AlreadyConverged) => Ok(None),
                Err(e) => Err(e),
            }
        })();

        match step {
            Ok(Some(marked)) => {
                if let Err(e) = hierarchy.refine_marked(&marked) {
                    failure = Some(e);
                    break;
                }
                let next = hierarchy.finest();
                let free_estimate =
                    crate::fespace::build_dofmap(next, crate::fespace::SpaceKind::TrialX)
                        .num_dofs();
                if free_estimate > config.max_dofs {
                    break;
                }
            }
            Ok(None) => break,
            Err(e) => {
                failure = Some(e);
                break;
            }
        }
    }

    compute_eoc(&mut records);
    AdaptiveOutcome {
        records,
        hierarchy,
        failure,
    }
}
