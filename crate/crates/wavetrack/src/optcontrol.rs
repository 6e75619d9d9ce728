//! Discrete first-order optimality systems for the tracking problem.
//!
//! For energy regularization the system is
//!
//! ```text
//! [ rho^-1 A_h   B_h ] [ p ]   [ 0 ]
//! [   -B_h^T     M_h ] [ u ] = [ f ],
//! ```
//!
//! with A_h the space-time Laplacian on the test space Y, B_h the wave form
//! (test rows, trial columns), M_h the trial mass matrix, and f the target
//! load. L2 regularization replaces A_h by the Y-space mass matrix. The
//! whole matrix is positive definite (z^T K z > 0) but not symmetric, so
//! the default path is a sparse LU of the block matrix; the Schur path
//! eliminates p and runs CG on M_h + rho B_h^T A_h^-1 B_h, which is SPD.

use crate::assembly::{assemble, assemble_load, assemble_weighted, Kernel};
use crate::fespace::{build_dofmap, DofMap, SpaceKind};
use crate::mesh::{Mesh, MeshHierarchy};
use crate::quadrature::{degree4, QuadratureRule};
use crate::sparsela::{cg_solve, lu_factor, Factorization, LinearOperator, SparseMatrix};
use crate::targets::TargetFunction;
use crate::{Error, Result};

/// Which norm the control cost uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Regularization {
    /// Dual-norm (energy) cost, realized through the stiffness matrix;
    /// optimal parameter rho = h^2.
    Energy,
    /// L2 cost, realized through the mass matrix; optimal parameter
    /// rho = h^4.
    L2,
}

impl Regularization {
    /// Name used by the command line and in output paths.
    pub fn name(self) -> &'static str {
        match self {
            Regularization::Energy => "energy",
            Regularization::L2 => "l2",
        }
    }

    /// Inverse of [`Regularization::name`].
    pub fn parse(name: &str) -> Option<Regularization> {
        match name {
            "energy" => Some(Regularization::Energy),
            "l2" => Some(Regularization::L2),
            _ => None,
        }
    }
}

/// Mesh-size rule for the regularization parameter: h^2 for energy cost,
/// h^4 for L2 cost. Adaptive runs pass h = h_min.
pub fn choose_rho(regularization: Regularization, h: f64) -> f64 {
    assert!(h > 0.0, "mesh size must be positive");
    match regularization {
        Regularization::Energy => h * h,
        Regularization::L2 => h.powi(4),
    }
}

/// Length scale fed into [`choose_rho`] by the default (non-override) paths:
/// the square root of the smallest element area. On a uniform two-directional
/// mesh of N triangles over the unit square this equals 1/sqrt(N), and under
/// newest-vertex bisection it shrinks by sqrt(2) per cut, so rho = scale^2
/// tracks the finest element area in both uniform and adaptive runs. Diameter
/// based sizes would overweight the flat criss-cross triangles by a constant.
pub fn regularization_scale(mesh: &Mesh) -> f64 {
    let mut min_area = f64::INFINITY;
    for k in 0..mesh.num_elements() {
        min_area = min_area.min(mesh.element_area(k));
    }
    assert!(min_area.is_finite() && min_area > 0.0, "degenerate mesh");
    min_area.sqrt()
}

/// Quadrature used for every target-dependent integral (loads, norms,
/// error indicators): the degree-4 rule composed on four subtriangles.
/// Splitting softens the quadrature crime for discontinuous targets; using
/// one fixed rule everywhere keeps the discrete stability bound exact.
pub fn default_quadrature() -> QuadratureRule {
    degree4().split()
}

/// Assembled optimality system on one hierarchy level.
pub struct OptimalitySystem {
    regularization: Regularization,
    rho: f64,
    variable_rho: bool,
    /// Final (1,1) block: rho^-1 A_h, rho^-1 Mbar_h, or the variable-rho
    /// weighted stiffness.
    upper_left: SparseMatrix,
    /// B_h with test rows (M_Y) and trial columns (M_X).
    wave: SparseMatrix,
    /// Trial-space mass matrix M_h.
    mass_x: SparseMatrix,
    load: Vec<f64>,
    dofmap_x: DofMap,
    dofmap_y: DofMap,
    /// Target L2 norm under the load quadrature rule.
    target_norm: f64,
}

impl OptimalitySystem {
    pub fn regularization(&self) -> Regularization {
        self.regularization
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn is_variable_rho(&self) -> bool {
        self.variable_rho
    }

    pub fn upper_left(&self) -> &SparseMatrix {
        &self.upper_left
    }

    pub fn wave(&self) -> &SparseMatrix {
        &self.wave
    }

    pub fn mass_x(&self) -> &SparseMatrix {
        &self.mass_x
    }

    pub fn load(&self) -> &[f64] {
        &self.load
    }

    pub fn dofmap_x(&self) -> &DofMap {
        &self.dofmap_x
    }

    pub fn dofmap_y(&self) -> &DofMap {
        &self.dofmap_y
    }

    pub fn target_norm(&self) -> f64 {
        self.target_norm
    }

    pub fn num_state(&self) -> usize {
        self.dofmap_x.num_dofs()
    }

    pub fn num_adjoint(&self) -> usize {
        self.dofmap_y.num_dofs()
    }

    /// The full block matrix [[W, B], [-B^T, M]]. The (2,1) block stores
    /// exactly the negated values of B, entry by entry.
    pub fn block_matrix(&self) -> SparseMatrix {
        let neg_bt = self.wave.transpose().scaled(-1.0);
        SparseMatrix::block_2x2(&self.upper_left, &self.wave, &neg_bt, &self.mass_x)
    }

    /// Right-hand side (0; f) of the block system.
    pub fn block_rhs(&self) -> Vec<f64> {
        let mut rhs = vec![0.0; self.num_adjoint() + self.num_state()];
        rhs[self.num_adjoint()..].copy_from_slice(&self.load);
        rhs
    }
}

/// Assembles the optimality system at `level`. rho defaults to the
/// mesh-size rule applied to [`regularization_scale`]; pass `rho_override`
/// to deviate (studies may force h^3 or a fixed value).
pub fn build_system(
    hierarchy: &MeshHierarchy,
    level: usize,
    target: &TargetFunction,
    regularization: Regularization,
    rho_override: Option<f64>,
) -> Result<OptimalitySystem> {
    let t = *target;
    build_system_for(
        hierarchy,
        level,
        move |x, s| t.eval(x, s),
        regularization,
        rho_override,
    )
}

/// [`build_system`] for an arbitrary target field, e.g. a synthetic state
/// used in a stability experiment.
pub fn build_system_for<F: Fn(f64, f64) -> f64>(
    hierarchy: &MeshHierarchy,
    level: usize,
    target: F,
    regularization: Regularization,
    rho_override: Option<f64>,
) -> Result<OptimalitySystem> {
    let mesh = hierarchy.mesh(level);
    let rho =
        rho_override.unwrap_or_else(|| choose_rho(regularization, regularization_scale(mesh)));
    assert!(rho > 0.0, "regularization parameter must be positive");
    let dofmap_x = build_dofmap(mesh, SpaceKind::TrialX);
    let dofmap_y = build_dofmap(mesh, SpaceKind::TestY);
    let w_kernel = match regularization {
        Regularization::Energy => Kernel::Stiffness,
        Regularization::L2 => Kernel::Mass,
    };
    let w = assemble(mesh, &dofmap_y, &dofmap_y, w_kernel)?;
    let system = assemble_rest(
        mesh,
        dofmap_x,
        dofmap_y,
        w.scaled(1.0 / rho),
        target,
        regularization,
        rho,
        false,
    )?;
    Ok(system)
}

/// Energy-regularized system with the element-wise parameter rho_tau =
/// |tau| (the element area, i.e. the local h^2) absorbed into the (1,1)
/// block: W = sum_tau |tau|^-1 A_tau. The scalar `rho()` reported is the
/// smallest element area, matching [`regularization_scale`] squared.
pub fn variable_rho_system(
    hierarchy: &MeshHierarchy,
    level: usize,
    target: &TargetFunction,
    regularization: Regularization,
) -> Result<OptimalitySystem> {
    if regularization != Regularization::Energy {
        return Err(Error::Unsupported(
            "variable rho requires energy regularization".into(),
        ));
    }
    let mesh = hierarchy.mesh(level);
    let dofmap_x = build_dofmap(mesh, SpaceKind::TrialX);
    let dofmap_y = build_dofmap(mesh, SpaceKind::TestY);
    let w = assemble_weighted(mesh, &dofmap_y, &dofmap_y, Kernel::Stiffness, |k| {
        1.0 / mesh.element_area(k)
    })?;
    assemble_rest(
        mesh,
        dofmap_x,
        dofmap_y,
        w,
        |x, t| target.eval(x, t),
        regularization,
        choose_rho(Regularization::Energy, regularization_scale(mesh)),
        true,
    )
}

#[allow(clippy::too_many_arguments)]
fn assemble_rest<F: Fn(f64, f64) -> f64>(
    mesh: &Mesh,
    dofmap_x: DofMap,
    dofmap_y: DofMap,
    upper_left: SparseMatrix,
    target: F,
    regularization: Regularization,
    rho: f64,
    variable_rho: bool,
) -> Result<OptimalitySystem> {
    let wave = assemble(mesh, &dofmap_y, &dofmap_x, Kernel::Wave)?;
    let mass_x = assemble(mesh, &dofmap_x, &dofmap_x, Kernel::Mass)?;
    let quad = default_quadrature();
    let load = assemble_load(mesh, &dofmap_x, &target, &quad)?;
    let target_norm = quadrature_norm(mesh, &target, &quad)?;
    Ok(OptimalitySystem {
        regularization,
        rho,
        variable_rho,
        upper_left,
        wave,
        mass_x,
        load,
        dofmap_x,
        dofmap_y,
        target_norm,
    })
}

/// L2(Q) norm of a function under the given quadrature rule.
pub fn quadrature_norm<F: Fn(f64, f64) -> f64>(
    mesh: &Mesh,
    f: F,
    quad: &QuadratureRule,
) -> Result<f64> {
    let mut sum = 0.0;
    for k in 0..mesh.num_elements() {
        let corners = mesh.corners(k);
        let area = mesh.element_area(k);
        sum += quad.integrate(&corners, area, |x, t| {
            let v = f(x, t);
            v * v
        });
    }
    Ok(sum.max(0.0).sqrt())
}

/// Solver output: state and adjoint coefficients plus diagnostics.
pub struct Solution {
    /// State coefficients on the trial space X (length M_X).
    pub state: Vec<f64>,
    /// Adjoint coefficients on the test space Y (length M_Y).
    pub adjoint: Vec<f64>,
    /// Which path produced the solution ("block-lu" or "schur-cg").
    pub method: &'static str,
    /// CG iterations when the Schur path ran.
    pub iterations: Option<usize>,
    /// Relative block residual ||K z - rhs|| / ||rhs||.
    pub residual: f64,
}

/// Solves the block system with sparse LU (the default path).
pub fn solve_block(sys: &OptimalitySystem) -> Result<Solution> {
    let k = sys.block_matrix();
    let rhs = sys.block_rhs();
    let factor = lu_factor(&k)?;
    let z = factor.solve(&rhs)?;
    let (adjoint, state) = z.split_at(sys.num_adjoint());
    Ok(Solution {
        state: state.to_vec(),
        adjoint: adjoint.to_vec(),
        method: "block-lu",
        iterations: None,
        residual: relative_residual(&k, &z, &rhs),
    })
}

struct SchurOperator<'a> {
    mass_x: &'a SparseMatrix,
    wave: &'a SparseMatrix,
    w_factor: &'a Factorization,
}

impl LinearOperator for SchurOperator<'_> {
    fn dim(&self) -> usize {
        self.mass_x.nrows()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        let bu = self.wave.matvec(x);
        let winv_bu = self
            .w_factor
            .solve(&bu)
            .expect("factor dimension fixed at construction");
        let correction = self.wave.matvec_transpose(&winv_bu);
        self.mass_x.matvec_into(x, y);
        for (yi, ci) in y.iter_mut().zip(&correction) {
            *yi += ci;
        }
    }
}

/// Solves via the reduced SPD Schur equation
/// (M_h + B^T W^-1 B) u = f with W the stored (1,1) block, then recovers
/// the adjoint from p = -W^-1 B u.
pub fn solve_schur(sys: &OptimalitySystem, tol: f64, max_iterations: usize) -> Result<Solution> {
    let w_factor = lu_factor(&sys.upper_left)?;
    let op = SchurOperator {
        mass_x: &sys.mass_x,
        wave: &sys.wave,
        w_factor: &w_factor,
    };
    let cg = cg_solve(&op, &sys.load, tol, max_iterations)?;
    let state = cg.x;
    let bu = sys.wave.matvec(&state);
    let mut adjoint = w_factor.solve(&bu)?;
    for p in &mut adjoint {
        *p = -*p;
    }
    let k = sys.block_matrix();
    let rhs = sys.block_rhs();
    let mut z = adjoint.clone();
    z.extend_from_slice(&state);
    let residual = relative_residual(&k, &z, &rhs);
    Ok(Solution {
        state,
        adjoint,
        method: "schur-cg",
        iterations: Some(cg.iterations),
        residual,
    })
}

/// Which solution path to run.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SolverPath {
    /// Sparse LU of the full block matrix (default).
    BlockLu,
    /// CG on the reduced Schur equation.
    SchurCg { tol: f64, max_iterations: usize },
}

impl SolverPath {
    /// Schur path with defaults suitable for the mesh-size parameter
    /// choices (the reduced operator is uniformly well conditioned there).
    pub fn schur_default() -> SolverPath {
        SolverPath::SchurCg {
            tol: 1e-12,
            max_iterations: 2000,
        }
    }
}

/// Dispatches to [`solve_block`] or [`solve_schur`].
pub fn solve(sys: &OptimalitySystem, path: SolverPath) -> Result<Solution> {
    match path {
        SolverPath::BlockLu => solve_block(sys),
        SolverPath::SchurCg {
            tol,
            max_iterations,
        } => solve_schur(sys, tol, max_iterations),
    }
}

fn relative_residual(k: &SparseMatrix, z: &[f64], rhs: &[f64]) -> f64 {
    let kz = k.matvec(z);
    let mut num = 0.0;
    let mut den = 0.0;
    for i in 0..rhs.len() {
        let d = kz[i] - rhs[i];
        num += d * d;
        den += rhs[i] * rhs[i];
    }
    if den > 0.0 {
        (num / den).sqrt()
    } else {
        num.sqrt()
    }
}
