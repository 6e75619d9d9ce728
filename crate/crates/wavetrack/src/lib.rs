// Indexed loops mirror the row/column/element index notation of the
// numeric kernels; iterator rewrites obscure the math they implement.
#![allow(clippy::needless_range_loop)]

//! Space-time finite element solver for tracking-type distributed optimal
//! control of the 1D wave equation.
//!
//! The state equation is the wave equation on the space-time square
//! `Q = (0,1)^2` with coordinates `(x,t)`, discretized with continuous P1
//! elements on a triangulation of `Q`. The tracking functional
//!
//! ```text
//! J(u, z) = 1/2 ||u - ubar||^2_{L2(Q)} + rho/2 ||z||^2_Z
//! ```
//!
//! is minimized subject to the wave equation with distributed control `z`,
//! either with energy regularization (`Z` a dual norm realized by the
//! space-time Laplacian) or with L2 regularization. The discrete first-order
//! optimality conditions form a 2x2 block system
//!
//! ```text
//! [ rho^-1 A   B ] [ p ]   [ 0 ]
//! [   -B^T     M ] [ u ] = [ f ],
//! ```
//!
//! solved by sparse LU or by conjugate gradients on the equivalent Schur
//! complement equation `(M + rho B^T A^-1 B) u = f`. The crate provides
//! meshing with uniform red refinement and adaptive newest-vertex bisection,
//! assembly, solvers, error indicators, control reconstruction, and drivers
//! for reproducible convergence studies.
//!
//! Entry points:
//! - [`driver`] for complete convergence studies (also exposed by the
//!   `wavetrack` binary and the `examples/` directory),
//! - [`mesh`], [`fespace`], [`assembly`], [`sparsela`] for the individual
//!   building blocks,
//! - [`optcontrol`] for assembling and solving one optimality system.

pub mod adapt;
pub mod assembly;
pub mod driver;
pub mod fespace;
pub mod mesh;
pub mod optcontrol;
pub mod postproc;
pub mod quadrature;
pub mod sparsela;
pub mod targets;
pub mod vtk;

/// Errors reported by solver and mesh operations.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// An element with non-positive area was encountered.
    #[error("degenerate element: signed area {area:e} is not positive")]
    DegenerateElement { area: f64 },

    /// LU factorization found no acceptable pivot.
    #[error("matrix is numerically singular at pivot column {column} (max candidate {max_abs:e})")]
    SingularMatrix { column: usize, max_abs: f64 },

    /// Operand shapes do not line up.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// Conjugate gradients ran out of iterations; the last iterate is kept.
    #[error("CG did not converge in {iterations} iterations (relative residual {residual:e})")]
    MaxIterations {
        iterations: usize,
        residual: f64,
        iterate: Vec<f64>,
    },

    /// CG detected non-positive curvature, so the operator is not SPD.
    #[error("operator is not SPD: p'Ap = {curvature:e} at iteration {iteration}")]
    NotSpd { iteration: usize, curvature: f64 },

    /// A control space was requested below the coarsest mesh.
    #[error("no coarser mesh: the control space needs fine_level >= 1")]
    NoCoarserMesh,

    /// Requested combination is not implemented.
    #[error("unsupported: {0}")]
    Unsupported(String),

    /// All error indicators vanish; there is nothing left to mark.
    #[error("all error indicators are zero; refinement has converged")]
    AlreadyConverged,

    /// `refine_marked` was called with an empty marked set.
    #[error("refine_marked requires a nonempty set of marked elements")]
    EmptyMarkedSet,

    /// Inputs built from different meshes or hierarchy levels were mixed.
    #[error("mesh mismatch: {0}")]
    MeshMismatch(String),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    /// A text format (mesh, MatrixMarket) failed to parse.
    #[error("parse error in {context}: {message}")]
    Parse { context: String, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;
