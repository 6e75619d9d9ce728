//! P1 Galerkin assembly on space-time triangulations.
//!
//! Element matrices come from closed-form integrals of the constant
//! barycentric gradients: stiffness |tau| (g_i . g_j), wave form
//! |tau| (g_kx g_jx - g_kt g_jt), mass |tau|/12 (1 + delta_ij). Quadrature
//! enters only through target-dependent integrals (loads). Global matrices
//! are scattered through a row and a column DoF map, so rectangular blocks
//! like the wave matrix (test rows, trial columns) fall out of one routine.
//! Triplets are accumulated in element order and compressed by a stable
//! sort, making assembly deterministic.

use crate::fespace::{ControlSpace, DofMap};
use crate::mesh::{Mesh, Point, GEOM_TOL};
use crate::quadrature::QuadratureRule;
use crate::sparsela::SparseMatrix;
use crate::{Error, Result};

/// Affine geometry of one triangle: area and constant P1 gradients.
#[derive(Clone, Debug)]
pub struct ElementGeometry {
    corners: [Point; 3],
    area: f64,
    grads: [[f64; 2]; 3],
}

impl ElementGeometry {
    /// Computes area and barycentric gradients; the corners must be in
    /// counterclockwise order.
    pub fn new(corners: [Point; 3]) -> Result<ElementGeometry> {
        let [p, q, r] = corners;
        let twice_area = (q[0] - p[0]) * (r[1] - p[1]) - (q[1] - p[1]) * (r[0] - p[0]);
        let area = 0.5 * twice_area;
        if area <= GEOM_TOL {
            return Err(Error::DegenerateElement { area });
        }
        // grad lambda_i = (t_j - t_k, x_k - x_j) / (2 |tau|), (i,j,k) cyclic.
        let mut grads = [[0.0; 2]; 3];
        for i in 0..3 {
            let j = (i + 1) % 3;
            let k = (i + 2) % 3;
            grads[i] = [
                (corners[j][1] - corners[k][1]) / twice_area,
                (corners[k][0] - corners[j][0]) / twice_area,
            ];
        }
        Ok(ElementGeometry {
            corners,
            area,
            grads,
        })
    }

    pub fn from_mesh(mesh: &Mesh, element: usize) -> Result<ElementGeometry> {
        ElementGeometry::new(mesh.corners(element))
    }

    pub fn corners(&self) -> &[Point; 3] {
        &self.corners
    }

    pub fn area(&self) -> f64 {
        self.area
    }

    /// Gradient of the i-th barycentric coordinate, as (d/dx, d/dt).
    pub fn grads(&self) -> &[[f64; 2]; 3] {
        &self.grads
    }
}

/// Entry (i,j) = |tau| (g_i . g_j): the space-time Laplacian block.
pub fn local_stiffness(geom: &ElementGeometry) -> [[f64; 3]; 3] {
    let g = &geom.grads;
    let mut m = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            m[i][j] = geom.area * (g[i][0] * g[j][0] + g[i][1] * g[j][1]);
        }
    }
    m
}

/// Entry (j,k) = |tau| (g_kx g_jx - g_kt g_jt): the wave bilinear form
/// b(phi_k, psi_j) with row index j (test) and column index k (trial).
pub fn local_wave_form(geom: &ElementGeometry) -> [[f64; 3]; 3] {
    let g = &geom.grads;
    let mut m = [[0.0; 3]; 3];
    for j in 0..3 {
        for k in 0..3 {
            m[j][k] = geom.area * (g[k][0] * g[j][0] - g[k][1] * g[j][1]);
        }
    }
    m
}

/// Entry (i,j) = |tau|/12 (1 + delta_ij): exact P1 mass matrix.
pub fn local_mass(geom: &ElementGeometry) -> [[f64; 3]; 3] {
    let base = geom.area / 12.0;
    let mut m = [[base; 3]; 3];
    for i in 0..3 {
        m[i][i] = base * 2.0;
    }
    m
}

/// Which element kernel a global assembly scatters.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kernel {
    Stiffness,
    Wave,
    Mass,
}

fn local_kernel(kernel: Kernel, geom: &ElementGeometry) -> [[f64; 3]; 3] {
    match kernel {
        Kernel::Stiffness => local_stiffness(geom),
        Kernel::Wave => local_wave_form(geom),
        Kernel::Mass => local_mass(geom),
    }
}

/// Assembles the global kernel matrix with `row_map` on test functions and
/// `col_map` on trial functions. Both maps must belong to `mesh`.
pub fn assemble(
    mesh: &Mesh,
    row_map: &DofMap,
    col_map: &DofMap,
    kernel: Kernel,
) -> Result<SparseMatrix> {
    assemble_weighted(mesh, row_map, col_map, kernel, |_| 1.0)
}

/// Like [`assemble`], scaling each element contribution by `weight(k)`.
/// Used for variable regularization (weight h_k^-2 on the stiffness).
pub fn assemble_weighted<W: Fn(usize) -> f64>(
    mesh: &Mesh,
    row_map: &DofMap,
    col_map: &DofMap,
    kernel: Kernel,
    weight: W,
) -> Result<SparseMatrix> {
    check_map(mesh, row_map)?;
    check_map(mesh, col_map)?;
    let mut triplets = Vec::new();
    for k in 0..mesh.num_elements() {
        let geom = ElementGeometry::from_mesh(mesh, k)?;
        let local = local_kernel(kernel, &geom);
        let w = weight(k);
        let verts = mesh.element(k);
        for (i, &vi) in verts.iter().enumerate() {
            let Some(r) = row_map.dof_of(vi) else {
                continue;
            };
            for (j, &vj) in verts.iter().enumerate() {
                if let Some(c) = col_map.dof_of(vj) {
                    triplets.push((r, c, w * local[i][j]));
                }
            }
        }
    }
    Ok(SparseMatrix::from_triplets(
        row_map.num_dofs(),
        col_map.num_dofs(),
        triplets,
    ))
}

/// Load vector f_l = integral of target * phi_l, by element quadrature.
/// The rule must be exact at least to degree 4.
pub fn assemble_load<F: Fn(f64, f64) -> f64>(
    mesh: &Mesh,
    dofmap: &DofMap,
    target: F,
    quad: &QuadratureRule,
) -> Result<Vec<f64>> {
    assert!(quad.degree() >= 4, "load quadrature must be degree >= 4");
    check_map(mesh, dofmap)?;
    let mut f = vec![0.0; dofmap.num_dofs()];
    for k in 0..mesh.num_elements() {
        let geom = ElementGeometry::from_mesh(mesh, k)?;
        let verts = mesh.element(k);
        for (p, &w) in quad.points().iter().zip(quad.weights()) {
            let [x, t] = QuadratureRule::physical_point(*p, geom.corners());
            let scaled = geom.area() * w * target(x, t);
            if scaled == 0.0 {
                continue;
            }
            for (i, &vi) in verts.iter().enumerate() {
                if let Some(l) = dofmap.dof_of(vi) {
                    // The i-th hat at a quadrature point is its i-th
                    // barycentric coordinate.
                    f[l] += scaled * p[i];
                }
            }
        }
    }
    Ok(f)
}

/// Coupling matrix P[r, j] = integral over coarse element r of the fine
/// test hat psi_j: exactly |child|/3 summed over the fine children of r
/// that touch node j.
pub fn assemble_coupling(
    fine_mesh: &Mesh,
    y_dofmap: &DofMap,
    control: &ControlSpace,
) -> Result<SparseMatrix> {
    check_map(fine_mesh, y_dofmap)?;
    if fine_mesh.level() != control.coarse_level() + 1 {
        return Err(Error::MeshMismatch(format!(
            "control space on level {} does not pair with fine mesh on level {}",
            control.coarse_level(),
            fine_mesh.level()
        )));
    }
    let n_h = control.num_controls();
    let mut triplets = Vec::new();
    for k in 0..fine_mesh.num_elements() {
        let r = fine_mesh.parent(k);
        if r >= n_h {
            return Err(Error::MeshMismatch(format!(
                "fine element {k} has parent {r} outside the control space ({n_h} elements)"
            )));
        }
        let third = fine_mesh.element_area(k) / 3.0;
        for &v in &fine_mesh.element(k) {
            if let Some(j) = y_dofmap.dof_of(v) {
                triplets.push((r, j, third));
            }
        }
    }
    Ok(SparseMatrix::from_triplets(
        n_h,
        y_dofmap.num_dofs(),
        triplets,
    ))
}

fn check_map(mesh: &Mesh, map: &DofMap) -> Result<()> {
    if map.num_nodes() != mesh.num_nodes() {
        return Err(Error::MeshMismatch(format!(
            "dof map built for {} nodes used with a {}-node mesh",
            map.num_nodes(),
            mesh.num_nodes()
        )));
    }
    Ok(())
}
