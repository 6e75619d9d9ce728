//! Error norms, convergence records, and control reconstruction.
//!
//! The per-element indicator is eta_l = ||u_h - target||_{L2(tau_l)},
//! evaluated with the same quadrature configuration as the load assembly so
//! stability statements stay consistent. Convergence records collect one
//! line per level and serialize to CSV.
//!
//! Control reconstruction inverts the variational identity defining the
//! control from the state: for energy regularization the piecewise-constant
//! control z on the coarse mesh solves the saddle system
//! [[W, P^T], [P, 0]] (psi; z) = (B u; 0) with P the coarse/fine coupling
//! matrix, for L2 regularization the control is the nodal field -p / rho.

use std::path::Path;

use crate::fespace::{build_control_space, DofMap};
use crate::mesh::{Mesh, MeshHierarchy};
use crate::optcontrol::{OptimalitySystem, Regularization, Solution};
use crate::quadrature::QuadratureRule;
use crate::sparsela::{lu_factor, SparseMatrix};
use crate::{assembly, Error, Result};

/// Per-element error indicators and their l2 aggregate.
#[derive(Clone, Debug)]
pub struct ErrorField {
    per_element: Vec<f64>,
    global: f64,
}

impl ErrorField {
    /// Wraps externally computed indicators (one per element, non-negative);
    /// the global value is their l2 aggregate.
    pub fn from_indicators(per_element: Vec<f64>) -> ErrorField {
        let global = per_element.iter().map(|e| e * e).sum::<f64>().sqrt();
        ErrorField {
            per_element,
            global,
        }
    }

    /// eta_l for each element (norms, not squares).
    pub fn per_element(&self) -> &[f64] {
        &self.per_element
    }

    /// Global L2 error: sqrt of the sum of squared indicators.
    pub fn global(&self) -> f64 {
        self.global
    }

    pub fn len(&self) -> usize {
        self.per_element.len()
    }

    pub fn is_empty(&self) -> bool {
        self.per_element.is_empty()
    }
}

/// Computes eta_l = ||u_h - target||_{L2(tau_l)} where u_h is the P1 field
/// with coefficients `state` on the trial space (constrained nodes zero).
pub fn element_errors<F: Fn(f64, f64) -> f64>(
    mesh: &Mesh,
    dofmap_x: &DofMap,
    state: &[f64],
    target: F,
    quad: &QuadratureRule,
) -> Result<ErrorField> {
    if state.len() != dofmap_x.num_dofs() {
        return Err(Error::DimensionMismatch {
            expected: dofmap_x.num_dofs(),
            got: state.len(),
        });
    }
    let nodal = dofmap_x.scatter_to_nodes(state)?;
    let mut per_element = Vec::with_capacity(mesh.num_elements());
    let mut total = 0.0;
    for k in 0..mesh.num_elements() {
        let corners = mesh.corners(k);
        let area = mesh.element_area(k);
        let verts = mesh.element(k);
        let coeffs = [nodal[verts[0]], nodal[verts[1]], nodal[verts[2]]];
        let mut sq = 0.0;
        for (p, &w) in quad.points().iter().zip(quad.weights()) {
            let [x, t] = QuadratureRule::physical_point(*p, &corners);
            let uh = coeffs[0] * p[0] + coeffs[1] * p[1] + coeffs[2] * p[2];
            let d = uh - target(x, t);
            sq += w * d * d;
        }
        let eta = (area * sq).max(0.0).sqrt();
        per_element.push(eta);
        total += area * sq;
    }
    Ok(ErrorField {
        per_element,
        global: total.max(0.0).sqrt(),
    })
}

/// Nodal interpolant coefficients of `f` on the dofs of `dofmap`.
pub fn interpolate<F: Fn(f64, f64) -> f64>(mesh: &Mesh, dofmap: &DofMap, f: F) -> Vec<f64> {
    (0..dofmap.num_dofs())
        .map(|dof| {
            let [x, t] = mesh.node(dofmap.node_of(dof));
            f(x, t)
        })
        .collect()
}

/// One line of a convergence study.
#[derive(Clone, Debug)]
pub struct ConvergenceRecord {
    pub level: usize,
    pub dofs: usize,
    pub elements: usize,
    pub h: f64,
    pub rho: f64,
    pub error: f64,
    pub eoc: Option<f64>,
}

/// Fills the eoc column: eoc_L = log(e_{L-1}/e_L) / log(h_{L-1}/h_L).
/// Absent on the first record, on vanishing errors, and on equal h.
pub fn compute_eoc(records: &mut [ConvergenceRecord]) {
    for l in (1..records.len()).rev() {
        let (prev, cur) = (&records[l - 1], &records[l]);
        let eoc = if prev.error > 0.0 && cur.error > 0.0 && prev.h != cur.h {
            Some((prev.error / cur.error).ln() / (prev.h / cur.h).ln())
        } else {
            None
        };
        records[l].eoc = eoc;
    }
    if let Some(first) = records.first_mut() {
        first.eoc = None;
    }
}

/// Least-squares slope of log(error) against log(h) over the last `window`
/// records. None when fewer than two usable records exist or all h agree.
pub fn fit_eoc(records: &[ConvergenceRecord], window: usize) -> Option<f64> {
    let tail = &records[records.len().saturating_sub(window)..];
    let points: Vec<(f64, f64)> = tail
        .iter()
        .filter(|r| r.error > 0.0 && r.h > 0.0)
        .map(|r| (r.h.ln(), r.error.ln()))
        .collect();
    if points.len() < 2 {
        return None;
    }
    let n = points.len() as f64;
    let sx: f64 = points.iter().map(|p| p.0).sum();
    let sy: f64 = points.iter().map(|p| p.1).sum();
    let sxx: f64 = points.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = points.iter().map(|p| p.0 * p.1).sum();
    let denom = n * sxx - sx * sx;
    if denom.abs() < 1e-30 {
        return None;
    }
    Some((n * sxy - sx * sy) / denom)
}

/// Writes records as CSV with header `level,dofs,elements,h,rho,error,eoc`;
/// floats in full-precision scientific notation, eoc empty when absent.
pub fn write_records_csv(path: &Path, records: &[ConvergenceRecord]) -> Result<()> {
    let mut out = String::from("level,dofs,elements,h,rho,error,eoc\n");
    for r in records {
        let eoc = match r.eoc {
            Some(v) => format!("{v:.16e}"),
            None => String::new(),
        };
        out.push_str(&format!(
            "{},{},{},{:.16e},{:.16e},{:.16e},{}\n",
            r.level, r.dofs, r.elements, r.h, r.rho, r.error, eoc
        ));
    }
    std::fs::write(path, out)?;
    Ok(())
}

/// Reconstructed control field.
pub enum ReconstructedControl {
    /// Energy regularization: one value per coarse element, plus the
    /// multiplier psi and its constraint residual ||P psi||.
    Elementwise {
        coarse_level: usize,
        values: Vec<f64>,
        multiplier: Vec<f64>,
        constraint_residual: f64,
    },
    /// L2 regularization: nodal values on the fine mesh (constrained nodes
    /// zero).
    Nodal { level: usize, values: Vec<f64> },
}

/// Recovers the control from a solved system at `fine_level`.
///
/// Energy: solves the saddle system [[W, P^T], [P, 0]] (psi; z) = (B u; 0)
/// by sparse LU, where W is the system's (1,1) block (the scalar factor
/// rho^-1 cancels from the formula for z). The multiplier psi satisfies
/// P psi = 0; its residual is reported. A singular saddle factorization
/// signals an inf-sup deficiency: refine the fine space so every control
/// element carries enough test nodes.
///
/// L2: z = -p / rho per test node.
pub fn reconstruct_control(
    hierarchy: &MeshHierarchy,
    fine_level: usize,
    sys: &OptimalitySystem,
    sol: &Solution,
) -> Result<ReconstructedControl> {
    let fine_mesh = hierarchy.mesh(fine_level);
    if sys.dofmap_y().num_nodes() != fine_mesh.num_nodes() {
        return Err(Error::MeshMismatch(
            "system was not built on the given fine level".into(),
        ));
    }
    match sys.regularization() {
        Regularization::Energy => {
            let control = build_control_space(hierarchy, fine_level)?;
            let p = assembly::assemble_coupling(fine_mesh, sys.dofmap_y(), &control)?;
            let bu = sys.wave().matvec(&sol.state);
            let n_h = control.num_controls();
            let m_y = sys.num_adjoint();
            let pt = p.transpose();
            let zero = SparseMatrix::from_triplets(n_h, n_h, Vec::new());
            let saddle = SparseMatrix::block_2x2(sys.upper_left(), &pt, &p, &zero);
            let mut rhs = bu.clone();
            rhs.extend(std::iter::repeat_n(0.0, n_h));
            let factor = lu_factor(&saddle)?;
            let solution = factor.solve(&rhs)?;
            let multiplier = solution[..m_y].to_vec();
            let values = solution[m_y..].to_vec();
            let p_psi = p.matvec(&multiplier);
            let constraint_residual = p_psi.iter().map(|v| v * v).sum::<f64>().sqrt();
            Ok(ReconstructedControl::Elementwise {
                coarse_level: control.coarse_level(),
                values,
                multiplier,
                constraint_residual,
            })
        }
        Regularization::L2 => {
            let coeffs: Vec<f64> = sol.adjoint.iter().map(|&p| -p / sys.rho()).collect();
            let values = sys.dofmap_y().scatter_to_nodes(&coeffs)?;
            Ok(ReconstructedControl::Nodal {
                level: fine_level,
                values,
            })
        }
    }
}

/// Energy control through the explicit formula
/// z = (P W^-1 P^T)^-1 P W^-1 B u, evaluated with one sparse factorization
/// of W, N_H sparse solves, and a dense Gaussian elimination on the control
/// Gram matrix. Cross-check path for [`reconstruct_control`].
pub fn reconstruct_control_explicit(
    hierarchy: &MeshHierarchy,
    fine_level: usize,
    sys: &OptimalitySystem,
    sol: &Solution,
) -> Result<Vec<f64>> {
    if sys.regularization() != Regularization::Energy {
        return Err(Error::Unsupported(
            "explicit control formula applies to energy regularization".into(),
        ));
    }
    let fine_mesh = hierarchy.mesh(fine_level);
    let control = build_control_space(hierarchy, fine_level)?;
    let p = assembly::assemble_coupling(fine_mesh, sys.dofmap_y(), &control)?;
    let n_h = control.num_controls();
    let m_y = sys.num_adjoint();
    let w_factor = lu_factor(sys.upper_left())?;

    // Columns of W^-1 P^T, one sparse solve per control unknown; column r
    // of P^T is row r of P.
    let mut winv_pt: Vec<Vec<f64>> = Vec::with_capacity(n_h);
    for r in 0..n_h {
        let mut col = vec![0.0; m_y];
        let (cols, vals) = p.row(r);
        for (&j, &v) in cols.iter().zip(vals) {
            col[j] = v;
        }
        winv_pt.push(w_factor.solve(&col)?);
    }

    // Gram matrix G = P (W^-1 P^T) and right side g = P W^-1 B u.
    let mut gram = vec![vec![0.0; n_h]; n_h];
    for (c, col) in winv_pt.iter().enumerate() {
        let pc = p.matvec(col);
        for r in 0..n_h {
            gram[r][c] = pc[r];
        }
    }
    let bu = sys.wave().matvec(&sol.state);
    let y = w_factor.solve(&bu)?;
    let g = p.matvec(&y);
    dense_solve(gram, g)
}

/// Dense Gaussian elimination with partial pivoting, consuming the matrix.
fn dense_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Result<Vec<f64>> {
    let n = b.len();
    for k in 0..n {
        let mut piv = k;
        let mut best = a[k][k].abs();
        for i in k + 1..n {
            if a[i][k].abs() > best {
                best = a[i][k].abs();
                piv = i;
            }
        }
        if best == 0.0 {
            return Err(Error::SingularMatrix {
                column: k,
                max_abs: 0.0,
            });
        }
        a.swap(k, piv);
        b.swap(k, piv);
        let pivot = a[k][k];
        for i in k + 1..n {
            let factor = a[i][k] / pivot;
            if factor == 0.0 {
                continue;
            }
            for j in k..n {
                let akj = a[k][j];
                a[i][j] -= factor * akj;
            }
            b[i] -= factor * b[k];
        }
    }
    for k in (0..n).rev() {
        let mut s = b[k];
        for j in k + 1..n {
            s -= a[k][j] * b[j];
        }
        b[k] = s / a[k][k];
    }
    Ok(b)
}
