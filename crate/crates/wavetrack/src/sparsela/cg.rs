//! Conjugate gradients for symmetric positive definite operators.
//!
//! The operator is abstract so that matrix-free applications work: the
//! reduced Schur complement M + rho B^T A^{-1} B is applied through two
//! sparse products and one triangular solve pair, and is never formed.

use crate::{Error, Result};

use super::SparseMatrix;

/// Anything that can apply a square linear map to a vector.
pub trait LinearOperator {
    /// Dimension of the (square) operator.
    fn dim(&self) -> usize;

    /// y = A x. Both slices have length `dim()`.
    fn apply(&self, x: &[f64], y: &mut [f64]);
}

impl LinearOperator for SparseMatrix {
    fn dim(&self) -> usize {
        debug_assert_eq!(self.nrows(), self.ncols());
        self.nrows()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.matvec_into(x, y);
    }
}

/// Converged CG output.
pub struct CgResult {
    /// Approximate solution.
    pub x: Vec<f64>,
    /// Iterations performed.
    pub iterations: usize,
    /// Final residual norm ||b - A x||_2.
    pub residual: f64,
}

/// Solves A x = b for symmetric positive definite A, starting from zero.
///
/// Stops when ||r||_2 <= tol * ||b||_2. Returns
/// [`Error::NotSpd`] if a search direction has nonpositive curvature and
/// [`Error::MaxIterations`] (with the current iterate attached) if the
/// budget runs out first.
pub fn cg_solve<A: LinearOperator>(
    a: &A,
    b: &[f64],
    tol: f64,
    max_iterations: usize,
) -> Result<CgResult> {
    let n = a.dim();
    if b.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: b.len(),
        });
    }
    let norm_b = norm2(b);
    if norm_b == 0.0 {
        return Ok(CgResult {
            x: vec![0.0; n],
            iterations: 0,
            residual: 0.0,
        });
    }
    let target = tol * norm_b;

    let mut x = vec![0.0; n];
    let mut r = b.to_vec();
    let mut p = b.to_vec();
    let mut ap = vec![0.0; n];
    let mut rr = dot(&r, &r);

    if rr.sqrt() <= target {
        return Ok(CgResult {
            x,
            iterations: 0,
            residual: rr.sqrt(),
        });
    }

    for iter in 1..=max_iterations {
        a.apply(&p, &mut ap);
        let pap = dot(&p, &ap);
        if pap <= 0.0 {
            return Err(Error::NotSpd {
                iteration: iter,
                curvature: pap,
            });
        }
        let alpha = rr / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        let rr_next = dot(&r, &r);
        if rr_next.sqrt() <= target {
            return Ok(CgResult {
                x,
                iterations: iter,
                residual: rr_next.sqrt(),
            });
        }
        let beta = rr_next / rr;
        rr = rr_next;
        for i in 0..n {
            p[i] = r[i] + beta * p[i];
        }
    }

    let residual = rr.sqrt();
    Err(Error::MaxIterations {
        iterations: max_iterations,
        residual,
        iterate: x,
    })
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm2(v: &[f64]) -> f64 {
    dot(v, v).sqrt()
}
