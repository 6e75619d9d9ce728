//! Sparse matrix storage and linear solvers.
//!
//! Matrices are stored in compressed sparse row form with strictly
//! increasing column indices per row and no duplicate entries. The module
//! provides a sparse direct solver (left-looking LU with threshold partial
//! pivoting and a fill-reducing minimum-degree ordering, see [`lu`]) and
//! conjugate gradients for SPD operators (see [`cg`]). MatrixMarket
//! coordinate files and a length-prefixed binary vector dump are supported
//! for debugging and data exchange.

pub mod amd;
pub mod cg;
pub mod lu;
pub mod ordering;

pub use amd::minimum_degree;
pub use cg::{cg_solve, CgResult, LinearOperator};
pub use lu::{lu_factor, lu_factor_with, Factorization};
pub use ordering::fill_reducing_order;

use crate::{Error, Result};
use std::io::{BufRead, BufWriter, Read, Write};
use std::path::Path;

/// Compressed sparse row matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    nrows: usize,
    ncols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl SparseMatrix {
    /// Builds a matrix from (row, col, value) triplets.
    ///
    /// Triplets are sorted by (row, col); duplicates are summed in their
    /// original order, so the result is deterministic for a deterministic
    /// triplet sequence.
    pub fn from_triplets(
        nrows: usize,
        ncols: usize,
        mut triplets: Vec<(usize, usize, f64)>,
    ) -> Self {
        for &(r, c, _) in &triplets {
            assert!(r < nrows && c < ncols, "triplet ({r},{c}) out of bounds");
        }
        triplets.sort_by_key(|&(r, c, _)| (r, c));
        let mut row_ptr = vec![0usize; nrows + 1];
        let mut col_idx = Vec::with_capacity(triplets.len());
        let mut values = Vec::with_capacity(triplets.len());
        let mut prev: Option<(usize, usize)> = None;
        for &(r, c, v) in &triplets {
            if prev == Some((r, c)) {
                *values.last_mut().unwrap() += v;
            } else {
                row_ptr[r + 1] += 1;
                col_idx.push(c);
                values.push(v);
                prev = Some((r, c));
            }
        }
        for r in 0..nrows {
            row_ptr[r + 1] += row_ptr[r];
        }
        SparseMatrix {
            nrows,
            ncols,
            row_ptr,
            col_idx,
            values,
        }
    }

    /// Builds a matrix directly from CSR arrays; callers must uphold the
    /// invariants (monotone offsets, strictly increasing columns per row).
    pub fn from_csr(
        nrows: usize,
        ncols: usize,
        row_ptr: Vec<usize>,
        col_idx: Vec<usize>,
        values: Vec<f64>,
    ) -> Self {
        assert_eq!(row_ptr.len(), nrows + 1);
        assert_eq!(*row_ptr.last().unwrap(), col_idx.len());
        assert_eq!(col_idx.len(), values.len());
        for r in 0..nrows {
            assert!(row_ptr[r] <= row_ptr[r + 1], "row offsets not monotone");
            let cols = &col_idx[row_ptr[r]..row_ptr[r + 1]];
            for w in cols.windows(2) {
                assert!(w[0] < w[1], "columns not strictly increasing in row {r}");
            }
            if let Some(&c) = cols.last() {
                assert!(c < ncols);
            }
        }
        SparseMatrix {
            nrows,
            ncols,
            row_ptr,
            col_idx,
            values,
        }
    }

    pub fn identity(n: usize) -> Self {
        SparseMatrix {
            nrows: n,
            ncols: n,
            row_ptr: (0..=n).collect(),
            col_idx: (0..n).collect(),
            values: vec![1.0; n],
        }
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Column indices and values of row `r`.
    pub fn row(&self, r: usize) -> (&[usize], &[f64]) {
        let lo = self.row_ptr[r];
        let hi = self.row_ptr[r + 1];
        (&self.col_idx[lo..hi], &self.values[lo..hi])
    }

    /// Entry (r, c), zero if not stored.
    pub fn get(&self, r: usize, c: usize) -> f64 {
        let (cols, vals) = self.row(r);
        match cols.binary_search(&c) {
            Ok(k) => vals[k],
            Err(_) => 0.0,
        }
    }

    /// y = A x.
    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.ncols);
        let mut y = vec![0.0; self.nrows];
        self.matvec_into(x, &mut y);
        y
    }

    pub fn matvec_into(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.ncols);
        assert_eq!(y.len(), self.nrows);
        for r in 0..self.nrows {
            let (cols, vals) = self.row(r);
            let mut acc = 0.0;
            for (&c, &v) in cols.iter().zip(vals) {
                acc += v * x[c];
            }
            y[r] = acc;
        }
    }

    /// y = A^T x without forming the transpose.
    pub fn matvec_transpose(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.nrows);
        let mut y = vec![0.0; self.ncols];
        for r in 0..self.nrows {
            let (cols, vals) = self.row(r);
            for (&c, &v) in cols.iter().zip(vals) {
                y[c] += v * x[r];
            }
        }
        y
    }

    /// Returns A^T as a new matrix (counting sort, deterministic).
    pub fn transpose(&self) -> SparseMatrix {
        let mut row_ptr = vec![0usize; self.ncols + 1];
        for &c in &self.col_idx {
            row_ptr[c + 1] += 1;
        }
        for c in 0..self.ncols {
            row_ptr[c + 1] += row_ptr[c];
        }
        let mut col_idx = vec![0usize; self.nnz()];
        let mut values = vec![0.0; self.nnz()];
        let mut next = row_ptr.clone();
        for r in 0..self.nrows {
            let (cols, vals) = self.row(r);
            for (&c, &v) in cols.iter().zip(vals) {
                let k = next[c];
                col_idx[k] = r;
                values[k] = v;
                next[c] += 1;
            }
        }
        SparseMatrix {
            nrows: self.ncols,
            ncols: self.nrows,
            row_ptr,
            col_idx,
            values,
        }
    }

    /// Returns s * A.
    pub fn scaled(&self, s: f64) -> SparseMatrix {
        let mut out = self.clone();
        for v in &mut out.values {
            *v *= s;
        }
        out
    }

    /// Max absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Infinity norm (max absolute row sum).
    pub fn norm_inf(&self) -> f64 {
        (0..self.nrows)
            .map(|r| self.row(r).1.iter().map(|v| v.abs()).sum())
            .fold(0.0, f64::max)
    }

    /// Assembles the 2x2 block matrix [[a, b], [c, d]].
    ///
    /// Values are copied bit-for-bit from the blocks, so structural
    /// identities between blocks (for example c == -b^T) survive exactly.
    pub fn block_2x2(
        a: &SparseMatrix,
        b: &SparseMatrix,
        c: &SparseMatrix,
        d: &SparseMatrix,
    ) -> SparseMatrix {
        assert_eq!(a.nrows, b.nrows);
        assert_eq!(c.nrows, d.nrows);
        assert_eq!(a.ncols, c.ncols);
        assert_eq!(b.ncols, d.ncols);
        let (r1, c1) = (a.nrows, a.ncols);
        let nrows = r1 + c.nrows;
        let ncols = c1 + b.ncols;
        let nnz = a.nnz() + b.nnz() + c.nnz() + d.nnz();
        let mut row_ptr = Vec::with_capacity(nrows + 1);
        let mut col_idx = Vec::with_capacity(nnz);
        let mut values = Vec::with_capacity(nnz);
        row_ptr.push(0);
        for r in 0..r1 {
            let (cols, vals) = a.row(r);
            col_idx.extend_from_slice(cols);
            values.extend_from_slice(vals);
            let (cols, vals) = b.row(r);
            col_idx.extend(cols.iter().map(|&cc| cc + c1));
            values.extend_from_slice(vals);
            row_ptr.push(col_idx.len());
        }
        for r in 0..c.nrows {
            let (cols, vals) = c.row(r);
            col_idx.extend_from_slice(cols);
            values.extend_from_slice(vals);
            let (cols, vals) = d.row(r);
            col_idx.extend(cols.iter().map(|&cc| cc + c1));
            values.extend_from_slice(vals);
            row_ptr.push(col_idx.len());
        }
        SparseMatrix {
            nrows,
            ncols,
            row_ptr,
            col_idx,
            values,
        }
    }

    /// Writes the matrix in MatrixMarket coordinate format (1-based).
    pub fn write_matrix_market<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "%%MatrixMarket matrix coordinate real general")?;
        writeln!(w, "{} {} {}", self.nrows, self.ncols, self.nnz())?;
        for r in 0..self.nrows {
            let (cols, vals) = self.row(r);
            for (&c, &v) in cols.iter().zip(vals) {
                writeln!(w, "{} {} {:.16e}", r + 1, c + 1, v)?;
            }
        }
        Ok(())
    }

    pub fn write_matrix_market_path<P: AsRef<Path>>(&self, path: P) -> Result<()> {
        let f = std::fs::File::create(path)?;
        self.write_matrix_market(BufWriter::new(f))
    }

    /// Reads a MatrixMarket coordinate file (real, general).
    pub fn read_matrix_market<R: BufRead>(r: R) -> Result<SparseMatrix> {
        let parse_err = |message: &str| Error::Parse {
            context: "MatrixMarket".into(),
            message: message.into(),
        };
        let mut lines = r.lines();
        let header = lines.next().ok_or_else(|| parse_err("empty file"))??;
        let h = header.to_lowercase();
        if !h.starts_with("%%matrixmarket matrix coordinate real") {
            return Err(parse_err("expected coordinate real header"));
        }
        let mut size_line = None;
        for line in lines.by_ref() {
            let line = line?;
            if line.starts_with('%') || line.trim().is_empty() {
                continue;
            }
            size_line = Some(line);
            break;
        }
        let size_line = size_line.ok_or_else(|| parse_err("missing size line"))?;
        let dims: Vec<usize> = size_line
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| parse_err("bad size line")))
            .collect::<Result<_>>()?;
        if dims.len() != 3 {
            return Err(parse_err("size line needs rows cols nnz"));
        }
        let (nrows, ncols, nnz) = (dims[0], dims[1], dims[2]);
        let mut triplets = Vec::with_capacity(nnz);
        for line in lines {
            let line = line?;
            let t = line.trim();
            if t.is_empty() || t.starts_with('%') {
                continue;
            }
            let mut it = t.split_whitespace();
            let r: usize = it
                .next()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| parse_err("bad entry row"))?;
            let c: usize = it
                .next()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| parse_err("bad entry col"))?;
            let v: f64 = it
                .next()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| parse_err("bad entry value"))?;
            if r == 0 || c == 0 || r > nrows || c > ncols {
                return Err(parse_err("entry index out of range"));
            }
            triplets.push((r - 1, c - 1, v));
        }
        if triplets.len() != nnz {
            return Err(parse_err("entry count differs from header"));
        }
        Ok(SparseMatrix::from_triplets(nrows, ncols, triplets))
    }

    pub fn read_matrix_market_path<P: AsRef<Path>>(path: P) -> Result<SparseMatrix> {
        let f = std::fs::File::open(path)?;
        SparseMatrix::read_matrix_market(std::io::BufReader::new(f))
    }
}

/// Discrete Schur complement action: M u + rho * B^T A^-1 B u.
///
/// `a_factor` holds the factorized (unscaled) upper-left block, `b` the wave
/// matrix with test-space rows, `m` the trial-space mass matrix.
pub fn schur_matvec(
    rho: f64,
    a_factor: &Factorization,
    b: &SparseMatrix,
    m: &SparseMatrix,
    u: &[f64],
) -> Result<Vec<f64>> {
    if u.len() != b.ncols() || m.ncols() != b.ncols() {
        return Err(Error::DimensionMismatch {
            expected: b.ncols(),
            got: u.len(),
        });
    }
    let bu = b.matvec(u);
    let ainv_bu = a_factor.solve(&bu)?;
    let bt_ainv_bu = b.matvec_transpose(&ainv_bu);
    let mut y = m.matvec(u);
    for (yi, si) in y.iter_mut().zip(&bt_ainv_bu) {
        *yi += rho * si;
    }
    Ok(y)
}

/// Writes a vector as little-endian binary: u64 length, then f64 entries.
pub fn write_vector_binary<P: AsRef<Path>>(path: P, v: &[f64]) -> Result<()> {
    let f = std::fs::File::create(path)?;
    let mut w = BufWriter::new(f);
    w.write_all(&(v.len() as u64).to_le_bytes())?;
    for x in v {
        w.write_all(&x.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a vector written by [`write_vector_binary`].
pub fn read_vector_binary<P: AsRef<Path>>(path: P) -> Result<Vec<f64>> {
    let mut f = std::fs::File::open(path)?;
    let mut len_buf = [0u8; 8];
    f.read_exact(&mut len_buf)?;
    let n = u64::from_le_bytes(len_buf) as usize;
    let mut buf = vec![0u8; n * 8];
    f.read_exact(&mut buf)?;
    let mut rest = Vec::new();
    f.read_to_end(&mut rest)?;
    if !rest.is_empty() {
        return Err(Error::Parse {
            context: "binary vector".into(),
            message: "trailing bytes after declared length".into(),
        });
    }
    Ok(buf
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect())
}
