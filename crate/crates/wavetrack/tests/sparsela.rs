//! Sparse linear algebra against a dense elimination oracle, plus
//! structural property tests.

mod common;

use common::{dense_solve, max_abs_diff, norm, to_dense, TestRng};
use proptest::prelude::*;
use wavetrack::sparsela::{
    cg_solve, fill_reducing_order, lu_factor, minimum_degree, LinearOperator, SparseMatrix,
};

/// Random sparse, strictly diagonally dominant matrix (always invertible).
#[allow(clippy::needless_range_loop)]
fn random_dominant(n: usize, rng: &mut TestRng) -> SparseMatrix {
    let mut triplets = Vec::new();
    let mut row_sum = vec![0.0; n];
    for i in 0..n {
        for _ in 0..3 {
            let j = rng.below(n);
            if j != i {
                let v = rng.unit();
                triplets.push((i, j, v));
                row_sum[i] += v.abs();
            }
        }
    }
    for (i, s) in row_sum.iter().enumerate() {
        triplets.push((i, i, s + 1.0 + rng.unit().abs()));
    }
    SparseMatrix::from_triplets(n, n, triplets)
}

#[test]
fn triplets_accumulate_duplicates() {
    let a = SparseMatrix::from_triplets(
        2,
        2,
        vec![(0, 0, 1.0), (0, 0, 2.0), (1, 0, -1.0), (0, 1, 4.0)],
    );
    assert_eq!(a.get(0, 0), 3.0);
    assert_eq!(a.get(0, 1), 4.0);
    assert_eq!(a.get(1, 0), -1.0);
    assert_eq!(a.get(1, 1), 0.0);
    assert_eq!(a.nnz(), 3);
}

/// Consecutive rows whose nearest entries share a column index must stay
/// separate entries; only duplicates within the same (row, col) pair sum.
#[test]
fn triplets_never_merge_across_rows() {
    let a = SparseMatrix::from_triplets(3, 3, vec![(2, 1, 7.0), (0, 1, 2.0), (1, 1, 5.0)]);
    assert_eq!(a.get(0, 1), 2.0);
    assert_eq!(a.get(1, 1), 5.0);
    assert_eq!(a.get(2, 1), 7.0);
    assert_eq!(a.nnz(), 3);
    // Row boundaries are intact.
    assert_eq!(a.row(0).0, &[1]);
    assert_eq!(a.row(1).0, &[1]);
    assert_eq!(a.row(2).0, &[1]);
}

#[test]
fn matvec_and_transpose_match_dense() {
    let mut rng = TestRng::new(42);
    let a = random_dominant(25, &mut rng);
    let dense = to_dense(&a);
    let x: Vec<f64> = (0..25).map(|_| rng.unit()).collect();
    let y = a.matvec(&x);
    let yt = a.matvec_transpose(&x);
    let at = a.transpose();
    let yt2 = at.matvec(&x);
    for i in 0..25 {
        let want: f64 = (0..25).map(|j| dense[i][j] * x[j]).sum();
        let want_t: f64 = (0..25).map(|j| dense[j][i] * x[j]).sum();
        assert!((y[i] - want).abs() < 1e-12);
        assert!((yt[i] - want_t).abs() < 1e-12);
        assert_eq!(yt[i], yt2[i]);
    }
}

#[test]
fn block_2x2_lays_out_all_four_blocks() {
    let a = SparseMatrix::from_triplets(2, 2, vec![(0, 0, 1.0), (1, 1, 2.0)]);
    let b = SparseMatrix::from_triplets(2, 3, vec![(0, 1, 3.0)]);
    let c = SparseMatrix::from_triplets(3, 2, vec![(2, 0, 4.0)]);
    let d = SparseMatrix::from_triplets(3, 3, vec![(0, 2, 5.0)]);
    let k = SparseMatrix::block_2x2(&a, &b, &c, &d);
    assert_eq!((k.nrows(), k.ncols()), (5, 5));
    assert_eq!(k.get(0, 0), 1.0);
    assert_eq!(k.get(1, 1), 2.0);
    assert_eq!(k.get(0, 3), 3.0);
    assert_eq!(k.get(4, 0), 4.0);
    assert_eq!(k.get(2, 4), 5.0);
    assert_eq!(k.nnz(), 5);
}

#[test]
fn sparse_lu_matches_dense_oracle() {
    let mut rng = TestRng::new(123);
    for n in [1, 2, 3, 5, 17, 60, 140] {
        let a = random_dominant(n, &mut rng);
        let b: Vec<f64> = (0..n).map(|_| rng.unit()).collect();
        let factor = lu_factor(&a).unwrap();
        let x = factor.solve(&b).unwrap();
        let oracle = dense_solve(&to_dense(&a), &b).unwrap();
        let diff = max_abs_diff(&x, &oracle);
        assert!(diff < 1e-10, "n={n}: sparse vs dense differ by {diff}");
    }
}

#[test]
fn singular_matrices_are_reported() {
    // Zero matrix.
    let z = SparseMatrix::from_triplets(3, 3, vec![]);
    assert!(lu_factor(&z).is_err());
    // Structurally nonsingular but rank deficient: two equal rows.
    let a = SparseMatrix::from_triplets(
        2,
        2,
        vec![(0, 0, 1.0), (0, 1, 2.0), (1, 0, 1.0), (1, 1, 2.0)],
    );
    assert!(lu_factor(&a).is_err());
}

#[test]
fn badly_scaled_blocks_still_solve_accurately() {
    // Equilibration must cope with blocks whose magnitudes differ by many
    // orders, the shape the optimality systems take at fine levels.
    let mut rng = TestRng::new(9);
    let n = 30;
    let mut triplets = Vec::new();
    for i in 0..n {
        let scale = if i < n / 2 { 1e8 } else { 1e-6 };
        triplets.push((i, i, scale * (2.0 + rng.unit())));
        let j = rng.below(n);
        if j != i {
            let cross = if i < n / 2 { 1.0 } else { 1e-6 };
            triplets.push((i, j, cross * rng.unit() * 0.3));
        }
    }
    let a = SparseMatrix::from_triplets(n, n, triplets);
    let x_true: Vec<f64> = (0..n).map(|_| rng.unit()).collect();
    let b = a.matvec(&x_true);
    let x = lu_factor(&a).unwrap().solve(&b).unwrap();
    let res: Vec<f64> = a.matvec(&x).iter().zip(&b).map(|(l, r)| l - r).collect();
    assert!(norm(&res) <= 1e-10 * norm(&b).max(1.0), "residual too big");
}

#[test]
fn cg_solves_spd_systems_to_tolerance() {
    let mut rng = TestRng::new(77);
    let n = 40;
    // SPD matrix: A = D + L + L^T with strong diagonal.
    let mut triplets = Vec::new();
    for i in 0..n {
        triplets.push((i, i, 4.0 + rng.unit().abs()));
        if i + 1 < n {
            let v = 0.5 * rng.unit();
            triplets.push((i, i + 1, v));
            triplets.push((i + 1, i, v));
        }
    }
    let a = SparseMatrix::from_triplets(n, n, triplets);
    let b: Vec<f64> = (0..n).map(|_| rng.unit()).collect();

    struct Wrap<'a>(&'a SparseMatrix);
    impl LinearOperator for Wrap<'_> {
        fn dim(&self) -> usize {
            self.0.nrows()
        }
        fn apply(&self, x: &[f64], y: &mut [f64]) {
            self.0.matvec_into(x, y);
        }
    }

    let result = cg_solve(&Wrap(&a), &b, 1e-12, 500).unwrap();
    let res: Vec<f64> = a
        .matvec(&result.x)
        .iter()
        .zip(&b)
        .map(|(l, r)| l - r)
        .collect();
    assert!(norm(&res) <= 1e-11 * norm(&b));
    assert!(result.iterations <= n + 5);
}

#[test]
fn cg_reports_nonconvergence() {
    let a = SparseMatrix::identity(4).scaled(3.0);
    struct Wrap(SparseMatrix);
    impl LinearOperator for Wrap {
        fn dim(&self) -> usize {
            self.0.nrows()
        }
        fn apply(&self, x: &[f64], y: &mut [f64]) {
            self.0.matvec_into(x, y);
        }
    }
    // Zero iterations allowed on a nonzero right-hand side cannot converge.
    assert!(cg_solve(&Wrap(a), &[1.0, 2.0, 3.0, 4.0], 1e-14, 0).is_err());
}

#[test]
fn matrix_market_roundtrip() {
    let mut rng = TestRng::new(5);
    let a = random_dominant(12, &mut rng);
    let mut buffer = Vec::new();
    a.write_matrix_market(&mut buffer).unwrap();
    let text = String::from_utf8(buffer.clone()).unwrap();
    assert!(text.starts_with("%%MatrixMarket matrix coordinate real general"));
    let back = SparseMatrix::read_matrix_market(std::io::Cursor::new(buffer)).unwrap();
    assert_eq!(back.nrows(), a.nrows());
    assert_eq!(back.ncols(), a.ncols());
    assert_eq!(back.nnz(), a.nnz());
    for r in 0..a.nrows() {
        for c in 0..a.ncols() {
            assert_eq!(back.get(r, c), a.get(r, c), "entry ({r},{c})");
        }
    }
}

#[test]
fn orderings_are_permutations() {
    let mut rng = TestRng::new(31);
    for n in [1, 7, 40, 230] {
        let a = random_dominant(n, &mut rng);
        for (name, perm) in [
            ("minimum_degree", minimum_degree(&a)),
            ("fill_reducing", fill_reducing_order(&a)),
        ] {
            assert_eq!(perm.len(), n, "{name} length");
            let mut seen = vec![false; n];
            for &p in &perm {
                assert!(p < n, "{name} out of range");
                assert!(!seen[p], "{name} repeats index {p}");
                seen[p] = true;
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// Any diagonally dominant system solves to a tiny residual through
    /// the full pipeline (ordering, equilibration, threshold pivoting).
    #[test]
    fn prop_lu_solves_dominant_systems(seed in 1u64..u64::MAX, n in 1usize..48) {
        let mut rng = TestRng::new(seed);
        let a = random_dominant(n, &mut rng);
        let x_true: Vec<f64> = (0..n).map(|_| rng.unit()).collect();
        let b = a.matvec(&x_true);
        let x = lu_factor(&a).unwrap().solve(&b).unwrap();
        let res: Vec<f64> = a.matvec(&x).iter().zip(&b).map(|(l, r)| l - r).collect();
        prop_assert!(norm(&res) <= 1e-9 * norm(&b).max(1.0));
    }

    /// The fill-reducing ordering is always a permutation, whatever the
    /// sparsity pattern (including disconnected graphs).
    #[test]
    fn prop_ordering_is_permutation(seed in 1u64..u64::MAX, n in 1usize..120) {
        let mut rng = TestRng::new(seed);
        let mut triplets = Vec::new();
        for i in 0..n {
            triplets.push((i, i, 1.0));
            if rng.below(4) > 0 {
                triplets.push((i, rng.below(n), 1.0));
            }
        }
        let a = SparseMatrix::from_triplets(n, n, triplets);
        let perm = fill_reducing_order(&a);
        let mut seen = vec![false; n];
        for &p in &perm {
            prop_assert!(p < n && !seen[p]);
            seen[p] = true;
        }
    }
}
