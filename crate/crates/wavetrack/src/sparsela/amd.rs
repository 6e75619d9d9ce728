//! Fill-reducing minimum-degree ordering.
//!
//! Works on the symmetrized pattern of A + A^T, which matches the block
//! optimality systems (their pattern is symmetric even though the values are
//! not). The implementation keeps a quotient graph: eliminating a variable
//! turns its adjacency into an element, elements reached through the pivot
//! are absorbed, and the degrees of the affected variables are recomputed
//! exactly. Supervariable detection is omitted; that costs some speed on
//! large problems but never correctness, since any permutation is valid.

use super::SparseMatrix;
use std::cmp::Reverse;
use std::collections::BinaryHeap;

/// Returns an elimination order for the pattern of A + A^T: `order[k]` is
/// the variable eliminated at step k. Ties break on the smaller index, so
/// the order is deterministic.
pub fn minimum_degree(a: &SparseMatrix) -> Vec<usize> {
    assert_eq!(a.nrows(), a.ncols(), "ordering needs a square matrix");
    let n = a.nrows();
    // Symmetrized adjacency without the diagonal: merge the sorted rows of
    // A and A^T.
    let at = a.transpose();
    let mut var_adj: Vec<Vec<usize>> = Vec::with_capacity(n);
    for r in 0..n {
        let (ca, _) = a.row(r);
        let (cb, _) = at.row(r);
        let mut merged = Vec::with_capacity(ca.len() + cb.len());
        let (mut i, mut j) = (0, 0);
        while i < ca.len() || j < cb.len() {
            let next = match (ca.get(i), cb.get(j)) {
                (Some(&x), Some(&y)) if x == y => {
                    i += 1;
                    j += 1;
                    x
                }
                (Some(&x), Some(&y)) if x < y => {
                    i += 1;
                    x
                }
                (Some(_), Some(&y)) => {
                    j += 1;
                    y
                }
                (Some(&x), None) => {
                    i += 1;
                    x
                }
                (None, Some(&y)) => {
                    j += 1;
                    y
                }
                (None, None) => unreachable!(),
            };
            if next != r {
                merged.push(next);
            }
        }
        var_adj.push(merged);
    }
    let mut elem_adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut elements: Vec<Vec<usize>> = Vec::new();
    let mut absorbed: Vec<bool> = Vec::new();
    let mut alive = vec![true; n];
    let mut degree: Vec<usize> = var_adj.iter().map(Vec::len).collect();
    // Two independent marker generations: one identifying the current front,
    // one for the set unions inside degree recomputation.
    let mut front_mark = vec![0u64; n];
    let mut front_gen = 0u64;
    let mut mark = vec![0u64; n];
    let mut stamp = 0u64;

    let mut heap: BinaryHeap<Reverse<(usize, usize)>> = BinaryHeap::with_capacity(2 * n);
    for i in 0..n {
        heap.push(Reverse((degree[i], i)));
    }

    let mut order = Vec::with_capacity(n);
    let mut front: Vec<usize> = Vec::new();
    for _ in 0..n {
        // Lazy deletion: skip stale heap entries.
        let p = loop {
            let Reverse((d, i)) = heap.pop().expect("heap exhausted before all variables");
            if alive[i] && degree[i] == d {
                break i;
            }
        };
        order.push(p);
        alive[p] = false;

        // Front = union of p's variable neighbors and the variables of p's
        // elements; all those elements are absorbed into the new one.
        front_gen += 1;
        front_mark[p] = front_gen;
        front.clear();
        for &v in &var_adj[p] {
            if alive[v] && front_mark[v] != front_gen {
                front_mark[v] = front_gen;
                front.push(v);
            }
        }
        for &e in &elem_adj[p] {
            if absorbed[e] {
                continue;
            }
            absorbed[e] = true;
            for &v in &elements[e] {
                if alive[v] && front_mark[v] != front_gen {
                    front_mark[v] = front_gen;
                    front.push(v);
                }
            }
        }
        var_adj[p] = Vec::new();
        elem_adj[p] = Vec::new();
        let ep = elements.len();
        elements.push(front.clone());
        absorbed.push(false);

        // Update every variable on the front: drop edges covered by the new
        // element, drop absorbed elements, recompute the exact degree.
        for idx in 0..front.len() {
            let i = front[idx];
            var_adj[i].retain(|&v| alive[v] && front_mark[v] != front_gen);
            elem_adj[i].retain(|&e| !absorbed[e]);
            elem_adj[i].push(ep);

            stamp += 1;
            mark[i] = stamp;
            let mut d = 0usize;
            for &v in &var_adj[i] {
                if alive[v] && mark[v] != stamp {
                    mark[v] = stamp;
                    d += 1;
                }
            }
            for k in 0..elem_adj[i].len() {
                let e = elem_adj[i][k];
                let list = std::mem::take(&mut elements[e]);
                for &v in &list {
                    if alive[v] && mark[v] != stamp {
                        mark[v] = stamp;
                        d += 1;
                    }
                }
                elements[e] = list;
            }
            degree[i] = d;
            heap.push(Reverse((d, i)));
        }

        // Compact the new element once, now that dead entries are known.
        elements[ep].retain(|&v| alive[v]);
    }
    order
}
