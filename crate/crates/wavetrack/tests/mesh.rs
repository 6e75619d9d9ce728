//! Mesh construction, refinement, and IO invariants.

mod common;

use common::TestRng;
use std::collections::HashMap;
use wavetrack::mesh::{
    make_initial_mesh, mesh_size, refine_marked, refine_uniform, Mesh, MeshHierarchy,
};

/// Every interior edge is shared by exactly two elements; every edge used
/// once lies on the boundary of the unit square.
fn assert_conforming(mesh: &Mesh) {
    let mut edge_count: HashMap<(usize, usize), usize> = HashMap::new();
    for k in 0..mesh.num_elements() {
        let e = mesh.element(k);
        for i in 0..3 {
            let a = e[i];
            let b = e[(i + 1) % 3];
            let key = (a.min(b), a.max(b));
            *edge_count.entry(key).or_insert(0) += 1;
        }
    }
    for ((a, b), count) in edge_count {
        assert!(count <= 2, "edge ({a},{b}) used {count} times");
        if count == 1 {
            let pa = mesh.node(a);
            let pb = mesh.node(b);
            let on_boundary =
                (0..2).any(|c| (pa[c] == 0.0 && pb[c] == 0.0) || (pa[c] == 1.0 && pb[c] == 1.0));
            assert!(
                on_boundary,
                "edge ({a},{b}) at {pa:?}-{pb:?} is interior but used once (hanging node)"
            );
        }
    }
}

fn total_area(mesh: &Mesh) -> f64 {
    (0..mesh.num_elements()).map(|k| mesh.element_area(k)).sum()
}

#[test]
fn initial_mesh_counts_and_geometry() {
    let mesh = make_initial_mesh(4);
    // 5x5 cell corners plus one centre per cell.
    assert_eq!(mesh.num_nodes(), 25 + 16);
    assert_eq!(mesh.num_elements(), 64);
    assert_eq!(mesh.level(), 0);
    for k in 0..mesh.num_elements() {
        assert_eq!(mesh.element_area(k), 1.0 / 64.0);
        assert_eq!(mesh.element_diameter(k), 0.25);
    }
    assert_eq!(total_area(&mesh), 1.0);
    assert_eq!(mesh_size(&mesh), (0.25, 0.25));
    assert_conforming(&mesh);
}

#[test]
fn initial_mesh_orientation_is_counterclockwise() {
    let mesh = make_initial_mesh(3);
    for k in 0..mesh.num_elements() {
        let [p, q, r] = mesh.corners(k);
        let twice_area = (q[0] - p[0]) * (r[1] - p[1]) - (q[1] - p[1]) * (r[0] - p[0]);
        assert!(twice_area > 0.0, "element {k} is not counterclockwise");
    }
}

#[test]
fn uniform_refinement_quarters_every_element() {
    let coarse = make_initial_mesh(4);
    let fine = refine_uniform(&coarse);
    assert_eq!(fine.num_elements(), 4 * coarse.num_elements());
    assert_eq!(fine.level(), 1);
    assert_conforming(&fine);
    let err = (total_area(&fine) - 1.0).abs();
    assert!(err < 1e-14, "area drift {err}");

    // Children partition their parents: areas grouped by parent add up.
    let mut child_area = vec![0.0; coarse.num_elements()];
    for k in 0..fine.num_elements() {
        let p = fine.parent(k);
        assert!(p < coarse.num_elements());
        child_area[p] += fine.element_area(k);
    }
    for (p, &a) in child_area.iter().enumerate() {
        assert!(
            (a - coarse.element_area(p)).abs() < 1e-14,
            "parent {p} area mismatch"
        );
    }

    let (h_max, h_min) = mesh_size(&fine);
    assert_eq!(h_max, 0.125);
    assert_eq!(h_min, 0.125);
}

#[test]
fn marked_refinement_is_conforming_and_refines_marked() {
    let mesh = make_initial_mesh(2);
    let marked = vec![0, 5];
    let fine = refine_marked(&mesh, &marked).unwrap();
    assert_conforming(&fine);
    assert!((total_area(&fine) - 1.0).abs() < 1e-14);
    assert!(fine.num_elements() > mesh.num_elements());

    // Each marked element must actually be subdivided.
    let mut children = vec![0usize; mesh.num_elements()];
    for k in 0..fine.num_elements() {
        children[fine.parent(k)] += 1;
    }
    for &m in &marked {
        assert!(children[m] >= 2, "marked element {m} was not refined");
    }
}

#[test]
fn marked_refinement_rejects_out_of_range() {
    let mesh = make_initial_mesh(2);
    assert!(refine_marked(&mesh, &[mesh.num_elements()]).is_err());
}

#[test]
fn random_marking_sequences_stay_conforming() {
    let mut rng = TestRng::new(0x5eed);
    for round in 0..8 {
        let mut mesh = make_initial_mesh(1 + round % 3);
        for _ in 0..4 {
            let n = mesh.num_elements();
            let count = 1 + rng.below(n.min(7));
            let mut marked: Vec<usize> = (0..count).map(|_| rng.below(n)).collect();
            marked.sort_unstable();
            marked.dedup();
            mesh = refine_marked(&mesh, &marked).unwrap();
            assert_conforming(&mesh);
            assert!((total_area(&mesh) - 1.0).abs() < 1e-13);
        }
    }
}

#[test]
fn hierarchy_tracks_levels_and_children() {
    let mut h = MeshHierarchy::new(make_initial_mesh(2));
    h.refine_uniformly();
    h.refine_marked(&[0, 1, 2]).unwrap();
    assert_eq!(h.num_levels(), 3);
    assert_eq!(h.finest_level(), 2);
    assert_eq!(h.finest().level(), 2);
    // Uniform refinement gives every level-0 element exactly 4 children.
    let uniform_children = h.children_of_level(1);
    assert_eq!(uniform_children.len(), h.mesh(0).num_elements());
    assert!(uniform_children.iter().all(|kids| kids.len() == 4));
    // Level-2 elements grouped by their level-1 parents partition the mesh.
    let children = h.children_of_level(2);
    assert_eq!(children.len(), h.mesh(1).num_elements());
    let total: usize = children.iter().map(Vec::len).sum();
    assert_eq!(total, h.mesh(2).num_elements());
    for (parent, kids) in children.iter().enumerate() {
        assert!(!kids.is_empty(), "parent {parent} lost its children");
        for &k in kids {
            assert_eq!(h.mesh(2).parent(k), parent);
        }
    }
}

#[test]
fn text_roundtrip_preserves_mesh_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("mesh.txt");
    let mesh = refine_marked(&make_initial_mesh(2), &[0, 3, 7]).unwrap();
    mesh.write_text(&path).unwrap();
    let back = Mesh::read_text(&path).unwrap();
    assert_eq!(back.num_nodes(), mesh.num_nodes());
    assert_eq!(back.num_elements(), mesh.num_elements());
    for i in 0..mesh.num_nodes() {
        assert_eq!(back.node(i), mesh.node(i), "node {i}");
    }
    for k in 0..mesh.num_elements() {
        assert_eq!(back.element(k), mesh.element(k), "element {k}");
    }
}

#[test]
fn from_raw_rejects_degenerate_and_backwards_elements() {
    let nodes = vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];
    // Clockwise orientation (negative area) must be rejected.
    assert!(Mesh::from_raw(nodes.clone(), vec![[0, 2, 1]]).is_err());
    // Repeated node (zero area) must be rejected.
    assert!(Mesh::from_raw(nodes, vec![[0, 1, 1]]).is_err());
}
