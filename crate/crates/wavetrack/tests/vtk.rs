//! Legacy-VTK export format checks.

mod common;

use wavetrack::mesh::{make_initial_mesh, Mesh};
use wavetrack::vtk::write_vtk;

/// Two-triangle unit square, counterclockwise.
fn two_triangles() -> Mesh {
    Mesh::from_raw(
        vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]],
        vec![[0, 1, 2], [0, 2, 3]],
    )
    .unwrap()
}

#[test]
fn vtk_output_is_the_exact_legacy_layout() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("mesh.vtk");
    let mesh = two_triangles();
    let point = [1.0, 2.0, 3.0, 4.5];
    let cell = [0.25, -1.0];
    write_vtk(&path, &mesh, &[("state", &point)], &[("indicator", &cell)]).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    let expected = "\
# vtk DataFile Version 3.0
space-time mesh
ASCII
DATASET UNSTRUCTURED_GRID
POINTS 4 double
0.0000000000000000e0 0.0000000000000000e0 0
1.0000000000000000e0 0.0000000000000000e0 0
1.0000000000000000e0 1.0000000000000000e0 0
0.0000000000000000e0 1.0000000000000000e0 0
CELLS 2 8
3 0 1 2
3 0 2 3
CELL_TYPES 2
5
5
POINT_DATA 4
SCALARS state double 1
LOOKUP_TABLE default
1.0000000000000000e0
2.0000000000000000e0
3.0000000000000000e0
4.5000000000000000e0
CELL_DATA 2
SCALARS indicator double 1
LOOKUP_TABLE default
2.5000000000000000e-1
-1.0000000000000000e0
";
    assert_eq!(text, expected);
}

#[test]
fn vtk_mesh_only_skips_data_sections() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("mesh.vtk");
    write_vtk(&path, &two_triangles(), &[], &[]).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(!text.contains("POINT_DATA"));
    assert!(!text.contains("CELL_DATA"));
    assert!(text.contains("CELL_TYPES 2"));
}

#[test]
fn vtk_rejects_wrong_lengths_and_bad_names() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("mesh.vtk");
    let mesh = two_triangles();
    // Point field too short.
    assert!(write_vtk(&path, &mesh, &[("f", &[1.0, 2.0])], &[]).is_err());
    // Cell field too long.
    assert!(write_vtk(&path, &mesh, &[], &[("g", &[1.0, 2.0, 3.0])]).is_err());
    // Names with whitespace or empty are refused before writing.
    let ok = [1.0; 4];
    assert!(write_vtk(&path, &mesh, &[("bad name", &ok)], &[]).is_err());
    assert!(write_vtk(&path, &mesh, &[("", &ok)], &[]).is_err());
    // Nothing was written by the failing calls.
    assert!(!path.exists());
}

#[test]
fn vtk_writes_a_real_mesh_consistently() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("initial.vtk");
    let mesh = make_initial_mesh(4);
    let values: Vec<f64> = (0..mesh.num_nodes()).map(|i| i as f64).collect();
    write_vtk(&path, &mesh, &[("id", &values)], &[]).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("# vtk DataFile Version 3.0\n"));
    assert!(text.contains(&format!("POINTS {} double", mesh.num_nodes())));
    assert!(text.contains(&format!(
        "CELLS {} {}",
        mesh.num_elements(),
        4 * mesh.num_elements()
    )));
    // Exactly num_elements lines of cell type 5.
    let count = text.lines().filter(|l| *l == "5").count();
    assert_eq!(count, mesh.num_elements());
}
