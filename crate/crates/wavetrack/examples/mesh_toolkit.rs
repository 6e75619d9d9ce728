//! Tour of the mesh and I/O utilities.
//!
//! Builds the structured criss-cross mesh, refines a marked region while
//! keeping the triangulation conforming, round-trips the mesh through the
//! plain-text format, writes a VTK file with attached node and cell data,
//! and exports an assembled matrix in Matrix Market form. Everything lands
//! in a temporary directory whose path is printed so the files can be
//! inspected afterwards.
//!
//! Run with:
//!
//! ```text
//! cargo run --release --example mesh_toolkit
//! ```

use wavetrack::assembly::{assemble, Kernel};
use wavetrack::fespace::{build_dofmap, SpaceKind};
use wavetrack::mesh::{make_initial_mesh, mesh_size, Mesh, MeshHierarchy};
use wavetrack::sparsela::SparseMatrix;
use wavetrack::vtk::write_vtk;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = tempfile::tempdir()?;
    println!("writing into {}", dir.path().display());

    // A structured mesh of the unit square: each of the 4x4 cells is split
    // into four triangles around its centre.
    let mesh = make_initial_mesh(4);
    let (h_max, h_min) = mesh_size(&mesh);
    println!(
        "\ninitial mesh: {} nodes, {} elements, h in [{h_min:.4}, {h_max:.4}]",
        mesh.num_nodes(),
        mesh.num_elements()
    );

    // Refine every element touching the diagonal x = t, three times over.
    // Conformity is restored automatically, so neighbouring elements get
    // split as needed and the final count exceeds the marked count.
    let mut hierarchy = MeshHierarchy::new(mesh);
    for round in 0..3 {
        let current = hierarchy.finest();
        let marked: Vec<usize> = (0..current.num_elements())
            .filter(|&k| {
                let [p, q, r] = current.corners(k);
                [p, q, r].iter().any(|c| (c[0] - c[1]).abs() < 1e-12)
            })
            .collect();
        let before = current.num_elements();
        hierarchy.refine_marked(&marked)?;
        println!(
            "round {round}: marked {} of {before} elements -> {} elements",
            marked.len(),
            hierarchy.finest().num_elements()
        );
    }
    let fine = hierarchy.finest().clone();

    // Plain-text round trip.
    let text_path = dir.path().join("diagonal.mesh");
    fine.write_text(&text_path)?;
    let reread = Mesh::read_text(&text_path)?;
    assert_eq!(reread.num_nodes(), fine.num_nodes());
    assert_eq!(reread.elements(), fine.elements());
    println!(
        "\ntext round trip ok: {} ({} bytes)",
        text_path.display(),
        std::fs::metadata(&text_path)?.len()
    );

    // VTK export with a nodal field (distance to the diagonal) and a cell
    // field (element area) attached.
    let distance: Vec<f64> = fine
        .nodes()
        .iter()
        .map(|p| (p[0] - p[1]).abs() / f64::sqrt(2.0))
        .collect();
    let areas: Vec<f64> = (0..fine.num_elements())
        .map(|k| fine.element_area(k))
        .collect();
    let vtk_path = dir.path().join("diagonal.vtk");
    write_vtk(
        &vtk_path,
        &fine,
        &[("distance", &distance)],
        &[("area", &areas)],
    )?;
    println!(
        "vtk export ok: {} ({} bytes)",
        vtk_path.display(),
        std::fs::metadata(&vtk_path)?.len()
    );

    // Assemble the stiffness matrix on the free space (no constraints) and
    // round-trip it through Matrix Market.
    let dofmap = build_dofmap(&fine, SpaceKind::Free);
    let stiffness = assemble(&fine, &dofmap, &dofmap, Kernel::Stiffness)?;
    let mm_path = dir.path().join("stiffness.mtx");
    stiffness.write_matrix_market_path(&mm_path)?;
    let reread = SparseMatrix::read_matrix_market_path(&mm_path)?;
    assert_eq!(reread.nrows(), stiffness.nrows());
    assert_eq!(reread.nnz(), stiffness.nnz());
    println!(
        "matrix market round trip ok: {} ({}x{}, {} nonzeros, {} bytes)",
        mm_path.display(),
        stiffness.nrows(),
        stiffness.ncols(),
        stiffness.nnz(),
        std::fs::metadata(&mm_path)?.len()
    );

    // Keep the files around for inspection.
    let kept = dir.keep();
    println!("\nfiles kept in {}", kept.display());
    Ok(())
}
