//! Legacy-VTK ASCII export of meshes with point and cell data.
//!
//! One unstructured-grid file per call; the (x, t) plane is embedded at
//! z = 0. Scalars are written in full precision so dumps are reproducible
//! bit for bit.

use std::fmt::Write as _;
use std::path::Path;

use crate::mesh::Mesh;
use crate::{Error, Result};

/// Writes `mesh` with the given named scalar fields. Point fields must
/// have one value per node, cell fields one value per element.
pub fn write_vtk(
    path: &Path,
    mesh: &Mesh,
    point_data: &[(&str, &[f64])],
    cell_data: &[(&str, &[f64])],
) -> Result<()> {
    for (name, values) in point_data {
        if values.len() != mesh.num_nodes() {
            return Err(Error::DimensionMismatch {
                expected: mesh.num_nodes(),
                got: values.len(),
            });
        }
        check_name(name)?;
    }
    for (name, values) in cell_data {
        if values.len() != mesh.num_elements() {
            return Err(Error::DimensionMismatch {
                expected: mesh.num_elements(),
                got: values.len(),
            });
        }
        check_name(name)?;
    }

    let mut out = String::new();
    out.push_str("# vtk DataFile Version 3.0\n");
    out.push_str("space-time mesh\n");
    out.push_str("ASCII\n");
    out.push_str("DATASET UNSTRUCTURED_GRID\n");
    let _ = writeln!(out, "POINTS {} double", mesh.num_nodes());
    for p in mesh.nodes() {
        let _ = writeln!(out, "{:.16e} {:.16e} 0", p[0], p[1]);
    }
    let m = mesh.num_elements();
    let _ = writeln!(out, "CELLS {} {}", m, 4 * m);
    for &[a, b, c] in mesh.elements() {
        let _ = writeln!(out, "3 {a} {b} {c}");
    }
    let _ = writeln!(out, "CELL_TYPES {m}");
    for _ in 0..m {
        out.push_str("5\n");
    }
    if !point_data.is_empty() {
        let _ = writeln!(out, "POINT_DATA {}", mesh.num_nodes());
        for (name, values) in point_data {
            write_scalars(&mut out, name, values);
        }
    }
    if !cell_data.is_empty() {
        let _ = writeln!(out, "CELL_DATA {m}");
        for (name, values) in cell_data {
            write_scalars(&mut out, name, values);
        }
    }
    std::fs::write(path, out)?;
    Ok(())
}

fn write_scalars(out: &mut String, name: &str, values: &[f64]) {
    let _ = writeln!(out, "SCALARS {name} double 1");
    out.push_str("LOOKUP_TABLE default\n");
    for v in values {
        let _ = writeln!(out, "{v:.16e}");
    }
}

fn check_name(name: &str) -> Result<()> {
    if name.is_empty() || name.contains(char::is_whitespace) {
        return Err(Error::Parse {
            context: "vtk field name".into(),
            message: format!("invalid name {name:?}"),
        });
    }
    Ok(())
}
