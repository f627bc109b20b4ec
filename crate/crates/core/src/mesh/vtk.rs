use std::io::{self, Write};

use super::SubdomainMesh;

/// Optional per-point and per-cell fields written alongside the geometry.
///
/// Point and cell arrays are given per mesh, in the order the meshes are
/// passed to [`write_vtk`].
#[derive(Clone, Copy, Debug, Default)]
pub struct VtkFields<'a> {
    pub u: Option<&'a [Vec<f64>]>,
    pub marked: Option<&'a [Vec<bool>]>,
}

/// Writes the meshes as one legacy ASCII unstructured grid (cell type 5) with
/// an integer `subdomain` cell field. Vertices on Γ appear once per side.
pub fn write_vtk<W: Write>(
    out: &mut W,
    meshes: &[&SubdomainMesh],
    fields: VtkFields<'_>,
) -> io::Result<()> {
    let num_points: usize = meshes.iter().map(|m| m.num_vertices()).sum();
    let num_cells: usize = meshes.iter().map(|m| m.num_triangles()).sum();

    writeln!(out, "# vtk DataFile Version 3.0")?;
    writeln!(out, "nitsche-mortar")?;
    writeln!(out, "ASCII")?;
    writeln!(out, "DATASET UNSTRUCTURED_GRID")?;
    writeln!(out, "POINTS {num_points} double")?;
    for m in meshes {
        for p in m.vertices() {
            writeln!(out, "{} {} 0", p.x, p.y)?;
        }
    }

    writeln!(out, "CELLS {num_cells} {}", 4 * num_cells)?;
    let mut offset = 0;
    for m in meshes {
        for t in m.triangles() {
            writeln!(
                out,
                "3 {} {} {}",
                t[0] + offset,
                t[1] + offset,
                t[2] + offset
            )?;
        }
        offset += m.num_vertices();
    }
    writeln!(out, "CELL_TYPES {num_cells}")?;
    for _ in 0..num_cells {
        writeln!(out, "5")?;
    }

    writeln!(out, "CELL_DATA {num_cells}")?;
    writeln!(out, "SCALARS subdomain int 1")?;
    writeln!(out, "LOOKUP_TABLE default")?;
    for m in meshes {
        for _ in 0..m.num_triangles() {
            writeln!(out, "{}", m.id().number())?;
        }
    }
    if let Some(marked) = fields.marked {
        writeln!(out, "SCALARS marked int 1")?;
        writeln!(out, "LOOKUP_TABLE default")?;
        for flags in marked {
            for &f in flags {
                writeln!(out, "{}", u8::from(f))?;
            }
        }
    }

    if let Some(u) = fields.u {
        writeln!(out, "POINT_DATA {num_points}")?;
        writeln!(out, "SCALARS u double 1")?;
        writeln!(out, "LOOKUP_TABLE default")?;
        for values in u {
            for v in values {
                writeln!(out, "{v}")?;
            }
        }
    }
    Ok(())
}
