//! Discrete trace constant before and after local refinement at the
//! interface.

use nitsche_mortar::driver::{estimate_trace_constant, Geometry};
use nitsche_mortar::mesh::{refine_rgb, RefinementMarks};

fn main() -> nitsche_mortar::Result<()> {
    let [m1, _] = Geometry::TwoRectangles {
        nx1: 4,
        ny1: 4,
        nx2: 4,
        ny2: 4,
    }
    .build()?;
    println!("structured: {:.4}", estimate_trace_constant(&m1, 1.0)?);
    let mut mesh = m1;
    for round in 1..=3 {
        let mut marks = RefinementMarks::new();
        for f in mesh.interface_facets().iter().step_by(2) {
            marks.insert(mesh.id(), f.element);
        }
        mesh = refine_rgb(&mesh, &marks)?;
        println!(
            "after local refinement {round}: {:.4} ({} elements)",
            estimate_trace_constant(&mesh, 1.0)?,
            mesh.num_triangles()
        );
    }
    Ok(())
}
