use super::{Point2, SubdomainId, SubdomainMesh};
use crate::error::{Error, Result};

/// Structured grid of `nx × ny` cells on `[x0, x1] × [y0, y1]`, each cell cut
/// along its lower-left to upper-right diagonal.
fn rectangle_grid(
    (x0, x1): (f64, f64),
    (y0, y1): (f64, f64),
    nx: usize,
    ny: usize,
) -> (Vec<Point2>, Vec<[usize; 3]>) {
    let mut vertices = Vec::with_capacity((nx + 1) * (ny + 1));
    for j in 0..=ny {
        let y = y0 + (y1 - y0) * j as f64 / ny as f64;
        for i in 0..=nx {
            let x = x0 + (x1 - x0) * i as f64 / nx as f64;
            vertices.push(Point2::new(x, y));
        }
    }
    let index = |i: usize, j: usize| j * (nx + 1) + i;
    let mut triangles = Vec::with_capacity(2 * nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            let (v00, v10, v01, v11) = (
                index(i, j),
                index(i + 1, j),
                index(i, j + 1),
                index(i + 1, j + 1),
            );
            triangles.push([v00, v10, v11]);
            triangles.push([v00, v11, v01]);
        }
    }
    (vertices, triangles)
}

fn check_counts(counts: &[usize]) -> Result<()> {
    if counts.contains(&0) {
        return Err(Error::Parameter(format!(
            "mesh counts must be at least 1, got {counts:?}"
        )));
    }
    Ok(())
}

/// Ω₁ = (0,1)² and Ω₂ = (1,2)×(0,1) with Γ = {1}×(0,1). The traces on Γ do
/// not match when `ny1 != ny2`.
pub fn build_two_rectangles(
    nx1: usize,
    ny1: usize,
    nx2: usize,
    ny2: usize,
) -> Result<(SubdomainMesh, SubdomainMesh)> {
    check_counts(&[nx1, ny1, nx2, ny2])?;
    let gamma = [Point2::new(1.0, 0.0), Point2::new(1.0, 1.0)];
    let (v1, t1) = rectangle_grid((0.0, 1.0), (0.0, 1.0), nx1, ny1);
    let (v2, t2) = rectangle_grid((1.0, 2.0), (0.0, 1.0), nx2, ny2);
    Ok((
        SubdomainMesh::new(SubdomainId::One, v1, t1, gamma)?,
        SubdomainMesh::new(SubdomainId::Two, v2, t2, gamma)?,
    ))
}

/// L-shaped domain: Ω₁ = (0,1)² with `n × n` cells and Ω₂ = (1,2)×(0,2) with
/// `n × 2n` cells. Γ = {1}×(0,1); the reentrant corner (1,1) is an endpoint
/// of Γ.
pub fn build_lshape(n: usize) -> Result<(SubdomainMesh, SubdomainMesh)> {
    check_counts(&[n])?;
    let gamma = [Point2::new(1.0, 0.0), Point2::new(1.0, 1.0)];
    let (v1, t1) = rectangle_grid((0.0, 1.0), (0.0, 1.0), n, n);
    let (v2, t2) = rectangle_grid((1.0, 2.0), (0.0, 2.0), n, 2 * n);
    Ok((
        SubdomainMesh::new(SubdomainId::One, v1, t1, gamma)?,
        SubdomainMesh::new(SubdomainId::Two, v2, t2, gamma)?,
    ))
}
