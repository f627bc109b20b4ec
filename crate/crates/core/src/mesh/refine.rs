//! Red-green-blue refinement with longest-edge reference edges.
//!
//! Marked triangles are quadrisected (red). The closure marks the reference
//! edge of every triangle that has any marked edge, after which each triangle
//! falls into one of four patterns: untouched, green (reference edge only),
//! blue (reference edge plus one more) or red (all three edges).

use std::collections::{BTreeMap, BTreeSet};

use super::{Point2, SubdomainId, SubdomainMesh};
use crate::error::Result;

/// Triangles selected for red refinement, keyed by subdomain.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RefinementMarks {
    pub marked: BTreeSet<(SubdomainId, usize)>,
}

impl RefinementMarks {
    pub fn new() -> Self {
        Self::default()
    }

    /// Marks every triangle of the given meshes.
    pub fn all(meshes: &[&SubdomainMesh]) -> Self {
        let marked = meshes
            .iter()
            .flat_map(|m| (0..m.num_triangles()).map(move |t| (m.id(), t)))
            .collect();
        Self { marked }
    }

    pub fn insert(&mut self, id: SubdomainId, triangle: usize) {
        self.marked.insert((id, triangle));
    }

    pub fn contains(&self, id: SubdomainId, triangle: usize) -> bool {
        self.marked.contains(&(id, triangle))
    }

    pub fn count(&self, id: SubdomainId) -> usize {
        self.marked.iter().filter(|(s, _)| *s == id).count()
    }

    pub fn len(&self) -> usize {
        self.marked.len()
    }

    pub fn is_empty(&self) -> bool {
        self.marked.is_empty()
    }

    pub fn triangles_of(&self, id: SubdomainId) -> impl Iterator<Item = usize> + '_ {
        self.marked
            .iter()
            .filter(move |(s, _)| *s == id)
            .map(|&(_, t)| t)
    }
}

fn edge_key(a: usize, b: usize) -> (usize, usize) {
    (a.min(b), a.max(b))
}

/// Local index `e` of the reference edge (`tri[e]`, `tri[e + 1]`): the longest
/// edge, ties going to the lexicographically smallest sorted vertex pair.
fn reference_edge(vertices: &[Point2], tri: &[usize; 3]) -> usize {
    let len2 = |e: usize| {
        let d = vertices[tri[(e + 1) % 3]] - vertices[tri[e]];
        d.dot(d)
    };
    let longest = (0..3).map(len2).fold(0.0, f64::max);
    (0..3)
        .filter(|&e| len2(e) >= longest * (1.0 - 1e-12))
        .min_by_key(|&e| edge_key(tri[e], tri[(e + 1) % 3]))
        .expect("triangle has edges")
}

/// Refines the triangles of `mesh` marked in `marks` and closes the result
/// with green and blue bisections so that it stays conforming.
pub fn refine_rgb(mesh: &SubdomainMesh, marks: &RefinementMarks) -> Result<SubdomainMesh> {
    let vertices = mesh.vertices();
    let triangles = mesh.triangles();
    let refs: Vec<usize> = triangles
        .iter()
        .map(|t| reference_edge(vertices, t))
        .collect();

    let mut marked_edges: BTreeSet<(usize, usize)> = BTreeSet::new();
    for t in marks.triangles_of(mesh.id()) {
        let tri = triangles[t];
        for e in 0..3 {
            marked_edges.insert(edge_key(tri[e], tri[(e + 1) % 3]));
        }
    }
    if marked_edges.is_empty() {
        return Ok(mesh.clone());
    }

    loop {
        let mut changed = false;
        for (tri, &r) in triangles.iter().zip(&refs) {
            let has_mark =
                (0..3).any(|e| marked_edges.contains(&edge_key(tri[e], tri[(e + 1) % 3])));
            if has_mark && marked_edges.insert(edge_key(tri[r], tri[(r + 1) % 3])) {
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }

    let mut new_vertices = vertices.to_vec();
    let mut midpoint: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    for &(a, b) in &marked_edges {
        midpoint.insert((a, b), new_vertices.len());
        new_vertices.push(vertices[a].midpoint(vertices[b]));
    }
    let mid = |a: usize, b: usize| midpoint.get(&edge_key(a, b)).copied();

    let mut new_triangles = Vec::with_capacity(triangles.len() * 2);
    for (tri, &r) in triangles.iter().zip(&refs) {
        // rotate so the reference edge is (v0, v1)
        let [v0, v1, v2] = [tri[r], tri[(r + 1) % 3], tri[(r + 2) % 3]];
        match (mid(v0, v1), mid(v1, v2), mid(v2, v0)) {
            (None, _, _) => new_triangles.push(*tri),
            (Some(m01), None, None) => {
                new_triangles.push([v0, m01, v2]);
                new_triangles.push([m01, v1, v2]);
            }
            (Some(m01), Some(m12), None) => {
                new_triangles.push([v0, m01, v2]);
                new_triangles.push([m01, v1, m12]);
                new_triangles.push([m01, m12, v2]);
            }
            (Some(m01), None, Some(m20)) => {
                new_triangles.push([v0, m01, m20]);
                new_triangles.push([m20, m01, v2]);
                new_triangles.push([m01, v1, v2]);
            }
            (Some(m01), Some(m12), Some(m20)) => {
                new_triangles.push([v0, m01, m20]);
                new_triangles.push([m01, v1, m12]);
                new_triangles.push([m20, m12, v2]);
                new_triangles.push([m01, m12, m20]);
            }
        }
    }

    SubdomainMesh::new(mesh.id(), new_vertices, new_triangles, mesh.gamma())
}

/// Red-refines every triangle.
pub fn refine_uniform(mesh: &SubdomainMesh) -> Result<SubdomainMesh> {
    refine_rgb(mesh, &RefinementMarks::all(&[mesh]))
}
