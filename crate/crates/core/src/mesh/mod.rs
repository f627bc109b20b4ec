//! Conforming triangulations of the two subdomains and the intersection mesh on Γ.
//!
//! Each subdomain is meshed independently. Inside a subdomain the mesh is
//! conforming; across Γ the two traces may be arbitrary 1D partitions, which
//! [`intersect_interface`] merges into a common refinement.

mod build;
mod interface;
mod refine;
mod vtk;

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Sub};

use crate::error::{Error, Result};

pub use build::{build_lshape, build_two_rectangles};
pub use interface::{intersect_interface, InterfaceMesh, InterfaceSegment};
pub use refine::{refine_rgb, refine_uniform, RefinementMarks};
pub use vtk::{write_vtk, VtkFields};

/// Relative tolerance used for geometric coincidence tests on Γ.
pub const GEOMETRY_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dot(self, other: Self) -> f64 {
        self.x * other.x + self.y * other.y
    }

    /// z-component of the 2D cross product.
    pub fn cross(self, other: Self) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn distance(self, other: Self) -> f64 {
        (self - other).norm()
    }

    pub fn midpoint(self, other: Self) -> Self {
        Self::new(0.5 * (self.x + other.x), 0.5 * (self.y + other.y))
    }

    /// Clockwise rotation by 90 degrees; the outward normal direction of a
    /// counter-clockwise boundary edge.
    pub fn rotate_cw(self) -> Self {
        Self::new(self.y, -self.x)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl Add for Point2 {
    type Output = Point2;
    fn add(self, rhs: Self) -> Self {
        Self::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl Sub for Point2 {
    type Output = Point2;
    fn sub(self, rhs: Self) -> Self {
        Self::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Mul<Point2> for f64 {
    type Output = Point2;
    fn mul(self, rhs: Point2) -> Point2 {
        Point2::new(self * rhs.x, self * rhs.y)
    }
}

impl fmt::Display for Point2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

/// Which of the two subdomains a mesh discretises.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SubdomainId {
    One,
    Two,
}

impl SubdomainId {
    pub fn number(self) -> u8 {
        match self {
            SubdomainId::One => 1,
            SubdomainId::Two => 2,
        }
    }

    pub fn other(self) -> Self {
        match self {
            SubdomainId::One => SubdomainId::Two,
            SubdomainId::Two => SubdomainId::One,
        }
    }
}

impl fmt::Display for SubdomainId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.number())
    }
}

/// A triangle edge.
///
/// `vertices` follow the counter-clockwise orientation of `element`, so for a
/// boundary facet the outward normal is `(b - a)` rotated clockwise.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Facet {
    pub vertices: [usize; 2],
    pub element: usize,
    pub neighbor: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FacetRef {
    Interior(usize),
    Interface(usize),
    Dirichlet(usize),
}

/// Conforming triangulation of one subdomain with its facets classified as
/// interior, interface (on Γ) or Dirichlet (on ∂Ω_i \ Γ).
#[derive(Clone, Debug)]
pub struct SubdomainMesh {
    id: SubdomainId,
    vertices: Vec<Point2>,
    triangles: Vec<[usize; 3]>,
    interior_facets: Vec<Facet>,
    interface_facets: Vec<Facet>,
    dirichlet_facets: Vec<Facet>,
    element_facets: Vec<[FacetRef; 3]>,
    gamma: [Point2; 2],
}

impl SubdomainMesh {
    /// Builds a mesh from raw vertices and counter-clockwise triangles.
    ///
    /// A boundary edge is an interface facet when both of its endpoints lie on
    /// the straight segment `gamma`; every other boundary edge is Dirichlet.
    pub fn new(
        id: SubdomainId,
        vertices: Vec<Point2>,
        triangles: Vec<[usize; 3]>,
        gamma: [Point2; 2],
    ) -> Result<Self> {
        if let Some(p) = vertices.iter().find(|p| !p.is_finite()) {
            return Err(Error::Mesh(format!("non-finite vertex {p}")));
        }
        let gamma_len = gamma[0].distance(gamma[1]);
        if !(gamma_len > 0.0) {
            return Err(Error::Geometry("interface segment has zero length".into()));
        }
        for (t, tri) in triangles.iter().enumerate() {
            if tri.iter().any(|&v| v >= vertices.len()) {
                return Err(Error::Mesh(format!(
                    "triangle {t} references a missing vertex"
                )));
            }
            let area = signed_area(&vertices, tri);
            let scale = diameter_of(&vertices, tri).powi(2);
            if !(area > 1e-14 * scale) {
                return Err(Error::Mesh(format!(
                    "triangle {t} {tri:?} is degenerate or clockwise (signed area {area:e})"
                )));
            }
        }

        let mut edges: BTreeMap<(usize, usize), Vec<(usize, usize)>> = BTreeMap::new();
        for (t, tri) in triangles.iter().enumerate() {
            for e in 0..3 {
                let (a, b) = (tri[e], tri[(e + 1) % 3]);
                edges.entry((a.min(b), a.max(b))).or_default().push((t, e));
            }
        }

        let on_gamma = |p: Point2| point_on_segment(p, gamma, GEOMETRY_TOL);
        let placeholder = FacetRef::Dirichlet(usize::MAX);
        let mut element_facets = vec![[placeholder; 3]; triangles.len()];
        let mut interior_facets = Vec::new();
        let mut interface_facets = Vec::new();
        let mut dirichlet_facets = Vec::new();
        for (key, owners) in &edges {
            let (t, e) = owners[0];
            let tri = triangles[t];
            let vertices_ccw = [tri[e], tri[(e + 1) % 3]];
            match owners.len() {
                1 => {
                    let facet = Facet {
                        vertices: vertices_ccw,
                        element: t,
                        neighbor: None,
                    };
                    if on_gamma(vertices[key.0]) && on_gamma(vertices[key.1]) {
                        element_facets[t][e] = FacetRef::Interface(interface_facets.len());
                        interface_facets.push(facet);
                    } else {
                        element_facets[t][e] = FacetRef::Dirichlet(dirichlet_facets.len());
                        dirichlet_facets.push(facet);
                    }
                }
                2 => {
                    let (t2, e2) = owners[1];
                    let facet = Facet {
                        vertices: vertices_ccw,
                        element: t,
                        neighbor: Some(t2),
                    };
                    element_facets[t][e] = FacetRef::Interior(interior_facets.len());
                    element_facets[t2][e2] = FacetRef::Interior(interior_facets.len());
                    interior_facets.push(facet);
                }
                n => {
                    return Err(Error::Mesh(format!(
                        "edge {key:?} is shared by {n} triangles"
                    )))
                }
            }
        }

        Ok(Self {
            id,
            vertices,
            triangles,
            interior_facets,
            interface_facets,
            dirichlet_facets,
            element_facets,
            gamma,
        })
    }

    pub fn id(&self) -> SubdomainId {
        self.id
    }

    pub fn vertices(&self) -> &[Point2] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn interior_facets(&self) -> &[Facet] {
        &self.interior_facets
    }

    pub fn interface_facets(&self) -> &[Facet] {
        &self.interface_facets
    }

    pub fn dirichlet_facets(&self) -> &[Facet] {
        &self.dirichlet_facets
    }

    /// Facet classification of the three edges of `t`, edge `e` joining local
    /// vertices `e` and `e + 1`.
    pub fn element_facets(&self, t: usize) -> &[FacetRef; 3] {
        &self.element_facets[t]
    }

    pub fn gamma(&self) -> [Point2; 2] {
        self.gamma
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn triangle_points(&self, t: usize) -> [Point2; 3] {
        let tri = self.triangles[t];
        [
            self.vertices[tri[0]],
            self.vertices[tri[1]],
            self.vertices[tri[2]],
        ]
    }

    pub fn area(&self, t: usize) -> f64 {
        signed_area(&self.vertices, &self.triangles[t])
    }

    pub fn total_area(&self) -> f64 {
        (0..self.num_triangles()).map(|t| self.area(t)).sum()
    }

    /// Longest edge of triangle `t`.
    pub fn diameter(&self, t: usize) -> f64 {
        diameter_of(&self.vertices, &self.triangles[t])
    }

    pub fn facet_points(&self, facet: &Facet) -> [Point2; 2] {
        [
            self.vertices[facet.vertices[0]],
            self.vertices[facet.vertices[1]],
        ]
    }

    pub fn facet_length(&self, facet: &Facet) -> f64 {
        let [a, b] = self.facet_points(facet);
        a.distance(b)
    }

    /// Unit normal pointing out of `facet.element`.
    pub fn facet_normal(&self, facet: &Facet) -> Point2 {
        let [a, b] = self.facet_points(facet);
        let d = (b - a).rotate_cw();
        (1.0 / d.norm()) * d
    }

    /// Flags vertices touching a Dirichlet facet.
    pub fn dirichlet_vertices(&self) -> Vec<bool> {
        let mut flags = vec![false; self.vertices.len()];
        for f in &self.dirichlet_facets {
            flags[f.vertices[0]] = true;
            flags[f.vertices[1]] = true;
        }
        flags
    }

    /// Smallest interior angle over all triangles, in radians.
    pub fn min_angle(&self) -> f64 {
        (0..self.num_triangles())
            .flat_map(|t| {
                let p = self.triangle_points(t);
                (0..3).map(move |i| {
                    let u = p[(i + 1) % 3] - p[i];
                    let v = p[(i + 2) % 3] - p[i];
                    u.cross(v).atan2(u.dot(v))
                })
            })
            .fold(f64::INFINITY, f64::min)
    }

    /// Gradients of the three barycentric (P1 nodal) basis functions on `t`.
    pub fn basis_gradients(&self, t: usize) -> [Point2; 3] {
        let p = self.triangle_points(t);
        let twice_area = 2.0 * self.area(t);
        std::array::from_fn(|i| {
            let edge = p[(i + 2) % 3] - p[(i + 1) % 3];
            (1.0 / twice_area) * Point2::new(-edge.y, edge.x)
        })
    }

    /// Barycentric coordinates of `p` with respect to triangle `t`.
    pub fn barycentric(&self, t: usize, p: Point2) -> [f64; 3] {
        let q = self.triangle_points(t);
        let twice_area = 2.0 * self.area(t);
        std::array::from_fn(|i| (q[(i + 1) % 3] - p).cross(q[(i + 2) % 3] - p) / twice_area)
    }

    /// Checks the within-subdomain conformity contract: every facet has at
    /// most two parents and no vertex lies in the relative interior of a facet.
    /// Returns a description of the first violation.
    pub fn conformity_violation(&self) -> Option<String> {
        let scale = self
            .vertices
            .iter()
            .fold(0.0_f64, |m, p| m.max(p.x.abs()).max(p.y.abs()))
            .max(1.0);
        let all = self
            .interior_facets
            .iter()
            .chain(&self.interface_facets)
            .chain(&self.dirichlet_facets);
        for facet in all {
            let [a, b] = self.facet_points(facet);
            let len = a.distance(b);
            let (lo_x, hi_x) = (a.x.min(b.x), a.x.max(b.x));
            let (lo_y, hi_y) = (a.y.min(b.y), a.y.max(b.y));
            for (v, &p) in self.vertices.iter().enumerate() {
                if facet.vertices.contains(&v) {
                    continue;
                }
                let tol = 1e-12 * scale;
                if p.x < lo_x - tol || p.x > hi_x + tol || p.y < lo_y - tol || p.y > hi_y + tol {
                    continue;
                }
                let off_line = (b - a).cross(p - a).abs() / len;
                let along = (p - a).dot(b - a) / (len * len);
                if off_line <= tol && along > 1e-12 && along < 1.0 - 1e-12 {
                    return Some(format!(
                        "vertex {v} at {p} hangs on facet {:?}",
                        facet.vertices
                    ));
                }
            }
        }
        None
    }

    /// Position of `p` along Γ measured from its first endpoint.
    pub fn gamma_parameter(&self, p: Point2) -> f64 {
        gamma_parameter(self.gamma, p)
    }
}

pub(crate) fn signed_area(vertices: &[Point2], tri: &[usize; 3]) -> f64 {
    let (a, b, c) = (vertices[tri[0]], vertices[tri[1]], vertices[tri[2]]);
    0.5 * (b - a).cross(c - a)
}

pub(crate) fn diameter_of(vertices: &[Point2], tri: &[usize; 3]) -> f64 {
    (0..3)
        .map(|e| vertices[tri[e]].distance(vertices[tri[(e + 1) % 3]]))
        .fold(0.0, f64::max)
}

pub(crate) fn gamma_parameter(gamma: [Point2; 2], p: Point2) -> f64 {
    let d = gamma[1] - gamma[0];
    (p - gamma[0]).dot(d) / d.norm()
}

/// Whether `p` lies on the closed segment `seg` up to `rel_tol * |seg|`.
pub(crate) fn point_on_segment(p: Point2, seg: [Point2; 2], rel_tol: f64) -> bool {
    let d = seg[1] - seg[0];
    let len = d.norm();
    let tol = rel_tol * len;
    let off_line = d.cross(p - seg[0]).abs() / len;
    let t = (p - seg[0]).dot(d) / len;
    off_line <= tol && t >= -tol && t <= len + tol
}
