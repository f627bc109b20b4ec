//! Piecewise-linear finite element core.

pub mod quadrature;
mod sparse;

use crate::error::{Error, Result};
use crate::mesh::{InterfaceMesh, Point2, SubdomainMesh};

pub use quadrature::{integrate_segment, integrate_triangle, QuadratureRule};
pub use sparse::{max_abs_diff, norm2, SparseSymMatrix, TripletBuilder};

/// Global numbering of the unknowns.
///
/// Vertices of the first mesh come first, then the vertices of the second
/// mesh, then (for mixed systems) two multiplier coefficients per
/// intersection segment.
#[derive(Clone, Debug)]
pub struct DofMap {
    vertex_offset: [usize; 2],
    num_primal: usize,
    num_multiplier: usize,
    dirichlet: Vec<bool>,
    free: Vec<usize>,
}

impl DofMap {
    pub fn new(meshes: [&SubdomainMesh; 2], interface: Option<&InterfaceMesh>) -> Self {
        let n0 = meshes[0].num_vertices();
        let n1 = meshes[1].num_vertices();
        let num_multiplier = interface.map_or(0, |im| 2 * im.len());
        let mut dirichlet = meshes[0].dirichlet_vertices();
        dirichlet.extend(meshes[1].dirichlet_vertices());
        dirichlet.extend(std::iter::repeat_n(false, num_multiplier));
        Self::with_layout([0, n0], n0 + n1, num_multiplier, dirichlet)
    }

    /// Single-mesh numbering with Dirichlet vertices taken from the mesh.
    pub fn for_mesh(mesh: &SubdomainMesh) -> Self {
        Self::from_mask(mesh.dirichlet_vertices())
    }

    /// Generic numbering from an explicit Dirichlet mask.
    pub fn from_mask(dirichlet: Vec<bool>) -> Self {
        let n = dirichlet.len();
        Self::with_layout([0, n], n, 0, dirichlet)
    }

    fn with_layout(
        vertex_offset: [usize; 2],
        num_primal: usize,
        num_multiplier: usize,
        dirichlet: Vec<bool>,
    ) -> Self {
        let free = (0..dirichlet.len()).filter(|&i| !dirichlet[i]).collect();
        Self {
            vertex_offset,
            num_primal,
            num_multiplier,
            dirichlet,
            free,
        }
    }

    pub fn vertex_dof(&self, side: usize, vertex: usize) -> usize {
        self.vertex_offset[side] + vertex
    }

    pub fn vertex_offset(&self, side: usize) -> usize {
        self.vertex_offset[side]
    }

    pub fn multiplier_dof(&self, segment: usize, local: usize) -> usize {
        self.num_primal + 2 * segment + local
    }

    pub fn num_primal(&self) -> usize {
        self.num_primal
    }

    pub fn num_multiplier(&self) -> usize {
        self.num_multiplier
    }

    pub fn len(&self) -> usize {
        self.dirichlet.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dirichlet.is_empty()
    }

    pub fn is_dirichlet(&self, dof: usize) -> bool {
        self.dirichlet[dof]
    }

    /// Free dofs in increasing order.
    pub fn free_dofs(&self) -> &[usize] {
        &self.free
    }

    pub fn num_free(&self) -> usize {
        self.free.len()
    }
}

/// Nodal values per subdomain and, when available, two multiplier
/// coefficients (values at the segment endpoints) per intersection segment.
#[derive(Clone, Debug, PartialEq)]
pub struct Solution {
    pub u: [Vec<f64>; 2],
    pub multiplier: Option<Vec<[f64; 2]>>,
}

impl Solution {
    /// Splits a full-length coefficient vector according to `dofmap`.
    pub fn from_vector(x: &[f64], dofmap: &DofMap) -> Self {
        let (o0, o1) = (dofmap.vertex_offset(0), dofmap.vertex_offset(1));
        let u = [x[o0..o1].to_vec(), x[o1..dofmap.num_primal()].to_vec()];
        let multiplier = (dofmap.num_multiplier() > 0).then(|| {
            x[dofmap.num_primal()..]
                .chunks_exact(2)
                .map(|c| [c[0], c[1]])
                .collect()
        });
        Solution { u, multiplier }
    }

    /// Value of the P1 function of side `side` on triangle `t` at `p`.
    pub fn value_in(&self, mesh: &SubdomainMesh, side: usize, t: usize, p: Point2) -> f64 {
        let tri = mesh.triangles()[t];
        let l = mesh.barycentric(t, p);
        (0..3).map(|i| l[i] * self.u[side][tri[i]]).sum()
    }

    /// Constant gradient of side `side` on triangle `t`.
    pub fn gradient_in(&self, mesh: &SubdomainMesh, side: usize, t: usize) -> Point2 {
        element_gradient(mesh, &self.u[side], t)
    }
}

pub fn element_gradient(mesh: &SubdomainMesh, u: &[f64], t: usize) -> Point2 {
    let tri = mesh.triangles()[t];
    let g = mesh.basis_gradients(t);
    (0..3).fold(Point2::default(), |acc, i| acc + u[tri[i]] * g[i])
}

/// Local stiffness `k (∇φ_i, ∇φ_j)_K` of a P1 triangle.
pub fn element_stiffness(p: [Point2; 3], k: f64) -> Result<[[f64; 3]; 3]> {
    let area = 0.5 * (p[1] - p[0]).cross(p[2] - p[0]);
    let scale = (0..3)
        .map(|i| p[i].distance(p[(i + 1) % 3]))
        .fold(0.0, f64::max);
    if !(area.abs() > 1e-14 * scale * scale) {
        return Err(Error::Assembly(format!(
            "degenerate triangle {} {} {} (area {area:e})",
            p[0], p[1], p[2]
        )));
    }
    let grads: [Point2; 3] = std::array::from_fn(|i| {
        let e = p[(i + 2) % 3] - p[(i + 1) % 3];
        (0.5 / area) * Point2::new(-e.y, e.x)
    });
    Ok(std::array::from_fn(|i| {
        std::array::from_fn(|j| k * area.abs() * grads[i].dot(grads[j]))
    }))
}

/// Adds `k (∇u, ∇v)` over `mesh` to `builder`, vertex `v` mapping to `offset + v`.
pub fn add_stiffness(
    builder: &mut TripletBuilder,
    mesh: &SubdomainMesh,
    k: f64,
    offset: usize,
) -> Result<()> {
    if !(k > 0.0) {
        return Err(Error::Parameter(format!(
            "material parameter must be positive, got {k}"
        )));
    }
    for (t, tri) in mesh.triangles().iter().enumerate() {
        let local = element_stiffness(mesh.triangle_points(t), k)?;
        for i in 0..3 {
            for j in 0..3 {
                builder.add(offset + tri[i], offset + tri[j], local[i][j]);
            }
        }
    }
    Ok(())
}

/// Stiffness matrix of one subdomain on its own vertex numbering, before any
/// boundary condition.
pub fn assemble_stiffness(mesh: &SubdomainMesh, k: f64) -> Result<SparseSymMatrix> {
    let mut b = TripletBuilder::new(mesh.num_vertices());
    add_stiffness(&mut b, mesh, k, 0)?;
    Ok(b.build())
}

/// Adds `(f, φ_j)` over `mesh` into `rhs[offset + j]`.
pub fn add_load(rhs: &mut [f64], mesh: &SubdomainMesh, f: &dyn Fn(Point2) -> f64, offset: usize) {
    for (t, tri) in mesh.triangles().iter().enumerate() {
        let p = mesh.triangle_points(t);
        for i in 0..3 {
            rhs[offset + tri[i]] += integrate_triangle(p, |x, l| f(x) * l[i]);
        }
    }
}

pub fn assemble_load(mesh: &SubdomainMesh, f: &dyn Fn(Point2) -> f64) -> Vec<f64> {
    let mut rhs = vec![0.0; mesh.num_vertices()];
    add_load(&mut rhs, mesh, f, 0);
    rhs
}

/// L² projection of `f` onto P1 on the triangle `p`, returned as values at
/// the three vertices.
pub fn project_element(p: [Point2; 3], f: &dyn Fn(Point2) -> f64) -> [f64; 3] {
    // the P1 mass matrix is area/12 * (1 + δ_ij); its inverse is
    // (3/area) * (4 δ_ij - 1)
    let area = 0.5 * (p[1] - p[0]).cross(p[2] - p[0]);
    let moments: [f64; 3] = std::array::from_fn(|i| integrate_triangle(p, |x, l| f(x) * l[i]));
    let total: f64 = moments.iter().sum();
    std::array::from_fn(|i| 3.0 / area * (4.0 * moments[i] - total))
}

/// Elementwise L² projection of `f` onto P1(K) for every triangle of `mesh`.
pub fn project_f(mesh: &SubdomainMesh, f: &dyn Fn(Point2) -> f64) -> Vec<[f64; 3]> {
    (0..mesh.num_triangles())
        .map(|t| project_element(mesh.triangle_points(t), f))
        .collect()
}

/// Linear system restricted to the free dofs.
#[derive(Clone, Debug)]
pub struct ReducedSystem {
    pub matrix: SparseSymMatrix,
    pub rhs: Vec<f64>,
}

/// Removes Dirichlet rows and columns, moving the prescribed values
/// `dirichlet_values` (indexed like the full system, read only at Dirichlet
/// dofs) to the right-hand side.
pub fn eliminate_dirichlet(
    matrix: &SparseSymMatrix,
    rhs: &[f64],
    dofmap: &DofMap,
    dirichlet_values: Option<&[f64]>,
) -> Result<ReducedSystem> {
    if matrix.dim() != dofmap.len() || rhs.len() != dofmap.len() {
        return Err(Error::Usage(format!(
            "system of size {} / rhs {} does not match {} dofs",
            matrix.dim(),
            rhs.len(),
            dofmap.len()
        )));
    }
    let free = dofmap.free_dofs();
    let reduced_rhs = free
        .iter()
        .map(|&i| {
            let lift: f64 = match dirichlet_values {
                Some(g) => matrix
                    .row(i)
                    .filter(|&(j, _)| dofmap.is_dirichlet(j))
                    .map(|(j, v)| v * g[j])
                    .sum(),
                None => 0.0,
            };
            rhs[i] - lift
        })
        .collect();
    Ok(ReducedSystem {
        matrix: matrix.restrict(free),
        rhs: reduced_rhs,
    })
}

/// Re-inserts Dirichlet values (zero by default) into a reduced solution.
pub fn expand_solution(
    reduced: &[f64],
    dofmap: &DofMap,
    dirichlet_values: Option<&[f64]>,
) -> Vec<f64> {
    let mut full = match dirichlet_values {
        Some(g) => (0..dofmap.len())
            .map(|i| if dofmap.is_dirichlet(i) { g[i] } else { 0.0 })
            .collect(),
        None => vec![0.0; dofmap.len()],
    };
    for (&i, &v) in dofmap.free_dofs().iter().zip(reduced) {
        full[i] = v;
    }
    full
}

fn check_on_segment(interface: &InterfaceMesh, segment: usize, p: Point2) -> Result<()> {
    let seg = &interface.segments()[segment];
    let [a, b] = seg.endpoints;
    let len = a.distance(b);
    let tol = 1e-10 * interface.gamma_length();
    let off = (b - a).cross(p - a).abs() / len;
    let s = (p - a).dot(b - a) / len;
    if off > tol || s < -tol || s > len + tol {
        return Err(Error::Geometry(format!(
            "point {p} is not on interface segment {segment}"
        )));
    }
    Ok(())
}

/// Trace of the side-`side` field at a point of intersection segment `segment`.
pub fn trace_value(
    meshes: [&SubdomainMesh; 2],
    u: &Solution,
    interface: &InterfaceMesh,
    segment: usize,
    side: usize,
    p: Point2,
) -> Result<f64> {
    check_on_segment(interface, segment, p)?;
    let t = interface.segments()[segment].elements[side];
    Ok(u.value_in(meshes[side], side, t, p))
}

/// `k ∂u_side/∂n` at a point of segment `segment`, with `n` the interface
/// normal pointing from the first mesh into the second. Constant on each
/// parent triangle for P1.
pub fn trace_normal_flux(
    meshes: [&SubdomainMesh; 2],
    u: &Solution,
    interface: &InterfaceMesh,
    segment: usize,
    side: usize,
    k: f64,
    p: Point2,
) -> Result<f64> {
    check_on_segment(interface, segment, p)?;
    let t = interface.segments()[segment].elements[side];
    Ok(k * u.gradient_in(meshes[side], side, t).dot(interface.normal()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_two_rectangles, intersect_interface, SubdomainId};

    fn unit_right_triangle() -> [Point2; 3] {
        [
            Point2::new(0.0, 0.0),
            Point2::new(1.0, 0.0),
            Point2::new(0.0, 1.0),
        ]
    }

    #[test]
    fn unit_triangle_stiffness() {
        let k = element_stiffness(unit_right_triangle(), 1.0).unwrap();
        let expected = [[1.0, -0.5, -0.5], [-0.5, 0.5, 0.0], [-0.5, 0.0, 0.5]];
        for i in 0..3 {
            for j in 0..3 {
                assert!((k[i][j] - expected[i][j]).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn degenerate_triangle_is_assembly_error() {
        let p = [
            Point2::new(0.0, 0.0),
            Point2::new(1.0, 0.0),
            Point2::new(2.0, 0.0),
        ];
        assert!(matches!(element_stiffness(p, 1.0), Err(Error::Assembly(_))));
    }

    #[test]
    fn stiffness_linear_in_k_and_zero_row_sums() {
        let (m1, _) = build_two_rectangles(3, 4, 1, 1).unwrap();
        let a1 = assemble_stiffness(&m1, 1.0).unwrap();
        let a2 = assemble_stiffness(&m1, 2.0).unwrap();
        for i in 0..a1.dim() {
            let sum: f64 = a1.row(i).map(|(_, v)| v).sum();
            assert!(sum.abs() < 1e-13);
            for (j, v) in a1.row(i) {
                assert_eq!(a2.get(i, j), 2.0 * v);
            }
        }
        assert_eq!(a1.symmetry_defect(), 0.0);
        assert_eq!(assemble_stiffness(&m1, 1.0).unwrap(), a1);
        assert!(assemble_stiffness(&m1, 0.0).is_err());
    }

    #[test]
    fn load_vectors() {
        let (m1, _) = build_two_rectangles(3, 2, 1, 1).unwrap();
        assert!(assemble_load(&m1, &|_| 0.0).iter().all(|&v| v == 0.0));
        let total: f64 = assemble_load(&m1, &|_| 1.0).iter().sum();
        assert!((total - 1.0).abs() < 1e-12);
        let (m1, _) = build_two_rectangles(1, 1, 1, 1).unwrap();
        let total: f64 = assemble_load(&m1, &|p| p.x).iter().sum();
        assert!((total - 0.5).abs() < 1e-12);
    }

    #[test]
    fn projection_reproduces_linears() {
        let p = [
            Point2::new(0.2, 0.1),
            Point2::new(1.3, 0.4),
            Point2::new(0.5, 1.1),
        ];
        let c = project_element(p, &|_| 3.5);
        assert!(c.iter().all(|v| (v - 3.5).abs() < 1e-12));
        let f = |x: Point2| 1.0 + 2.0 * x.x - 0.7 * x.y;
        let c = project_element(p, &f);
        for i in 0..3 {
            assert!((c[i] - f(p[i])).abs() < 1e-12);
        }
    }

    #[test]
    fn projection_of_quadratic_is_orthogonal() {
        // residual f - f_h must be orthogonal to 1, x, y
        let p = unit_right_triangle();
        let f = |x: Point2| x.x * x.x;
        let c = project_element(p, &f);
        let fh = |x: Point2| c[0] * (1.0 - x.x - x.y) + c[1] * x.x + c[2] * x.y;
        for q in [|_: Point2| 1.0, |x: Point2| x.x, |x: Point2| x.y] {
            let r = integrate_triangle(p, |x, _| (f(x) - fh(x)) * q(x));
            assert!(r.abs() < 1e-12, "{r}");
        }
        // exact projection of x² on the reference triangle
        let expected = [-0.1, 0.7, -0.1];
        for i in 0..3 {
            assert!((c[i] - expected[i]).abs() < 1e-12, "{c:?}");
        }
    }

    #[test]
    fn dirichlet_elimination_cases() {
        let m = SparseSymMatrix::from_dense(&[
            vec![2.0, -1.0, 0.0],
            vec![-1.0, 2.0, -1.0],
            vec![0.0, -1.0, 2.0],
        ]);
        let rhs = [1.0, 1.0, 1.0];

        let all = DofMap::from_mask(vec![true; 3]);
        let r = eliminate_dirichlet(&m, &rhs, &all, None).unwrap();
        assert_eq!(r.matrix.dim(), 0);
        assert_eq!(expand_solution(&[], &all, None), vec![0.0; 3]);

        let none = DofMap::from_mask(vec![false; 3]);
        let r = eliminate_dirichlet(&m, &rhs, &none, None).unwrap();
        assert_eq!(r.matrix, m);
        assert_eq!(r.rhs, rhs);

        // 1D strip: ends fixed at 0 and 3, middle equation 2u = 1 + 0 + 3
        let ends = DofMap::from_mask(vec![true, false, true]);
        let g = [0.0, 0.0, 3.0];
        let r = eliminate_dirichlet(&m, &rhs, &ends, Some(&g)).unwrap();
        assert_eq!(r.matrix.dim(), 1);
        let u = r.rhs[0] / r.matrix.get(0, 0);
        assert!((u - 2.0).abs() < 1e-15);
        assert_eq!(expand_solution(&[u], &ends, Some(&g)), vec![0.0, 2.0, 3.0]);

        assert!(eliminate_dirichlet(&m, &rhs[..2], &none, None).is_err());
    }

    #[test]
    fn traces_of_linear_fields() {
        let (m1, m2) = build_two_rectangles(3, 3, 2, 4).unwrap();
        let im = intersect_interface(&m1, &m2).unwrap();
        let f = |p: Point2| 0.3 + p.x - 2.0 * p.y;
        let u1: Vec<f64> = m1.vertices().iter().map(|&p| p.x).collect();
        let u = Solution {
            u: [u1, m2.vertices().iter().map(|&p| f(p)).collect()],
            multiplier: None,
        };
        let cont = Solution {
            u: [
                m1.vertices().iter().map(|&p| f(p)).collect(),
                u.u[1].clone(),
            ],
            multiplier: None,
        };
        for (s, seg) in im.segments().iter().enumerate() {
            for q in [0.0, 0.3, 1.0] {
                let p = seg.point(q);
                let jump = trace_value([&m1, &m2], &cont, &im, s, 0, p).unwrap()
                    - trace_value([&m1, &m2], &cont, &im, s, 1, p).unwrap();
                assert!(jump.abs() < 1e-14);
                let flux = trace_normal_flux([&m1, &m2], &u, &im, s, 0, 2.0, p).unwrap();
                assert!((flux - 2.0).abs() < 1e-13);
            }
        }
        let off = Point2::new(0.9, 0.5);
        assert!(matches!(
            trace_value([&m1, &m2], &u, &im, 0, 0, off),
            Err(Error::Geometry(_))
        ));
        assert_eq!(m1.id(), SubdomainId::One);
    }
}
