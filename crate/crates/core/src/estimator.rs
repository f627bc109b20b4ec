//! Residual a posteriori indicators, data oscillation and marking.
//!
//! All per-item values are stored unsquared (`η ≥ 0`); sums are formed over
//! squares. Interface terms are integrated segmentwise over the intersection
//! mesh because the opposite trace is only piecewise affine on a facet.

use std::io::{self, Write};

use crate::coupling::{interface_state, segment_coefficients, CouplingParams, Variant};
use crate::error::{Error, Result};
use crate::fem::{
    element_gradient, integrate_segment, integrate_triangle, project_element, Solution,
};
use crate::mesh::{Facet, FacetRef, InterfaceMesh, RefinementMarks, SubdomainMesh};

/// Source term as a function of position.
pub type Load<'a> = &'a dyn Fn(crate::mesh::Point2) -> f64;

/// Local indicators of one solution on a pair of meshes. Every vector is
/// indexed by side (0 or 1, in the order the meshes were given) and then by
/// the subdomain's own element or facet numbering.
#[derive(Clone, Debug, PartialEq)]
pub struct IndicatorSet {
    pub element: [Vec<f64>; 2],
    pub interior_facet: [Vec<f64>; 2],
    pub interface_facet: [Vec<f64>; 2],
    pub oscillation: [Vec<f64>; 2],
    /// Element marking quantity `E_K`.
    pub marking: [Vec<f64>; 2],
    pub eta: f64,
}

impl IndicatorSet {
    /// Sum of all local squared indicators.
    pub fn local_sum_of_squares(&self) -> f64 {
        [&self.element, &self.interior_facet, &self.interface_facet]
            .into_iter()
            .flat_map(|sides| sides.iter().flatten())
            .map(|v| v * v)
            .sum()
    }

    pub fn oscillation_total(&self) -> f64 {
        self.oscillation
            .iter()
            .flatten()
            .map(|v| v * v)
            .sum::<f64>()
            .sqrt()
    }
}

/// `(h_K²/k) ‖f‖²_K` with `h_K` the longest edge; for P1 the divergence
/// term of the element residual vanishes.
pub fn eta_element(mesh: &SubdomainMesh, t: usize, f: Load<'_>, k: f64) -> f64 {
    let h = mesh.diameter(t);
    let norm2 = integrate_triangle(mesh.triangle_points(t), |x, _| f(x).powi(2));
    (h * h / k * norm2).sqrt()
}

/// `(h_E/k) ‖⟦k ∂u/∂n⟧‖²_E` across an interior facet.
pub fn eta_interior_facet(mesh: &SubdomainMesh, facet: &Facet, u: &[f64], k: f64) -> f64 {
    let neighbor = facet.neighbor.expect("interior facet has two parents");
    let n = mesh.facet_normal(facet);
    let jump =
        k * (element_gradient(mesh, u, facet.element) - element_gradient(mesh, u, neighbor)).dot(n);
    let h = mesh.facet_length(facet);
    (h / k * jump * jump * h).sqrt()
}

/// `(h_E/k_i) ‖λ_h - k_i ∂u_i/∂n‖²_E + (k_i/h_E) ‖⟦u_h⟧‖²_E` for interface
/// facet `facet` of side `side`, using the multiplier stored in `u`.
pub fn eta_interface_facet(
    meshes: [&SubdomainMesh; 2],
    interface: &InterfaceMesh,
    side: usize,
    facet: usize,
    u: &Solution,
    params: &CouplingParams,
) -> Result<f64> {
    let segments: Vec<usize> = interface.segments_of_facet(side, facet).collect();
    interface_indicator(meshes, interface, side, facet, &segments, u, params)
}

fn interface_indicator(
    meshes: [&SubdomainMesh; 2],
    interface: &InterfaceMesh,
    side: usize,
    facet: usize,
    segments: &[usize],
    u: &Solution,
    params: &CouplingParams,
) -> Result<f64> {
    let lam = u
        .multiplier
        .as_ref()
        .ok_or_else(|| Error::Usage("interface indicator needs a multiplier".into()))?;
    let k = params.k();
    let h = meshes[side].facet_length(&meshes[side].interface_facets()[facet]);
    let (mut flux_mismatch, mut jump2) = (0.0, 0.0);
    for &s in segments {
        let seg = &interface.segments()[s];
        let l = lam[s];
        flux_mismatch += integrate_segment(seg.endpoints[0], seg.endpoints[1], |_, t| {
            let (_, f0, f1) = interface_state(meshes, interface, u, k, seg, t);
            let flux = if side == 0 { f0 } else { f1 };
            (l[0] * (1.0 - t) + l[1] * t - flux).powi(2)
        });
        jump2 += integrate_segment(seg.endpoints[0], seg.endpoints[1], |_, t| {
            interface_state(meshes, interface, u, k, seg, t).0.powi(2)
        });
    }
    Ok((h / k[side] * flux_mismatch + k[side] / h * jump2).sqrt())
}

/// Interface indicator of a Nitsche solution with the recovered multiplier
/// substituted in closed form, so no multiplier is needed:
///
/// ```text
/// I, III:  side 0: ‖w₁⟦k∂u/∂n⟧ + β⟦u⟧‖²            side 1: ‖w₀⟦k∂u/∂n⟧ - β⟦u⟧‖²
/// II:      side 0: ‖⟦k∂u/∂n⟧ + k₁/(α h₁) ⟦u⟧‖²     side 1: α⁻² (k₁/h_E) ‖⟦u⟧‖²
/// ```
///
/// (weights indexed by side, first term scaled by `h_E/k_i`).
pub fn eta_interface_facet_substituted(
    meshes: [&SubdomainMesh; 2],
    interface: &InterfaceMesh,
    side: usize,
    facet: usize,
    u: &Solution,
    params: &CouplingParams,
) -> Result<f64> {
    let segments: Vec<usize> = interface.segments_of_facet(side, facet).collect();
    substituted_indicator(meshes, interface, side, facet, &segments, u, params)
}

fn substituted_indicator(
    meshes: [&SubdomainMesh; 2],
    interface: &InterfaceMesh,
    side: usize,
    facet: usize,
    segments: &[usize],
    u: &Solution,
    params: &CouplingParams,
) -> Result<f64> {
    if params.method().is_mixed() {
        return Err(Error::Usage(format!(
            "substituted indicators apply to Nitsche solutions, not {}",
            params.method()
        )));
    }
    let k = params.k();
    let alpha = params.alpha();
    let h = meshes[side].facet_length(&meshes[side].interface_facets()[facet]);
    let variant = params.method().variant();
    let (mut first, mut jump2) = (0.0, 0.0);
    for &s in segments {
        let seg = &interface.segments()[s];
        let c = segment_coefficients(seg.h[0], seg.h[1], params)?;
        let slave_penalty = k[1] / (alpha * seg.h[1]);
        first += integrate_segment(seg.endpoints[0], seg.endpoints[1], |_, t| {
            let (jump, f0, f1) = interface_state(meshes, interface, u, k, seg, t);
            let flux_jump = f0 - f1;
            let r = match (variant, side) {
                (Variant::I | Variant::III, 0) => c.w2 * flux_jump + c.beta * jump,
                (Variant::I | Variant::III, _) => c.w1 * flux_jump - c.beta * jump,
                (Variant::II, 0) => flux_jump + slave_penalty * jump,
                (Variant::II, _) => 0.0,
            };
            r * r
        });
        jump2 += integrate_segment(seg.endpoints[0], seg.endpoints[1], |_, t| {
            interface_state(meshes, interface, u, k, seg, t).0.powi(2)
        });
    }
    let flux_term = match (variant, side) {
        (Variant::II, 1) => jump2 * k[1] / (alpha * alpha * h),
        _ => h / k[side] * first,
    };
    Ok((flux_term + k[side] / h * jump2).sqrt())
}

/// `h_K ‖f - f_h‖_K` with `f_h` the L² projection of `f` onto P1(K).
pub fn oscillation(mesh: &SubdomainMesh, t: usize, f: Load<'_>) -> f64 {
    let p = mesh.triangle_points(t);
    let c = project_element(p, f);
    let r2 = integrate_triangle(p, |x, l| {
        (f(x) - (c[0] * l[0] + c[1] * l[1] + c[2] * l[2])).powi(2)
    });
    mesh.diameter(t) * r2.max(0.0).sqrt()
}

/// `E_K² = η_K² + ½ Σ η_{E,Ω}² + Σ η_{E,Γ}²` over the facets of `K`.
pub fn marking_values(
    mesh: &SubdomainMesh,
    element: &[f64],
    interior_facet: &[f64],
    interface_facet: &[f64],
) -> Vec<f64> {
    (0..mesh.num_triangles())
        .map(|t| {
            let mut e2 = element[t].powi(2);
            for r in mesh.element_facets(t) {
                match *r {
                    FacetRef::Interior(i) => e2 += 0.5 * interior_facet[i].powi(2),
                    FacetRef::Interface(i) => e2 += interface_facet[i].powi(2),
                    FacetRef::Dirichlet(_) => {}
                }
            }
            e2.sqrt()
        })
        .collect()
}

/// Marks every element with `E_K > θ max E_K`, the maximum taken over both
/// meshes.
pub fn mark(meshes: [&SubdomainMesh; 2], marking: &[Vec<f64>; 2], theta: f64) -> RefinementMarks {
    let max = marking.iter().flatten().copied().fold(0.0, f64::max);
    let mut marks = RefinementMarks::new();
    for side in 0..2 {
        for (t, &e) in marking[side].iter().enumerate() {
            if e > theta * max {
                marks.insert(meshes[side].id(), t);
            }
        }
    }
    marks
}

/// All indicators for a solution that carries a multiplier (solved mixed, or
/// recovered from a Nitsche solve). `loads[side]` is the source on that side.
pub fn compute_indicators(
    meshes: [&SubdomainMesh; 2],
    interface: &InterfaceMesh,
    u: &Solution,
    params: &CouplingParams,
    loads: [Load<'_>; 2],
) -> Result<IndicatorSet> {
    let k = params.k();
    let mut element: [Vec<f64>; 2] = Default::default();
    let mut interior_facet: [Vec<f64>; 2] = Default::default();
    let mut interface_facet: [Vec<f64>; 2] = Default::default();
    let mut oscillation_values: [Vec<f64>; 2] = Default::default();
    let mut marking: [Vec<f64>; 2] = Default::default();
    for side in 0..2 {
        let mesh = meshes[side];
        element[side] = (0..mesh.num_triangles())
            .map(|t| eta_element(mesh, t, loads[side], k[side]))
            .collect();
        oscillation_values[side] = (0..mesh.num_triangles())
            .map(|t| oscillation(mesh, t, loads[side]))
            .collect();
        interior_facet[side] = mesh
            .interior_facets()
            .iter()
            .map(|f| eta_interior_facet(mesh, f, &u.u[side], k[side]))
            .collect();
        let lists = interface.facet_segment_lists(side, mesh.interface_facets().len());
        interface_facet[side] = lists
            .iter()
            .enumerate()
            .map(|(i, segs)| interface_indicator(meshes, interface, side, i, segs, u, params))
            .collect::<Result<_>>()?;
        marking[side] = marking_values(
            mesh,
            &element[side],
            &interior_facet[side],
            &interface_facet[side],
        );
    }
    let mut set = IndicatorSet {
        element,
        interior_facet,
        interface_facet,
        oscillation: oscillation_values,
        marking,
        eta: 0.0,
    };
    set.eta = set.local_sum_of_squares().sqrt();
    Ok(set)
}

/// Substituted interface indicators for every interface facet, in the layout
/// of [`IndicatorSet::interface_facet`].
pub fn substituted_interface_indicators(
    meshes: [&SubdomainMesh; 2],
    interface: &InterfaceMesh,
    u: &Solution,
    params: &CouplingParams,
) -> Result<[Vec<f64>; 2]> {
    let mut out: [Vec<f64>; 2] = Default::default();
    for side in 0..2 {
        let lists = interface.facet_segment_lists(side, meshes[side].interface_facets().len());
        out[side] = lists
            .iter()
            .enumerate()
            .map(|(i, segs)| substituted_indicator(meshes, interface, side, i, segs, u, params))
            .collect::<Result<_>>()?;
    }
    Ok(out)
}

/// Writes `element_id,subdomain,eta_K,osc_K,E_K,marked`, one row per element.
pub fn write_indicator_csv<W: Write>(
    out: &mut W,
    meshes: [&SubdomainMesh; 2],
    set: &IndicatorSet,
    marks: &RefinementMarks,
) -> io::Result<()> {
    writeln!(out, "element_id,subdomain,eta_K,osc_K,E_K,marked")?;
    for side in 0..2 {
        let id = meshes[side].id();
        for t in 0..meshes[side].num_triangles() {
            writeln!(
                out,
                "{t},{},{},{},{},{}",
                id.number(),
                set.element[side][t],
                set.oscillation[side][t],
                set.marking[side][t],
                u8::from(marks.contains(id, t))
            )?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coupling::Method;
    use crate::mesh::{build_two_rectangles, intersect_interface, Point2, SubdomainId};

    fn unit_triangle_mesh() -> SubdomainMesh {
        let v = vec![
            Point2::new(0.0, 0.0),
            Point2::new(1.0, 0.0),
            Point2::new(0.0, 1.0),
        ];
        SubdomainMesh::new(
            SubdomainId::One,
            v,
            vec![[0, 1, 2]],
            [Point2::new(1.0, 0.0), Point2::new(1.0, 1.0)],
        )
        .unwrap()
    }

    #[test]
    fn element_indicator_values() {
        let m = unit_triangle_mesh();
        assert_eq!(eta_element(&m, 0, &|_| 0.0, 1.0), 0.0);
        let e = eta_element(&m, 0, &|_| 1.0, 1.0);
        assert!((e * e - 1.0).abs() < 1e-14);
        let e2 = eta_element(&m, 0, &|_| 1.0, 2.0);
        assert!((e2 * e2 - 0.5).abs() < 1e-14);
    }

    #[test]
    fn interior_facet_of_hat_function() {
        // two triangles sharing the diagonal of the unit square, hat at (1,0)
        let v = vec![
            Point2::new(0.0, 0.0),
            Point2::new(1.0, 0.0),
            Point2::new(1.0, 1.0),
            Point2::new(0.0, 1.0),
        ];
        let m = SubdomainMesh::new(
            SubdomainId::One,
            v,
            vec![[0, 1, 2], [0, 2, 3]],
            [Point2::new(1.0, 0.0), Point2::new(1.0, 1.0)],
        )
        .unwrap();
        let u = [0.0, 1.0, 0.0, 0.0];
        // ∇u = (1,-1) below the diagonal, 0 above; n = (-1,1)/√2 so the jump is -√2
        let f = &m.interior_facets()[0];
        let k = 3.0;
        let jump2 = 2.0 * k * k;
        let h = 2f64.sqrt();
        let expected = (h / k * jump2 * h).sqrt();
        let got = eta_interior_facet(&m, f, &u, k);
        assert!((got - expected).abs() < 1e-13, "{got} vs {expected}");
        let scaled: Vec<f64> = u.iter().map(|x| 5.0 * x).collect();
        assert!((eta_interior_facet(&m, f, &scaled, k) - 5.0 * got).abs() < 1e-12);
        let linear: Vec<f64> = m.vertices().iter().map(|p| 2.0 * p.x - p.y).collect();
        assert!(eta_interior_facet(&m, f, &linear, k) < 1e-14);
    }

    #[test]
    fn oscillation_cases() {
        let m = unit_triangle_mesh();
        assert!(oscillation(&m, 0, &|p| 1.0 + p.x - 3.0 * p.y) < 1e-13);
        // x² on the unit triangle: projection -0.1 + 0.8x, brute-force residual
        let n = 400;
        let mut r2 = 0.0;
        let cell = 1.0 / n as f64;
        for i in 0..n {
            for j in 0..n - i {
                // lower-left sub-triangle and, where present, the upper one
                let mut add = |x: f64, a: f64| {
                    let d = x * x - (-0.1 + 0.8 * x);
                    r2 += d * d * a;
                };
                let x = i as f64 * cell;
                add(x + cell / 3.0, 0.5 * cell * cell);
                if i + j + 1 < n {
                    add(x + 2.0 * cell / 3.0, 0.5 * cell * cell);
                }
            }
        }
        let expected = 2f64.sqrt() * r2.sqrt();
        let got = oscillation(&m, 0, &|p| p.x * p.x);
        assert!(
            (got - expected).abs() < 1e-4 * expected,
            "{got} vs {expected}"
        );
        let exact = 2f64.sqrt() * (1.0f64 / 600.0).sqrt();
        assert!((got - exact).abs() < 1e-12 * exact, "{got} vs {exact}");
    }

    #[test]
    fn marking_threshold_semantics() {
        let (m1, m2) = build_two_rectangles(1, 1, 1, 1).unwrap();
        let theta = std::f64::consts::FRAC_1_SQRT_2;
        let equal = [vec![1.0, 1.0], vec![1.0, 1.0]];
        assert_eq!(mark([&m1, &m2], &equal, theta).len(), 4);
        assert_eq!(mark([&m1, &m2], &equal, 1.0).len(), 0);
        let dominant = [vec![0.1, 0.2], vec![5.0, 0.3]];
        let marks = mark([&m1, &m2], &dominant, theta);
        assert_eq!(marks.len(), 1);
        assert!(marks.contains(SubdomainId::Two, 0));
        let some_zero = [vec![0.0, 0.2], vec![5.0, 0.0]];
        assert_eq!(mark([&m1, &m2], &some_zero, 0.0).len(), 2);
    }

    #[test]
    fn marking_value_combines_facets() {
        let (m1, _) = build_two_rectangles(1, 1, 1, 1).unwrap();
        let element = [1.0, 2.0];
        let interior = vec![2.0; m1.interior_facets().len()];
        let interface = vec![3.0; m1.interface_facets().len()];
        let e = marking_values(&m1, &element, &interior, &interface);
        // triangle 0 = (v00, v10, v11) touches the right side x = 1 (Γ)
        assert!((e[0] * e[0] - (1.0 + 0.5 * 4.0 + 9.0)).abs() < 1e-14);
        assert!((e[1] * e[1] - (4.0 + 0.5 * 4.0)).abs() < 1e-14);
    }

    #[test]
    fn interface_indicator_needs_multiplier() {
        let (m1, m2) = build_two_rectangles(2, 2, 2, 2).unwrap();
        let im = intersect_interface(&m1, &m2).unwrap();
        let u = Solution {
            u: [vec![0.0; m1.num_vertices()], vec![0.0; m2.num_vertices()]],
            multiplier: None,
        };
        let p = CouplingParams::new(1.0, 1.0, 0.01, Method::NitscheI).unwrap();
        assert!(matches!(
            eta_interface_facet([&m1, &m2], &im, 0, 0, &u, &p),
            Err(Error::Usage(_))
        ));
        let mixed = p.with_method(Method::MixedI).unwrap();
        assert!(eta_interface_facet_substituted([&m1, &m2], &im, 0, 0, &u, &mixed).is_err());
    }
}
