//! Interface coupling: the three Nitsche mortar forms, their stabilised mixed
//! counterparts, and recovery of the discrete multiplier from a Nitsche
//! solution.
//!
//! Conventions: side 0 is the first mesh (Ω₁, the master for variant II),
//! side 1 the second. `n` is the interface normal pointing from side 0 into
//! side 1, `⟦w⟧ = w₀ - w₁`, and the multiplier approximates the flux
//! `λ = k₀ ∂u₀/∂n = k₁ ∂u₁/∂n`.
//!
//! Per intersection segment with parent facet sizes `h₀`, `h₁`:
//!
//! ```text
//! β  = k₀k₁ / (α (k₁h₀ + k₀h₁))       γ  = α h₀h₁ / (k₁h₀ + k₀h₁)
//! w₀ = k₁h₀ / (k₁h₀ + k₀h₁)           w₁ = k₀h₁ / (k₁h₀ + k₀h₁)
//! {k ∂w/∂n} = w₀ k₀ ∂w₀/∂n + w₁ k₁ ∂w₁/∂n
//! ```

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::fem::{self, DofMap, Solution, SparseSymMatrix, TripletBuilder};
use crate::mesh::{InterfaceMesh, InterfaceSegment, SubdomainMesh};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Variant {
    /// Two-sided stabilisation.
    I,
    /// Master-slave: stabilised from side 1 only.
    II,
    /// Convex combination of fluxes.
    III,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Method {
    NitscheI,
    NitscheII,
    NitscheIII,
    MixedI,
    MixedII,
    MixedIII,
}

impl Method {
    pub const ALL: [Method; 6] = [
        Method::NitscheI,
        Method::NitscheII,
        Method::NitscheIII,
        Method::MixedI,
        Method::MixedII,
        Method::MixedIII,
    ];

    pub const NITSCHE: [Method; 3] = [Method::NitscheI, Method::NitscheII, Method::NitscheIII];

    pub fn is_mixed(self) -> bool {
        matches!(self, Method::MixedI | Method::MixedII | Method::MixedIII)
    }

    pub fn variant(self) -> Variant {
        match self {
            Method::NitscheI | Method::MixedI => Variant::I,
            Method::NitscheII | Method::MixedII => Variant::II,
            Method::NitscheIII | Method::MixedIII => Variant::III,
        }
    }

    pub fn nitsche(variant: Variant) -> Self {
        match variant {
            Variant::I => Method::NitscheI,
            Variant::II => Method::NitscheII,
            Variant::III => Method::NitscheIII,
        }
    }

    pub fn mixed(variant: Variant) -> Self {
        match variant {
            Variant::I => Method::MixedI,
            Variant::II => Method::MixedII,
            Variant::III => Method::MixedIII,
        }
    }

    /// The formulation of the same variant on the other side of the
    /// Nitsche/mixed equivalence.
    pub fn counterpart(self) -> Self {
        if self.is_mixed() {
            Method::nitsche(self.variant())
        } else {
            Method::mixed(self.variant())
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Method::NitscheI => "I",
            Method::NitscheII => "II",
            Method::NitscheIII => "III",
            Method::MixedI => "mixed-I",
            Method::MixedII => "mixed-II",
            Method::MixedIII => "mixed-III",
        };
        f.pad(s)
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.to_string().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| {
                Error::Config(format!(
                    "unknown method `{s}`; expected one of I, II, III, mixed-I, mixed-II, mixed-III"
                ))
            })
    }
}

/// Material and stabilisation parameters of a coupled solve.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CouplingParams {
    k: [f64; 2],
    alpha: f64,
    method: Method,
}

impl CouplingParams {
    /// Rejects nonpositive parameters, and `k1 < k2` for variant II whose
    /// master side must be the stiffer one.
    pub fn new(k1: f64, k2: f64, alpha: f64, method: Method) -> Result<Self> {
        for (name, v) in [("k1", k1), ("k2", k2), ("alpha", alpha)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Parameter(format!(
                    "{name} must be positive and finite, got {v}"
                )));
            }
        }
        if method.variant() == Variant::II && k1 < k2 {
            return Err(Error::Parameter(format!(
                "master-slave coupling needs k1 >= k2 (got k1 = {k1}, k2 = {k2}); \
                 relabel the subdomains so the stiffer one is the master"
            )));
        }
        Ok(Self {
            k: [k1, k2],
            alpha,
            method,
        })
    }

    pub fn k(&self) -> [f64; 2] {
        self.k
    }

    pub fn k1(&self) -> f64 {
        self.k[0]
    }

    pub fn k2(&self) -> f64 {
        self.k[1]
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn method(&self) -> Method {
        self.method
    }

    pub fn with_method(self, method: Method) -> Result<Self> {
        Self::new(self.k[0], self.k[1], self.alpha, method)
    }
}

/// Per-segment Nitsche coefficients.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SegmentCoefficients {
    pub beta: f64,
    pub gamma: f64,
    /// Convex flux weights; `w1 + w2 = 1`.
    pub w1: f64,
    pub w2: f64,
}

pub fn segment_coefficients(
    h1: f64,
    h2: f64,
    params: &CouplingParams,
) -> Result<SegmentCoefficients> {
    if !(h1 > 0.0 && h2 > 0.0) {
        return Err(Error::Parameter(format!(
            "mesh sizes must be positive, got h1 = {h1}, h2 = {h2}"
        )));
    }
    let [k1, k2] = params.k;
    let alpha = params.alpha;
    let denom = k2 * h1 + k1 * h2;
    let w1 = k2 * h1 / denom;
    Ok(SegmentCoefficients {
        beta: k1 * k2 / (alpha * denom),
        gamma: alpha * h1 * h2 / denom,
        w1,
        w2: 1.0 - w1,
    })
}

/// Traces of the six primal basis functions (three parent-triangle vertices
/// per side) at the quadrature points of one intersection segment.
pub(crate) struct SegmentBasis {
    pub dofs: [usize; 6],
    /// `∇φ·n` for each of the six functions.
    pub normal_derivative: [f64; 6],
    /// (weight including segment length, local coordinate, trace values)
    pub points: Vec<(f64, f64, [f64; 6])>,
}

impl SegmentBasis {
    pub fn new(
        meshes: [&SubdomainMesh; 2],
        interface: &InterfaceMesh,
        seg: &InterfaceSegment,
        offsets: [usize; 2],
    ) -> Self {
        let n = interface.normal();
        let mut dofs = [0; 6];
        let mut normal_derivative = [0.0; 6];
        for side in 0..2 {
            let t = seg.elements[side];
            let tri = meshes[side].triangles()[t];
            let grads = meshes[side].basis_gradients(t);
            for i in 0..3 {
                dofs[3 * side + i] = offsets[side] + tri[i];
                normal_derivative[3 * side + i] = grads[i].dot(n);
            }
        }
        let rule = fem::quadrature::segment_rule();
        let len = seg.length();
        let points = rule
            .points
            .iter()
            .zip(&rule.weights)
            .map(|(l, w)| {
                let x = seg.point(l[1]);
                let b0 = meshes[0].barycentric(seg.elements[0], x);
                let b1 = meshes[1].barycentric(seg.elements[1], x);
                (w * len, l[1], [b0[0], b0[1], b0[2], b1[0], b1[1], b1[2]])
            })
            .collect();
        Self {
            dofs,
            normal_derivative,
            points,
        }
    }

    /// Jump `⟦φ⟧` of each basis function at a point.
    pub fn jump(values: &[f64; 6]) -> [f64; 6] {
        std::array::from_fn(|a| if a < 3 { values[a] } else { -values[a] })
    }

    /// One-sided fluxes `k_side ∇φ·n`, zero for functions of the other side.
    pub fn flux(&self, side: usize, k: f64) -> [f64; 6] {
        std::array::from_fn(|a| {
            if a / 3 == side {
                k * self.normal_derivative[a]
            } else {
                0.0
            }
        })
    }
}

fn add_local<const N: usize>(
    builder: &mut TripletBuilder,
    dofs: &[usize; N],
    local: &[[f64; N]; N],
) {
    for a in 0..N {
        for b in 0..N {
            builder.add(dofs[a], dofs[b], local[a][b]);
        }
    }
}

fn outer_add<const N: usize>(local: &mut [[f64; N]; N], scale: f64, x: &[f64; N], y: &[f64; N]) {
    for a in 0..N {
        for b in 0..N {
            local[a][b] += scale * (x[a] * y[b]);
        }
    }
}

/// Adds `scale (x yᵀ + y xᵀ)`, rounding identically for `(a, b)` and `(b, a)`.
fn symmetric_outer_add<const N: usize>(
    local: &mut [[f64; N]; N],
    scale: f64,
    x: &[f64; N],
    y: &[f64; N],
) {
    for a in 0..N {
        for b in 0..N {
            local[a][b] += scale * (x[a] * y[b] + y[a] * x[b]);
        }
    }
}

/// Adds the Nitsche interface form `b_h` of `variant`. With `include_gamma`
/// false, variant I loses its flux-jump term and coincides with variant III.
fn add_nitsche_terms(
    builder: &mut TripletBuilder,
    meshes: [&SubdomainMesh; 2],
    interface: &InterfaceMesh,
    params: &CouplingParams,
    offsets: [usize; 2],
    include_gamma: bool,
) -> Result<()> {
    let [k0, k1] = params.k;
    let variant = params.method.variant();
    for seg in interface.segments() {
        let c = segment_coefficients(seg.h[0], seg.h[1], params)?;
        let basis = SegmentBasis::new(meshes, interface, seg, offsets);
        let f0 = basis.flux(0, k0);
        let f1 = basis.flux(1, k1);
        let mut local = [[0.0; 6]; 6];
        for (w, _, values) in &basis.points {
            let jump = SegmentBasis::jump(values);
            match variant {
                Variant::I | Variant::III => {
                    let avg: [f64; 6] = std::array::from_fn(|a| c.w1 * f0[a] + c.w2 * f1[a]);
                    outer_add(&mut local, w * c.beta, &jump, &jump);
                    symmetric_outer_add(&mut local, -w, &jump, &avg);
                    if variant == Variant::I && include_gamma {
                        let flux_jump: [f64; 6] = std::array::from_fn(|a| f0[a] - f1[a]);
                        outer_add(&mut local, -w * c.gamma, &flux_jump, &flux_jump);
                    }
                }
                Variant::II => {
                    let penalty = k1 / (params.alpha * seg.h[1]);
                    outer_add(&mut local, w * penalty, &jump, &jump);
                    symmetric_outer_add(&mut local, -w, &jump, &f1);
                }
            }
        }
        add_local(builder, &basis.dofs, &local);
    }
    Ok(())
}

fn nitsche_matrix(
    meshes: [&SubdomainMesh; 2],
    interface: &InterfaceMesh,
    params: &CouplingParams,
    include_gamma: bool,
) -> Result<SparseSymMatrix> {
    if params.method.is_mixed() {
        return Err(Error::Usage(format!(
            "Nitsche assembly called with mixed method {}",
            params.method
        )));
    }
    let dofmap = DofMap::new(meshes, None);
    let offsets = [dofmap.vertex_offset(0), dofmap.vertex_offset(1)];
    let mut builder = TripletBuilder::new(dofmap.len());
    for side in 0..2 {
        fem::add_stiffness(&mut builder, meshes[side], params.k[side], offsets[side])?;
    }
    add_nitsche_terms(
        &mut builder,
        meshes,
        interface,
        params,
        offsets,
        include_gamma,
    )?;
    Ok(builder.build())
}

/// Full Nitsche operator `a_h` on the unknowns of [`DofMap::new`] without
/// multipliers: both subdomain stiffness matrices plus the interface form.
/// Dirichlet conditions are not yet applied.
pub fn assemble_nitsche(
    meshes: [&SubdomainMesh; 2],
    interface: &InterfaceMesh,
    params: &CouplingParams,
) -> Result<SparseSymMatrix> {
    nitsche_matrix(meshes, interface, params, true)
}

/// Stabilisation weights and the primal flux each one penalises against the
/// multiplier: `αS = Σ ω (ξ - G(w), μ - G(v))` on a segment.
fn stabilisation_terms(
    basis: &SegmentBasis,
    seg: &InterfaceSegment,
    params: &CouplingParams,
    c: &SegmentCoefficients,
) -> Vec<(f64, [f64; 6])> {
    let [k0, k1] = params.k;
    let alpha = params.alpha;
    let f0 = basis.flux(0, k0);
    let f1 = basis.flux(1, k1);
    match params.method.variant() {
        Variant::I => vec![(alpha * seg.h[0] / k0, f0), (alpha * seg.h[1] / k1, f1)],
        Variant::II => vec![(alpha * seg.h[1] / k1, f1)],
        Variant::III => {
            let avg = std::array::from_fn(|a| c.w1 * f0[a] + c.w2 * f1[a]);
            vec![(1.0 / c.beta, avg)]
        }
    }
}

/// Stabilised mixed system `[A Bᵀ; B -C]` for `B(w,ξ;v,μ) - αS(w,ξ;v,μ)` on
/// the unknowns of [`DofMap::new`] with multipliers (two per segment).
pub fn assemble_mixed(
    meshes: [&SubdomainMesh; 2],
    interface: &InterfaceMesh,
    params: &CouplingParams,
) -> Result<SparseSymMatrix> {
    if !params.method.is_mixed() {
        return Err(Error::Usage(format!(
            "mixed assembly called with Nitsche method {}",
            params.method
        )));
    }
    let dofmap = DofMap::new(meshes, Some(interface));
    let offsets = [dofmap.vertex_offset(0), dofmap.vertex_offset(1)];
    let mut builder = TripletBuilder::new(dofmap.len());
    for side in 0..2 {
        fem::add_stiffness(&mut builder, meshes[side], params.k[side], offsets[side])?;
    }
    for (s, seg) in interface.segments().iter().enumerate() {
        let c = segment_coefficients(seg.h[0], seg.h[1], params)?;
        let basis = SegmentBasis::new(meshes, interface, seg, offsets);
        let terms = stabilisation_terms(&basis, seg, params, &c);
        let mut dofs = [0; 8];
        dofs[..6].copy_from_slice(&basis.dofs);
        dofs[6] = dofmap.multiplier_dof(s, 0);
        dofs[7] = dofmap.multiplier_dof(s, 1);
        let mut local = [[0.0; 8]; 8];
        for (w, s_local, values) in &basis.points {
            let jump = SegmentBasis::jump(values);
            let psi = [1.0 - s_local, *s_local];
            // -⟨⟦w⟧, μ⟩ - ⟨⟦v⟧, ξ⟩
            let mut primal_jump = [0.0; 8];
            primal_jump[..6].copy_from_slice(&jump);
            let mut multiplier = [0.0; 8];
            multiplier[6..].copy_from_slice(&psi);
            symmetric_outer_add(&mut local, -w, &primal_jump, &multiplier);
            // -ω (ξ - G(w), μ - G(v))
            for (omega, g) in &terms {
                let mut r = [0.0; 8];
                for a in 0..6 {
                    r[a] = -g[a];
                }
                r[6..].copy_from_slice(&psi);
                outer_add(&mut local, -w * omega, &r, &r);
            }
        }
        add_local(&mut builder, &dofs, &local);
    }
    Ok(builder.build())
}

/// Assembles whichever system `params.method` names.
pub fn assemble_system(
    meshes: [&SubdomainMesh; 2],
    interface: &InterfaceMesh,
    params: &CouplingParams,
) -> Result<SparseSymMatrix> {
    if params.method.is_mixed() {
        assemble_mixed(meshes, interface, params)
    } else {
        assemble_nitsche(meshes, interface, params)
    }
}

/// Jump and one-sided fluxes `(⟦u⟧, k₀∂u₀/∂n, k₁∂u₁/∂n)` at local coordinate `s`
/// of segment `seg`.
pub(crate) fn interface_state(
    meshes: [&SubdomainMesh; 2],
    interface: &InterfaceMesh,
    u: &Solution,
    k: [f64; 2],
    seg: &InterfaceSegment,
    s: f64,
) -> (f64, f64, f64) {
    let x = seg.point(s);
    let n = interface.normal();
    let v0 = u.value_in(meshes[0], 0, seg.elements[0], x);
    let v1 = u.value_in(meshes[1], 1, seg.elements[1], x);
    let f0 = k[0] * u.gradient_in(meshes[0], 0, seg.elements[0]).dot(n);
    let f1 = k[1] * u.gradient_in(meshes[1], 1, seg.elements[1]).dot(n);
    (v0 - v1, f0, f1)
}

/// Discrete multiplier implied by a Nitsche solution of the given variant:
/// `{k ∂u/∂n} - β⟦u⟧` for I and III, `k₂ ∂u₂/∂n - k₂/(α h₂) ⟦u⟧` for II.
/// Every term is affine on a segment, so the P1 coefficients are the values at
/// the segment endpoints.
pub fn recover_multiplier(
    meshes: [&SubdomainMesh; 2],
    interface: &InterfaceMesh,
    u: &Solution,
    params: &CouplingParams,
) -> Result<Vec<[f64; 2]>> {
    interface
        .segments()
        .iter()
        .map(|seg| {
            let c = segment_coefficients(seg.h[0], seg.h[1], params)?;
            Ok(std::array::from_fn(|end| {
                let (jump, f0, f1) =
                    interface_state(meshes, interface, u, params.k, seg, end as f64);
                match params.method.variant() {
                    Variant::I | Variant::III => c.w1 * f0 + c.w2 * f1 - c.beta * jump,
                    Variant::II => f1 - params.k[1] / (params.alpha * seg.h[1]) * jump,
                }
            }))
        })
        .collect()
}
