use crate::coupling::{assemble_system, recover_multiplier, CouplingParams};
use crate::error::{Error, Result};
use crate::estimator::{compute_indicators, IndicatorSet};
use crate::fem::{
    add_load, eliminate_dirichlet, expand_solution, integrate_segment, integrate_triangle, DofMap,
    Solution,
};
use crate::linalg::{solve_spd, solve_symmetric_indefinite, SolveReport};
use crate::mesh::{intersect_interface, InterfaceMesh, Point2, SubdomainMesh};

use super::config::{ProblemConfig, SourceSpec, Tolerances};
use super::manufactured::Manufactured;

/// Everything needed to solve on a given pair of meshes.
#[derive(Clone, Debug, PartialEq)]
pub struct Problem {
    /// Parameters in side order.
    pub params: CouplingParams,
    pub source: SourceSpec,
    pub exact: Option<Manufactured>,
    pub tolerances: Tolerances,
}

impl Problem {
    pub fn from_config(config: &ProblemConfig) -> Result<Self> {
        Ok(Self {
            params: config.coupling()?,
            source: config.source,
            exact: config.manufactured(),
            tolerances: config.tolerances,
        })
    }

    pub fn with_params(&self, params: CouplingParams) -> Self {
        Self {
            params,
            ..self.clone()
        }
    }

    fn load(&self, mesh: &SubdomainMesh) -> impl Fn(Point2) -> f64 + '_ {
        let id = mesh.id();
        move |p| match (self.source, &self.exact) {
            (SourceSpec::Constant(c), _) => c,
            (SourceSpec::Manufactured(_), Some(exact)) => exact.load(id, p),
            (SourceSpec::Manufactured(_), None) => {
                unreachable!("manufactured source without exact solution")
            }
        }
    }
}

/// A solved discrete problem with its multiplier and indicators.
#[derive(Clone, Debug)]
pub struct Discrete {
    pub interface: InterfaceMesh,
    pub dofmap: DofMap,
    /// Primal fields and the multiplier (solved for mixed methods, recovered
    /// for Nitsche methods).
    pub solution: Solution,
    pub indicators: IndicatorSet,
    pub report: SolveReport,
}

impl Discrete {
    /// Size of the solved linear system.
    pub fn dofs(&self) -> usize {
        self.report.dim
    }
}

/// Assembles, applies Dirichlet data (interpolated exact values for
/// manufactured problems, zero otherwise), solves on the SPD path for Nitsche
/// methods or the indefinite path for mixed methods, recovers the multiplier
/// and computes all indicators.
pub fn solve_discrete(meshes: [&SubdomainMesh; 2], problem: &Problem) -> Result<Discrete> {
    let params = &problem.params;
    let method = params.method();
    let interface = intersect_interface(meshes[0], meshes[1])
        .map_err(|e| e.context("building the interface mesh"))?;
    let matrix = assemble_system(meshes, &interface, params)
        .map_err(|e| e.context(format!("assembling the {method} system")))?;
    let dofmap = DofMap::new(meshes, method.is_mixed().then_some(&interface));

    let loads = [problem.load(meshes[0]), problem.load(meshes[1])];
    let mut rhs = vec![0.0; dofmap.len()];
    for side in 0..2 {
        add_load(
            &mut rhs,
            meshes[side],
            &loads[side],
            dofmap.vertex_offset(side),
        );
    }
    let dirichlet: Option<Vec<f64>> = problem.exact.map(|exact| {
        let mut g = vec![0.0; dofmap.len()];
        for side in 0..2 {
            for (v, &p) in meshes[side].vertices().iter().enumerate() {
                g[dofmap.vertex_dof(side, v)] = exact.value(meshes[side].id(), p);
            }
        }
        g
    });

    let reduced = eliminate_dirichlet(&matrix, &rhs, &dofmap, dirichlet.as_deref())?;
    let n = reduced.matrix.dim();
    let (x, report) = if method.is_mixed() {
        solve_symmetric_indefinite(&reduced.matrix, &reduced.rhs, problem.tolerances.indefinite)
    } else {
        solve_spd(&reduced.matrix, &reduced.rhs, problem.tolerances.spd)
    }
    .map_err(|e| e.context(format!("solving the {method} system with {n} unknowns")))?;

    let full = expand_solution(&x, &dofmap, dirichlet.as_deref());
    let mut solution = Solution::from_vector(&full, &dofmap);
    if !method.is_mixed() {
        solution.multiplier = Some(recover_multiplier(meshes, &interface, &solution, params)?);
    }
    let indicators = compute_indicators(
        meshes,
        &interface,
        &solution,
        params,
        [&loads[0], &loads[1]],
    )?;
    Ok(Discrete {
        interface,
        dofmap,
        solution,
        indicators,
        report,
    })
}

/// Max-norm differences between a Nitsche solution and the solution of its
/// mixed counterpart on the same meshes.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Equivalence {
    pub primal: f64,
    pub multiplier: f64,
    /// System sizes of the Nitsche and the mixed solve.
    pub dims: [usize; 2],
}

impl Equivalence {
    pub fn max(&self) -> f64 {
        self.primal.max(self.multiplier)
    }
}

/// Solves `problem` with its method and with the counterpart formulation
/// (Nitsche ↔ mixed of the same variant) and compares the results.
pub fn compare_with_counterpart(
    meshes: [&SubdomainMesh; 2],
    problem: &Problem,
) -> Result<Equivalence> {
    let other = problem.with_params(
        problem
            .params
            .with_method(problem.params.method().counterpart())?,
    );
    let a = solve_discrete(meshes, problem)?;
    let b = solve_discrete(meshes, &other)?;
    let primal = (0..2)
        .flat_map(|s| a.solution.u[s].iter().zip(&b.solution.u[s]))
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max);
    let (la, lb) = match (&a.solution.multiplier, &b.solution.multiplier) {
        (Some(la), Some(lb)) => (la, lb),
        _ => return Err(Error::Usage("both solutions need a multiplier".into())),
    };
    let multiplier = la
        .iter()
        .flatten()
        .zip(lb.iter().flatten())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max);
    Ok(Equivalence {
        primal,
        multiplier,
        dims: [a.dofs(), b.dofs()],
    })
}

/// Energy error `(Σ k_i ‖∇(u - u_h)‖²)^½` and multiplier error
/// `(Σ_i Σ_{E ⊂ Γ} (h_E/k_i) ‖λ - λ_h‖²_E)^½`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ErrorNorms {
    pub energy: f64,
    pub multiplier: f64,
}

impl ErrorNorms {
    pub fn total(&self) -> f64 {
        self.energy + self.multiplier
    }
}

pub fn error_norms(
    meshes: [&SubdomainMesh; 2],
    discrete: &Discrete,
    params: &CouplingParams,
    exact: &Manufactured,
) -> Result<ErrorNorms> {
    let k = params.k();
    let u = &discrete.solution;
    let mut energy2 = 0.0;
    for side in 0..2 {
        let mesh = meshes[side];
        for t in 0..mesh.num_triangles() {
            let gh = u.gradient_in(mesh, side, t);
            energy2 += k[side]
                * integrate_triangle(mesh.triangle_points(t), |x, _| {
                    let d = exact.gradient(mesh.id(), x) - gh;
                    d.dot(d)
                });
        }
    }
    let lam = u
        .multiplier
        .as_ref()
        .ok_or_else(|| Error::Usage("multiplier error needs a multiplier".into()))?;
    let n = discrete.interface.normal();
    let mut multiplier2 = 0.0;
    for (s, seg) in discrete.interface.segments().iter().enumerate() {
        let l = lam[s];
        // either side's exact flux is the same; use side 0
        let id = meshes[0].id();
        let diff2 = integrate_segment(seg.endpoints[0], seg.endpoints[1], |x, t| {
            (exact.flux(id, x, n) - (l[0] * (1.0 - t) + l[1] * t)).powi(2)
        });
        multiplier2 += (seg.h[0] / k[0] + seg.h[1] / k[1]) * diff2;
    }
    Ok(ErrorNorms {
        energy: energy2.sqrt(),
        multiplier: multiplier2.sqrt(),
    })
}

/// Discrete trace constant of one subdomain mesh: `1 / max_K ρ_K` where
/// `ρ_K` is the largest ratio `(h_E/k)‖k ∂v/∂n‖²_{∂K∩Γ} / (k ‖∇v‖²_K)` over
/// linear `v` on triangles touching the interface. The ratio is independent
/// of `k`, which is accepted only for interface symmetry.
pub fn estimate_trace_constant(mesh: &SubdomainMesh, k: f64) -> Result<f64> {
    if !(k > 0.0) {
        return Err(Error::Parameter(format!(
            "material parameter must be positive, got {k}"
        )));
    }
    if mesh.interface_facets().is_empty() {
        return Err(Error::Usage(
            "trace constant needs a mesh with interface facets".into(),
        ));
    }
    // per triangle: Σ h_E |E| n nᵀ, stored as (xx, xy, yy)
    let mut forms: std::collections::BTreeMap<usize, [f64; 3]> = Default::default();
    for f in mesh.interface_facets() {
        let n = mesh.facet_normal(f);
        let len = mesh.facet_length(f);
        // both factors scale with k and cancel
        let w = (len / k) * k * k * len;
        let e = forms.entry(f.element).or_default();
        e[0] += w * n.x * n.x;
        e[1] += w * n.x * n.y;
        e[2] += w * n.y * n.y;
    }
    let rho = forms
        .iter()
        .map(|(&t, m)| {
            let half_trace = 0.5 * (m[0] + m[2]);
            let disc = (0.25 * (m[0] - m[2]).powi(2) + m[1] * m[1]).sqrt();
            (half_trace + disc) / (k * mesh.area(t))
        })
        .fold(0.0, f64::max);
    Ok(1.0 / rho)
}
