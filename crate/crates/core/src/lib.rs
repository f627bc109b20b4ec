//! Adaptive piecewise-linear finite elements for the two-subdomain transmission problem
//!
//! ```text
//! -div(k_i grad u_i) = f   in Ω_i,   u_1 = u_2 and k_1 ∂u_1/∂n_1 + k_2 ∂u_2/∂n_2 = 0 on Γ
//! ```
//!
//! coupled across a non-matching interface either by one of three Nitsche mortar
//! forms or by the equivalent stabilised mixed (saddle-point) formulation. The
//! crate also provides residual a posteriori error indicators and an adaptive
//! solve-estimate-mark-refine loop using red-green-blue refinement.
//!
//! Module map:
//!
//! - [`mesh`]: subdomain triangulations, the intersection mesh on Γ, refinement, VTK export
//! - [`fem`]: P1 shape functions, quadrature, sparse assembly, Dirichlet elimination, traces
//! - [`coupling`]: Nitsche and mixed interface forms, multiplier recovery
//! - [`linalg`]: deterministic sparse LDLᵀ solvers
//! - [`estimator`]: local indicators, oscillation, marking
//! - [`driver`]: configuration, manufactured solutions, adaptive and uniform runs, file output

// `!(x > 0.0)` style guards deliberately reject NaN as well
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod coupling;
pub mod driver;
pub mod error;
pub mod estimator;
pub mod fem;
pub mod linalg;
pub mod mesh;

pub use coupling::{CouplingParams, Method, SegmentCoefficients};
pub use error::{Error, Result};
pub use fem::{Solution, SparseSymMatrix};
pub use mesh::{InterfaceMesh, Point2, RefinementMarks, SubdomainMesh};
