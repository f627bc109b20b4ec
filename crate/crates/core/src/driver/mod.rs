//! Configuration, manufactured solutions, solve pipelines, adaptive and
//! uniform runs, diagnostics and file output.

mod config;
mod export;
mod manufactured;
mod run;
mod solve;

pub use config::{Geometry, ProblemConfig, SourceSpec, Tolerances};
pub use export::{create_dir, write_file, write_records_csv, write_step_vtk, StepWriter};
pub use manufactured::{Manufactured, ManufacturedKind};
pub use run::{
    fitted_slope, run_adaptive, run_uniform, slope_of, solve_once, ConvergenceRecord, Observer,
    RunResult, StepView,
};
pub use solve::{
    compare_with_counterpart, error_norms, estimate_trace_constant, solve_discrete, Discrete,
    Equivalence, ErrorNorms, Problem,
};
