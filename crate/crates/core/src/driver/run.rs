use crate::error::{Error, Result};
use crate::estimator::mark;
use crate::mesh::{refine_rgb, refine_uniform, RefinementMarks, SubdomainMesh};

use super::config::ProblemConfig;
use super::solve::{error_norms, solve_discrete, Discrete, ErrorNorms, Problem};

/// One row of a convergence table.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConvergenceRecord {
    pub step: usize,
    /// Size of the solved linear system.
    pub n: usize,
    pub eta: f64,
    /// Present only when the exact solution is known.
    pub energy_error: Option<f64>,
    pub multiplier_error: Option<f64>,
}

impl ConvergenceRecord {
    /// `η / (energy error + multiplier error)`, when the errors are known.
    pub fn effectivity(&self) -> Option<f64> {
        Some(self.eta / (self.energy_error? + self.multiplier_error?))
    }
}

/// What a run observer sees after each solve.
pub struct StepView<'a> {
    pub step: usize,
    /// Meshes in side order.
    pub meshes: [&'a SubdomainMesh; 2],
    pub discrete: &'a Discrete,
    pub errors: Option<ErrorNorms>,
    /// Elements selected for refinement after this solve (empty after the
    /// final solve of a run).
    pub marks: &'a RefinementMarks,
    pub record: &'a ConvergenceRecord,
}

/// Called once per step; used for per-step file output.
pub type Observer<'o> = dyn FnMut(&StepView<'_>) -> Result<()> + 'o;

/// Records and final meshes of a run.
#[derive(Clone, Debug)]
pub struct RunResult {
    pub records: Vec<ConvergenceRecord>,
    /// Final meshes in side order.
    pub meshes: [SubdomainMesh; 2],
    /// Element counts per side at each step.
    pub element_counts: Vec<[usize; 2]>,
}

impl RunResult {
    /// Element count of the final mesh on physical subdomain `id`.
    pub fn elements_in(&self, id: crate::mesh::SubdomainId) -> usize {
        self.meshes
            .iter()
            .find(|m| m.id() == id)
            .map_or(0, |m| m.num_triangles())
    }
}

/// Solves once on the configured initial meshes.
pub fn solve_once(
    config: &ProblemConfig,
) -> Result<(Discrete, ConvergenceRecord, [SubdomainMesh; 2])> {
    let problem = Problem::from_config(config)?;
    let meshes = config.initial_meshes()?;
    let (discrete, errors) = solve_step([&meshes[0], &meshes[1]], &problem)?;
    let record = make_record(0, &discrete, errors);
    Ok((discrete, record, meshes))
}

fn solve_step(
    meshes: [&SubdomainMesh; 2],
    problem: &Problem,
) -> Result<(Discrete, Option<ErrorNorms>)> {
    let discrete = solve_discrete(meshes, problem)?;
    let errors = match &problem.exact {
        Some(exact) => Some(error_norms(meshes, &discrete, &problem.params, exact)?),
        None => None,
    };
    Ok((discrete, errors))
}

fn make_record(step: usize, discrete: &Discrete, errors: Option<ErrorNorms>) -> ConvergenceRecord {
    ConvergenceRecord {
        step,
        n: discrete.dofs(),
        eta: discrete.indicators.eta,
        energy_error: errors.map(|e| e.energy),
        multiplier_error: errors.map(|e| e.multiplier),
    }
}

/// Solve, estimate, mark with the configured θ and refine by red-green-blue
/// until the system size exceeds `max_dofs` or `max_steps` solves are done.
pub fn run_adaptive(
    config: &ProblemConfig,
    observer: Option<&mut Observer<'_>>,
) -> Result<RunResult> {
    run_loop(config, config.max_steps, observer, |meshes, discrete| {
        Ok(mark(meshes, &discrete.indicators.marking, config.theta))
    })
}

/// Red-refines every element `steps` times, solving on all `steps + 1` meshes.
pub fn run_uniform(
    config: &ProblemConfig,
    steps: usize,
    observer: Option<&mut Observer<'_>>,
) -> Result<RunResult> {
    if steps == 0 {
        return Err(Error::Config(
            "a uniform run needs at least one refinement step".into(),
        ));
    }
    let config = ProblemConfig {
        max_dofs: usize::MAX,
        ..config.clone()
    };
    run_loop(&config, steps + 1, observer, |meshes, _| {
        Ok(RefinementMarks::all(&meshes))
    })
}

fn run_loop(
    config: &ProblemConfig,
    max_solves: usize,
    mut observer: Option<&mut Observer<'_>>,
    mut select: impl FnMut([&SubdomainMesh; 2], &Discrete) -> Result<RefinementMarks>,
) -> Result<RunResult> {
    let problem = Problem::from_config(config)?;
    let mut meshes = config.initial_meshes()?;
    let mut records: Vec<ConvergenceRecord> = Vec::new();
    let mut element_counts = Vec::new();
    for step in 0..max_solves {
        let refs = [&meshes[0], &meshes[1]];
        let (discrete, errors) =
            solve_step(refs, &problem).map_err(|e| e.context(format!("step {step}")))?;
        let record = make_record(step, &discrete, errors);
        if let Some(prev) = records.last() {
            if record.n <= prev.n {
                return Err(Error::Mesh(format!(
                    "refinement did not increase the system size at step {step} ({} -> {})",
                    prev.n, record.n
                )));
            }
        }
        let last = step + 1 == max_solves || record.n > config.max_dofs;
        let marks = if last {
            RefinementMarks::new()
        } else {
            select(refs, &discrete)?
        };
        if let Some(obs) = observer.as_deref_mut() {
            obs(&StepView {
                step,
                meshes: refs,
                discrete: &discrete,
                errors,
                marks: &marks,
                record: &record,
            })?;
        }
        records.push(record);
        element_counts.push([meshes[0].num_triangles(), meshes[1].num_triangles()]);
        if last {
            break;
        }
        if marks.len() == RefinementMarks::all(&refs).len() {
            meshes = [refine_uniform(&meshes[0])?, refine_uniform(&meshes[1])?];
        } else {
            meshes = [
                refine_rgb(&meshes[0], &marks)?,
                refine_rgb(&meshes[1], &marks)?,
            ];
        }
    }
    Ok(RunResult {
        records,
        meshes,
        element_counts,
    })
}

/// Least-squares slope of `log y` against `log N` over the last half of the
/// records (at least two).
pub fn fitted_slope(
    records: &[ConvergenceRecord],
    value: impl Fn(&ConvergenceRecord) -> Option<f64>,
) -> Option<f64> {
    let tail = &records[records.len() / 2..];
    slope_of(tail, value)
}

/// Least-squares slope of `log y` against `log N` over all given records.
pub fn slope_of(
    records: &[ConvergenceRecord],
    value: impl Fn(&ConvergenceRecord) -> Option<f64>,
) -> Option<f64> {
    let pts: Vec<(f64, f64)> = records
        .iter()
        .map(|r| Some(((r.n as f64).ln(), value(r)?.ln())))
        .collect::<Option<_>>()?;
    if pts.len() < 2 {
        return None;
    }
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(n: usize, eta: f64) -> ConvergenceRecord {
        ConvergenceRecord {
            step: 0,
            n,
            eta,
            energy_error: None,
            multiplier_error: None,
        }
    }

    #[test]
    fn slope_of_power_law() {
        let records: Vec<_> = (1..=6)
            .map(|i| {
                rec(
                    100 * 4usize.pow(i),
                    3.0 * (100.0 * 4f64.powi(i as i32)).powf(-0.5),
                )
            })
            .collect();
        let s = fitted_slope(&records, |r| Some(r.eta)).unwrap();
        assert!((s + 0.5).abs() < 1e-12);
        assert!(fitted_slope(&records[..1], |r| Some(r.eta)).is_none());
        assert!(fitted_slope(&records, |r| r.energy_error).is_none());
    }

    #[test]
    fn effectivity_needs_errors() {
        let mut r = rec(10, 2.0);
        assert!(r.effectivity().is_none());
        r.energy_error = Some(1.5);
        r.multiplier_error = Some(0.5);
        assert_eq!(r.effectivity(), Some(1.0));
    }
}
