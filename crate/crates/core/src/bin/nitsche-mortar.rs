use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use nitsche_mortar::driver::{
    compare_with_counterpart, create_dir, estimate_trace_constant, fitted_slope, run_adaptive,
    run_uniform, solve_once, write_file, write_records_csv, ConvergenceRecord, ErrorNorms, Problem,
    ProblemConfig, StepView, StepWriter,
};
use nitsche_mortar::{Error, Method, Result};

/// Adaptive Nitsche mortar finite elements for two-subdomain transmission problems.
#[derive(Parser)]
#[command(version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// TOML problem configuration; defaults apply when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Coupling method, overriding the configuration: I, II, III, mixed-I, mixed-II or mixed-III.
    #[arg(long, global = true)]
    method: Option<Method>,
    /// Directory for CSV and VTK output; nothing is written when omitted.
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Solve once on the initial meshes.
    Solve,
    /// Run the adaptive solve-estimate-mark-refine loop.
    Adapt,
    /// Refine uniformly `uniform_steps` times.
    Uniform,
    /// Run adaptive and uniform refinement and compare fitted rates.
    Convergence,
    /// Compare the Nitsche and the mixed formulation of one variant on the initial meshes.
    Equivalence,
    /// Estimate the discrete trace constant of both initial meshes.
    TraceConstant,
}

const EQUIVALENCE_TOL: f64 = 1e-9;

fn load_config(cli: &Cli) -> Result<ProblemConfig> {
    let mut config = match &cli.config {
        Some(path) => ProblemConfig::from_file(path)?,
        None => ProblemConfig::default(),
    };
    if let Some(method) = cli.method {
        config.method = method;
        config
            .validate()
            .map_err(|e| e.context(format!("method {method}")))?;
    }
    Ok(config)
}

fn print_table(records: &[ConvergenceRecord]) {
    println!(
        "{:>5} {:>9} {:>12} {:>12} {:>12}",
        "step", "N", "eta", "energy", "multiplier"
    );
    let opt = |v: Option<f64>| v.map_or_else(|| "-".to_string(), |v| format!("{v:.5e}"));
    for r in records {
        println!(
            "{:>5} {:>9} {:>12.5e} {:>12} {:>12}",
            r.step,
            r.n,
            r.eta,
            opt(r.energy_error),
            opt(r.multiplier_error)
        );
    }
}

fn write_records(dir: &Path, name: &str, records: &[ConvergenceRecord]) -> Result<()> {
    write_file(&dir.join(name), |out| write_records_csv(out, records))
}

fn run_with_output(
    out_dir: Option<&Path>,
    run: impl FnOnce(
        Option<&mut dyn FnMut(&StepView<'_>) -> Result<()>>,
    ) -> Result<Vec<ConvergenceRecord>>,
) -> Result<Vec<ConvergenceRecord>> {
    match out_dir {
        Some(dir) => {
            let writer = StepWriter::new(dir)?;
            let mut observer = |view: &StepView<'_>| writer.write(view);
            let records = run(Some(&mut observer))?;
            write_records(dir, "records.csv", &records)?;
            Ok(records)
        }
        None => run(None),
    }
}

fn execute(cli: &Cli) -> Result<()> {
    let config = load_config(cli)?;
    let out_dir = cli.out_dir.as_deref();
    match cli.command {
        Command::Solve => {
            let records = run_with_output(out_dir, |obs| {
                let (discrete, record, meshes) = solve_once(&config)?;
                if let Some(obs) = obs {
                    let marks = Default::default();
                    let errors = record
                        .energy_error
                        .zip(record.multiplier_error)
                        .map(|(energy, multiplier)| ErrorNorms { energy, multiplier });
                    let view = StepView {
                        step: 0,
                        meshes: [&meshes[0], &meshes[1]],
                        discrete: &discrete,
                        errors,
                        marks: &marks,
                        record: &record,
                    };
                    obs(&view)?;
                }
                Ok(vec![record])
            })?;
            print_table(&records);
        }
        Command::Adapt => {
            let records = run_with_output(out_dir, |obs| Ok(run_adaptive(&config, obs)?.records))?;
            print_table(&records);
        }
        Command::Uniform => {
            let records = run_with_output(out_dir, |obs| {
                Ok(run_uniform(&config, config.uniform_steps, obs)?.records)
            })?;
            print_table(&records);
        }
        Command::Convergence => {
            let adaptive = run_adaptive(&config, None)?.records;
            let uniform = run_uniform(&config, config.uniform_steps, None)?.records;
            if let Some(dir) = out_dir {
                create_dir(dir)?;
                write_records(dir, "adaptive.csv", &adaptive)?;
                write_records(dir, "uniform.csv", &uniform)?;
            }
            println!("adaptive:");
            print_table(&adaptive);
            println!("uniform:");
            print_table(&uniform);
            let slope = |r: &[ConvergenceRecord]| {
                fitted_slope(r, |r| Some(r.eta))
                    .map_or_else(|| "-".to_string(), |s| format!("{s:.3}"))
            };
            println!(
                "fitted eta slope: adaptive {}, uniform {}",
                slope(&adaptive),
                slope(&uniform)
            );
        }
        Command::Equivalence => {
            let meshes = config.initial_meshes()?;
            let problem = Problem::from_config(&config)?;
            let eq = compare_with_counterpart([&meshes[0], &meshes[1]], &problem)?;
            let method = problem.params.method();
            println!(
                "{method} ({} unknowns) vs {} ({} unknowns): max |du| {:.3e}, max |dlambda| {:.3e}",
                eq.dims[0],
                method.counterpart(),
                eq.dims[1],
                eq.primal,
                eq.multiplier
            );
            if eq.max().is_nan() || eq.max() > EQUIVALENCE_TOL {
                return Err(Error::Assembly(format!(
                    "formulations differ by {:.3e}, above {EQUIVALENCE_TOL:e}",
                    eq.max()
                )));
            }
        }
        Command::TraceConstant => {
            let meshes = config.initial_meshes()?;
            let k = config.coupling()?.k();
            for (side, mesh) in meshes.iter().enumerate() {
                let c = estimate_trace_constant(mesh, k[side])?;
                println!(
                    "{:?}: {} elements, trace constant {c:.6}",
                    mesh.id(),
                    mesh.num_triangles()
                );
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
