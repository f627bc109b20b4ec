//! Writes per-step VTK meshes, indicator tables and the convergence table of
//! an adaptive run into a directory (first argument, default `vtk-out`).

use std::path::PathBuf;

use nitsche_mortar::driver::{
    run_adaptive, write_file, write_records_csv, ProblemConfig, StepWriter,
};

fn main() -> nitsche_mortar::Result<()> {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "vtk-out".into()));
    let config = ProblemConfig {
        k1: 10.0,
        k2: 0.1,
        max_steps: 5,
        ..Default::default()
    };
    let writer = StepWriter::new(&dir)?;
    let mut observer = |view: &nitsche_mortar::driver::StepView<'_>| writer.write(view);
    let run = run_adaptive(&config, Some(&mut observer))?;
    write_file(&dir.join("records.csv"), |out| {
        write_records_csv(out, &run.records)
    })?;
    println!("wrote {} steps to {}", run.records.len(), dir.display());
    Ok(())
}
