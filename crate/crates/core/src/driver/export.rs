use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::estimator::write_indicator_csv;
use crate::mesh::{write_vtk, VtkFields};

use super::run::{ConvergenceRecord, StepView};

fn io_error(path: &Path) -> impl FnOnce(io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Creates `path` and hands a buffered writer to `body`, attaching the path to
/// any I/O error.
pub fn write_file(
    path: &Path,
    body: impl FnOnce(&mut BufWriter<File>) -> io::Result<()>,
) -> Result<()> {
    let file = File::create(path).map_err(io_error(path))?;
    let mut out = BufWriter::new(file);
    body(&mut out)
        .and_then(|_| out.flush())
        .map_err(io_error(path))
}

pub fn create_dir(path: &Path) -> Result<()> {
    std::fs::create_dir_all(path).map_err(io_error(path))
}

fn optional(v: Option<f64>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

/// Convergence table with header `step,N,eta,energy_error,multiplier_error`;
/// unknown errors are left empty.
pub fn write_records_csv<W: Write>(out: &mut W, records: &[ConvergenceRecord]) -> io::Result<()> {
    writeln!(out, "step,N,eta,energy_error,multiplier_error")?;
    for r in records {
        writeln!(
            out,
            "{},{},{},{},{}",
            r.step,
            r.n,
            r.eta,
            optional(r.energy_error),
            optional(r.multiplier_error)
        )?;
    }
    Ok(())
}

/// Writes one step as legacy VTK with point field `u` and cell fields
/// `subdomain` and `marked`, Ω₁ first regardless of side order.
pub fn write_step_vtk<W: Write>(out: &mut W, view: &StepView<'_>) -> io::Result<()> {
    let order = if view.meshes[0].id() > view.meshes[1].id() {
        [1, 0]
    } else {
        [0, 1]
    };
    let meshes = order.map(|s| view.meshes[s]);
    let u = order.map(|s| view.discrete.solution.u[s].clone());
    let marked = meshes.map(|m| {
        (0..m.num_triangles())
            .map(|t| view.marks.contains(m.id(), t))
            .collect()
    });
    write_vtk(
        out,
        &meshes,
        VtkFields {
            u: Some(&u),
            marked: Some(&marked),
        },
    )
}

/// Observer that writes `step_NNN.vtk` and `indicators_NNN.csv` per step into
/// a directory.
pub struct StepWriter {
    dir: PathBuf,
    pub indicators: bool,
}

impl StepWriter {
    pub fn new(dir: &Path) -> Result<Self> {
        create_dir(dir)?;
        Ok(Self {
            dir: dir.to_path_buf(),
            indicators: true,
        })
    }

    pub fn write(&self, view: &StepView<'_>) -> Result<()> {
        let vtk = self.dir.join(format!("step_{:03}.vtk", view.step));
        write_file(&vtk, |out| write_step_vtk(out, view))?;
        if self.indicators {
            let csv = self.dir.join(format!("indicators_{:03}.csv", view.step));
            write_file(&csv, |out| {
                write_indicator_csv(out, view.meshes, &view.discrete.indicators, view.marks)
            })?;
        }
        Ok(())
    }
}
