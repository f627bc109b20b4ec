//! Estimator decay for uniform and adaptive refinement on the L-shaped
//! domain with its reentrant corner on the interface.

use nitsche_mortar::driver::{fitted_slope, run_adaptive, run_uniform, Geometry, ProblemConfig};

fn main() -> nitsche_mortar::Result<()> {
    let config = ProblemConfig {
        geometry: Geometry::LShape { n: 4 },
        max_dofs: 10_000,
        ..Default::default()
    };
    let uniform = run_uniform(&config, 4, None)?;
    let adaptive = run_adaptive(&config, None)?;
    for (name, run) in [("uniform", &uniform), ("adaptive", &adaptive)] {
        println!("{name}:");
        for r in &run.records {
            println!("  N = {:6}  eta = {:.4e}", r.n, r.eta);
        }
        println!(
            "  fitted slope {:.3}",
            fitted_slope(&run.records, |r| Some(r.eta)).unwrap_or(f64::NAN)
        );
    }
    Ok(())
}
