//! Linear solution reproduced exactly by every coupling method on
//! non-matching meshes with a material jump.

use nitsche_mortar::driver::{solve_once, Geometry, ProblemConfig, SourceSpec};
use nitsche_mortar::Method;

fn main() -> nitsche_mortar::Result<()> {
    for method in Method::ALL {
        let config = ProblemConfig {
            geometry: Geometry::TwoRectangles {
                nx1: 3,
                ny1: 4,
                nx2: 5,
                ny2: 3,
            },
            k1: 10.0,
            k2: 0.1,
            method,
            source: "manufactured(linear_patch)".parse::<SourceSpec>()?,
            ..Default::default()
        };
        let (_, record, _) = solve_once(&config)?;
        println!(
            "{method:>9}: N = {:3}, energy error {:.2e}, multiplier error {:.2e}",
            record.n,
            record.energy_error.unwrap_or(f64::NAN),
            record.multiplier_error.unwrap_or(f64::NAN)
        );
    }
    Ok(())
}
