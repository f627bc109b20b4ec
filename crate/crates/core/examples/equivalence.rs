//! Each Nitsche variant and its stabilised mixed counterpart give the same
//! discrete solution and multiplier.

use nitsche_mortar::driver::{compare_with_counterpart, Geometry, Problem, ProblemConfig};
use nitsche_mortar::Method;

fn main() -> nitsche_mortar::Result<()> {
    let geometry = Geometry::TwoRectangles {
        nx1: 4,
        ny1: 3,
        nx2: 5,
        ny2: 7,
    };
    let [m1, m2] = geometry.build()?;
    for method in Method::NITSCHE {
        let config = ProblemConfig {
            geometry,
            k1: 10.0,
            k2: 0.1,
            method,
            ..Default::default()
        };
        let problem = Problem::from_config(&config)?;
        let eq = compare_with_counterpart([&m1, &m2], &problem)?;
        println!(
            "{method:>3} vs {:>9}: max |du| {:.1e}, max |dlambda| {:.1e} ({} vs {} unknowns)",
            method.counterpart(),
            eq.primal,
            eq.multiplier,
            eq.dims[0],
            eq.dims[1]
        );
    }
    Ok(())
}
