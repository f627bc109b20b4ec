//! Adaptive refinement with a large material jump: the subdomain with the
//! smaller coefficient receives more elements.

use nitsche_mortar::driver::{run_adaptive, ProblemConfig};
use nitsche_mortar::mesh::SubdomainId;
use nitsche_mortar::Method;

fn main() -> nitsche_mortar::Result<()> {
    for (k1, k2) in [(10.0, 0.1), (1.0, 1.0)] {
        let config = ProblemConfig {
            k1,
            k2,
            method: Method::NitscheI,
            max_steps: 9,
            ..Default::default()
        };
        let run = run_adaptive(&config, None)?;
        let last = run.records.last().expect("at least one solve");
        println!(
            "k = ({k1}, {k2}): {} solves, N = {}, eta = {:.3e}, elements {} / {}",
            run.records.len(),
            last.n,
            last.eta,
            run.elements_in(SubdomainId::One),
            run.elements_in(SubdomainId::Two)
        );
    }
    Ok(())
}
