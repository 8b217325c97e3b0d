//! Plans a random well-formed instance on a bundled map and checks it.
//!
//! cargo run --example plan_instance -- warehouse 6 3

use rmtrack::bundled;
use rmtrack::coordspace::CollisionOracle;
use rmtrack::planner::{prioritized_plan, ProblemSpec};

fn main() -> rmtrack::Result<()> {
    let mut args = std::env::args().skip(1);
    let map_name = args.next().unwrap_or_else(|| "hall".into());
    let n: usize = args.next().and_then(|s| s.parse().ok()).unwrap_or(4);
    let seed: u64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(7);

    let map = bundled::map(&map_name)?;
    let spec =
        ProblemSpec::new(&map_name, map.to_workspace(), n, bundled::MAP_RADIUS).with_seed(seed);
    let inst = prioritized_plan(&spec)?;

    eprintln!(
        "{map_name}: {n} robots, T = {}, arrivals {:?}, planning radius {}",
        inst.horizon(),
        inst.completion_indices(),
        spec.planning_radius()
    );
    let margin = CollisionOracle::new(&inst).verify_margin();
    eprintln!(
        "validation: {} issues, margin: {} issues",
        inst.validate().violations().len(),
        margin.violations().len()
    );
    print!("{}", inst.to_document());
    Ok(())
}
