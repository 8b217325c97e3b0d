//! Small policy sweep on a planned hall instance, CSV on stdout.

use rmtrack::bench::{run_bench, summarize, write_csv, BenchConfig};
use rmtrack::bundled;
use rmtrack::planner::{prioritized_plan, ProblemSpec};

fn main() -> rmtrack::Result<()> {
    let map = bundled::map("hall")?;
    let spec = ProblemSpec::new("hall-n4", map.to_workspace(), 4, bundled::MAP_RADIUS).with_seed(3);
    let inst = prioritized_plan(&spec)?;

    let cfg = BenchConfig {
        intensities: vec![0.0, 0.1, 0.2, 0.3],
        seeds: 50,
        ..Default::default()
    };
    let rows = run_bench(&[inst], &cfg)?;

    for s in summarize(&rows) {
        eprintln!(
            "{:<9} q={:<4} mean travel {:>6.2}  lower bound {:>6.2}",
            s.policy,
            s.q,
            s.mean_travel_time.unwrap_or(f64::NAN),
            s.lower_bound
        );
    }
    write_csv(std::io::stdout().lock(), &rows)
}
