//! Records a disturbed run to a JSONL trace, reads it back and re-checks it
//! independently of the simulator.

use rmtrack::bundled;
use rmtrack::disturbance::DisturbanceProcess;
use rmtrack::oracle::{check_ordering, check_progress};
use rmtrack::policies::Policy;
use rmtrack::simulator::{audit_trace, run, RunConfig};
use rmtrack::trace::Trace;

fn main() -> rmtrack::Result<()> {
    let inst = bundled::corridor_swap();
    let noise = DisturbanceProcess::bernoulli(0.4, 2024)?;
    let path = std::env::temp_dir().join("rmtrack-corridor-swap.jsonl");

    let trace = run(&inst, Policy::Rmtrack, &noise, &RunConfig::default())?;
    std::fs::write(&path, trace.to_jsonl())?;
    let back = Trace::from_jsonl(&std::fs::read_to_string(&path)?)?;
    println!("trace: {} ({} steps)", path.display(), back.steps.len());

    let audit = audit_trace(&inst, &back)?;
    println!(
        "collisions: {}, dynamics issues: {}, completed: {}",
        audit.collisions.len(),
        audit.dynamics.len(),
        audit.completed
    );
    let ordering = check_ordering(&inst, &back)?;
    println!(
        "ordering: passed={} after {} checks",
        ordering.passed(),
        ordering.checks
    );
    let progress = check_progress(&back);
    println!(
        "progress: passed={} after {} checks",
        progress.passed(),
        progress.checks
    );

    let allstop = run(&inst, Policy::Allstop, &noise, &RunConfig::default())?;
    match check_progress(&allstop).first_violation {
        Some(v) => println!("allstop progress: {v}"),
        None => println!("allstop progress: never stalled"),
    }
    Ok(())
}
