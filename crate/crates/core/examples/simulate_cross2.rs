//! Robot 1 of `cross2` is held for six steps. FREEFLOW drives robot 2 into
//! it, RMTRACK holds robot 2 just short of the crossing, ALLSTOP freezes
//! everybody.

use rmtrack::bundled;
use rmtrack::disturbance::{DisturbanceProcess, Script};
use rmtrack::policies::Policy;
use rmtrack::simulator::{audit_trace, metrics, run, RunConfig};

fn main() -> rmtrack::Result<()> {
    let inst = bundled::cross2();
    let noise = DisturbanceProcess::Scripted(Script::block_robot(2, 0, 6));
    println!(
        "{:<9} {:>8} {:>12} {:>10}",
        "policy", "makespan", "travel", "collisions"
    );
    for policy in Policy::ALL {
        let trace = run(&inst, policy, &noise, &RunConfig::default())?;
        let audit = audit_trace(&inst, &trace)?;
        let m = metrics(&trace);
        let travel: Vec<String> = m
            .travel_times
            .iter()
            .map(|t| format!("{}", t.unwrap_or(0)))
            .collect();
        println!(
            "{:<9} {:>8} {:>12} {:>10}",
            policy.name(),
            m.makespan.map_or("-".into(), |v| v.to_string()),
            travel.join("/"),
            audit.collisions.len()
        );
    }

    // where robot 2 waits under rmtrack
    let trace = run(&inst, Policy::Rmtrack, &noise, &RunConfig::default())?;
    for step in trace
        .steps
        .iter()
        .filter(|s| !s.a[1] && s.x[1] < inst.horizon())
    {
        println!(
            "t={:>2}: robot 2 held at plan position {}",
            step.t, step.x[1]
        );
    }
    Ok(())
}
