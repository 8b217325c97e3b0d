//! Enumerates every disturbance script over the first W steps on the tiny
//! bundled instances.

use rmtrack::bundled;
use rmtrack::oracle::exhaustive_verify;
use rmtrack::policies::Policy;

fn main() -> rmtrack::Result<()> {
    for inst in [bundled::mini_cross(), bundled::corridor_swap()] {
        for window in [4, 6, 8] {
            let res = exhaustive_verify(&inst, Policy::Rmtrack, window)?;
            println!(
                "{:<14} rmtrack  W={window}  branches={:<6} safe={} live={} worst={}",
                inst.name, res.branches, res.safe, res.live, res.worst_makespan
            );
        }
    }

    let inst = bundled::mini_cross();
    let res = exhaustive_verify(&inst, Policy::Freeflow, 4)?;
    println!("{:<14} freeflow W=4  safe={}", inst.name, res.safe);
    if let Some(cex) = res.counterexample {
        println!("first colliding script (rows = robots, 0 = stopped):");
        print!("{}", cex.script);
        let first = cex.trace.states().find(|(_, x)| {
            let a = inst.trajectories[0].at(x[0]);
            let b = inst.trajectories[1].at(x[1]);
            a.distance(b) < 2.0 * inst.radius
        });
        if let Some((t, x)) = first {
            println!("overlap at t={t}, positions {x:?}");
        }
    }
    Ok(())
}
