//! Monte-Carlo travel times against E/(1-q) and E/(1-q)^n on straight,
//! non-interacting paths.

use rmtrack::disturbance::{allstop_expectation, lower_bound_expectation, DisturbanceProcess};
use rmtrack::geometry::{Point, Rect};
use rmtrack::model::{Instance, Trajectory, Workspace};
use rmtrack::policies::Policy;
use rmtrack::simulator::{metrics, run, RunConfig};

fn lane(y: f64, len: usize) -> Trajectory {
    Trajectory::new((0..=len).map(|k| Point::new(k as f64, y)).collect())
}

fn main() -> rmtrack::Result<()> {
    let tf = 20;
    let ws = Workspace::empty(Rect::new(0.0, 0.0, 20.0, 10.0));
    let single = Instance::new("lane", 0.4, ws.clone(), vec![lane(0.0, tf)]);
    let pair = Instance::new("lanes", 0.4, ws, vec![lane(0.0, tf), lane(10.0, tf)]);
    let seeds = 2000;
    let cfg = RunConfig::default().unrecorded();

    println!(
        "{:>4} {:>10} {:>10} {:>10} {:>10}",
        "q", "freeflow", "E/(1-q)", "allstop", "E/(1-q)^2"
    );
    for q in [0.0, 0.1, 0.2, 0.3, 0.4, 0.5] {
        let mut ff = 0.0;
        let mut all = 0.0;
        for seed in 0..seeds {
            let noise = DisturbanceProcess::bernoulli(q, seed)?;
            ff += metrics(&run(&single, Policy::Freeflow, &noise, &cfg)?)
                .makespan
                .unwrap_or(0) as f64;
            all += metrics(&run(&pair, Policy::Allstop, &noise, &cfg)?)
                .makespan
                .unwrap_or(0) as f64;
        }
        println!(
            "{q:>4} {:>10.3} {:>10.3} {:>10.3} {:>10.3}",
            ff / seeds as f64,
            lower_bound_expectation(tf as f64, q)?,
            all / seeds as f64,
            allstop_expectation(tf as f64, q, 2)?
        );
    }
    Ok(())
}
