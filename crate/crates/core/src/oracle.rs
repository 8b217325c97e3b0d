//! Ground-truth checks: exhaustive disturbance enumeration on tiny instances,
//! and direct checks of the two trace invariants behind RMTRACK's guarantees.

use std::fmt;

use rayon::prelude::*;

use crate::coordspace::CollisionOracle;
use crate::disturbance::{DisturbanceProcess, Script};
use crate::error::{Error, Result};
use crate::model::Instance;
use crate::policies::Policy;
use crate::simulator::{run, RunConfig};
use crate::trace::Trace;

/// Largest `n · W` enumerated (2^20 branches).
pub const ENUMERATION_LIMIT: usize = 20;

#[derive(Debug, Clone)]
pub struct Counterexample {
    pub script: Script,
    pub trace: Trace,
}

#[derive(Debug, Clone)]
pub struct VerificationResult {
    pub safe: bool,
    pub live: bool,
    /// Largest number of steps any branch ran for.
    pub worst_makespan: usize,
    pub branches: usize,
    /// First failing script in lexicographic order, if any.
    pub counterexample: Option<Counterexample>,
}

impl VerificationResult {
    pub fn passed(&self) -> bool {
        self.safe && self.live
    }
}

#[derive(Debug, Clone, Copy)]
struct Outcome {
    collided: bool,
    completed: bool,
    steps: usize,
}

/// Step cap used for every branch: `T + W + n·T`.
pub fn liveness_bound(inst: &Instance, window: usize) -> usize {
    let horizon = inst.horizon();
    horizon + window + inst.robots() * horizon
}

/// Script number `m` of the enumeration: the `n·W` flags read row by row
/// form the binary digits of `m`, most significant first, so increasing `m`
/// is lexicographic order and `m = 0` stops everybody for `W` steps.
pub fn enumerated_script(n: usize, window: usize, m: u64) -> Script {
    let bits = n * window;
    let rows = (0..n)
        .map(|i| {
            (0..window)
                .map(|t| (m >> (bits - 1 - (i * window + t))) & 1 == 1)
                .collect()
        })
        .collect();
    Script::new(rows).expect("rows are rectangular")
}

/// Runs `policy` under every disturbance script over the first `window` steps
/// (all robots free afterwards) and reports whether every branch stayed
/// collision-free and completed within [`liveness_bound`].
pub fn exhaustive_verify(
    inst: &Instance,
    policy: Policy,
    window: usize,
) -> Result<VerificationResult> {
    let n = inst.robots();
    let requested = n * window;
    if requested > ENUMERATION_LIMIT {
        return Err(Error::Guard {
            requested,
            limit: ENUMERATION_LIMIT,
        });
    }
    if policy == Policy::Rmtrack {
        CollisionOracle::new(inst).verify_margin().into_result()?;
    }
    let cfg = RunConfig::default()
        .with_max_steps(liveness_bound(inst, window))
        .unrecorded();
    let branches = 1u64 << requested;
    let outcomes: Vec<Outcome> = (0..branches)
        .into_par_iter()
        .map(|m| {
            let script = enumerated_script(n, window, m);
            let trace = run(inst, policy, &DisturbanceProcess::Scripted(script), &cfg)?;
            Ok(Outcome {
                collided: trace.collisions.unwrap_or(0) > 0,
                completed: trace.completed,
                steps: trace.final_state.t,
            })
        })
        .collect::<Result<_>>()?;

    let safe = outcomes.iter().all(|o| !o.collided);
    let live = outcomes.iter().all(|o| o.completed);
    let worst_makespan = outcomes.iter().map(|o| o.steps).max().unwrap_or(0);
    let counterexample = match outcomes.iter().position(|o| o.collided || !o.completed) {
        Some(m) => {
            let script = enumerated_script(n, window, m as u64);
            let cfg = RunConfig::default().with_max_steps(liveness_bound(inst, window));
            let trace = run(
                inst,
                policy,
                &DisturbanceProcess::Scripted(script.clone()),
                &cfg,
            )?;
            Some(Counterexample { script, trace })
        }
        None => None,
    };
    Ok(VerificationResult {
        safe,
        live,
        worst_makespan,
        branches: outcomes.len(),
        counterexample,
    })
}

/// Outcome of a per-step invariant check over a trace.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CheckReport<V> {
    /// Individual checks performed.
    pub checks: usize,
    pub first_violation: Option<V>,
}

impl<V> CheckReport<V> {
    pub fn passed(&self) -> bool {
        self.first_violation.is_none()
    }
}

/// Robot `i` leads `j` at step `t`, yet `(x_i, k)` lies in `C_ij`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OrderingViolation {
    pub t: usize,
    pub i: usize,
    pub j: usize,
    pub k: usize,
}

impl fmt::Display for OrderingViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "t = {}: robot {} at its position overlaps robot {} at position {}",
            self.t, self.i, self.j, self.k
        )
    }
}

/// Checks at every visited state that whenever `x_i ≥ x_j`, no
/// `k ∈ [x_j, x_i]` has `c_ij(x_i, k)`.
pub fn check_ordering(inst: &Instance, trace: &Trace) -> Result<CheckReport<OrderingViolation>> {
    let n = inst.robots();
    if trace.robots() != n {
        return Err(Error::TraceMismatch(format!(
            "trace has {} robots, instance {n}",
            trace.robots()
        )));
    }
    let horizon = inst.horizon();
    let oracle = CollisionOracle::new(inst);
    let mut checks = 0;
    for (t, x) in trace.states() {
        if let Some(&bad) = x.iter().find(|&&xi| xi > horizon) {
            return Err(Error::PositionOutOfRange { x: bad, horizon });
        }
        for i in 0..n {
            for j in 0..n {
                if i == j || x[i] < x[j] {
                    continue;
                }
                checks += 1;
                if let Some(k) = (x[j]..=x[i]).find(|&k| oracle.collides(i, j, x[i], k)) {
                    return Ok(CheckReport {
                        checks,
                        first_violation: Some(OrderingViolation { t, i, j, k }),
                    });
                }
            }
        }
    }
    Ok(CheckReport {
        checks,
        first_violation: None,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProgressViolation {
    /// No unfinished robot was commanded forward.
    NoneAdvancing { t: usize },
    /// Someone was commanded forward, but no unfinished robot among the
    /// furthest behind.
    MinimumStalled { t: usize },
}

impl fmt::Display for ProgressViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProgressViolation::NoneAdvancing { t } => {
                write!(f, "t = {t}: no unfinished robot is commanded to move")
            }
            ProgressViolation::MinimumStalled { t } => write!(
                f,
                "t = {t}: no robot among those furthest behind is commanded to move"
            ),
        }
    }
}

/// Checks at every recorded step that some unfinished robot is commanded
/// forward, and more specifically one of those with the smallest position.
pub fn check_progress(trace: &Trace) -> CheckReport<ProgressViolation> {
    let horizon = trace.horizon;
    let mut checks = 0;
    for step in &trace.steps {
        let Some(&min) = step.x.iter().min() else {
            continue;
        };
        if min >= horizon {
            continue;
        }
        checks += 1;
        let commanded = |i: usize| step.a.get(i).copied().unwrap_or(false);
        let any = (0..step.x.len()).any(|i| step.x[i] < horizon && commanded(i));
        if !any {
            return CheckReport {
                checks,
                first_violation: Some(ProgressViolation::NoneAdvancing { t: step.t }),
            };
        }
        let front = (0..step.x.len()).any(|i| step.x[i] == min && commanded(i));
        if !front {
            return CheckReport {
                checks,
                first_violation: Some(ProgressViolation::MinimumStalled { t: step.t }),
            };
        }
    }
    CheckReport {
        checks,
        first_violation: None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bundled;
    use crate::model::SimState;
    use crate::trace::Step;

    fn handmade(inst: &Instance, states: &[[usize; 2]]) -> Trace {
        let steps = states
            .iter()
            .enumerate()
            .map(|(t, x)| Step {
                t,
                x: x.to_vec(),
                a: vec![true, true],
                d: vec![true, true],
            })
            .collect();
        Trace {
            instance_name: inst.name.clone(),
            policy: "handmade".into(),
            seed: 0,
            q: 0.0,
            horizon: inst.horizon(),
            completion: inst.completion_indices(),
            steps,
            final_state: SimState {
                t: states.len(),
                x: vec![inst.horizon(); 2],
            },
            completed: true,
            travel_times: vec![None, None],
            collisions: None,
        }
    }

    #[test]
    fn script_numbering_is_lexicographic() {
        assert_eq!(enumerated_script(2, 2, 0).to_text(), "00\n00\n");
        assert_eq!(enumerated_script(2, 2, 1).to_text(), "00\n01\n");
        assert_eq!(enumerated_script(2, 2, 0b1000).to_text(), "10\n00\n");
        let texts: Vec<String> = (0..16)
            .map(|m| enumerated_script(2, 2, m).to_text())
            .collect();
        let mut sorted = texts.clone();
        sorted.sort();
        assert_eq!(texts, sorted);
    }

    #[test]
    fn mini_cross_rmtrack_is_certified() {
        let inst = bundled::mini_cross();
        let res = exhaustive_verify(&inst, Policy::Rmtrack, 4).unwrap();
        assert_eq!(res.branches, 256);
        assert!(res.safe && res.live);
        assert!(res.counterexample.is_none());
    }

    #[test]
    fn mini_cross_freeflow_collides() {
        let inst = bundled::mini_cross();
        let res = exhaustive_verify(&inst, Policy::Freeflow, 4).unwrap();
        assert!(!res.safe);
        let cex = res.counterexample.unwrap();
        // robot 1 is held back while robot 2 keeps its schedule
        let stopped = |i: usize| cex.script.rows()[i].iter().filter(|d| !**d).count();
        assert!(stopped(0) > stopped(1));
        let audit = crate::simulator::audit_trace(&inst, &cex.trace).unwrap();
        assert!(!audit.is_safe());
    }

    #[test]
    fn zero_window_is_the_undisturbed_run() {
        let inst = bundled::cross2();
        for policy in Policy::ALL {
            let res = exhaustive_verify(&inst, policy, 0).unwrap();
            assert!(res.passed());
            assert_eq!(res.branches, 1);
            assert_eq!(res.worst_makespan, inst.horizon());
        }
    }

    #[test]
    fn guard_rejects_large_windows() {
        let inst = bundled::mini_cross();
        assert!(matches!(
            exhaustive_verify(&inst, Policy::Rmtrack, 11),
            Err(Error::Guard { requested: 22, .. })
        ));
    }

    #[test]
    fn ordering_check_catches_handmade_overlap() {
        let inst = bundled::cross2();
        let trace = handmade(&inst, &[[0, 0], [5, 11]]);
        let report = check_ordering(&inst, &trace).unwrap();
        let v = report.first_violation.unwrap();
        assert_eq!((v.t, v.i, v.j), (1, 1, 0));
        assert!(check_ordering(&inst, &handmade(&inst, &[[0, 0], [3, 3]]))
            .unwrap()
            .passed());
    }

    #[test]
    fn progress_flags_allstop_stalls() {
        let inst = bundled::cross2();
        let script = Script::block_robot(2, 0, 3);
        let trace = run(
            &inst,
            Policy::Allstop,
            &DisturbanceProcess::Scripted(script),
            &RunConfig::default(),
        )
        .unwrap();
        let report = check_progress(&trace);
        assert_eq!(
            report.first_violation,
            Some(ProgressViolation::NoneAdvancing { t: 0 })
        );
        let rm = run(
            &inst,
            Policy::Rmtrack,
            &DisturbanceProcess::Scripted(Script::block_robot(2, 0, 3)),
            &RunConfig::default(),
        )
        .unwrap();
        assert!(check_progress(&rm).passed());
        assert!(check_ordering(&inst, &rm).unwrap().passed());
    }
}
