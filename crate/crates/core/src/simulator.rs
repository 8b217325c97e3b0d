//! Discrete-time execution loop: `x_i(t+1) = x_i(t) + a_i(t)·δ_i(t)`.
//!
//! Within a step the policy decides first (from positions, or positions plus
//! the current disturbance flags for ALLSTOP) and the disturbance is applied
//! afterwards.

#![allow(clippy::needless_range_loop)]

use crate::coordspace::CollisionOracle;
use crate::disturbance::DisturbanceProcess;
use crate::error::{Error, Result};
use crate::model::{Instance, SimState};
use crate::policies::{Decision, Policy, PolicyContext};
use crate::trace::{Step, Trace};

/// Default timeout as a multiple of the horizon.
pub const TIMEOUT_FACTOR: usize = 40;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunConfig {
    /// Step cap; `None` means `TIMEOUT_FACTOR · T`.
    pub max_steps: Option<usize>,
    pub record_trace: bool,
    /// Count robot–robot overlaps at every visited state.
    pub audit_online: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            max_steps: None,
            record_trace: true,
            audit_online: true,
        }
    }
}

impl RunConfig {
    pub fn with_max_steps(mut self, max_steps: usize) -> Self {
        self.max_steps = Some(max_steps);
        self
    }

    pub fn unrecorded(mut self) -> Self {
        self.record_trace = false;
        self
    }

    pub fn max_steps_for(&self, inst: &Instance) -> usize {
        self.max_steps
            .unwrap_or(TIMEOUT_FACTOR * inst.horizon().max(1))
    }
}

/// Applies one step of the dynamics.
pub fn step(state: &SimState, decision: &Decision, delta: &[bool]) -> SimState {
    let x = state
        .x
        .iter()
        .zip(decision.commands())
        .zip(delta)
        .map(|((&x, &a), &d)| x + usize::from(a && d))
        .collect();
    SimState { t: state.t + 1, x }
}

fn count_collisions(inst: &Instance, x: &[usize]) -> usize {
    let two_r = 2.0 * inst.radius;
    let mut count = 0;
    for i in 0..x.len() {
        let pi = inst.trajectories[i].at(x[i]);
        for j in (i + 1)..x.len() {
            if pi.distance(inst.trajectories[j].at(x[j])) < two_r {
                count += 1;
            }
        }
    }
    count
}

/// Executes `inst` from `(0, …, 0)` under `policy` and `disturbance`.
///
/// Stops once every robot sits at `T` or after the step cap; hitting the cap
/// is reported through `Trace::completed`, not as an error. RMTRACK refuses
/// to run on instances without the 1-margin.
pub fn run(
    inst: &Instance,
    policy: Policy,
    disturbance: &DisturbanceProcess,
    cfg: &RunConfig,
) -> Result<Trace> {
    let oracle = CollisionOracle::new(inst);
    if policy == Policy::Rmtrack {
        oracle.verify_margin().into_result()?;
    }
    let n = inst.robots();
    let horizon = inst.horizon();
    let max_steps = cfg.max_steps_for(inst);
    if max_steps < horizon {
        return Err(Error::Config(format!(
            "max_steps {max_steps} is below the horizon {horizon}"
        )));
    }
    let completion = inst.completion_indices();

    let mut state = SimState::initial(n);
    let mut steps = Vec::new();
    let mut travel_times: Vec<Option<usize>> =
        completion.iter().map(|&c| (c == 0).then_some(0)).collect();
    let mut collisions = cfg.audit_online.then(|| count_collisions(inst, &state.x));

    while !state.all_at(horizon) && state.t < max_steps {
        let delta = disturbance.deltas(n, state.t);
        let mut ctx = PolicyContext::new(&state, &oracle);
        if policy.observes_disturbance() {
            ctx = ctx.observing(&delta);
        }
        let decision = policy.decide(&ctx)?;
        let next = step(&state, &decision, &delta);
        if cfg.record_trace {
            steps.push(Step {
                t: state.t,
                x: std::mem::take(&mut state.x),
                a: decision.0,
                d: delta,
            });
        }
        state = next;
        for (i, slot) in travel_times.iter_mut().enumerate() {
            if slot.is_none() && state.x[i] >= completion[i] {
                *slot = Some(state.t);
            }
        }
        if let Some(c) = collisions.as_mut() {
            *c += count_collisions(inst, &state.x);
        }
    }

    Ok(Trace {
        instance_name: inst.name.clone(),
        policy: policy.name().to_string(),
        seed: disturbance.seed(),
        q: disturbance.intensity(),
        horizon,
        completed: state.all_at(horizon),
        completion,
        steps,
        final_state: state,
        travel_times,
        collisions,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CollisionEvent {
    pub t: usize,
    pub i: usize,
    pub j: usize,
    pub distance: f64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DynamicsViolation {
    /// `x_i(t+1) − x_i(t) ≠ a_i(t)·δ_i(t)`.
    Inconsistent { t: usize, robot: usize },
    /// Advancement commanded past the horizon.
    CommandAtHorizon { t: usize, robot: usize },
    /// Recorded times are not consecutive.
    TimeGap { t: usize },
}

impl std::fmt::Display for DynamicsViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            DynamicsViolation::Inconsistent { t, robot } => {
                write!(f, "t = {t}: robot {robot} moved against a·δ")
            }
            DynamicsViolation::CommandAtHorizon { t, robot } => {
                write!(f, "t = {t}: robot {robot} commanded past the horizon")
            }
            DynamicsViolation::TimeGap { t } => {
                write!(f, "t = {t}: recorded times not consecutive")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AuditReport {
    pub collisions: Vec<CollisionEvent>,
    pub dynamics: Vec<DynamicsViolation>,
    pub completed: bool,
}

impl AuditReport {
    /// No collision and no dynamics violation (liveness is reported apart).
    pub fn is_safe(&self) -> bool {
        self.collisions.is_empty() && self.dynamics.is_empty()
    }

    pub fn first_collision(&self) -> Option<&CollisionEvent> {
        self.collisions.first()
    }
}

fn check_compatible(inst: &Instance, trace: &Trace) -> Result<()> {
    let n = inst.robots();
    let horizon = inst.horizon();
    if trace.robots() != n {
        return Err(Error::TraceMismatch(format!(
            "trace has {} robots, instance has {n}",
            trace.robots()
        )));
    }
    if trace.horizon != horizon {
        return Err(Error::TraceMismatch(format!(
            "trace horizon {} differs from instance horizon {horizon}",
            trace.horizon
        )));
    }
    for step in &trace.steps {
        if step.x.len() != n || step.a.len() != n || step.d.len() != n {
            return Err(Error::TraceMismatch(format!(
                "step {} has the wrong width",
                step.t
            )));
        }
    }
    for (t, x) in trace.states() {
        if let Some(&bad) = x.iter().find(|&&xi| xi > horizon) {
            return Err(Error::TraceMismatch(format!(
                "plan position {bad} beyond horizon at t = {t}"
            )));
        }
    }
    Ok(())
}

/// Re-checks a trace: every overlapping pair at every visited state, every
/// step against the dynamics, and whether the run finished.
pub fn audit_trace(inst: &Instance, trace: &Trace) -> Result<AuditReport> {
    check_compatible(inst, trace)?;
    let horizon = inst.horizon();
    let two_r = 2.0 * inst.radius;
    let mut collisions = Vec::new();
    for (t, x) in trace.states() {
        for i in 0..x.len() {
            let pi = inst.trajectories[i].at(x[i]);
            for j in (i + 1)..x.len() {
                let distance = pi.distance(inst.trajectories[j].at(x[j]));
                if distance < two_r {
                    collisions.push(CollisionEvent { t, i, j, distance });
                }
            }
        }
    }
    let mut dynamics = Vec::new();
    let successors = trace
        .steps
        .iter()
        .skip(1)
        .map(|s| (s.t, s.x.as_slice()))
        .chain(std::iter::once((
            trace.final_state.t,
            trace.final_state.x.as_slice(),
        )));
    for (step, (next_t, next_x)) in trace.steps.iter().zip(successors) {
        if next_t != step.t + 1 {
            dynamics.push(DynamicsViolation::TimeGap { t: step.t });
        }
        for i in 0..step.x.len() {
            if step.a[i] && step.x[i] >= horizon {
                dynamics.push(DynamicsViolation::CommandAtHorizon {
                    t: step.t,
                    robot: i,
                });
            }
            let expected = step.x[i] + usize::from(step.a[i] && step.d[i]);
            if next_x[i] != expected {
                dynamics.push(DynamicsViolation::Inconsistent {
                    t: step.t,
                    robot: i,
                });
            }
        }
    }
    Ok(AuditReport {
        collisions,
        dynamics,
        completed: trace.final_state.all_at(horizon),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Metrics {
    pub travel_times: Vec<Option<usize>>,
    pub makespan: Option<usize>,
    pub flowtime: Option<usize>,
    pub completed: bool,
    pub collisions: Option<usize>,
}

impl Metrics {
    /// Mean over robots that reached their destination.
    pub fn mean_travel_time(&self) -> Option<f64> {
        let done: Vec<usize> = self.travel_times.iter().flatten().copied().collect();
        (!done.is_empty()).then(|| done.iter().sum::<usize>() as f64 / done.len() as f64)
    }
}

pub fn metrics(trace: &Trace) -> Metrics {
    let travel_times = trace.travel_times.clone();
    let all: Option<Vec<usize>> = travel_times.iter().copied().collect();
    Metrics {
        makespan: all.as_ref().map(|v| v.iter().copied().max().unwrap_or(0)),
        flowtime: all.as_ref().map(|v| v.iter().sum()),
        travel_times,
        completed: trace.completed,
        collisions: trace.collisions,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bundled;
    use crate::disturbance::Script;

    #[test]
    fn step_examples() {
        let s = SimState {
            t: 0,
            x: vec![3, 5],
        };
        let a = Decision(vec![true, true]);
        assert_eq!(step(&s, &a, &[true, false]).x, vec![4, 5]);
        let a = Decision(vec![false, true]);
        assert_eq!(step(&s, &a, &[true, true]).x, vec![3, 6]);
        let s = SimState {
            t: 7,
            x: vec![16, 5],
        };
        let next = step(&s, &Decision(vec![false, true]), &[false, false]);
        assert_eq!(
            next,
            SimState {
                t: 8,
                x: vec![16, 5]
            }
        );
    }

    #[test]
    fn undisturbed_cross2() {
        let inst = bundled::cross2();
        let trace = run(
            &inst,
            Policy::Rmtrack,
            &DisturbanceProcess::None,
            &RunConfig::default(),
        )
        .unwrap();
        assert!(trace.completed);
        let m = metrics(&trace);
        assert_eq!(m.travel_times, vec![Some(10), Some(16)]);
        assert_eq!(m.makespan, Some(16));
        assert_eq!(m.flowtime, Some(26));
        assert_eq!(m.collisions, Some(0));
        for (k, step) in trace.steps.iter().enumerate() {
            assert_eq!(step.x, vec![k, k]);
        }
    }

    #[test]
    fn rmtrack_waits_out_blocked_robot() {
        let inst = bundled::cross2();
        let script = DisturbanceProcess::Scripted(Script::block_robot(2, 0, 6));
        let trace = run(&inst, Policy::Rmtrack, &script, &RunConfig::default()).unwrap();
        assert!(trace.completed);
        let audit = audit_trace(&inst, &trace).unwrap();
        assert!(audit.is_safe(), "{audit:?}");
        // robot 2 is held at plan position 9 while robot 1 clears the crossing
        let held: Vec<_> = trace
            .steps
            .iter()
            .filter(|s| s.x[1] == 9 && !s.a[1])
            .map(|s| s.t)
            .collect();
        assert_eq!(held, vec![9, 10, 11, 12]);
        assert!(trace
            .steps
            .iter()
            .all(|s| s.a[1] || s.x[1] == 9 || s.x[1] == 16));
    }

    #[test]
    fn allstop_pays_every_blocked_step() {
        let inst = bundled::cross2();
        let script = DisturbanceProcess::Scripted(Script::block_robot(2, 0, 6));
        let trace = run(&inst, Policy::Allstop, &script, &RunConfig::default()).unwrap();
        assert_eq!(metrics(&trace).makespan, Some(22));
        assert!(audit_trace(&inst, &trace).unwrap().is_safe());
    }

    #[test]
    fn freeflow_collides_when_robot_one_is_late() {
        let inst = bundled::cross2();
        let script = DisturbanceProcess::Scripted(Script::block_robot(2, 0, 6));
        let trace = run(&inst, Policy::Freeflow, &script, &RunConfig::default()).unwrap();
        let audit = audit_trace(&inst, &trace).unwrap();
        assert!(!audit.collisions.is_empty());
        assert!(audit.dynamics.is_empty());
        assert_eq!(trace.collisions, Some(audit.collisions.len()));
    }

    #[test]
    fn handcrafted_colliding_state_is_reported() {
        let inst = bundled::cross2();
        let mut trace = run(
            &inst,
            Policy::Freeflow,
            &DisturbanceProcess::None,
            &RunConfig::default(),
        )
        .unwrap();
        trace.steps.truncate(3);
        trace.final_state = SimState {
            t: 3,
            x: vec![5, 11],
        };
        let audit = audit_trace(&inst, &trace).unwrap();
        assert_eq!(audit.first_collision().map(|c| c.t), Some(3));
        assert!(!audit.dynamics.is_empty());
    }

    #[test]
    fn margin_broken_instance_rejected_for_rmtrack() {
        let inst = bundled::cross2().with_radius(2.4);
        let err = run(
            &inst,
            Policy::Rmtrack,
            &DisturbanceProcess::None,
            &RunConfig::default(),
        )
        .unwrap_err();
        assert!(matches!(err, Error::MarginViolation { .. }));
    }

    #[test]
    fn timeout_flags_incomplete_run() {
        let inst = bundled::cross2();
        let stuck = DisturbanceProcess::Scripted(Script::block_robot(2, 1, 100));
        let cfg = RunConfig::default().with_max_steps(30);
        let trace = run(&inst, Policy::Rmtrack, &stuck, &cfg).unwrap();
        assert!(!trace.completed);
        let m = metrics(&trace);
        assert_eq!(m.travel_times[1], None);
        assert_eq!(m.makespan, None);
        assert!(run(
            &inst,
            Policy::Rmtrack,
            &stuck,
            &RunConfig::default().with_max_steps(3)
        )
        .is_err());
    }

    #[test]
    fn trace_file_roundtrip() {
        let inst = bundled::cross2();
        let p = DisturbanceProcess::bernoulli(0.3, 5).unwrap();
        let trace = run(&inst, Policy::Rmtrack, &p, &RunConfig::default()).unwrap();
        let text = trace.to_jsonl();
        let back = Trace::from_jsonl(&text).unwrap();
        assert_eq!(back.steps, trace.steps);
        assert_eq!(back.final_state, trace.final_state);
        assert_eq!(back.travel_times, trace.travel_times);
        assert_eq!(back.to_jsonl(), text);
        assert!(text
            .lines()
            .nth(1)
            .unwrap()
            .starts_with("{\"t\":0,\"x\":[0,0],\"a\":["));
    }

    #[test]
    fn mismatched_trace_rejected() {
        let inst = bundled::cross2();
        let trace = run(
            &inst,
            Policy::Rmtrack,
            &DisturbanceProcess::None,
            &RunConfig::default(),
        )
        .unwrap();
        assert!(audit_trace(&bundled::mini_cross(), &trace).is_err());
    }
}
