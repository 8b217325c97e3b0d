//! The `plan`, `simulate`, `verify` and `bench` commands, independent of
//! argument parsing so they can be driven from tests.
//!
//! Every command returns its exit status together with the text meant for
//! standard output; files are written only where an output path is given.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::bench::{run_bench, write_csv, BenchConfig};
use crate::bundled;
use crate::coordspace::CollisionOracle;
use crate::disturbance::{DisturbanceProcess, Script};
use crate::error::{Error, Result};
use crate::model::{parse_instance, Instance};
use crate::oracle::{check_ordering, check_progress, exhaustive_verify};
use crate::planner::{prioritized_plan, GridMap, ProblemSpec};
use crate::policies::Policy;
use crate::simulator::{audit_trace, metrics, run, RunConfig};
use crate::trace::Trace;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Ok = 0,
    Violation = 1,
    PlanningFailure = 2,
    Timeout = 3,
    MarginViolation = 4,
    GuardViolation = 5,
}

impl Status {
    pub fn code(self) -> u8 {
        self as u8
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommandOutput {
    pub status: Status,
    pub stdout: String,
}

impl CommandOutput {
    fn new(status: Status, stdout: String) -> Self {
        Self { status, stdout }
    }
}

/// Reads `source` as a file if it exists, else as the name of a bundled
/// instance.
pub fn read_instance_source(source: &str) -> Result<Instance> {
    let path = Path::new(source);
    if path.exists() {
        return parse_instance(&fs::read(path)?);
    }
    if bundled::INSTANCE_NAMES.contains(&source) {
        return bundled::instance(source);
    }
    Err(Error::Parse(format!(
        "{source}: no such file or bundled instance"
    )))
}

/// Reads `source` as a map file if it exists, else as a bundled map name.
pub fn read_map_source(source: &str) -> Result<GridMap> {
    let path = Path::new(source);
    if path.exists() {
        return GridMap::parse(&fs::read_to_string(path)?);
    }
    if bundled::MAP_NAMES.contains(&source) {
        return bundled::map(source);
    }
    Err(Error::Parse(format!(
        "{source}: no such file or bundled map"
    )))
}

fn load_checked(source: &str) -> Result<Instance> {
    let inst = read_instance_source(source)?;
    let report = inst.validate();
    if report.is_empty() {
        Ok(inst)
    } else {
        Err(Error::Invalid(report))
    }
}

#[derive(Debug, Clone)]
pub struct PlanArgs {
    pub map: String,
    pub robots: usize,
    pub seed: u64,
    pub radius: f64,
    /// Instance name; defaults to `<map>-n<robots>-s<seed>`.
    pub name: Option<String>,
    pub out: Option<PathBuf>,
}

pub fn cmd_plan(args: &PlanArgs) -> Result<CommandOutput> {
    let map = read_map_source(&args.map)?;
    let stem = Path::new(&args.map)
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("map");
    let name = args
        .name
        .clone()
        .unwrap_or_else(|| format!("{stem}-n{}-s{}", args.robots, args.seed));
    let spec =
        ProblemSpec::new(name, map.to_workspace(), args.robots, args.radius).with_seed(args.seed);
    let inst = match prioritized_plan(&spec) {
        Ok(inst) => inst,
        Err(Error::Planning { robot, reason }) => {
            return Ok(CommandOutput::new(
                Status::PlanningFailure,
                format!("planning failed for robot {robot}: {reason}\n"),
            ))
        }
        Err(e) => return Err(e),
    };
    let doc = inst.to_document();
    match &args.out {
        Some(path) => {
            fs::write(path, &doc)?;
            Ok(CommandOutput::new(
                Status::Ok,
                format!(
                    "wrote {} ({} robots, T = {})\n",
                    path.display(),
                    inst.robots(),
                    inst.horizon()
                ),
            ))
        }
        None => Ok(CommandOutput::new(Status::Ok, doc)),
    }
}

#[derive(Debug, Clone)]
pub struct SimulateArgs {
    pub instance: String,
    pub policy: Policy,
    pub q: f64,
    pub seed: u64,
    pub block_len: usize,
    /// Scripted disturbance table replacing the Bernoulli process.
    pub script: Option<PathBuf>,
    pub max_steps: Option<usize>,
    pub out: Option<PathBuf>,
}

impl SimulateArgs {
    pub fn new(instance: impl Into<String>, policy: Policy) -> Self {
        Self {
            instance: instance.into(),
            policy,
            q: 0.0,
            seed: 0,
            block_len: 1,
            script: None,
            max_steps: None,
            out: None,
        }
    }
}

pub fn cmd_simulate(args: &SimulateArgs) -> Result<CommandOutput> {
    let inst = load_checked(&args.instance)?;
    let noise = match &args.script {
        Some(path) => DisturbanceProcess::Scripted(Script::parse(&fs::read_to_string(path)?)?),
        None => DisturbanceProcess::bernoulli_blocks(args.q, args.block_len, args.seed)?,
    };
    let cfg = RunConfig {
        max_steps: args.max_steps,
        ..RunConfig::default()
    };
    let trace = match run(&inst, args.policy, &noise, &cfg) {
        Ok(trace) => trace,
        Err(e @ Error::MarginViolation { .. }) => {
            return Ok(CommandOutput::new(
                Status::MarginViolation,
                format!("{e}\n"),
            ))
        }
        Err(e) => return Err(e),
    };
    if let Some(path) = &args.out {
        fs::write(path, trace.to_jsonl())?;
    }
    let audit = audit_trace(&inst, &trace)?;
    let m = metrics(&trace);
    let mut out = String::new();
    let _ = writeln!(out, "instance: {}", inst.name);
    let _ = writeln!(out, "policy: {}", args.policy);
    let _ = writeln!(
        out,
        "disturbance: {} q={} seed={}",
        noise.kind(),
        noise.intensity(),
        noise.seed()
    );
    let _ = writeln!(out, "steps: {}", trace.final_state.t);
    let _ = writeln!(out, "completed: {}", m.completed);
    let times: Vec<String> = m
        .travel_times
        .iter()
        .map(|t| t.map_or("-".to_string(), |t| t.to_string()))
        .collect();
    let _ = writeln!(out, "travel_times: {}", times.join(" "));
    match m.makespan {
        Some(ms) => {
            let _ = writeln!(out, "makespan: {ms}");
        }
        None => {
            let _ = writeln!(out, "makespan: -");
        }
    }
    if let Some(mean) = m.mean_travel_time() {
        let _ = writeln!(out, "mean_travel_time: {mean}");
    }
    let _ = writeln!(out, "collisions: {}", audit.collisions.len());
    if let Some(c) = audit.first_collision() {
        let _ = writeln!(
            out,
            "first collision: t = {}, robots {} and {}",
            c.t, c.i, c.j
        );
    }
    let status = if args.policy == Policy::Rmtrack && !audit.is_safe() {
        Status::Violation
    } else if !trace.completed {
        let _ = writeln!(out, "timeout after {} steps", trace.final_state.t);
        Status::Timeout
    } else {
        Status::Ok
    };
    Ok(CommandOutput::new(status, out))
}

#[derive(Debug, Clone)]
pub struct VerifyArgs {
    pub instance: String,
    pub trace: Option<PathBuf>,
    /// Window of the exhaustive enumeration.
    pub exhaustive: Option<usize>,
    pub policy: Policy,
}

impl VerifyArgs {
    pub fn new(instance: impl Into<String>) -> Self {
        Self {
            instance: instance.into(),
            trace: None,
            exhaustive: None,
            policy: Policy::Rmtrack,
        }
    }
}

pub fn cmd_verify(args: &VerifyArgs) -> Result<CommandOutput> {
    let inst = read_instance_source(&args.instance)?;
    let mut out = String::new();
    let report = inst.validate();
    if let Some(v) = report.first() {
        let _ = writeln!(
            out,
            "instance: FAIL ({} violations; first: {v})",
            report.violations().len()
        );
        return Ok(CommandOutput::new(Status::Violation, out));
    }
    let _ = writeln!(
        out,
        "instance: ok ({} robots, T = {})",
        inst.robots(),
        inst.horizon()
    );
    let margin = CollisionOracle::new(&inst).verify_margin();
    if let Some(v) = margin.violations().first() {
        let _ = writeln!(
            out,
            "margin: FAIL ({} violations; first: {v})",
            margin.violations().len()
        );
        return Ok(CommandOutput::new(Status::MarginViolation, out));
    }
    let _ = writeln!(out, "margin: ok");
    let mut status = Status::Ok;

    if let Some(path) = &args.trace {
        let trace = Trace::from_jsonl(&fs::read_to_string(path)?)?;
        let audit = audit_trace(&inst, &trace)?;
        match (audit.first_collision(), audit.dynamics.first()) {
            (Some(c), _) => {
                let _ = writeln!(
                    out,
                    "audit: FAIL ({} collisions; first at t = {}, robots {} and {})",
                    audit.collisions.len(),
                    c.t,
                    c.i,
                    c.j
                );
                status = Status::Violation;
            }
            (None, Some(d)) => {
                let _ = writeln!(out, "audit: FAIL ({d})");
                status = Status::Violation;
            }
            (None, None) => {
                let _ = writeln!(out, "audit: ok (completed: {})", audit.completed);
            }
        }
        let ordering = check_ordering(&inst, &trace)?;
        match ordering.first_violation {
            Some(v) => {
                let _ = writeln!(out, "ordering: FAIL ({v})");
                status = Status::Violation;
            }
            None => {
                let _ = writeln!(out, "ordering: ok ({} checks)", ordering.checks);
            }
        }
        let progress = check_progress(&trace);
        match progress.first_violation {
            Some(v) => {
                let _ = writeln!(out, "progress: FAIL ({v})");
                status = Status::Violation;
            }
            None => {
                let _ = writeln!(out, "progress: ok ({} checks)", progress.checks);
            }
        }
    }

    if let Some(window) = args.exhaustive {
        let res = match exhaustive_verify(&inst, args.policy, window) {
            Ok(res) => res,
            Err(e @ Error::Guard { .. }) => {
                let _ = writeln!(out, "exhaustive: {e}");
                return Ok(CommandOutput::new(Status::GuardViolation, out));
            }
            Err(e) => return Err(e),
        };
        let _ = writeln!(
            out,
            "exhaustive: {} ({} branches, W = {window}, safe = {}, live = {}, worst makespan = {})",
            if res.passed() { "ok" } else { "FAIL" },
            res.branches,
            res.safe,
            res.live,
            res.worst_makespan
        );
        if let Some(cex) = &res.counterexample {
            let _ = writeln!(out, "counterexample script:");
            out.push_str(&cex.script.to_text());
            status = Status::Violation;
        }
    }
    Ok(CommandOutput::new(status, out))
}

#[derive(Debug, Clone)]
pub struct BenchArgs {
    pub instances: Vec<String>,
    pub config: BenchConfig,
    pub out: Option<PathBuf>,
}

pub fn cmd_bench(args: &BenchArgs) -> Result<CommandOutput> {
    if args.instances.is_empty() {
        return Err(Error::Config("no instances given".into()));
    }
    let instances = args
        .instances
        .iter()
        .map(|s| load_checked(s))
        .collect::<Result<Vec<_>>>()?;
    let rows = run_bench(&instances, &args.config)?;
    let mut csv = Vec::new();
    write_csv(&mut csv, &rows)?;
    match &args.out {
        Some(path) => {
            fs::write(path, &csv)?;
            Ok(CommandOutput::new(
                Status::Ok,
                format!("wrote {} rows to {}\n", rows.len(), path.display()),
            ))
        }
        None => Ok(CommandOutput::new(
            Status::Ok,
            String::from_utf8(csv).expect("csv output is utf-8"),
        )),
    }
}
