//! Execution traces and the line-oriented trace file format.
//!
//! A trace file starts with a header record and continues with one record per
//! executed step, `{"t":…,"x":[…],"a":[…],"d":[…]}`, where `x` is the joint
//! plan position before the step. The final line carries the terminal state
//! and has no `a`/`d` fields.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::SimState;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Step {
    pub t: usize,
    pub x: Vec<usize>,
    pub a: Vec<bool>,
    pub d: Vec<bool>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub instance_name: String,
    pub policy: String,
    pub seed: u64,
    pub q: f64,
    pub horizon: usize,
    /// Per-robot completion indices of the instance the trace was run on.
    pub completion: Vec<usize>,
    pub steps: Vec<Step>,
    pub final_state: SimState,
    pub completed: bool,
    pub travel_times: Vec<Option<usize>>,
    /// Colliding (state, pair) count from the online audit, when it ran.
    pub collisions: Option<usize>,
}

impl Trace {
    pub fn robots(&self) -> usize {
        self.final_state.x.len()
    }

    /// Every visited joint state, initial and terminal included. Empty when
    /// steps were not recorded and the run did not start at the terminal
    /// state.
    pub fn states(&self) -> impl Iterator<Item = (usize, &[usize])> {
        self.steps
            .iter()
            .map(|s| (s.t, s.x.as_slice()))
            .chain(std::iter::once((
                self.final_state.t,
                self.final_state.x.as_slice(),
            )))
    }

    pub fn is_recorded(&self) -> bool {
        self.steps.len() == self.final_state.t
    }

    /// Recomputes travel times from recorded states.
    pub fn travel_times_from_states(&self) -> Vec<Option<usize>> {
        let mut times = vec![None; self.completion.len()];
        for (t, x) in self.states() {
            for (i, slot) in times.iter_mut().enumerate() {
                if slot.is_none() && x.get(i).is_some_and(|&xi| xi >= self.completion[i]) {
                    *slot = Some(t);
                }
            }
        }
        times
    }

    pub fn to_jsonl(&self) -> String {
        let header = Header {
            instance: self.instance_name.clone(),
            policy: self.policy.clone(),
            seed: self.seed,
            q: self.q,
            horizon: self.horizon,
            completion: self.completion.clone(),
        };
        let mut out = serde_json::to_string(&header).expect("header serializes");
        out.push('\n');
        for step in &self.steps {
            let rec = Record {
                t: step.t,
                x: step.x.clone(),
                a: Some(bits(&step.a)),
                d: Some(bits(&step.d)),
            };
            out.push_str(&serde_json::to_string(&rec).expect("record serializes"));
            out.push('\n');
        }
        let last = Record {
            t: self.final_state.t,
            x: self.final_state.x.clone(),
            a: None,
            d: None,
        };
        out.push_str(&serde_json::to_string(&last).expect("record serializes"));
        out.push('\n');
        out
    }

    pub fn from_jsonl(text: &str) -> Result<Trace> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header: Header = serde_json::from_str(
            lines
                .next()
                .ok_or_else(|| Error::Parse("empty trace file".into()))?,
        )?;
        let mut steps = Vec::new();
        let mut final_state = None;
        for line in lines {
            if final_state.is_some() {
                return Err(Error::Parse("records after the terminal state".into()));
            }
            let rec: Record = serde_json::from_str(line)?;
            match (rec.a, rec.d) {
                (Some(a), Some(d)) => steps.push(Step {
                    t: rec.t,
                    x: rec.x,
                    a: unbits(&a)?,
                    d: unbits(&d)?,
                }),
                (None, None) => final_state = Some(SimState { t: rec.t, x: rec.x }),
                _ => return Err(Error::Parse(format!("step {} has only one of a/d", rec.t))),
            }
        }
        let final_state =
            final_state.ok_or_else(|| Error::Parse("trace has no terminal state".into()))?;
        let mut trace = Trace {
            instance_name: header.instance,
            policy: header.policy,
            seed: header.seed,
            q: header.q,
            horizon: header.horizon,
            completed: final_state.all_at(header.horizon),
            completion: header.completion,
            steps,
            final_state,
            travel_times: Vec::new(),
            collisions: None,
        };
        trace.travel_times = trace.travel_times_from_states();
        Ok(trace)
    }
}

#[derive(Serialize, Deserialize)]
struct Header {
    instance: String,
    policy: String,
    seed: u64,
    q: f64,
    horizon: usize,
    completion: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
struct Record {
    t: usize,
    x: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    a: Option<Vec<u8>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    d: Option<Vec<u8>>,
}

fn bits(v: &[bool]) -> Vec<u8> {
    v.iter().map(|&b| u8::from(b)).collect()
}

fn unbits(v: &[u8]) -> Result<Vec<bool>> {
    v.iter()
        .map(|&b| match b {
            0 => Ok(false),
            1 => Ok(true),
            other => Err(Error::Parse(format!("expected 0 or 1, got {other}"))),
        })
        .collect()
}
