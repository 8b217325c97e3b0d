//! Advancement control laws.
//!
//! * [`Policy::Rmtrack`] lets robot `i` advance unless, for some robot `j` it
//!   leads (`x_i > x_j`), the coordination-space segment
//!   `{x_i + 1} × {x_j, …, x_i + 1}` meets `C_ij`. It reads positions only.
//! * [`Policy::Allstop`] halts every robot whenever any unfinished robot is
//!   being held by a disturbance in the current step.
//! * [`Policy::Freeflow`] ignores the other robots entirely; it is the
//!   lower-bound reference, not a safe controller.

use std::fmt;
use std::str::FromStr;

use crate::coordspace::CollisionOracle;
use crate::error::{Error, Result};
use crate::model::SimState;

/// Advancement commands `a_i ∈ {0, 1}`, `true` meaning proceed.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Decision(pub Vec<bool>);

impl Decision {
    pub fn commands(&self) -> &[bool] {
        &self.0
    }

    pub fn get(&self, i: usize) -> bool {
        self.0[i]
    }

    pub fn any(&self) -> bool {
        self.0.iter().any(|&a| a)
    }

    pub fn as_bits(&self) -> Vec<u8> {
        self.0.iter().map(|&a| u8::from(a)).collect()
    }
}

pub struct PolicyContext<'s, 'o, 'i> {
    pub state: &'s SimState,
    pub oracle: &'o CollisionOracle<'i>,
    /// Disturbance flags of the current step (`true` = free), only read by
    /// ALLSTOP.
    pub observed: Option<&'s [bool]>,
}

impl<'s, 'o, 'i> PolicyContext<'s, 'o, 'i> {
    pub fn new(state: &'s SimState, oracle: &'o CollisionOracle<'i>) -> Self {
        Self {
            state,
            oracle,
            observed: None,
        }
    }

    pub fn observing(mut self, observed: &'s [bool]) -> Self {
        self.observed = Some(observed);
        self
    }

    fn horizon(&self) -> usize {
        self.oracle.instance().horizon()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Policy {
    Rmtrack,
    Allstop,
    Freeflow,
}

impl Policy {
    pub const ALL: [Policy; 3] = [Policy::Freeflow, Policy::Rmtrack, Policy::Allstop];

    pub fn name(self) -> &'static str {
        match self {
            Policy::Rmtrack => "rmtrack",
            Policy::Allstop => "allstop",
            Policy::Freeflow => "freeflow",
        }
    }

    /// Whether the policy reads the current disturbance flags.
    pub fn observes_disturbance(self) -> bool {
        matches!(self, Policy::Allstop)
    }

    pub fn decide(self, ctx: &PolicyContext<'_, '_, '_>) -> Result<Decision> {
        match self {
            Policy::Rmtrack => Ok(rmtrack_decide(ctx)),
            Policy::Allstop => allstop_decide(ctx),
            Policy::Freeflow => Ok(freeflow_decide(ctx)),
        }
    }
}

impl fmt::Display for Policy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Policy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "rmtrack" => Ok(Policy::Rmtrack),
            "allstop" => Ok(Policy::Allstop),
            "freeflow" => Ok(Policy::Freeflow),
            _ => Err(Error::UnknownPolicy(s.to_string())),
        }
    }
}

pub fn rmtrack_decide(ctx: &PolicyContext<'_, '_, '_>) -> Decision {
    let horizon = ctx.horizon();
    let x = &ctx.state.x;
    let commands = (0..x.len())
        .map(|i| {
            if x[i] >= horizon {
                return false;
            }
            !(0..x.len()).any(|j| x[i] > x[j] && ctx.oracle.segment_hits(i, j, x[i], x[j]))
        })
        .collect();
    Decision(commands)
}

pub fn allstop_decide(ctx: &PolicyContext<'_, '_, '_>) -> Result<Decision> {
    let observed = ctx.observed.ok_or(Error::MissingObservation)?;
    let horizon = ctx.horizon();
    let x = &ctx.state.x;
    if observed.len() != x.len() {
        return Err(Error::MissingObservation);
    }
    let someone_held = x
        .iter()
        .zip(observed)
        .any(|(&xj, &free)| xj < horizon && !free);
    Ok(Decision(
        x.iter().map(|&xi| xi < horizon && !someone_held).collect(),
    ))
}

pub fn freeflow_decide(ctx: &PolicyContext<'_, '_, '_>) -> Decision {
    let horizon = ctx.horizon();
    Decision(ctx.state.x.iter().map(|&xi| xi < horizon).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bundled;
    use crate::geometry::{Point, Rect};
    use crate::model::{Instance, Trajectory, Workspace};

    fn state(x: &[usize]) -> SimState {
        SimState {
            t: 0,
            x: x.to_vec(),
        }
    }

    /// Three far-apart parallel robots, T = 6.
    fn lanes() -> Instance {
        let trajs = (0..3)
            .map(|k| {
                Trajectory::new(
                    (0..=6)
                        .map(|s| Point::new(s as f64, 4.0 * k as f64))
                        .collect(),
                )
            })
            .collect();
        Instance::new(
            "lanes",
            0.4,
            Workspace::empty(Rect::new(0.0, 0.0, 6.0, 8.0)),
            trajs,
        )
    }

    #[test]
    fn rmtrack_cross2_examples() {
        let inst = bundled::cross2();
        let oracle = CollisionOracle::new(&inst);
        let s = state(&[0, 9]);
        assert_eq!(
            rmtrack_decide(&PolicyContext::new(&s, &oracle)).0,
            vec![true, false]
        );
        let s = state(&[0, 6]);
        assert_eq!(
            rmtrack_decide(&PolicyContext::new(&s, &oracle)).0,
            vec![true, true]
        );
        let s = state(&[16, 16]);
        assert_eq!(
            rmtrack_decide(&PolicyContext::new(&s, &oracle)).0,
            vec![false, false]
        );
    }

    #[test]
    fn allstop_examples() {
        let inst = lanes();
        let oracle = CollisionOracle::new(&inst);
        let s = state(&[1, 2, 3]);
        let free = [true, true, true];
        let d = allstop_decide(&PolicyContext::new(&s, &oracle).observing(&free)).unwrap();
        assert_eq!(d.0, vec![true, true, true]);
        let blocked = [true, false, true];
        let d = allstop_decide(&PolicyContext::new(&s, &oracle).observing(&blocked)).unwrap();
        assert_eq!(d.0, vec![false, false, false]);
        let s = state(&[1, 6, 3]);
        let d = allstop_decide(&PolicyContext::new(&s, &oracle).observing(&blocked)).unwrap();
        assert_eq!(d.0, vec![true, false, true]);
        assert!(matches!(
            allstop_decide(&PolicyContext::new(&s, &oracle)),
            Err(Error::MissingObservation)
        ));
    }

    #[test]
    fn freeflow_examples() {
        let inst = bundled::cross2();
        let oracle = CollisionOracle::new(&inst);
        let cases: [(&[usize], &[bool]); 3] = [
            (&[0, 0], &[true, true]),
            (&[16, 3], &[false, true]),
            (&[16, 16], &[false, false]),
        ];
        for (x, expected) in cases {
            let s = state(x);
            assert_eq!(
                freeflow_decide(&PolicyContext::new(&s, &oracle)).0,
                expected
            );
        }
    }

    #[test]
    fn policy_names_roundtrip() {
        for p in Policy::ALL {
            assert_eq!(p.name().parse::<Policy>().unwrap(), p);
        }
        assert!("orca".parse::<Policy>().is_err());
    }

    #[test]
    fn rmtrack_ignores_observations() {
        let inst = bundled::cross2();
        let oracle = CollisionOracle::new(&inst);
        let s = state(&[2, 9]);
        let plain = Policy::Rmtrack
            .decide(&PolicyContext::new(&s, &oracle))
            .unwrap();
        let blocked = [false, false];
        let observed = Policy::Rmtrack
            .decide(&PolicyContext::new(&s, &oracle).observing(&blocked))
            .unwrap();
        assert_eq!(plain, observed);
    }
}
