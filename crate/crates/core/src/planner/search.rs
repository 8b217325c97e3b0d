//! Single-robot space-time search among committed trajectories.

use super::roadmap::{Cell, Roadmap};
use crate::geometry::Point;
use crate::model::Trajectory;

/// What a new trajectory has to keep clear of.
#[derive(Debug, Clone, Copy)]
pub struct Constraints<'a> {
    /// Trajectories of already planned robots; each holds its last point.
    pub committed: &'a [Trajectory],
    /// Points occupied for the whole horizon (origins of robots planned later).
    pub parked: &'a [Point],
    /// Radius used for separation; the separation test is `distance > 2·radius`.
    pub radius: f64,
}

impl Constraints<'_> {
    fn committed_horizon(&self) -> usize {
        self.committed
            .iter()
            .map(|t| t.len().saturating_sub(1))
            .max()
            .unwrap_or(0)
    }

    pub fn is_clear(&self, p: Point, t: usize) -> bool {
        let sep = 2.0 * self.radius;
        self.committed.iter().all(|c| c.at(t).distance(p) > sep)
            && self.parked.iter().all(|&q| q.distance(p) > sep)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SearchFailure {
    StartNotFree,
    GoalNotFree,
    StartInConflict,
    /// No arrival within the step budget.
    Exhausted {
        budget: usize,
    },
}

impl std::fmt::Display for SearchFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SearchFailure::StartNotFree => write!(f, "start cell is not free"),
            SearchFailure::GoalNotFree => write!(f, "goal cell is not free"),
            SearchFailure::StartInConflict => write!(f, "start conflicts with another robot"),
            SearchFailure::Exhausted { budget } => {
                write!(f, "no conflict-free path within {budget} steps")
            }
        }
    }
}

#[derive(Clone, Copy)]
struct Label {
    moves: u32,
    via_wait: bool,
    parent: u32,
}

impl Label {
    fn better_than(&self, other: &Label) -> bool {
        self.moves < other.moves || (self.moves == other.moves && other.via_wait && !self.via_wait)
    }
}

/// Earliest-arrival path from `start` to `goal` over the roadmap with wait
/// moves, keeping clear of `constraints` at every step and able to stay at
/// `goal` forever once there.
///
/// Among earliest arrivals the path with the fewest moves wins; remaining ties
/// put waits as early as possible, then follow lattice order and the move
/// order east, north, west, south. The result holds one point per time step
/// up to arrival.
pub fn spacetime_shortest_path(
    roadmap: &Roadmap,
    start: Cell,
    goal: Cell,
    constraints: &Constraints<'_>,
) -> Result<Trajectory, SearchFailure> {
    if !roadmap.is_free(start) {
        return Err(SearchFailure::StartNotFree);
    }
    if !roadmap.is_free(goal) {
        return Err(SearchFailure::GoalNotFree);
    }
    if !constraints.is_clear(roadmap.center(start), 0) {
        return Err(SearchFailure::StartInConflict);
    }
    let settle = constraints.committed_horizon();
    // Past `settle` nothing moves, so the reachable set only grows for at most
    // `free_count` more steps.
    let budget = settle + roadmap.free_count() + 1;

    let goal_point = roadmap.center(goal);
    // goal_holds[t]: staying at the goal from t onwards stays clear.
    let mut goal_holds = vec![false; settle + 1];
    let mut ok = constraints.is_clear(goal_point, settle);
    for t in (0..=settle).rev() {
        ok = ok && constraints.is_clear(goal_point, t);
        goal_holds[t] = ok;
    }
    let holds_from = |t: usize| goal_holds[t.min(settle)];

    let n = roadmap.len();
    let mut layers: Vec<Vec<Option<Label>>> = Vec::new();
    let mut first = vec![None; n];
    first[roadmap.index(start)] = Some(Label {
        moves: 0,
        via_wait: false,
        parent: u32::MAX,
    });
    layers.push(first);
    if start == goal && holds_from(0) {
        return Ok(reconstruct(roadmap, &layers, goal));
    }

    for t in 0..budget {
        let current = &layers[t];
        let mut next: Vec<Option<Label>> = vec![None; n];
        let mut any = false;
        for (k, label) in current.iter().enumerate() {
            let Some(label) = label else { continue };
            let cell = roadmap.cell(k);
            let moves = roadmap.neighbors(cell).map(|c| (c, false));
            for (target, is_wait) in moves.chain(std::iter::once((cell, true))) {
                if !constraints.is_clear(roadmap.center(target), t + 1) {
                    continue;
                }
                let candidate = Label {
                    moves: label.moves + u32::from(!is_wait),
                    via_wait: is_wait,
                    parent: k as u32,
                };
                let slot = &mut next[roadmap.index(target)];
                if slot.is_none_or(|cur| candidate.better_than(&cur)) {
                    *slot = Some(candidate);
                    any = true;
                }
            }
        }
        if !any {
            break;
        }
        let reached = next[roadmap.index(goal)].is_some();
        let stalled = t >= settle && same_support(&layers[t], &next);
        layers.push(next);
        if reached && holds_from(t + 1) {
            return Ok(reconstruct(roadmap, &layers, goal));
        }
        if stalled {
            break;
        }
    }
    Err(SearchFailure::Exhausted { budget })
}

fn same_support(a: &[Option<Label>], b: &[Option<Label>]) -> bool {
    a.iter().zip(b).all(|(x, y)| x.is_some() == y.is_some())
}

fn reconstruct(roadmap: &Roadmap, layers: &[Vec<Option<Label>>], goal: Cell) -> Trajectory {
    let mut cells = Vec::with_capacity(layers.len());
    let mut k = roadmap.index(goal);
    for layer in layers.iter().rev() {
        cells.push(roadmap.cell(k));
        let label = layer[k].expect("reconstruction follows stored labels");
        k = label.parent as usize;
    }
    cells.reverse();
    Trajectory::new(cells.into_iter().map(|c| roadmap.center(c)).collect())
}
