//! Instance generation on grid maps: well-formed endpoint sampling and
//! prioritized space-time planning.
//!
//! Robots are planned one after another in index order. Each keeps clear of
//! the trajectories already committed and of the origins of the robots still
//! to be planned, using a radius inflated by half a step so that the executed
//! instance gets a one-step margin around its diagonal.

mod roadmap;
mod search;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub use roadmap::{build_roadmap, Cell, GridMap, Roadmap};
pub use search::{spacetime_shortest_path, Constraints, SearchFailure};

use crate::coordspace::CollisionOracle;
use crate::error::{Error, Result};
use crate::model::{Instance, Trajectory, Workspace};

/// Whole endpoint draws attempted before giving up.
const SAMPLE_ATTEMPTS: usize = 500;

/// Planning radius guaranteeing the 1-margin at execution radius `radius`:
/// one step moves a robot by at most `step_length`, so separating the plan by
/// `2·radius + step_length` keeps every off-diagonal neighbor clear.
pub fn inflate_radius(radius: f64, step_length: f64) -> f64 {
    radius + step_length / 2.0
}

#[derive(Debug, Clone, PartialEq)]
pub enum Endpoints {
    /// Drawn from the seed, checked for well-formedness.
    RandomWellFormed,
    /// `(origin, destination)` per robot.
    Explicit(Vec<(Cell, Cell)>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSpec {
    pub name: String,
    pub workspace: Workspace,
    pub robots: usize,
    pub radius: f64,
    pub timestep: f64,
    pub max_speed: f64,
    /// Lattice spacing; defaults to one step length.
    pub cell_size: Option<f64>,
    pub seed: u64,
    pub endpoints: Endpoints,
}

impl ProblemSpec {
    pub fn new(name: impl Into<String>, workspace: Workspace, robots: usize, radius: f64) -> Self {
        Self {
            name: name.into(),
            workspace,
            robots,
            radius,
            timestep: 1.0,
            max_speed: 1.0,
            cell_size: None,
            seed: 0,
            endpoints: Endpoints::RandomWellFormed,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_endpoints(mut self, endpoints: Vec<(Cell, Cell)>) -> Self {
        self.robots = endpoints.len();
        self.endpoints = Endpoints::Explicit(endpoints);
        self
    }

    pub fn step_length(&self) -> f64 {
        self.max_speed * self.timestep
    }

    pub fn planning_radius(&self) -> f64 {
        inflate_radius(self.radius, self.step_length())
    }

    pub fn roadmap(&self) -> Result<Roadmap> {
        let cell = self.cell_size.unwrap_or(self.step_length());
        build_roadmap(&self.workspace, self.radius, cell, self.step_length())
    }
}

/// Whether every robot can get from its origin to its destination while the
/// discs of all other robots' endpoints (inflated by `radius`) are removed
/// from the roadmap. This implies the single-endpoint version: parking any
/// one robot at any of its endpoints leaves everybody else connected.
pub fn is_well_formed(roadmap: &Roadmap, endpoints: &[(Cell, Cell)], radius: f64) -> bool {
    let sep = 2.0 * radius;
    (0..endpoints.len()).all(|k| {
        let others: Vec<_> = endpoints
            .iter()
            .enumerate()
            .filter(|&(m, _)| m != k)
            .flat_map(|(_, &(o, d))| [roadmap.center(o), roadmap.center(d)])
            .collect();
        let blocked = |c: Cell| {
            let p = roadmap.center(c);
            others.iter().any(|q| q.distance(p) <= sep)
        };
        let (origin, dest) = endpoints[k];
        roadmap.connected(origin, dest, blocked)
    })
}

/// Draws well-formed origins and destinations from the problem's seed.
pub fn sample_endpoints(spec: &ProblemSpec, roadmap: &Roadmap) -> Result<Vec<(Cell, Cell)>> {
    let n = spec.robots;
    let sep = 2.0 * spec.planning_radius();
    let free: Vec<Cell> = roadmap.free_cells().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut deepest = 0;
    for _ in 0..SAMPLE_ATTEMPTS {
        let mut order = free.clone();
        let mut chosen: Vec<Cell> = Vec::with_capacity(2 * n);
        // origins first, then destinations; a destination may sit anywhere
        // relative to its own origin
        order.shuffle(&mut rng);
        for &c in &order {
            if chosen.len() == n {
                break;
            }
            let p = roadmap.center(c);
            if chosen.iter().all(|&o| roadmap.center(o).distance(p) > sep) {
                chosen.push(c);
            }
        }
        order.shuffle(&mut rng);
        let mut dests: Vec<Cell> = Vec::with_capacity(n);
        let mut spare = order.iter();
        while chosen.len() == n && dests.len() < n {
            let k = dests.len();
            let Some(&c) = spare.next() else { break };
            let p = roadmap.center(c);
            let clear_of = |&other: &Cell| roadmap.center(other).distance(p) > sep;
            let origins_ok = chosen
                .iter()
                .enumerate()
                .all(|(m, o)| m == k || clear_of(o));
            if origins_ok && dests.iter().all(clear_of) {
                dests.push(c);
            }
        }
        deepest = deepest.max(chosen.len() + dests.len());
        if dests.len() < n {
            continue;
        }
        let endpoints: Vec<(Cell, Cell)> = chosen.into_iter().zip(dests).collect();
        if is_well_formed(roadmap, &endpoints, spec.planning_radius()) {
            return Ok(endpoints);
        }
    }
    Err(Error::Planning {
        robot: (deepest / 2).min(n.saturating_sub(1)),
        reason: format!("no well-formed endpoints for {n} robots after {SAMPLE_ATTEMPTS} draws"),
    })
}

/// Plans all robots in index order and assembles the instance.
pub fn prioritized_plan(spec: &ProblemSpec) -> Result<Instance> {
    if spec.robots == 0 {
        return Err(Error::Config("at least one robot is required".into()));
    }
    let roadmap = spec.roadmap()?;
    let endpoints = match &spec.endpoints {
        Endpoints::RandomWellFormed => sample_endpoints(spec, &roadmap)?,
        Endpoints::Explicit(list) => list.clone(),
    };
    let radius = spec.planning_radius();
    let origins: Vec<_> = endpoints.iter().map(|&(o, _)| roadmap.center(o)).collect();
    let mut committed: Vec<Trajectory> = Vec::with_capacity(endpoints.len());
    for (k, &(origin, dest)) in endpoints.iter().enumerate() {
        let constraints = Constraints {
            committed: &committed,
            parked: &origins[k + 1..],
            radius,
        };
        let path = spacetime_shortest_path(&roadmap, origin, dest, &constraints).map_err(|e| {
            Error::Planning {
                robot: k,
                reason: e.to_string(),
            }
        })?;
        committed.push(path);
    }
    let len = committed.iter().map(Trajectory::len).max().unwrap_or(1);
    let trajectories = committed.iter().map(|t| t.padded(len)).collect();
    let inst = Instance {
        name: spec.name.clone(),
        radius: spec.radius,
        timestep: spec.timestep,
        max_speed: spec.max_speed,
        workspace: spec.workspace.clone(),
        trajectories,
    };
    if let Some(v) = inst.validate().first() {
        return Err(Error::Planning {
            robot: 0,
            reason: format!("planned instance is invalid: {v}"),
        });
    }
    if let Some(v) = CollisionOracle::new(&inst)
        .verify_margin()
        .violations()
        .first()
    {
        return Err(Error::Planning {
            robot: v.j,
            reason: format!("planned instance breaks the margin: {v}"),
        });
    }
    Ok(inst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Point, Rect};

    #[test]
    fn inflation_arithmetic() {
        assert!((inflate_radius(0.8, 1.0) - 1.3).abs() < 1e-12);
        assert_eq!(inflate_radius(0.0, 1.0), 0.5);
    }

    #[test]
    fn straight_path_on_empty_map() {
        let ws = Workspace::empty(Rect::new(0.0, 0.0, 6.0, 3.0));
        let rm = build_roadmap(&ws, 0.4, 1.0, 1.0).unwrap();
        let none = Constraints {
            committed: &[],
            parked: &[],
            radius: 0.9,
        };
        let path = spacetime_shortest_path(&rm, Cell::new(0, 0), Cell::new(5, 0), &none).unwrap();
        let expected: Vec<Point> = (0..=5).map(|k| Point::new(k as f64, 0.0)).collect();
        assert_eq!(path.points(), expected.as_slice());
        let stay = spacetime_shortest_path(&rm, Cell::new(2, 2), Cell::new(2, 2), &none).unwrap();
        assert_eq!(stay.len(), 1);
    }

    #[test]
    fn single_robot_plan_is_its_shortest_path() {
        let ws = Workspace::empty(Rect::new(0.0, 0.0, 6.0, 3.0));
        let spec = ProblemSpec::new("one", ws, 1, 0.4)
            .with_endpoints(vec![(Cell::new(0, 1), Cell::new(4, 3))]);
        let inst = prioritized_plan(&spec).unwrap();
        assert_eq!(inst.horizon(), 6);
        assert_eq!(inst.trajectories[0].completion_index(), 6);
    }

    #[test]
    fn pocket_endpoint_breaks_well_formedness() {
        // robot 0 runs along the corridor y = 1; robot 1 parks in the pocket above
        let map = GridMap::parse(
            "scale 1.0\n\
             #########\n\
             ####.####\n\
             #.......#\n\
             #########\n",
        )
        .unwrap();
        let rm = build_roadmap(&map.to_workspace(), 0.4, 1.0, 1.0).unwrap();
        let through = vec![
            (Cell::new(1, 1), Cell::new(7, 1)),
            (Cell::new(4, 2), Cell::new(4, 2)),
        ];
        assert!(!is_well_formed(&rm, &through, 0.9));
        let blocked = |c: Cell| rm.center(c).distance(Point::new(4.0, 2.0)) <= 1.8;
        assert!(!rm.connected(Cell::new(1, 1), Cell::new(7, 1), blocked));
        assert!(rm.connected(Cell::new(1, 1), Cell::new(7, 1), |_| false));
        let apart = vec![(Cell::new(1, 1), Cell::new(3, 1))];
        assert!(is_well_formed(&rm, &apart, 0.9));
    }

    #[test]
    fn too_many_robots_fail_to_sample() {
        let ws = Workspace::empty(Rect::new(0.0, 0.0, 3.0, 3.0));
        let spec = ProblemSpec::new("tiny", ws, 20, 0.4).with_seed(1);
        assert!(matches!(
            prioritized_plan(&spec),
            Err(Error::Planning { .. })
        ));
    }

    #[test]
    fn single_robot_takes_any_free_pair() {
        let map = crate::bundled::map("warehouse").unwrap();
        let spec = ProblemSpec::new("w", map.to_workspace(), 1, 0.4).with_seed(9);
        let rm = spec.roadmap().unwrap();
        let ends = sample_endpoints(&spec, &rm).unwrap();
        assert_eq!(ends.len(), 1);
        assert!(rm.is_free(ends[0].0) && rm.is_free(ends[0].1));
    }

    #[test]
    fn two_robots_on_open_map_sample_first_try() {
        let ws = Workspace::empty(Rect::new(0.0, 0.0, 10.0, 10.0));
        for seed in 0..20 {
            let spec = ProblemSpec::new("open", ws.clone(), 2, 0.4).with_seed(seed);
            let rm = spec.roadmap().unwrap();
            let ends = sample_endpoints(&spec, &rm).unwrap();
            assert!(is_well_formed(&rm, &ends, spec.planning_radius()));
        }
    }

    /// Earliest time `goal` can be reached and held, by plain breadth-first
    /// search over (cell, t) pairs.
    fn brute_earliest_arrival(
        rm: &Roadmap,
        start: Cell,
        goal: Cell,
        others: &[Trajectory],
        sep: f64,
    ) -> Option<usize> {
        use std::collections::BTreeSet;
        let horizon = others.iter().map(|t| t.len()).max().unwrap_or(1);
        let clear = |c: Cell, t: usize| others.iter().all(|o| o.at(t).distance(rm.center(c)) > sep);
        let holds = |t: usize| (t..=horizon).all(|u| clear(goal, u));
        let mut frontier: BTreeSet<Cell> = [start].into_iter().collect();
        for t in 0..horizon + 4 * rm.free_count() {
            if frontier.contains(&goal) && holds(t) {
                return Some(t);
            }
            let mut next = BTreeSet::new();
            for &c in &frontier {
                for d in rm.neighbors(c).chain([c]) {
                    if clear(d, t + 1) {
                        next.insert(d);
                    }
                }
            }
            frontier = next;
        }
        None
    }

    fn head_on_corridor() -> Workspace {
        // left room x 1..3, y 1..5; corridor y = 3 out to x = 13; alcove at
        // x = 11 above the corridor
        GridMap::parse(
            "scale 1.0\n\
             ###############\n\
             #...#######.###\n\
             #...#######.###\n\
             #.............#\n\
             #...###########\n\
             #...###########\n\
             ###############\n",
        )
        .unwrap()
        .to_workspace()
    }

    #[test]
    fn single_robot_matches_breadth_first_distance() {
        let map = crate::bundled::map("warehouse").unwrap();
        let ws = map.to_workspace();
        let rm = build_roadmap(&ws, 0.4, 1.0, 1.0).unwrap();
        let cells: Vec<Cell> = rm.free_cells().collect();
        let none = Constraints {
            committed: &[],
            parked: &[],
            radius: 0.9,
        };
        for k in 0..40 {
            let a = cells[(k * 37) % cells.len()];
            let b = cells[(k * 91 + 13) % cells.len()];
            let path = spacetime_shortest_path(&rm, a, b, &none).unwrap();
            let expected = brute_earliest_arrival(&rm, a, b, &[], 1.8).unwrap();
            assert_eq!(path.len() - 1, expected, "{a:?} -> {b:?}");
            assert_eq!(path.at(0), rm.center(a));
            assert_eq!(path.at(path.len()), rm.center(b));
        }
    }

    #[test]
    fn crossing_waits_match_space_time_search() {
        let ws = Workspace::empty(Rect::new(0.0, 0.0, 10.0, 10.0));
        let rm = build_roadmap(&ws, 0.4, 1.0, 1.0).unwrap();
        let first = Trajectory::new((0..=10).map(|k| Point::new(k as f64, 5.0)).collect());
        for (r, start) in [(0.4, 0usize), (0.8, 0), (0.8, 2), (0.8, 3)] {
            let committed = std::slice::from_ref(&first);
            let radius = inflate_radius(r, 1.0);
            let c = Constraints {
                committed,
                parked: &[],
                radius,
            };
            let (from, to) = (Cell::new(5, start), Cell::new(5, 10));
            let path = spacetime_shortest_path(&rm, from, to, &c).unwrap();
            let arrival = path.len() - 1;
            let expected = brute_earliest_arrival(&rm, from, to, committed, 2.0 * radius).unwrap();
            assert_eq!(arrival, expected, "r = {r}, start y = {start}");
            let needed_waits = expected - (10 - start);
            let waits = path.points().windows(2).filter(|w| w[0] == w[1]).count();
            let extra_moves = arrival - waits - (10 - start);
            assert!(waits > 0 && needed_waits > 0);
            if start < 3 {
                // plenty of room behind the start: pure waiting suffices
                assert_eq!((waits, extra_moves), (needed_waits, 0));
            }
            for t in 0..=arrival.max(10) {
                assert!(path.at(t).distance(first.at(t)) > 2.0 * radius, "t = {t}");
            }
        }
    }

    #[test]
    fn head_on_robot_waits_at_origin() {
        let spec = ProblemSpec::new("head-on", head_on_corridor(), 2, 0.4).with_endpoints(vec![
            (Cell::new(1, 5), Cell::new(11, 5)),
            (Cell::new(13, 3), Cell::new(1, 1)),
        ]);
        let rm = spec.roadmap().unwrap();
        assert!(is_well_formed(
            &rm,
            &[
                (Cell::new(1, 5), Cell::new(11, 5)),
                (Cell::new(13, 3), Cell::new(1, 1))
            ],
            0.9
        ));
        let inst = prioritized_plan(&spec).unwrap();
        let (r1, r2) = (&inst.trajectories[0], &inst.trajectories[1]);
        // robot 1 walks 2 + 2 + 8 + 2 cells straight into the alcove
        assert_eq!(r1.completion_index(), 14);
        let origin = Point::new(13.0, 3.0);
        let first_move = (0..inst.horizon())
            .find(|&t| r2.at(t + 1) != origin)
            .unwrap();
        // it leaves as robot 1 turns into the alcove at t = 13
        assert_eq!(first_move, 13);
        assert!((0..=13).all(|t| r2.at(t) == origin));
        let trace = crate::simulator::run(
            &inst,
            crate::policies::Policy::Rmtrack,
            &crate::disturbance::DisturbanceProcess::None,
            &Default::default(),
        )
        .unwrap();
        assert!(crate::simulator::audit_trace(&inst, &trace)
            .unwrap()
            .is_safe());
    }

    #[test]
    fn later_robots_keep_clear_of_earlier_ones() {
        let map = crate::bundled::map("hall").unwrap();
        for seed in 0..6 {
            let spec = ProblemSpec::new("hall", map.to_workspace(), 4, 0.4).with_seed(seed);
            let inst = prioritized_plan(&spec).unwrap();
            let sep = 2.0 * spec.planning_radius();
            for t in 0..=inst.horizon() {
                for k in 0..4 {
                    for j in 0..k {
                        let d = inst.trajectories[k]
                            .at(t)
                            .distance(inst.trajectories[j].at(t));
                        assert!(d > sep, "seed {seed} t {t} robots {j} {k}");
                    }
                }
            }
            assert!(inst.validate().is_empty());
            assert!(CollisionOracle::new(&inst).verify_margin().is_empty());
        }
    }

    #[test]
    fn planning_is_deterministic() {
        let map = crate::bundled::map("corridor").unwrap();
        let spec = ProblemSpec::new("c", map.to_workspace(), 4, 0.4).with_seed(11);
        let a = prioritized_plan(&spec).unwrap().to_document();
        let b = prioritized_plan(&spec).unwrap().to_document();
        assert_eq!(a, b);
    }
}
