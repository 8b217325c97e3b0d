//! Domain types shared by every other module: workspaces, trajectories,
//! instances and the simulation state, plus the instance document format.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Point, Polygon, Rect};

/// Slack for floating-point comparisons against the speed bound.
const SPEED_EPS: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Workspace {
    pub bounds: Rect,
    #[serde(default)]
    pub obstacles: Vec<Polygon>,
}

impl Workspace {
    pub fn new(bounds: Rect, obstacles: Vec<Polygon>) -> Self {
        Self { bounds, obstacles }
    }

    pub fn empty(bounds: Rect) -> Self {
        Self::new(bounds, Vec::new())
    }

    /// Distance from `p` to the nearest obstacle, infinite when there are none.
    pub fn clearance(&self, p: Point) -> f64 {
        self.obstacles
            .iter()
            .map(|o| o.distance_to(p))
            .fold(f64::INFINITY, f64::min)
    }
}

/// Discrete-time trajectory `points[0..=T]`. Robots hold their last position
/// once they reach it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(from = "Vec<Point>", into = "Vec<Point>")]
pub struct Trajectory {
    points: Vec<Point>,
    completion: usize,
}

impl Trajectory {
    pub fn new(points: Vec<Point>) -> Self {
        let completion = match points.last() {
            Some(&last) => points.iter().rposition(|&p| p != last).map_or(0, |k| k + 1),
            None => 0,
        };
        Self { points, completion }
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Smallest index after which the position no longer changes.
    pub fn completion_index(&self) -> usize {
        self.completion
    }

    /// Position at plan index `x`, holding the final point past the end.
    pub fn at(&self, x: usize) -> Point {
        self.points[x.min(self.points.len() - 1)]
    }

    /// Extends the trajectory with copies of its final point up to `len` points.
    pub fn padded(&self, len: usize) -> Trajectory {
        let mut points = self.points.clone();
        if let Some(&last) = points.last() {
            points.resize(len.max(points.len()), last);
        }
        Trajectory::new(points)
    }
}

impl From<Vec<Point>> for Trajectory {
    fn from(points: Vec<Point>) -> Self {
        Trajectory::new(points)
    }
}

impl From<Trajectory> for Vec<Point> {
    fn from(t: Trajectory) -> Self {
        t.points
    }
}

fn default_unit() -> f64 {
    1.0
}

/// A multi-robot execution problem: `n` disc robots of radius `r` and their
/// planned trajectories over a common horizon `T`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Instance {
    pub name: String,
    pub radius: f64,
    #[serde(default = "default_unit")]
    pub timestep: f64,
    #[serde(default = "default_unit")]
    pub max_speed: f64,
    pub workspace: Workspace,
    pub trajectories: Vec<Trajectory>,
}

impl Instance {
    /// Builds an instance without checking it; see [`Instance::validate`].
    pub fn new(
        name: impl Into<String>,
        radius: f64,
        workspace: Workspace,
        trajectories: Vec<Trajectory>,
    ) -> Self {
        Self {
            name: name.into(),
            radius,
            timestep: 1.0,
            max_speed: 1.0,
            workspace,
            trajectories,
        }
    }

    /// Same instance with a different robot radius (handy for margin and
    /// safety experiments).
    pub fn with_radius(&self, radius: f64) -> Instance {
        Instance {
            radius,
            ..self.clone()
        }
    }

    pub fn robots(&self) -> usize {
        self.trajectories.len()
    }

    /// Common horizon `T`.
    pub fn horizon(&self) -> usize {
        self.trajectories
            .first()
            .map_or(0, |t| t.len().saturating_sub(1))
    }

    /// Longest displacement allowed in one plan step.
    pub fn step_length(&self) -> f64 {
        self.max_speed * self.timestep
    }

    pub fn completion_indices(&self) -> Vec<usize> {
        self.trajectories
            .iter()
            .map(Trajectory::completion_index)
            .collect()
    }

    pub fn trajectory(&self, i: usize) -> Result<&Trajectory> {
        self.trajectories.get(i).ok_or(Error::RobotOutOfRange {
            index: i,
            n: self.robots(),
        })
    }

    /// Spatial position of robot `i` at plan position `x`.
    pub fn position_of(&self, i: usize, x: usize) -> Result<Point> {
        let traj = self.trajectory(i)?;
        let horizon = self.horizon();
        if x > horizon || x >= traj.len() {
            return Err(Error::PositionOutOfRange { x, horizon });
        }
        Ok(traj.at(x))
    }

    /// Checks every instance invariant and lists all violations found.
    pub fn validate(&self) -> ValidationReport {
        let mut v = Vec::new();
        let ws = &self.workspace;
        if ws.bounds.is_degenerate() {
            v.push(Violation::DegenerateBounds);
        }
        for (k, obstacle) in ws.obstacles.iter().enumerate() {
            if !obstacle.is_simple() {
                v.push(Violation::ObstacleNotSimple { obstacle: k });
            }
            if !obstacle.vertices.iter().all(|&p| ws.bounds.contains(p)) {
                v.push(Violation::ObstacleOutOfBounds { obstacle: k });
            }
        }
        if !(self.radius.is_finite() && self.radius >= 0.0) {
            v.push(Violation::BadParameter(
                "radius must be finite and non-negative",
            ));
        }
        if !(self.timestep.is_finite() && self.timestep > 0.0) {
            v.push(Violation::BadParameter("timestep must be positive"));
        }
        if !(self.max_speed.is_finite() && self.max_speed > 0.0) {
            v.push(Violation::BadParameter("max_speed must be positive"));
        }
        if self.trajectories.is_empty() {
            v.push(Violation::NoRobots);
            return ValidationReport(v);
        }
        let expected = self.trajectories[0].len();
        let mut lengths_ok = expected > 0;
        if expected == 0 {
            v.push(Violation::EmptyTrajectory { robot: 0 });
        }
        for (i, traj) in self.trajectories.iter().enumerate().skip(1) {
            if traj.len() != expected {
                v.push(Violation::LengthMismatch {
                    robot: i,
                    len: traj.len(),
                    expected,
                });
                lengths_ok = false;
            }
        }
        let step = self.step_length();
        for (i, traj) in self.trajectories.iter().enumerate() {
            for (t, w) in traj.points().windows(2).enumerate() {
                let d = w[0].distance(w[1]);
                if d > step + SPEED_EPS {
                    v.push(Violation::SpeedExceeded {
                        robot: i,
                        t,
                        distance: d,
                    });
                }
            }
            for (t, &p) in traj.points().iter().enumerate() {
                if !ws.bounds.contains(p) {
                    v.push(Violation::OutOfBounds { robot: i, t });
                }
                for (k, obstacle) in ws.obstacles.iter().enumerate() {
                    let d = obstacle.distance_to(p);
                    if d < self.radius {
                        v.push(Violation::ObstacleClearance {
                            robot: i,
                            t,
                            obstacle: k,
                            distance: d,
                        });
                    }
                }
            }
        }
        if lengths_ok {
            let two_r = 2.0 * self.radius;
            for t in 0..expected {
                for i in 0..self.robots() {
                    for j in (i + 1)..self.robots() {
                        let d = self.trajectories[i]
                            .at(t)
                            .distance(self.trajectories[j].at(t));
                        if d <= two_r {
                            v.push(Violation::PlannedCollision {
                                t,
                                i,
                                j,
                                distance: d,
                            });
                        }
                    }
                }
            }
        }
        ValidationReport(v)
    }

    /// Serializes to the instance document format. Output is deterministic.
    pub fn to_document(&self) -> String {
        let mut out = String::from("{\n");
        out.push_str(&format!("  \"name\": {},\n", json(&self.name)));
        out.push_str(&format!("  \"radius\": {},\n", json(&self.radius)));
        out.push_str(&format!("  \"timestep\": {},\n", json(&self.timestep)));
        out.push_str(&format!("  \"max_speed\": {},\n", json(&self.max_speed)));
        out.push_str(&format!("  \"workspace\": {},\n", json(&self.workspace)));
        out.push_str("  \"trajectories\": [\n");
        for (k, traj) in self.trajectories.iter().enumerate() {
            let sep = if k + 1 < self.trajectories.len() {
                ","
            } else {
                ""
            };
            out.push_str(&format!("    {}{}\n", json(traj), sep));
        }
        out.push_str("  ]\n}\n");
        out
    }
}

fn json<T: Serialize + ?Sized>(value: &T) -> String {
    serde_json::to_string(value).expect("instance fields serialize")
}

/// Parses an instance document without validating it.
pub fn parse_instance(bytes: &[u8]) -> Result<Instance> {
    Ok(serde_json::from_slice(bytes)?)
}

/// Parses and validates an instance document.
pub fn load_instance(bytes: &[u8]) -> Result<Instance> {
    let inst = parse_instance(bytes)?;
    let report = inst.validate();
    if report.is_empty() {
        Ok(inst)
    } else {
        Err(Error::Invalid(report))
    }
}

/// Free-standing form of [`Instance::validate`].
pub fn validate_instance(inst: &Instance) -> ValidationReport {
    inst.validate()
}

#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    DegenerateBounds,
    ObstacleNotSimple {
        obstacle: usize,
    },
    ObstacleOutOfBounds {
        obstacle: usize,
    },
    BadParameter(&'static str),
    NoRobots,
    EmptyTrajectory {
        robot: usize,
    },
    LengthMismatch {
        robot: usize,
        len: usize,
        expected: usize,
    },
    SpeedExceeded {
        robot: usize,
        t: usize,
        distance: f64,
    },
    OutOfBounds {
        robot: usize,
        t: usize,
    },
    ObstacleClearance {
        robot: usize,
        t: usize,
        obstacle: usize,
        distance: f64,
    },
    PlannedCollision {
        t: usize,
        i: usize,
        j: usize,
        distance: f64,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::DegenerateBounds => write!(f, "workspace bounds are degenerate"),
            Violation::ObstacleNotSimple { obstacle } => {
                write!(f, "obstacle {obstacle} is not a simple polygon")
            }
            Violation::ObstacleOutOfBounds { obstacle } => {
                write!(f, "obstacle {obstacle} leaves the workspace bounds")
            }
            Violation::BadParameter(what) => write!(f, "{what}"),
            Violation::NoRobots => write!(f, "instance has no trajectories"),
            Violation::EmptyTrajectory { robot } => write!(f, "trajectory {robot} is empty"),
            Violation::LengthMismatch {
                robot,
                len,
                expected,
            } => write!(
                f,
                "trajectory {robot} has {len} points, expected {expected}"
            ),
            Violation::SpeedExceeded { robot, t, distance } => write!(
                f,
                "robot {robot} moves {distance:.3} m between steps {t} and {}",
                t + 1
            ),
            Violation::OutOfBounds { robot, t } => {
                write!(f, "robot {robot} leaves the workspace at t = {t}")
            }
            Violation::ObstacleClearance {
                robot,
                t,
                obstacle,
                distance,
            } => write!(
                f,
                "robot {robot} at t = {t} is {distance:.3} m from obstacle {obstacle}"
            ),
            Violation::PlannedCollision { t, i, j, distance } => write!(
                f,
                "planned collision at t = {t} between robots {i} and {j} (distance {distance:.3})"
            ),
        }
    }
}

/// All invariant violations of an instance; empty iff the instance is valid.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport(pub Vec<Violation>);

impl ValidationReport {
    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn first(&self) -> Option<&Violation> {
        self.0.first()
    }

    pub fn violations(&self) -> &[Violation] {
        &self.0
    }

    pub fn planned_collisions(&self) -> impl Iterator<Item = &Violation> {
        self.0
            .iter()
            .filter(|v| matches!(v, Violation::PlannedCollision { .. }))
    }
}

/// Joint plan positions at step `t`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SimState {
    pub t: usize,
    pub x: Vec<usize>,
}

impl SimState {
    pub fn initial(n: usize) -> Self {
        Self {
            t: 0,
            x: vec![0; n],
        }
    }

    pub fn all_at(&self, horizon: usize) -> bool {
        self.x.iter().all(|&x| x == horizon)
    }
}
