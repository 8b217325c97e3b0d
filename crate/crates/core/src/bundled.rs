//! Instances and maps shipped with the crate.

use crate::error::{Error, Result};
use crate::model::{load_instance, Instance};
use crate::planner::GridMap;

pub const CROSS2: &str = include_str!("../data/instances/cross2.json");
pub const MINI_CROSS: &str = include_str!("../data/instances/mini-cross.json");
pub const CORRIDOR_SWAP: &str = include_str!("../data/instances/corridor-swap.json");

pub const HALL: &str = include_str!("../data/maps/hall.map");
pub const CORRIDOR: &str = include_str!("../data/maps/corridor.map");
pub const WAREHOUSE: &str = include_str!("../data/maps/warehouse.map");

pub const INSTANCE_NAMES: [&str; 3] = ["cross2", "mini-cross", "corridor-swap"];
pub const MAP_NAMES: [&str; 3] = ["hall", "corridor", "warehouse"];

/// Robot radius the bundled maps are drawn for.
pub const MAP_RADIUS: f64 = 0.4;

/// Bundled instance by name.
pub fn instance(name: &str) -> Result<Instance> {
    let text = match name {
        "cross2" => CROSS2,
        "mini-cross" => MINI_CROSS,
        "corridor-swap" => CORRIDOR_SWAP,
        other => return Err(Error::Parse(format!("no bundled instance named {other:?}"))),
    };
    load_instance(text.as_bytes())
}

/// Bundled map by name.
pub fn map(name: &str) -> Result<GridMap> {
    let text = match name {
        "hall" => HALL,
        "corridor" => CORRIDOR,
        "warehouse" => WAREHOUSE,
        other => return Err(Error::Parse(format!("no bundled map named {other:?}"))),
    };
    GridMap::parse(text)
}

/// Two robots crossing at `(5, 5)`; robot 2 waits six steps at its origin so
/// that robot 1 passes first.
pub fn cross2() -> Instance {
    instance("cross2").expect("bundled cross2 is valid")
}

/// Scaled-down crossing used by the exhaustive oracle.
pub fn mini_cross() -> Instance {
    instance("mini-cross").expect("bundled mini-cross is valid")
}

/// Two robots swapping sides through a one-lane corridor; robot 1 ducks into
/// an alcove near the far end while robot 2 waits at its origin.
pub fn corridor_swap() -> Instance {
    instance("corridor-swap").expect("bundled corridor-swap is valid")
}
