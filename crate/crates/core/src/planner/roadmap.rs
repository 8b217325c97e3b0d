//! Text grid maps and the lattice roadmap built over a workspace.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::geometry::{Point, Rect};
use crate::model::Workspace;

/// Map file: optional comment lines, a `scale <meters>` header, then rows of
/// `.` (free) and `#` (obstacle). Every character is a lattice point; an
/// obstacle character covers the square of side `scale` centered on it.
#[derive(Debug, Clone, PartialEq)]
pub struct GridMap {
    pub scale: f64,
    width: usize,
    height: usize,
    /// Row-major, top row first; `true` = obstacle.
    blocked: Vec<bool>,
}

impl GridMap {
    pub fn parse(text: &str) -> Result<GridMap> {
        let mut lines = text.lines();
        let mut scale = None;
        for line in lines.by_ref() {
            let line = line.trim();
            if let Some(rest) = line.strip_prefix("scale") {
                let value: f64 = rest
                    .trim()
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad scale header {line:?}")))?;
                if !(value.is_finite() && value > 0.0) {
                    return Err(Error::Parse("scale must be positive".into()));
                }
                scale = Some(value);
                break;
            }
        }
        let scale = scale.ok_or_else(|| Error::Parse("map has no `scale` header".into()))?;
        let rows: Vec<&str> = lines.map(str::trim_end).filter(|l| !l.is_empty()).collect();
        let width = rows.first().map_or(0, |r| r.chars().count());
        if rows.len() < 2 || width < 2 {
            return Err(Error::Parse("map grid must be at least 2x2".into()));
        }
        let mut blocked = Vec::with_capacity(width * rows.len());
        for (k, row) in rows.iter().enumerate() {
            if row.chars().count() != width {
                return Err(Error::Parse(format!("map row {k} has a different width")));
            }
            for c in row.chars() {
                blocked.push(match c {
                    '.' => false,
                    '#' => true,
                    other => {
                        return Err(Error::Parse(format!("unexpected map character {other:?}")))
                    }
                });
            }
        }
        Ok(GridMap {
            scale,
            width,
            height: rows.len(),
            blocked,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn is_blocked(&self, col: usize, row: usize) -> bool {
        self.blocked[row * self.width + col]
    }

    /// Workspace whose lattice points coincide with the map characters.
    /// Horizontal runs of obstacle characters become one rectangle each.
    pub fn to_workspace(&self) -> Workspace {
        let s = self.scale;
        let bounds = Rect::new(
            0.0,
            0.0,
            (self.width - 1) as f64 * s,
            (self.height - 1) as f64 * s,
        );
        let mut obstacles = Vec::new();
        for row in 0..self.height {
            let y = (self.height - 1 - row) as f64 * s;
            let mut col = 0;
            while col < self.width {
                if !self.is_blocked(col, row) {
                    col += 1;
                    continue;
                }
                let start = col;
                while col < self.width && self.is_blocked(col, row) {
                    col += 1;
                }
                let rect = Rect::new(
                    (start as f64 * s - s / 2.0).max(bounds.min.x),
                    (y - s / 2.0).max(bounds.min.y),
                    ((col - 1) as f64 * s + s / 2.0).min(bounds.max.x),
                    (y + s / 2.0).min(bounds.max.y),
                );
                obstacles.push(rect.to_polygon());
            }
        }
        Workspace::new(bounds, obstacles)
    }
}

/// Lattice cell `(ix, iy)`; its center sits at `origin + cell_size·(ix, iy)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Cell {
    pub ix: usize,
    pub iy: usize,
}

impl Cell {
    pub const fn new(ix: usize, iy: usize) -> Self {
        Self { ix, iy }
    }
}

/// 4-connected lattice over the workspace bounds; waiting is always allowed.
#[derive(Debug, Clone, PartialEq)]
pub struct Roadmap {
    origin: Point,
    cell_size: f64,
    nx: usize,
    ny: usize,
    free: Vec<bool>,
}

impl Roadmap {
    pub fn cell_size(&self) -> f64 {
        self.cell_size
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.nx, self.ny)
    }

    pub(crate) fn index(&self, c: Cell) -> usize {
        c.iy * self.nx + c.ix
    }

    pub(crate) fn cell(&self, index: usize) -> Cell {
        Cell::new(index % self.nx, index / self.nx)
    }

    pub(crate) fn len(&self) -> usize {
        self.free.len()
    }

    pub fn contains(&self, c: Cell) -> bool {
        c.ix < self.nx && c.iy < self.ny
    }

    pub fn is_free(&self, c: Cell) -> bool {
        self.contains(c) && self.free[self.index(c)]
    }

    pub fn center(&self, c: Cell) -> Point {
        Point::new(
            self.origin.x + c.ix as f64 * self.cell_size,
            self.origin.y + c.iy as f64 * self.cell_size,
        )
    }

    /// Lattice cell whose center is `p`, if `p` sits on the lattice.
    pub fn cell_at(&self, p: Point) -> Option<Cell> {
        let fx = (p.x - self.origin.x) / self.cell_size;
        let fy = (p.y - self.origin.y) / self.cell_size;
        let (rx, ry) = (fx.round(), fy.round());
        if (fx - rx).abs() > 1e-6 || (fy - ry).abs() > 1e-6 || rx < 0.0 || ry < 0.0 {
            return None;
        }
        let c = Cell::new(rx as usize, ry as usize);
        self.contains(c).then_some(c)
    }

    pub fn free_cells(&self) -> impl Iterator<Item = Cell> + '_ {
        (0..self.free.len())
            .filter(|&k| self.free[k])
            .map(|k| self.cell(k))
    }

    pub fn free_count(&self) -> usize {
        self.free.iter().filter(|&&f| f).count()
    }

    /// Free neighbors in move order east, north, west, south.
    pub fn neighbors(&self, c: Cell) -> impl Iterator<Item = Cell> + '_ {
        let candidates = [
            (c.ix + 1 < self.nx).then(|| Cell::new(c.ix + 1, c.iy)),
            (c.iy + 1 < self.ny).then(|| Cell::new(c.ix, c.iy + 1)),
            c.ix.checked_sub(1).map(|ix| Cell::new(ix, c.iy)),
            c.iy.checked_sub(1).map(|iy| Cell::new(c.ix, iy)),
        ];
        candidates
            .into_iter()
            .flatten()
            .filter(move |&n| self.is_free(n))
    }

    /// Whether `to` is reachable from `from` through free cells not rejected
    /// by `blocked`.
    pub fn connected(&self, from: Cell, to: Cell, blocked: impl Fn(Cell) -> bool) -> bool {
        if !self.is_free(from) || !self.is_free(to) || blocked(from) || blocked(to) {
            return false;
        }
        let mut seen = vec![false; self.free.len()];
        let mut queue = VecDeque::from([from]);
        seen[self.index(from)] = true;
        while let Some(c) = queue.pop_front() {
            if c == to {
                return true;
            }
            for n in self.neighbors(c) {
                let k = self.index(n);
                if !seen[k] && !blocked(n) {
                    seen[k] = true;
                    queue.push_back(n);
                }
            }
        }
        false
    }

    /// Number of connected components of the free lattice.
    pub fn components(&self) -> usize {
        let mut label = vec![false; self.free.len()];
        let mut count = 0;
        for start in self.free_cells().collect::<Vec<_>>() {
            if label[self.index(start)] {
                continue;
            }
            count += 1;
            let mut queue = VecDeque::from([start]);
            label[self.index(start)] = true;
            while let Some(c) = queue.pop_front() {
                for n in self.neighbors(c) {
                    let k = self.index(n);
                    if !label[k] {
                        label[k] = true;
                        queue.push_back(n);
                    }
                }
            }
        }
        count
    }
}

/// Lattice over the workspace bounds with spacing `cell_size`; a cell is free
/// iff its center clears every obstacle by at least `radius`. `step_length`
/// is the farthest a robot may travel in one step.
pub fn build_roadmap(
    workspace: &Workspace,
    radius: f64,
    cell_size: f64,
    step_length: f64,
) -> Result<Roadmap> {
    let bounds = workspace.bounds;
    if bounds.is_degenerate() {
        return Err(Error::Roadmap("workspace bounds are degenerate".into()));
    }
    if !(cell_size.is_finite() && cell_size > 0.0) || cell_size > step_length + 1e-9 {
        return Err(Error::Roadmap(format!(
            "cell size {cell_size} must be positive and at most the step length {step_length}"
        )));
    }
    let count = |extent: f64| (extent / cell_size + 1e-9).floor() as usize + 1;
    let (nx, ny) = (count(bounds.width()), count(bounds.height()));
    let mut map = Roadmap {
        origin: bounds.min,
        cell_size,
        nx,
        ny,
        free: vec![false; nx * ny],
    };
    for k in 0..map.free.len() {
        let p = map.center(map.cell(k));
        map.free[k] = workspace.clearance(p) >= radius;
    }
    Ok(map)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_workspace_is_all_free() {
        let ws = Workspace::empty(Rect::new(0.0, 0.0, 10.0, 10.0));
        let map = build_roadmap(&ws, 0.4, 1.0, 1.0).unwrap();
        assert_eq!(map.dims(), (11, 11));
        assert_eq!(map.free_count(), 121);
        assert_eq!(map.components(), 1);
    }

    #[test]
    fn fully_covered_workspace_has_no_free_cells() {
        let bounds = Rect::new(0.0, 0.0, 4.0, 4.0);
        let ws = Workspace::new(bounds, vec![bounds.to_polygon()]);
        assert_eq!(build_roadmap(&ws, 0.1, 1.0, 1.0).unwrap().free_count(), 0);
    }

    #[test]
    fn wall_splits_map_in_two() {
        let map = GridMap::parse(
            "scale 1.0\n\
             #########\n\
             #...#...#\n\
             #...#...#\n\
             #...#...#\n\
             #########\n",
        )
        .unwrap();
        let ws = map.to_workspace();
        let rm = build_roadmap(&ws, 0.4, 1.0, 1.0).unwrap();
        assert_eq!(rm.free_count(), 18);
        assert_eq!(rm.components(), 2);
        assert!(!rm.connected(Cell::new(1, 1), Cell::new(7, 1), |_| false));
        assert!(rm.connected(Cell::new(1, 1), Cell::new(3, 3), |_| false));
    }

    #[test]
    fn map_characters_match_lattice() {
        let text = "; a comment\nscale 1.0\n#####\n#.#.#\n#...#\n#####\n";
        let map = GridMap::parse(text).unwrap();
        let ws = map.to_workspace();
        assert_eq!(ws.bounds, Rect::new(0.0, 0.0, 4.0, 3.0));
        let rm = build_roadmap(&ws, 0.4, 1.0, 1.0).unwrap();
        for row in 0..map.height() {
            for col in 0..map.width() {
                let cell = Cell::new(col, map.height() - 1 - row);
                assert_eq!(rm.is_free(cell), !map.is_blocked(col, row), "{col},{row}");
            }
        }
    }

    #[test]
    fn rejects_bad_maps_and_cells() {
        assert!(GridMap::parse("#..\n").is_err());
        assert!(GridMap::parse("scale 1\n##\n#\n").is_err());
        assert!(GridMap::parse("scale 1\n#x\n##\n").is_err());
        let ws = Workspace::empty(Rect::new(0.0, 0.0, 4.0, 4.0));
        assert!(build_roadmap(&ws, 0.4, 1.5, 1.0).is_err());
        let flat = Workspace::empty(Rect::new(0.0, 0.0, 0.0, 4.0));
        assert!(build_roadmap(&flat, 0.4, 1.0, 1.0).is_err());
    }

    #[test]
    fn neighbor_order_is_east_north_west_south() {
        let ws = Workspace::empty(Rect::new(0.0, 0.0, 2.0, 2.0));
        let rm = build_roadmap(&ws, 0.0, 1.0, 1.0).unwrap();
        let order: Vec<_> = rm.neighbors(Cell::new(1, 1)).collect();
        assert_eq!(
            order,
            vec![
                Cell::new(2, 1),
                Cell::new(1, 2),
                Cell::new(0, 1),
                Cell::new(1, 0)
            ]
        );
        assert_eq!(rm.cell_at(Point::new(2.0, 1.0)), Some(Cell::new(2, 1)));
        assert_eq!(rm.cell_at(Point::new(1.5, 1.0)), None);
    }
}
