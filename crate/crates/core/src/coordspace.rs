//! Coordination-space predicates.
//!
//! For robots `i` and `j` the pairwise collision set `C_ij` holds the plan
//! position pairs `(a, b)` at which the discs at `π_i(a)` and `π_j(b)` overlap
//! (distance strictly below `2r`). The joint collision region is only ever
//! needed through its pairwise projections, so nothing n-dimensional is built.

use std::cell::RefCell;
use std::collections::HashMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::model::Instance;

/// Memoized pairwise collision predicate over one instance.
///
/// The cache is private to the oracle (and not `Sync`); concurrent runs each
/// build their own oracle over the shared instance.
#[derive(Debug)]
pub struct CollisionOracle<'a> {
    inst: &'a Instance,
    two_r: f64,
    memo: Option<RefCell<HashMap<u64, bool>>>,
}

impl<'a> CollisionOracle<'a> {
    pub fn new(inst: &'a Instance) -> Self {
        // Cache keys pack four 16-bit fields.
        let packable = inst.robots() <= 1 << 16 && inst.horizon() < 1 << 16;
        Self {
            inst,
            two_r: 2.0 * inst.radius,
            memo: packable.then(|| RefCell::new(HashMap::new())),
        }
    }

    /// Oracle that recomputes every query.
    pub fn uncached(inst: &'a Instance) -> Self {
        Self {
            memo: None,
            ..Self::new(inst)
        }
    }

    pub fn instance(&self) -> &'a Instance {
        self.inst
    }

    pub fn cached_entries(&self) -> usize {
        self.memo.as_ref().map_or(0, |m| m.borrow().len())
    }

    fn check_pair(&self, i: usize, j: usize) -> Result<()> {
        let n = self.inst.robots();
        for index in [i, j] {
            if index >= n {
                return Err(Error::RobotOutOfRange { index, n });
            }
        }
        if i == j {
            return Err(Error::SameRobot(i));
        }
        Ok(())
    }

    fn check_position(&self, x: usize) -> Result<()> {
        let horizon = self.inst.horizon();
        if x > horizon {
            return Err(Error::PositionOutOfRange { x, horizon });
        }
        Ok(())
    }

    /// `c_ij(a, b)`: whether robot `i` at plan position `a` overlaps robot `j`
    /// at plan position `b`.
    pub fn in_collision(&self, i: usize, j: usize, a: usize, b: usize) -> Result<bool> {
        self.check_pair(i, j)?;
        self.check_position(a)?;
        self.check_position(b)?;
        Ok(self.collides(i, j, a, b))
    }

    /// Unchecked form of [`in_collision`](Self::in_collision) for hot loops.
    pub(crate) fn collides(&self, i: usize, j: usize, a: usize, b: usize) -> bool {
        let Some(memo) = &self.memo else {
            return self.direct(i, j, a, b);
        };
        // Normalize so that (i, j, a, b) and (j, i, b, a) share an entry.
        let (i, j, a, b) = if i < j { (i, j, a, b) } else { (j, i, b, a) };
        let key = ((i as u64) << 48) | ((j as u64) << 32) | ((a as u64) << 16) | b as u64;
        if let Some(&hit) = memo.borrow().get(&key) {
            return hit;
        }
        let value = self.direct(i, j, a, b);
        memo.borrow_mut().insert(key, value);
        value
    }

    fn direct(&self, i: usize, j: usize, a: usize, b: usize) -> bool {
        let pi = self.inst.trajectories[i].at(a);
        let pj = self.inst.trajectories[j].at(b);
        pi.distance(pj) < self.two_r
    }

    /// Whether `C_ij` meets the segment `{xi + 1} × {xj, …, xi + 1}` that
    /// robot `i` would enter by advancing while it leads robot `j`.
    pub fn segment_blocked(&self, i: usize, j: usize, xi: usize, xj: usize) -> Result<bool> {
        self.check_pair(i, j)?;
        let horizon = self.inst.horizon();
        if xi < xj || xi + 1 > horizon {
            return Err(Error::SegmentPrecondition { xi, xj, horizon });
        }
        Ok(self.segment_hits(i, j, xi, xj))
    }

    pub(crate) fn segment_hits(&self, i: usize, j: usize, xi: usize, xj: usize) -> bool {
        let next = xi + 1;
        (xj..=next).any(|k| self.collides(i, j, next, k))
    }

    /// Lists every place the 1-margin around the diagonal is broken: some pair
    /// collides at `(t + 1, t)` or `(t, t + 1)`.
    pub fn verify_margin(&self) -> MarginReport {
        let n = self.inst.robots();
        let horizon = self.inst.horizon();
        let mut violations = Vec::new();
        for t in 0..horizon {
            for i in 0..n {
                for j in (i + 1)..n {
                    if self.collides(i, j, t + 1, t) {
                        violations.push(MarginViolation { t, i, j, ahead: i });
                    }
                    if self.collides(i, j, t, t + 1) {
                        violations.push(MarginViolation { t, i, j, ahead: j });
                    }
                }
            }
        }
        MarginReport(violations)
    }

    /// Materializes `C_ij` over `{0..T}²`.
    pub fn pairwise_region(&self, i: usize, j: usize) -> Result<Region> {
        self.check_pair(i, j)?;
        let size = self.inst.horizon() + 1;
        let mut cells = vec![false; size * size];
        for a in 0..size {
            for b in 0..size {
                cells[a * size + b] = self.direct(i, j, a, b);
            }
        }
        Ok(Region { size, cells })
    }
}

/// One broken 1-margin cell: robot `ahead` one step past the diagonal at `t`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MarginViolation {
    pub t: usize,
    pub i: usize,
    pub j: usize,
    pub ahead: usize,
}

impl fmt::Display for MarginViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "t = {}: robots {} and {} collide when robot {} runs one step ahead",
            self.t, self.i, self.j, self.ahead
        )
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MarginReport(pub Vec<MarginViolation>);

impl MarginReport {
    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn violations(&self) -> &[MarginViolation] {
        &self.0
    }

    pub fn into_result(self) -> Result<()> {
        match self.0.first() {
            None => Ok(()),
            Some(v) => Err(Error::MarginViolation {
                t: v.t,
                i: v.i,
                j: v.j,
            }),
        }
    }
}

/// Dense bitmap of a pairwise collision set, indexed `[a][b]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Region {
    size: usize,
    cells: Vec<bool>,
}

impl Region {
    pub fn size(&self) -> usize {
        self.size
    }

    pub fn get(&self, a: usize, b: usize) -> bool {
        self.cells[a * self.size + b]
    }

    pub fn count(&self) -> usize {
        self.cells.iter().filter(|&&c| c).count()
    }

    pub fn transpose(&self) -> Region {
        let n = self.size;
        let mut cells = vec![false; n * n];
        for a in 0..n {
            for b in 0..n {
                cells[b * n + a] = self.cells[a * n + b];
            }
        }
        Region { size: n, cells }
    }

    /// Number of 4-connected components of colliding cells.
    pub fn components(&self) -> usize {
        let n = self.size;
        let mut seen = vec![false; n * n];
        let mut count = 0;
        for start in 0..n * n {
            if !self.cells[start] || seen[start] {
                continue;
            }
            count += 1;
            let mut stack = vec![start];
            seen[start] = true;
            while let Some(c) = stack.pop() {
                let (a, b) = (c / n, c % n);
                let mut push = |a: usize, b: usize| {
                    let k = a * n + b;
                    if self.cells[k] && !seen[k] {
                        seen[k] = true;
                        stack.push(k);
                    }
                };
                if a > 0 {
                    push(a - 1, b);
                }
                if a + 1 < n {
                    push(a + 1, b);
                }
                if b > 0 {
                    push(a, b - 1);
                }
                if b + 1 < n {
                    push(a, b + 1);
                }
            }
        }
        count
    }

    /// Mean `(a, b)` of the colliding cells.
    pub fn centroid(&self) -> Option<(f64, f64)> {
        let count = self.count();
        if count == 0 {
            return None;
        }
        let (mut sa, mut sb) = (0.0, 0.0);
        for a in 0..self.size {
            for b in 0..self.size {
                if self.get(a, b) {
                    sa += a as f64;
                    sb += b as f64;
                }
            }
        }
        Some((sa / count as f64, sb / count as f64))
    }

    /// Text grid: one row per `a`, one column per `b`, `#` for collision.
    pub fn to_text_grid(&self) -> String {
        let mut out = String::with_capacity(self.size * (self.size + 1));
        for a in 0..self.size {
            for b in 0..self.size {
                out.push(if self.get(a, b) { '#' } else { '.' });
            }
            out.push('\n');
        }
        out
    }
}
