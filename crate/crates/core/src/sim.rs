//! Obstacle fields, sensing, scenario generation, and episode execution.
//!
//! The simulation side owns the ground truth the planner is not allowed to
//! see: which cells of the grid are blocked. It exposes sensing of adjacent
//! cells, an independent reachability computation used to check episode
//! completeness, and a deterministic scenario generator.

use std::collections::BTreeSet;

use crate::curve::{Cell, HilbertIndex, Iteration};
use crate::error::Error;
use crate::graph::CoverageGraph;
use crate::planner::{run_episode_full, SenseOracle};
use crate::trace::EpisodeTrace;

/// Obstacle geometry in grid units.
#[derive(Clone, Debug, PartialEq)]
pub enum Shape {
    /// Explicitly listed blocked cells.
    Cells(Vec<Cell>),
    /// Axis-aligned rectangle in continuous grid coordinates; the unit cell
    /// `(cx, cy)` spans `[cx, cx+1] x [cy, cy+1]`.
    Rect { x0: f64, y0: f64, x1: f64, y1: f64 },
}

/// Ground-truth blocked/free state of every cell at one iteration.
#[derive(Clone, Debug, PartialEq)]
pub struct ObstacleField {
    k: Iteration,
    blocked: Vec<bool>,
    blocked_count: u32,
    provenance: Vec<Shape>,
}

impl ObstacleField {
    pub fn empty(k: Iteration) -> Self {
        ObstacleField {
            k,
            blocked: vec![false; k.waypoint_count() as usize],
            blocked_count: 0,
            provenance: Vec::new(),
        }
    }

    pub fn from_cells(k: Iteration, cells: &[Cell]) -> Result<Self, Error> {
        rasterize(&[Shape::Cells(cells.to_vec())], k)
    }

    pub fn iteration(&self) -> Iteration {
        self.k
    }

    pub fn side(&self) -> u32 {
        self.k.side()
    }

    pub fn is_blocked(&self, c: Cell) -> bool {
        let side = self.side();
        assert!(c.x < side && c.y < side, "cell {c} outside {side}x{side}");
        self.blocked[(c.y * side + c.x) as usize]
    }

    pub fn blocked_count(&self) -> u32 {
        self.blocked_count
    }

    pub fn free_cell_count(&self) -> u32 {
        self.k.waypoint_count() - self.blocked_count
    }

    /// Blocked cells in row-major order.
    pub fn blocked_cells(&self) -> Vec<Cell> {
        let side = self.side();
        let mut out = Vec::with_capacity(self.blocked_count as usize);
        for y in 0..side {
            for x in 0..side {
                if self.blocked[(y * side + x) as usize] {
                    out.push(Cell::new(x, y));
                }
            }
        }
        out
    }

    /// Shapes the field was rasterized from.
    pub fn shapes(&self) -> &[Shape] {
        &self.provenance
    }
}

/// Builds a field by marking every cell with positive-measure overlap with
/// any shape. A rectangle degenerate along an axis (a segment or point)
/// instead blocks the cells whose closed extent contains it on that axis.
pub fn rasterize(shapes: &[Shape], k: Iteration) -> Result<ObstacleField, Error> {
    let side = k.side();
    let mut blocked = vec![false; k.waypoint_count() as usize];
    let mut blocked_count = 0u32;
    let mut mark = |x: u32, y: u32| {
        let slot = &mut blocked[(y * side + x) as usize];
        if !*slot {
            *slot = true;
            blocked_count += 1;
        }
    };
    for shape in shapes {
        match shape {
            Shape::Cells(cells) => {
                for c in cells {
                    if c.x >= side || c.y >= side {
                        return Err(Error::ShapeOutOfRegion(format!(
                            "cell {c} outside the {side}x{side} grid"
                        )));
                    }
                    mark(c.x, c.y);
                }
            }
            &Shape::Rect { x0, y0, x1, y1 } => {
                for v in [x0, y0, x1, y1] {
                    if !v.is_finite() {
                        return Err(Error::ShapeOutOfRegion(format!(
                            "rect [{x0}, {x1}] x [{y0}, {y1}] has a non-finite bound"
                        )));
                    }
                }
                if x1 < x0 || y1 < y0 {
                    return Err(Error::ShapeOutOfRegion(format!(
                        "rect [{x0}, {x1}] x [{y0}, {y1}] has reversed bounds"
                    )));
                }
                let limit = side as f64;
                if x0 < 0.0 || y0 < 0.0 || x1 > limit || y1 > limit {
                    return Err(Error::ShapeOutOfRegion(format!(
                        "rect [{x0}, {x1}] x [{y0}, {y1}] outside the {side}x{side} grid"
                    )));
                }
                let overlaps = |c: u32, lo: f64, hi: f64| {
                    let (cl, ch) = (c as f64, (c + 1) as f64);
                    if hi > lo {
                        cl < hi && ch > lo
                    } else {
                        cl <= lo && lo <= ch
                    }
                };
                let first_x = (x0.floor() - 1.0).max(0.0) as u32;
                let last_x = ((x1.ceil() + 1.0).min((side - 1) as f64)) as u32;
                let first_y = (y0.floor() - 1.0).max(0.0) as u32;
                let last_y = ((y1.ceil() + 1.0).min((side - 1) as f64)) as u32;
                for cy in first_y..=last_y {
                    for cx in first_x..=last_x {
                        if overlaps(cx, x0, x1) && overlaps(cy, y0, y1) {
                            mark(cx, cy);
                        }
                    }
                }
            }
        }
    }
    Ok(ObstacleField {
        k,
        blocked,
        blocked_count,
        provenance: shapes.to_vec(),
    })
}

/// Ground-truth sensing of one side-adjacent cell.
pub fn sense(field: &ObstacleField, from: Cell, target: Cell) -> Result<bool, Error> {
    let side = field.side();
    for c in [from, target] {
        if c.x >= side || c.y >= side {
            return Err(Error::CellOutOfBounds {
                k: field.iteration().get(),
                cell: c,
                side,
            });
        }
    }
    if from.x.abs_diff(target.x) + from.y.abs_diff(target.y) != 1 {
        return Err(Error::NonAdjacentSense { from, target });
    }
    Ok(field.is_blocked(target))
}

/// Sensing oracle backed by a ground-truth field.
pub struct FieldOracle<'a>(pub &'a ObstacleField);

impl SenseOracle for FieldOracle<'_> {
    fn start_blocked(&mut self, start: Cell) -> bool {
        self.0.is_blocked(start)
    }

    fn is_blocked(&mut self, from: Cell, target: Cell) -> Result<bool, Error> {
        sense(self.0, from, target)
    }
}

/// Free cells reachable from `start` through side-adjacent free cells.
///
/// Deliberately computed on raw cell coordinates with its own adjacency
/// walk, sharing no code with the planner or [`CoverageGraph`], so it can
/// serve as an independent completeness check on episodes.
pub fn reachable_free_set(field: &ObstacleField, start: Cell) -> Result<BTreeSet<Cell>, Error> {
    let side = field.side();
    if start.x >= side || start.y >= side {
        return Err(Error::CellOutOfBounds {
            k: field.iteration().get(),
            cell: start,
            side,
        });
    }
    if field.is_blocked(start) {
        return Err(Error::BlockedStart { cell: start });
    }
    let mut seen = BTreeSet::from([start]);
    let mut stack = vec![start];
    while let Some(c) = stack.pop() {
        let mut push = |n: Cell| {
            if !field.is_blocked(n) && seen.insert(n) {
                stack.push(n);
            }
        };
        if c.x > 0 {
            push(Cell::new(c.x - 1, c.y));
        }
        if c.x + 1 < side {
            push(Cell::new(c.x + 1, c.y));
        }
        if c.y > 0 {
            push(Cell::new(c.x, c.y - 1));
        }
        if c.y + 1 < side {
            push(Cell::new(c.x, c.y + 1));
        }
    }
    Ok(seen)
}

/// SplitMix64 generator. Weyl increment `0x9E3779B97F4A7C15`, finalizer
/// constants `0xBF58476D1CE4E5B9` and `0x94D049BB133111EB` with shifts
/// 30, 27, and 31.
#[derive(Clone, Debug)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    pub(crate) fn next_below(&mut self, bound: u64) -> u64 {
        self.next_u64() % bound
    }
}

/// Parameters for deterministic random field generation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ScenarioSeed {
    pub k: Iteration,
    pub blocked_count: u32,
    pub rng_seed: u64,
    /// Keep the curve origin cell `(0, 0)` free so episodes can start there.
    pub keep_start_free: bool,
}

/// Draws `blocked_count` distinct blocked cells with a partial
/// Fisher-Yates shuffle over row-major cell ids, `j = i + next % (len - i)`.
/// At most `4^k - 1` cells may be blocked so at least one cell stays free.
pub fn generate_scenario(seed: &ScenarioSeed) -> Result<ObstacleField, Error> {
    let n = seed.k.waypoint_count();
    let available = n - 1;
    if seed.blocked_count > available {
        return Err(Error::TooManyBlocked {
            requested: seed.blocked_count,
            available,
        });
    }
    let mut pool: Vec<u32> = if seed.keep_start_free {
        (1..n).collect()
    } else {
        (0..n).collect()
    };
    let mut rng = SplitMix64::new(seed.rng_seed);
    let count = (seed.blocked_count as usize).min(pool.len());
    for i in 0..count {
        let j = i + rng.next_below((pool.len() - i) as u64) as usize;
        pool.swap(i, j);
    }
    let side = seed.k.side();
    let mut cells: Vec<Cell> = pool[..count]
        .iter()
        .map(|&id| Cell::new(id % side, id / side))
        .collect();
    cells.sort_by_key(|c| (c.y, c.x));
    rasterize(&[Shape::Cells(cells)], seed.k)
}

/// Runs one episode on the field, then checks completeness and coverage
/// against the independent reachability computation: the lemma check passes
/// when the visit set equals the free cells reachable from the start.
pub fn execute(field: &ObstacleField, start: HilbertIndex) -> Result<EpisodeTrace, Error> {
    let g = CoverageGraph::new(field.iteration());
    let mut oracle = FieldOracle(field);
    let (mut trace, state) = run_episode_full(&g, &mut oracle, start)?;
    let reachable = reachable_free_set(field, g.cell_of(start))?;
    let visited: BTreeSet<Cell> = state.visited().iter().map(|d| g.cell_of(d)).collect();
    trace.lemma_check = Some(visited == reachable);
    trace.metrics.coverage_ratio =
        Some(f64::from(trace.metrics.unique_visited) / f64::from(field.free_cell_count()));
    Ok(trace)
}
