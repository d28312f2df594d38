//! Non-uniform coverage over a 2x2 quadrant partition.
//!
//! Each quadrant of the region carries its own curve iteration. Quadrants
//! are covered one after another in the iteration-1 curve order over the
//! quadrant grid, and consecutive quadrants are stitched by a transfer
//! rule: from the terminal waypoint the agent walks through visited cells
//! to the visited shared-edge waypoint nearest to it, then crosses into the
//! free facing-edge waypoint of the next quadrant nearest to that, probing
//! and skipping blocked candidates.
//!
//! Obstacles are given once on a fine grid one iteration deeper than the
//! deepest quadrant; each quadrant sees the conservative downsampling of
//! its own quarter (a coarse cell is blocked when any fine cell under it
//! is).

use std::collections::BTreeSet;

use crate::curve::{Cell, HilbertIndex, Iteration};
use crate::error::Error;
use crate::graph::{CoverageGraph, IndexSet, VisitSet};
use crate::planner::run_episode_full;
use crate::sim::{reachable_free_set, FieldOracle, ObstacleField};
use crate::trace::{EpisodeTrace, Event, EventKind, Metrics, QuadrantReport, TraceGrid};

/// One quadrant of the 2x2 partition.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Quadrant {
    BottomLeft,
    TopLeft,
    TopRight,
    BottomRight,
}

impl Quadrant {
    /// Coverage order: the iteration-1 curve over the quadrant grid, so
    /// consecutive quadrants always share an edge.
    pub const ORDER: [Quadrant; 4] = [
        Quadrant::BottomLeft,
        Quadrant::TopLeft,
        Quadrant::TopRight,
        Quadrant::BottomRight,
    ];

    /// Position in [`Quadrant::ORDER`].
    pub fn position(self) -> usize {
        match self {
            Quadrant::BottomLeft => 0,
            Quadrant::TopLeft => 1,
            Quadrant::TopRight => 2,
            Quadrant::BottomRight => 3,
        }
    }

    /// Quadrant coordinates in the 2x2 grid, x rightwards and y upwards.
    pub fn offset(self) -> (u32, u32) {
        match self {
            Quadrant::BottomLeft => (0, 0),
            Quadrant::TopLeft => (0, 1),
            Quadrant::TopRight => (1, 1),
            Quadrant::BottomRight => (1, 0),
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Quadrant::BottomLeft => "BL",
            Quadrant::TopLeft => "TL",
            Quadrant::TopRight => "TR",
            Quadrant::BottomRight => "BR",
        }
    }

    pub fn from_label(s: &str) -> Option<Self> {
        match s {
            "BL" => Some(Quadrant::BottomLeft),
            "TL" => Some(Quadrant::TopLeft),
            "TR" => Some(Quadrant::TopRight),
            "BR" => Some(Quadrant::BottomRight),
            _ => None,
        }
    }
}

/// How the agent enters a quadrant after a transfer.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum EntryMode {
    /// Start covering from the transfer entry waypoint C.
    #[default]
    EnterAtC,
    /// After entering at C, walk to the quadrant's waypoint 0 through free
    /// cells and start there, when such a walk exists.
    RestartIfConnected,
}

/// Per-quadrant iterations and entry behavior, indexed by
/// [`Quadrant::position`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct QuadrantLayout {
    pub iterations: [Iteration; 4],
    pub entry_modes: [EntryMode; 4],
}

impl QuadrantLayout {
    pub fn new(iterations: [Iteration; 4]) -> Self {
        QuadrantLayout {
            iterations,
            entry_modes: [EntryMode::default(); 4],
        }
    }

    pub fn iteration(&self, q: Quadrant) -> Iteration {
        self.iterations[q.position()]
    }

    /// Iteration of the global obstacle grid: one deeper than the deepest
    /// quadrant, so every quadrant side divides the fine grid evenly.
    pub fn fine_iteration(&self) -> Result<Iteration, Error> {
        let max = self.iterations.iter().map(|k| k.get()).max().expect("four entries");
        Iteration::new(max as u32 + 1)
    }
}

/// Static plan for one non-uniform run.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct QuadrantPlan {
    layout: QuadrantLayout,
    order: [Quadrant; 4],
    endpoints: [(Cell, Cell); 4],
}

/// Lays out the coverage order and the per-quadrant curve endpoints. Every
/// 2x2 layout is valid; partial or deeper partitions are unrepresentable.
pub fn plan_quadrants(layout: QuadrantLayout) -> QuadrantPlan {
    let mut endpoints = [(Cell::new(0, 0), Cell::new(0, 0)); 4];
    for q in Quadrant::ORDER {
        let side = layout.iteration(q).side();
        endpoints[q.position()] = (Cell::new(0, 0), Cell::new(side - 1, 0));
    }
    QuadrantPlan {
        layout,
        order: Quadrant::ORDER,
        endpoints,
    }
}

impl QuadrantPlan {
    pub fn layout(&self) -> &QuadrantLayout {
        &self.layout
    }

    pub fn order(&self) -> [Quadrant; 4] {
        self.order
    }

    /// Local cells of the quadrant's curve start (index 0) and terminal
    /// (index `4^k - 1`).
    pub fn endpoints(&self, q: Quadrant) -> (Cell, Cell) {
        self.endpoints[q.position()]
    }

    pub fn iteration(&self, q: Quadrant) -> Iteration {
        self.layout.iteration(q)
    }
}

/// One stitch between consecutive quadrants. Waypoints and cells are local
/// to their own quadrant's grid: `a`, `b`, and `route` to the departing
/// quadrant, `c` and `probed_blocked` to the arriving one.
#[derive(Clone, Debug, PartialEq)]
pub struct TransferStep {
    pub from: Quadrant,
    pub to: Quadrant,
    /// Terminal waypoint of the departing episode.
    pub a: HilbertIndex,
    /// Visited shared-edge waypoint nearest to A.
    pub b: HilbertIndex,
    /// Free facing-edge waypoint of the arriving quadrant nearest to B.
    pub c: HilbertIndex,
    pub a_cell: Cell,
    pub b_cell: Cell,
    pub c_cell: Cell,
    /// Shortest route A to B through visited waypoints, both ends included.
    pub route: Vec<u32>,
    /// Facing-edge candidates probed blocked before C was found, nearest
    /// first.
    pub probed_blocked: Vec<u32>,
}

fn half_side(fine: Iteration) -> u32 {
    fine.side() / 2
}

fn scale(layout: &QuadrantLayout, fine: Iteration, q: Quadrant) -> u32 {
    half_side(fine) / layout.iteration(q).side()
}

/// Cell center in doubled fine-grid units, exact in integers.
fn center2(layout: &QuadrantLayout, fine: Iteration, q: Quadrant, c: Cell) -> (u64, u64) {
    let half = half_side(fine) as u64;
    let s = scale(layout, fine, q) as u64;
    let (qx, qy) = q.offset();
    (
        2 * qx as u64 * half + (2 * c.x as u64 + 1) * s,
        2 * qy as u64 * half + (2 * c.y as u64 + 1) * s,
    )
}

fn dist2(a: (u64, u64), b: (u64, u64)) -> u64 {
    let dx = a.0.abs_diff(b.0);
    let dy = a.1.abs_diff(b.1);
    dx * dx + dy * dy
}

/// Local cells of `q` on the edge shared with `toward`, which must be a
/// side-adjacent quadrant.
fn edge_cells(layout: &QuadrantLayout, q: Quadrant, toward: Quadrant) -> Vec<Cell> {
    let side = layout.iteration(q).side();
    let (qx, qy) = q.offset();
    let (tx, ty) = toward.offset();
    let delta = (tx as i64 - qx as i64, ty as i64 - qy as i64);
    match delta {
        (0, 1) => (0..side).map(|x| Cell::new(x, side - 1)).collect(),
        (0, -1) => (0..side).map(|x| Cell::new(x, 0)).collect(),
        (1, 0) => (0..side).map(|y| Cell::new(side - 1, y)).collect(),
        (-1, 0) => (0..side).map(|y| Cell::new(0, y)).collect(),
        _ => unreachable!("quadrants {} and {} share no edge", q.label(), toward.label()),
    }
}

/// Conservative view of one quadrant of the fine field at the quadrant's
/// own iteration.
fn quadrant_field(
    field: &ObstacleField,
    layout: &QuadrantLayout,
    fine: Iteration,
    q: Quadrant,
) -> ObstacleField {
    let kq = layout.iteration(q);
    let s = scale(layout, fine, q);
    let half = half_side(fine);
    let (qx, qy) = q.offset();
    let (ox, oy) = (qx * half, qy * half);
    let mut cells = Vec::new();
    for y in 0..kq.side() {
        for x in 0..kq.side() {
            let blocked = (oy + y * s..oy + (y + 1) * s).any(|fy| {
                (ox + x * s..ox + (x + 1) * s).any(|fx| field.is_blocked(Cell::new(fx, fy)))
            });
            if blocked {
                cells.push(Cell::new(x, y));
            }
        }
    }
    ObstacleField::from_cells(kq, &cells).expect("cells lie in the local grid")
}

/// Computes the stitch from `from` to the next quadrant `to`. `terminal`
/// and `visited` describe the finished episode in `from`; `field` is the
/// global fine-grid truth used to probe entry candidates.
pub fn transfer(
    layout: &QuadrantLayout,
    from: Quadrant,
    to: Quadrant,
    terminal: HilbertIndex,
    visited: &VisitSet,
    field: &ObstacleField,
) -> Result<TransferStep, Error> {
    if to.position() != from.position() + 1 {
        return Err(Error::Contract(format!(
            "transfer {} to {} does not follow the quadrant order",
            from.label(),
            to.label()
        )));
    }
    let fine = layout.fine_iteration()?;
    if field.iteration() != fine {
        return Err(Error::Contract(format!(
            "field iteration {} does not match the fine grid {fine}",
            field.iteration()
        )));
    }
    let g_from = CoverageGraph::new(layout.iteration(from));
    if terminal >= g_from.waypoint_count() {
        return Err(Error::IndexOutOfRange {
            k: layout.iteration(from).get(),
            index: terminal,
            count: g_from.waypoint_count(),
        });
    }
    if visited.capacity() != g_from.waypoint_count() {
        return Err(Error::Contract(format!(
            "visit set capacity {} does not match quadrant {}",
            visited.capacity(),
            from.label()
        )));
    }

    let a_cell = g_from.cell_of(terminal);
    let a2 = center2(layout, fine, from, a_cell);
    let mut best: Option<(u64, u32)> = None;
    for e in edge_cells(layout, from, to) {
        let idx = g_from.index_of(e);
        if !visited.contains(idx) {
            continue;
        }
        let key = (dist2(a2, center2(layout, fine, from, e)), idx);
        if best.is_none_or(|cur| key < cur) {
            best = Some(key);
        }
    }
    let Some((_, b)) = best else {
        return Err(Error::TransferImpossible {
            quadrant: to.label(),
            reason: "no visited waypoint on the shared edge".into(),
        });
    };
    let b_cell = g_from.cell_of(b);
    let route = g_from.shortest_route(visited, terminal, b)?;

    let b2 = center2(layout, fine, from, b_cell);
    let g_to = CoverageGraph::new(layout.iteration(to));
    let to_field = quadrant_field(field, layout, fine, to);
    let mut candidates: Vec<(u64, u32, Cell)> = edge_cells(layout, to, from)
        .into_iter()
        .map(|c| (dist2(b2, center2(layout, fine, to, c)), g_to.index_of(c), c))
        .collect();
    candidates.sort();
    let mut probed_blocked = Vec::new();
    let mut chosen = None;
    for (_, idx, cell) in candidates {
        if to_field.is_blocked(cell) {
            probed_blocked.push(idx);
        } else {
            chosen = Some((idx, cell));
            break;
        }
    }
    let Some((c, c_cell)) = chosen else {
        return Err(Error::TransferImpossible {
            quadrant: to.label(),
            reason: "every facing-edge waypoint is blocked".into(),
        });
    };

    Ok(TransferStep {
        from,
        to,
        a: terminal,
        b,
        c,
        a_cell,
        b_cell,
        c_cell,
        route,
        probed_blocked,
    })
}

/// Covers the four quadrants in order, stitching with [`transfer`]. A
/// failed transfer ends the chain: the remaining quadrants are reported
/// unreached and the run still returns a trace. Waypoints and cells in the
/// trace are local to the quadrant each event is tagged with.
pub fn run_nonuniform(plan: &QuadrantPlan, field: &ObstacleField) -> Result<EpisodeTrace, Error> {
    let layout = plan.layout();
    let fine = layout.fine_iteration()?;
    if field.iteration() != fine {
        return Err(Error::InvalidScenario(format!(
            "field iteration {} does not match the layout's fine grid {fine}",
            field.iteration()
        )));
    }

    let mut events: Vec<Event> = Vec::new();
    let mut step: u32 = 0;
    let mut reports: Vec<QuadrantReport> = Vec::new();
    let mut chain_broken = false;
    let mut entry: HilbertIndex = 0;
    let mut last_pos = (Quadrant::BottomLeft, 0u32, Cell::new(0, 0));

    for (i, &q) in Quadrant::ORDER.iter().enumerate() {
        let local_field = quadrant_field(field, layout, fine, q);
        let free = local_field.free_cell_count();
        if chain_broken {
            reports.push(QuadrantReport {
                quadrant: q,
                reached: false,
                entry: None,
                visited: 0,
                free,
                lemma_check: None,
            });
            continue;
        }

        let g = CoverageGraph::new(layout.iteration(q));
        let mut oracle = FieldOracle(&local_field);
        let (episode, state) = run_episode_full(&g, &mut oracle, entry)?;
        for e in &episode.events {
            if e.kind == EventKind::Terminate {
                continue;
            }
            step += 1;
            events.push(Event {
                step,
                kind: e.kind,
                waypoint: e.waypoint,
                cell: e.cell,
                quadrant: Some(q),
            });
        }
        let reachable = reachable_free_set(&local_field, g.cell_of(entry))?;
        let visited_cells: BTreeSet<Cell> = state.visited().iter().map(|d| g.cell_of(d)).collect();
        reports.push(QuadrantReport {
            quadrant: q,
            reached: true,
            entry: Some(entry),
            visited: state.visited().len(),
            free,
            lemma_check: Some(visited_cells == reachable),
        });

        let terminal = state.current();
        last_pos = (q, terminal, g.cell_of(terminal));
        if i + 1 == Quadrant::ORDER.len() {
            break;
        }
        let next = Quadrant::ORDER[i + 1];
        match transfer(layout, q, next, terminal, state.visited(), field) {
            Err(Error::TransferImpossible { .. }) => chain_broken = true,
            Err(e) => return Err(e),
            Ok(ts) => {
                for &w in &ts.route[1..] {
                    step += 1;
                    events.push(Event {
                        step,
                        kind: EventKind::Move,
                        waypoint: w,
                        cell: g.cell_of(w),
                        quadrant: Some(q),
                    });
                }
                let g_next = CoverageGraph::new(layout.iteration(next));
                for &pw in &ts.probed_blocked {
                    step += 1;
                    events.push(Event {
                        step,
                        kind: EventKind::SenseBlocked,
                        waypoint: pw,
                        cell: g_next.cell_of(pw),
                        quadrant: Some(next),
                    });
                }
                step += 1;
                events.push(Event {
                    step,
                    kind: EventKind::Move,
                    waypoint: ts.c,
                    cell: ts.c_cell,
                    quadrant: Some(next),
                });
                entry = ts.c;
                last_pos = (next, ts.c, ts.c_cell);

                if layout.entry_modes[next.position()] == EntryMode::RestartIfConnected && ts.c != 0
                {
                    let next_field = quadrant_field(field, layout, fine, next);
                    if !next_field.is_blocked(Cell::new(0, 0)) {
                        let n = g_next.waypoint_count();
                        let mut free_set = IndexSet::new(n);
                        for d in 0..n {
                            if !next_field.is_blocked(g_next.cell_of(d)) {
                                free_set.insert(d);
                            }
                        }
                        match g_next.shortest_route(&free_set, ts.c, 0) {
                            Ok(walk) => {
                                for &w in &walk[1..] {
                                    step += 1;
                                    events.push(Event {
                                        step,
                                        kind: EventKind::Move,
                                        waypoint: w,
                                        cell: g_next.cell_of(w),
                                        quadrant: Some(next),
                                    });
                                }
                                entry = 0;
                                last_pos = (next, 0, g_next.cell_of(0));
                            }
                            Err(Error::NoRoute { .. }) => {}
                            Err(e) => return Err(e),
                        }
                    }
                }
            }
        }
    }

    step += 1;
    events.push(Event {
        step,
        kind: EventKind::Terminate,
        waypoint: last_pos.1,
        cell: last_pos.2,
        quadrant: Some(last_pos.0),
    });

    let mut metrics = Metrics::from_events((Some(Quadrant::BottomLeft), 0), &events);
    let total_free: u32 = reports.iter().map(|r| r.free).sum();
    metrics.coverage_ratio = Some(f64::from(metrics.unique_visited) / f64::from(total_free));
    let lemma = reports
        .iter()
        .filter(|r| r.reached)
        .all(|r| r.lemma_check == Some(true));
    Ok(EpisodeTrace {
        grid: TraceGrid::Quadrants {
            iterations: layout.iterations,
        },
        start: 0,
        events,
        metrics,
        lemma_check: Some(lemma),
        quadrant_reports: reports,
    })
}
