//! Online coverage planner.
//!
//! The agent keeps a visit set and an obstacle set. At each decision point
//! it targets the lowest-index unvisited waypoint on the frontier of the
//! visit set that is not a known obstacle, walks there along a shortest
//! route through already visited waypoints, and senses the target from the
//! penultimate waypoint before entering it. A blocked target is recorded as
//! an obstacle and never entered. On an obstacle-free field this reduces to
//! walking the curve in index order.

use crate::curve::{Cell, HilbertIndex};
use crate::error::Error;
use crate::graph::{CoverageGraph, ObstacleSet, VisitSet};
use crate::trace::{EpisodeTrace, Event, EventKind, Metrics, TraceGrid};

/// Sensing interface the planner drives. Implementations answer whether a
/// side-adjacent target cell is blocked, observed from a cell the agent
/// occupies.
pub trait SenseOracle {
    /// Whether the episode's start cell itself is blocked.
    fn start_blocked(&mut self, start: Cell) -> bool;

    /// Whether `target` is blocked, sensed from the adjacent cell `from`.
    fn is_blocked(&mut self, from: Cell, target: Cell) -> Result<bool, Error>;
}

struct PendingRoute {
    route: Vec<u32>,
    position: usize,
}

/// Mutable agent state for one episode.
pub struct AgentState {
    current: HilbertIndex,
    visited: VisitSet,
    obstacles: ObstacleSet,
    pending_route: Option<PendingRoute>,
}

impl AgentState {
    pub fn new(g: &CoverageGraph, start: HilbertIndex) -> Result<Self, Error> {
        let count = g.waypoint_count();
        if start >= count {
            return Err(Error::IndexOutOfRange {
                k: g.iteration().get(),
                index: start,
                count,
            });
        }
        let mut visited = VisitSet::new(count);
        visited.insert(start);
        Ok(AgentState {
            current: start,
            visited,
            obstacles: ObstacleSet::new(count),
            pending_route: None,
        })
    }

    pub fn current(&self) -> HilbertIndex {
        self.current
    }

    pub fn visited(&self) -> &VisitSet {
        &self.visited
    }

    pub fn obstacles(&self) -> &ObstacleSet {
        &self.obstacles
    }

    /// Target of the route currently being walked, if any.
    pub fn pending_target(&self) -> Option<HilbertIndex> {
        self.pending_route
            .as_ref()
            .map(|p| *p.route.last().expect("routes are non-empty"))
    }

    /// Accepts a route produced by [`decide`] and prepares to walk it.
    pub fn begin_route(&mut self, g: &CoverageGraph, route: Vec<u32>) -> Result<(), Error> {
        if self.pending_route.is_some() {
            return Err(Error::Contract(
                "begin_route called while a route is pending".into(),
            ));
        }
        if route.len() < 2 {
            return Err(Error::Contract("routes have at least two waypoints".into()));
        }
        if route[0] != self.current {
            return Err(Error::Contract(format!(
                "route starts at {} but the agent is at {}",
                route[0], self.current
            )));
        }
        for pair in route.windows(2) {
            if !g.neighbors(pair[0]).any(|w| w == pair[1]) {
                return Err(Error::Contract(format!(
                    "route hop {} to {} is not an edge",
                    pair[0], pair[1]
                )));
            }
        }
        let target = *route.last().expect("checked non-empty");
        for &w in &route[..route.len() - 1] {
            if !self.visited.contains(w) {
                return Err(Error::Contract(format!(
                    "route interior waypoint {w} is unvisited"
                )));
            }
        }
        if self.visited.contains(target) {
            return Err(Error::Contract(format!("target {target} already visited")));
        }
        if self.obstacles.contains(target) {
            return Err(Error::Contract(format!(
                "target {target} is a known obstacle"
            )));
        }
        self.pending_route = Some(PendingRoute { route, position: 0 });
        Ok(())
    }

    /// Advances one hop along the pending route while the next waypoint is
    /// not yet the target. Returns the new position, or `None` when the
    /// agent stands at the penultimate waypoint and must sense.
    pub fn advance_interior(&mut self) -> Option<HilbertIndex> {
        let pending = self
            .pending_route
            .as_mut()
            .expect("advance_interior requires a pending route");
        if pending.position + 2 >= pending.route.len() {
            return None;
        }
        pending.position += 1;
        self.current = pending.route[pending.position];
        Some(self.current)
    }
}

/// Outcome of one planning step.
#[derive(Debug, PartialEq, Eq)]
pub enum PlannerDecision {
    /// Walk this route; the last waypoint is the sensing target.
    MoveAlong(Vec<u32>),
    /// Every waypoint reachable through the visit set has been visited or
    /// found blocked.
    Terminated,
}

/// Chooses the next target and route for the given state. Pure with respect
/// to the state.
pub fn decide(g: &CoverageGraph, state: &AgentState) -> PlannerDecision {
    match g.min_frontier_excluding(&state.visited, &state.obstacles) {
        None => PlannerDecision::Terminated,
        Some(p) => {
            let route = g
                .shortest_route(&state.visited, state.current, p)
                .expect("frontier targets are reachable through the visited set");
            PlannerDecision::MoveAlong(route)
        }
    }
}

/// Records the sensing verdict for the pending target `p`. On a free target
/// the agent enters it; on a blocked one it stays put and remembers the
/// obstacle.
pub fn on_sense_result(state: &mut AgentState, p: HilbertIndex, blocked: bool) -> Result<(), Error> {
    let pending = state
        .pending_route
        .as_ref()
        .ok_or_else(|| Error::Contract("sense result without a pending route".into()))?;
    let target = *pending.route.last().expect("routes are non-empty");
    if target != p {
        return Err(Error::Contract(format!(
            "sense result for {p} but the pending target is {target}"
        )));
    }
    if pending.position + 2 != pending.route.len() {
        return Err(Error::Contract(
            "sense result before reaching the penultimate waypoint".into(),
        ));
    }
    state.pending_route = None;
    if blocked {
        state.obstacles.insert(p);
    } else {
        state.visited.insert(p);
        state.current = p;
    }
    Ok(())
}

pub(crate) fn run_episode_full<O: SenseOracle>(
    g: &CoverageGraph,
    env: &mut O,
    start: HilbertIndex,
) -> Result<(EpisodeTrace, AgentState), Error> {
    let mut state = AgentState::new(g, start)?;
    if env.start_blocked(g.cell_of(start)) {
        return Err(Error::BlockedStart {
            cell: g.cell_of(start),
        });
    }
    let mut events = Vec::new();
    let mut step: u32 = 0;
    loop {
        match decide(g, &state) {
            PlannerDecision::Terminated => {
                step += 1;
                events.push(Event {
                    step,
                    kind: EventKind::Terminate,
                    waypoint: state.current(),
                    cell: g.cell_of(state.current()),
                    quadrant: None,
                });
                break;
            }
            PlannerDecision::MoveAlong(route) => {
                let p = *route.last().expect("routes are non-empty");
                state.begin_route(g, route)?;
                while let Some(w) = state.advance_interior() {
                    step += 1;
                    events.push(Event {
                        step,
                        kind: EventKind::Move,
                        waypoint: w,
                        cell: g.cell_of(w),
                        quadrant: None,
                    });
                }
                let blocked = env.is_blocked(g.cell_of(state.current()), g.cell_of(p))?;
                on_sense_result(&mut state, p, blocked)?;
                step += 1;
                events.push(Event {
                    step,
                    kind: if blocked {
                        EventKind::SenseBlocked
                    } else {
                        EventKind::Move
                    },
                    waypoint: p,
                    cell: g.cell_of(p),
                    quadrant: None,
                });
            }
        }
    }
    let metrics = Metrics::from_events((None, start), &events);
    let trace = EpisodeTrace {
        grid: TraceGrid::Uniform { k: g.iteration() },
        start,
        events,
        metrics,
        lemma_check: None,
        quadrant_reports: Vec::new(),
    };
    Ok((trace, state))
}

/// Runs one full episode from `start` against the sensing oracle and
/// returns its trace. The episode ends when no unvisited waypoint remains
/// reachable through the visit set.
pub fn run_episode<O: SenseOracle>(
    g: &CoverageGraph,
    env: &mut O,
    start: HilbertIndex,
) -> Result<EpisodeTrace, Error> {
    run_episode_full(g, env, start).map(|(trace, _)| trace)
}
