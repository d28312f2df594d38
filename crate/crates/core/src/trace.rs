//! Episode traces and their text serialization.
//!
//! A trace records every step of one coverage episode together with summary
//! metrics. The text form is a small versioned line format; serializing and
//! reparsing a trace yields an equal value, and equal traces serialize to
//! identical bytes.

use std::collections::HashSet;
use std::fmt::Write as _;

use crate::curve::{Cell, HilbertIndex, Iteration};
use crate::error::Error;
use crate::nonuniform::Quadrant;

/// First line of every trace file.
pub const TRACE_HEADER: &str = "sfc-trace v1";

/// Kind of one recorded step.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EventKind {
    /// The agent entered the waypoint.
    Move,
    /// The agent sensed the waypoint from an adjacent cell and found it
    /// blocked; it did not move.
    SenseBlocked,
    /// The episode ended with the agent at the waypoint.
    Terminate,
}

impl EventKind {
    pub fn label(self) -> &'static str {
        match self {
            EventKind::Move => "move",
            EventKind::SenseBlocked => "sense_blocked",
            EventKind::Terminate => "terminate",
        }
    }

    fn from_label(s: &str) -> Option<Self> {
        match s {
            "move" => Some(EventKind::Move),
            "sense_blocked" => Some(EventKind::SenseBlocked),
            "terminate" => Some(EventKind::Terminate),
            _ => None,
        }
    }
}

/// One recorded step. In quadrant runs `waypoint` and `cell` are local to
/// the tagged quadrant's own grid.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Event {
    pub step: u32,
    pub kind: EventKind,
    pub waypoint: HilbertIndex,
    pub cell: Cell,
    pub quadrant: Option<Quadrant>,
}

/// Episode summary counters.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Metrics {
    pub total_moves: u32,
    pub unique_visited: u32,
    pub revisit_count: u32,
    pub detected_obstacles: u32,
    /// Unique visited waypoints over free waypoints, when the truth field
    /// is known.
    pub coverage_ratio: Option<f64>,
}

impl Metrics {
    /// Derives the counters from an event list. `start` identifies the
    /// initial waypoint (with its quadrant tag in quadrant runs), which
    /// counts as visited before the first event.
    pub fn from_events(start: (Option<Quadrant>, HilbertIndex), events: &[Event]) -> Self {
        let mut seen: HashSet<(Option<Quadrant>, u32)> = HashSet::new();
        seen.insert(start);
        let mut m = Metrics {
            total_moves: 0,
            unique_visited: 1,
            revisit_count: 0,
            detected_obstacles: 0,
            coverage_ratio: None,
        };
        for e in events {
            match e.kind {
                EventKind::Move => {
                    m.total_moves += 1;
                    if seen.insert((e.quadrant, e.waypoint)) {
                        m.unique_visited += 1;
                    } else {
                        m.revisit_count += 1;
                    }
                }
                EventKind::SenseBlocked => m.detected_obstacles += 1,
                EventKind::Terminate => {}
            }
        }
        m
    }
}

/// Grid the episode ran on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TraceGrid {
    Uniform {
        k: Iteration,
    },
    /// Per-quadrant iterations in BL, TL, TR, BR order.
    Quadrants {
        iterations: [Iteration; 4],
    },
}

/// Per-quadrant outcome of a quadrant run.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadrantReport {
    pub quadrant: Quadrant,
    pub reached: bool,
    /// Local waypoint where coverage of the quadrant started.
    pub entry: Option<HilbertIndex>,
    pub visited: u32,
    pub free: u32,
    pub lemma_check: Option<bool>,
}

/// Complete record of one episode.
#[derive(Clone, Debug, PartialEq)]
pub struct EpisodeTrace {
    pub grid: TraceGrid,
    pub start: HilbertIndex,
    pub events: Vec<Event>,
    pub metrics: Metrics,
    pub lemma_check: Option<bool>,
    pub quadrant_reports: Vec<QuadrantReport>,
}

const EVENT_COLUMNS_UNIFORM: &str = "step,kind,waypoint,x,y";
const EVENT_COLUMNS_QUADRANT: &str = "step,kind,waypoint,x,y,quadrant";

impl EpisodeTrace {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str(TRACE_HEADER);
        out.push('\n');
        match self.grid {
            TraceGrid::Uniform { k } => {
                out.push_str("mode,uniform\n");
                let _ = writeln!(out, "k,{k}");
            }
            TraceGrid::Quadrants { iterations } => {
                out.push_str("mode,nonuniform\n");
                let _ = writeln!(
                    out,
                    "quadrants,{},{},{},{}",
                    iterations[0], iterations[1], iterations[2], iterations[3]
                );
            }
        }
        let _ = writeln!(out, "start,{}", self.start);
        match self.grid {
            TraceGrid::Uniform { .. } => out.push_str(EVENT_COLUMNS_UNIFORM),
            TraceGrid::Quadrants { .. } => out.push_str(EVENT_COLUMNS_QUADRANT),
        }
        out.push('\n');
        for e in &self.events {
            let _ = write!(
                out,
                "{},{},{},{},{}",
                e.step,
                e.kind.label(),
                e.waypoint,
                e.cell.x,
                e.cell.y
            );
            if let Some(q) = e.quadrant {
                let _ = write!(out, ",{}", q.label());
            }
            out.push('\n');
        }
        out.push_str("metrics\n");
        let _ = writeln!(out, "total_moves,{}", self.metrics.total_moves);
        let _ = writeln!(out, "unique_visited,{}", self.metrics.unique_visited);
        let _ = writeln!(out, "revisit_count,{}", self.metrics.revisit_count);
        let _ = writeln!(out, "detected_obstacles,{}", self.metrics.detected_obstacles);
        if let Some(r) = self.metrics.coverage_ratio {
            let _ = writeln!(out, "coverage_ratio,{r}");
        }
        if let Some(pass) = self.lemma_check {
            let _ = writeln!(out, "lemma,{}", if pass { "pass" } else { "fail" });
        }
        for r in &self.quadrant_reports {
            let _ = write!(
                out,
                "quadrant,{},{},",
                r.quadrant.label(),
                if r.reached { "reached" } else { "unreached" }
            );
            match r.entry {
                Some(e) => {
                    let _ = write!(out, "{e}");
                }
                None => out.push_str("na"),
            }
            let _ = write!(out, ",{},{},", r.visited, r.free);
            match r.lemma_check {
                Some(true) => out.push_str("pass"),
                Some(false) => out.push_str("fail"),
                None => out.push_str("na"),
            }
            out.push('\n');
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self, Error> {
        let mut lines = text
            .lines()
            .map(|l| l.strip_suffix('\r').unwrap_or(l))
            .enumerate()
            .map(|(i, l)| (i + 1, l))
            .peekable();

        let fail = |line: usize, msg: String| Error::Parse { line, msg };
        let mut next = |expect: &str| -> Result<(usize, &str), Error> {
            lines
                .next()
                .ok_or_else(|| fail(0, format!("unexpected end of file, expected {expect}")))
        };

        let (n, l) = next("header")?;
        if l != TRACE_HEADER {
            return Err(fail(n, format!("expected header {TRACE_HEADER:?}, got {l:?}")));
        }

        let (n, l) = next("mode line")?;
        let nonuniform = match l {
            "mode,uniform" => false,
            "mode,nonuniform" => true,
            other => return Err(fail(n, format!("expected mode line, got {other:?}"))),
        };

        let grid = if nonuniform {
            let (n, l) = next("quadrants line")?;
            let rest = l
                .strip_prefix("quadrants,")
                .ok_or_else(|| fail(n, format!("expected quadrants line, got {l:?}")))?;
            let parts: Vec<&str> = rest.split(',').collect();
            if parts.len() != 4 {
                return Err(fail(n, "quadrants line needs four iterations".into()));
            }
            let mut iterations = [Iteration::new(0).expect("0 is valid"); 4];
            for (i, p) in parts.iter().enumerate() {
                let k: u32 = p
                    .parse()
                    .map_err(|_| fail(n, format!("bad iteration {p:?}")))?;
                iterations[i] =
                    Iteration::new(k).map_err(|e| fail(n, format!("bad iteration {p:?}: {e}")))?;
            }
            TraceGrid::Quadrants { iterations }
        } else {
            let (n, l) = next("k line")?;
            let rest = l
                .strip_prefix("k,")
                .ok_or_else(|| fail(n, format!("expected k line, got {l:?}")))?;
            let k: u32 = rest
                .parse()
                .map_err(|_| fail(n, format!("bad iteration {rest:?}")))?;
            TraceGrid::Uniform {
                k: Iteration::new(k).map_err(|e| fail(n, format!("bad iteration {rest:?}: {e}")))?,
            }
        };

        let (n, l) = next("start line")?;
        let start: u32 = l
            .strip_prefix("start,")
            .ok_or_else(|| fail(n, format!("expected start line, got {l:?}")))?
            .parse()
            .map_err(|_| fail(n, format!("bad start in {l:?}")))?;

        let (n, l) = next("column header")?;
        let expected_columns = if nonuniform {
            EVENT_COLUMNS_QUADRANT
        } else {
            EVENT_COLUMNS_UNIFORM
        };
        if l != expected_columns {
            return Err(fail(
                n,
                format!("expected column header {expected_columns:?}, got {l:?}"),
            ));
        }

        let mut events = Vec::new();
        loop {
            let (n, l) = next("event record or metrics marker")?;
            if l == "metrics" {
                break;
            }
            let parts: Vec<&str> = l.split(',').collect();
            let want = if nonuniform { 6 } else { 5 };
            if parts.len() != want {
                return Err(fail(n, format!("expected {want} fields, got {l:?}")));
            }
            let step: u32 = parts[0]
                .parse()
                .map_err(|_| fail(n, format!("bad step {:?}", parts[0])))?;
            let kind = EventKind::from_label(parts[1])
                .ok_or_else(|| fail(n, format!("unknown event kind {:?}", parts[1])))?;
            let waypoint: u32 = parts[2]
                .parse()
                .map_err(|_| fail(n, format!("bad waypoint {:?}", parts[2])))?;
            let x: u32 = parts[3]
                .parse()
                .map_err(|_| fail(n, format!("bad x {:?}", parts[3])))?;
            let y: u32 = parts[4]
                .parse()
                .map_err(|_| fail(n, format!("bad y {:?}", parts[4])))?;
            let quadrant = if nonuniform {
                Some(
                    Quadrant::from_label(parts[5])
                        .ok_or_else(|| fail(n, format!("unknown quadrant {:?}", parts[5])))?,
                )
            } else {
                None
            };
            events.push(Event {
                step,
                kind,
                waypoint,
                cell: Cell::new(x, y),
                quadrant,
            });
        }

        let mut counter = |name: &str| -> Result<u32, Error> {
            let (n, l) = lines
                .next()
                .ok_or_else(|| fail(0, format!("unexpected end of file, expected {name}")))?;
            let rest = l
                .strip_prefix(name)
                .and_then(|r| r.strip_prefix(','))
                .ok_or_else(|| fail(n, format!("expected {name} line, got {l:?}")))?;
            rest.parse()
                .map_err(|_| fail(n, format!("bad {name} value {rest:?}")))
        };
        let total_moves = counter("total_moves")?;
        let unique_visited = counter("unique_visited")?;
        let revisit_count = counter("revisit_count")?;
        let detected_obstacles = counter("detected_obstacles")?;

        let mut coverage_ratio = None;
        let mut lemma_check = None;
        let mut quadrant_reports = Vec::new();
        if let Some(&(n, l)) = lines.peek() {
            if let Some(rest) = l.strip_prefix("coverage_ratio,") {
                coverage_ratio = Some(
                    rest.parse::<f64>()
                        .map_err(|_| fail(n, format!("bad coverage_ratio {rest:?}")))?,
                );
                lines.next();
            }
        }
        if let Some(&(n, l)) = lines.peek() {
            if let Some(rest) = l.strip_prefix("lemma,") {
                lemma_check = Some(match rest {
                    "pass" => true,
                    "fail" => false,
                    other => return Err(fail(n, format!("bad lemma verdict {other:?}"))),
                });
                lines.next();
            }
        }
        for (n, l) in lines {
            if l.is_empty() {
                continue;
            }
            let rest = l
                .strip_prefix("quadrant,")
                .ok_or_else(|| fail(n, format!("unexpected trailing line {l:?}")))?;
            if !nonuniform {
                return Err(fail(n, "quadrant report in a uniform trace".into()));
            }
            let parts: Vec<&str> = rest.split(',').collect();
            if parts.len() != 6 {
                return Err(fail(n, format!("expected 6 report fields, got {l:?}")));
            }
            let quadrant = Quadrant::from_label(parts[0])
                .ok_or_else(|| fail(n, format!("unknown quadrant {:?}", parts[0])))?;
            let reached = match parts[1] {
                "reached" => true,
                "unreached" => false,
                other => return Err(fail(n, format!("bad reach flag {other:?}"))),
            };
            let entry = if parts[2] == "na" {
                None
            } else {
                Some(
                    parts[2]
                        .parse::<u32>()
                        .map_err(|_| fail(n, format!("bad entry {:?}", parts[2])))?,
                )
            };
            let visited: u32 = parts[3]
                .parse()
                .map_err(|_| fail(n, format!("bad visited count {:?}", parts[3])))?;
            let free: u32 = parts[4]
                .parse()
                .map_err(|_| fail(n, format!("bad free count {:?}", parts[4])))?;
            let lemma = match parts[5] {
                "pass" => Some(true),
                "fail" => Some(false),
                "na" => None,
                other => return Err(fail(n, format!("bad lemma verdict {other:?}"))),
            };
            quadrant_reports.push(QuadrantReport {
                quadrant,
                reached,
                entry,
                visited,
                free,
                lemma_check: lemma,
            });
        }

        Ok(EpisodeTrace {
            grid,
            start,
            events,
            metrics: Metrics {
                total_moves,
                unique_visited,
                revisit_count,
                detected_obstacles,
                coverage_ratio,
            },
            lemma_check,
            quadrant_reports,
        })
    }
}
