//! Scenario files: grid choice, start, obstacles, and generator seeds.
//!
//! A scenario is a small line-oriented text format. Tokens are separated by
//! whitespace, blank lines are skipped, and `#` starts a comment running to
//! the end of the line. The first meaningful line must be the header.
//!
//! Grid directives (exactly one required):
//!   `k <iteration>`                uniform grid at a fixed iteration
//!   `region <side> <radius>`       uniform grid, iteration from sensing
//!   `quadrants <BL> <TL> <TR> <BR>` non-uniform 2x2 layout
//!
//! Optional directives:
//!   `qmode <quadrant> <enter|restart>` entry mode (needs `quadrants`)
//!   `start <waypoint>`              start index, default 0
//!   `rect <x0> <y0> <x1> <y1>`      blocked rectangle in grid units
//!   `cells <x,y> [<x,y> ...]`       explicitly blocked cells
//!   `seed <rng-seed> <count>`       additional generated blocked cells
//!
//! For non-uniform grids, obstacle coordinates are in fine-grid units.

use std::fmt::Write as _;

use crate::curve::{select_iteration, Cell, HilbertIndex, Iteration, SensingSpec};
use crate::error::Error;
use crate::nonuniform::{EntryMode, Quadrant, QuadrantLayout};
use crate::sim::{generate_scenario, rasterize, ObstacleField, ScenarioSeed, Shape};

/// First meaningful line of every scenario file.
pub const SCENARIO_HEADER: &str = "sfc-scenario v1";

/// Grid description of a scenario.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ScenarioGrid {
    Uniform { k: Iteration },
    Nonuniform { layout: QuadrantLayout },
}

/// Parsed scenario.
#[derive(Clone, Debug, PartialEq)]
pub struct Scenario {
    pub grid: ScenarioGrid,
    pub start: HilbertIndex,
    /// Obstacle shapes in input order.
    pub shapes: Vec<Shape>,
    /// Generator seed and blocked-cell count, when given.
    pub seed: Option<(u64, u32)>,
}

impl Scenario {
    /// Iteration of the grid obstacles are rasterized on: the uniform
    /// iteration itself, or the fine grid of a non-uniform layout.
    pub fn field_iteration(&self) -> Result<Iteration, Error> {
        match &self.grid {
            ScenarioGrid::Uniform { k } => Ok(*k),
            ScenarioGrid::Nonuniform { layout } => layout.fine_iteration(),
        }
    }

    /// Rasterizes the shapes, plus the seeded cells when a seed is given,
    /// into one ground-truth field. Seeded cells never block the grid
    /// origin.
    pub fn build_field(&self) -> Result<ObstacleField, Error> {
        let k = self.field_iteration()?;
        let mut shapes = self.shapes.clone();
        if let Some((rng_seed, blocked_count)) = self.seed {
            let generated = generate_scenario(&ScenarioSeed {
                k,
                blocked_count,
                rng_seed,
                keep_start_free: true,
            })?;
            shapes.push(Shape::Cells(generated.blocked_cells()));
        }
        rasterize(&shapes, k)
    }

    /// Canonical text form; parsing it yields an equal scenario.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str(SCENARIO_HEADER);
        out.push('\n');
        match &self.grid {
            ScenarioGrid::Uniform { k } => {
                let _ = writeln!(out, "k {k}");
            }
            ScenarioGrid::Nonuniform { layout } => {
                let _ = writeln!(
                    out,
                    "quadrants {} {} {} {}",
                    layout.iterations[0],
                    layout.iterations[1],
                    layout.iterations[2],
                    layout.iterations[3]
                );
                for q in Quadrant::ORDER {
                    if layout.entry_modes[q.position()] == EntryMode::RestartIfConnected {
                        let _ = writeln!(out, "qmode {} restart", q.label());
                    }
                }
            }
        }
        let _ = writeln!(out, "start {}", self.start);
        for shape in &self.shapes {
            match shape {
                Shape::Rect { x0, y0, x1, y1 } => {
                    let _ = writeln!(out, "rect {x0} {y0} {x1} {y1}");
                }
                Shape::Cells(cells) => {
                    out.push_str("cells");
                    for c in cells {
                        let _ = write!(out, " {},{}", c.x, c.y);
                    }
                    out.push('\n');
                }
            }
        }
        if let Some((rng_seed, count)) = self.seed {
            let _ = writeln!(out, "seed {rng_seed} {count}");
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self, Error> {
        let fail = |line: usize, msg: String| Error::Parse { line, msg };

        let mut header_seen = false;
        let mut uniform: Option<Iteration> = None;
        let mut quadrants: Option<[Iteration; 4]> = None;
        let mut grid_directive: Option<&str> = None;
        let mut qmodes: Vec<(Quadrant, EntryMode)> = Vec::new();
        let mut first_qmode_line = 0usize;
        let mut start: Option<u32> = None;
        let mut seed: Option<(u64, u32)> = None;
        let mut shapes: Vec<Shape> = Vec::new();

        for (i, raw) in text.lines().enumerate() {
            let n = i + 1;
            let line = raw.strip_suffix('\r').unwrap_or(raw);
            let line = match line.find('#') {
                Some(pos) => &line[..pos],
                None => line,
            };
            let tokens: Vec<&str> = line.split_whitespace().collect();
            if tokens.is_empty() {
                continue;
            }
            if !header_seen {
                if tokens == [SCENARIO_HEADER.split(' ').next().unwrap(), "v1"] {
                    header_seen = true;
                    continue;
                }
                return Err(fail(n, format!("expected header {SCENARIO_HEADER:?}")));
            }

            let arity = |want: usize| -> Result<(), Error> {
                if tokens.len() == want {
                    Ok(())
                } else {
                    Err(fail(
                        n,
                        format!(
                            "{} takes {} arguments, got {}",
                            tokens[0],
                            want - 1,
                            tokens.len() - 1
                        ),
                    ))
                }
            };
            let mut claim_grid = |name: &'static str| -> Result<(), Error> {
                match grid_directive {
                    None => {
                        grid_directive = Some(name);
                        Ok(())
                    }
                    Some(prev) if prev == name => {
                        Err(fail(n, format!("duplicate {name} directive")))
                    }
                    Some(prev) => Err(fail(n, format!("{name} conflicts with {prev}"))),
                }
            };

            match tokens[0] {
                "k" => {
                    arity(2)?;
                    claim_grid("k")?;
                    let v: u32 = tokens[1]
                        .parse()
                        .map_err(|_| fail(n, format!("bad iteration {:?}", tokens[1])))?;
                    uniform = Some(
                        Iteration::new(v).map_err(|e| fail(n, format!("bad iteration: {e}")))?,
                    );
                }
                "region" => {
                    arity(3)?;
                    claim_grid("region")?;
                    let side: f64 = tokens[1]
                        .parse()
                        .map_err(|_| fail(n, format!("bad region side {:?}", tokens[1])))?;
                    let radius: f64 = tokens[2]
                        .parse()
                        .map_err(|_| fail(n, format!("bad sensor radius {:?}", tokens[2])))?;
                    uniform = Some(
                        select_iteration(SensingSpec {
                            region_side: side,
                            sensor_radius: radius,
                        })
                        .map_err(|e| fail(n, format!("bad region: {e}")))?,
                    );
                }
                "quadrants" => {
                    arity(5)?;
                    claim_grid("quadrants")?;
                    let mut iterations = [Iteration::new(0).expect("0 is valid"); 4];
                    for (slot, tok) in iterations.iter_mut().zip(&tokens[1..]) {
                        let v: u32 = tok
                            .parse()
                            .map_err(|_| fail(n, format!("bad iteration {tok:?}")))?;
                        *slot = Iteration::new(v)
                            .map_err(|e| fail(n, format!("bad iteration: {e}")))?;
                    }
                    quadrants = Some(iterations);
                }
                "qmode" => {
                    arity(3)?;
                    if first_qmode_line == 0 {
                        first_qmode_line = n;
                    }
                    let q = Quadrant::from_label(tokens[1])
                        .ok_or_else(|| fail(n, format!("unknown quadrant {:?}", tokens[1])))?;
                    let mode = match tokens[2] {
                        "enter" => EntryMode::EnterAtC,
                        "restart" => EntryMode::RestartIfConnected,
                        other => return Err(fail(n, format!("unknown entry mode {other:?}"))),
                    };
                    if qmodes.iter().any(|(prev, _)| *prev == q) {
                        return Err(fail(n, format!("duplicate qmode for {}", q.label())));
                    }
                    qmodes.push((q, mode));
                }
                "start" => {
                    arity(2)?;
                    if start.is_some() {
                        return Err(fail(n, "duplicate start directive".into()));
                    }
                    start = Some(
                        tokens[1]
                            .parse()
                            .map_err(|_| fail(n, format!("bad start {:?}", tokens[1])))?,
                    );
                }
                "rect" => {
                    arity(5)?;
                    let mut vals = [0.0f64; 4];
                    for (slot, tok) in vals.iter_mut().zip(&tokens[1..]) {
                        *slot = tok
                            .parse()
                            .map_err(|_| fail(n, format!("bad rect bound {tok:?}")))?;
                    }
                    shapes.push(Shape::Rect {
                        x0: vals[0],
                        y0: vals[1],
                        x1: vals[2],
                        y1: vals[3],
                    });
                }
                "cells" => {
                    if tokens.len() < 2 {
                        return Err(fail(n, "cells needs at least one x,y pair".into()));
                    }
                    let mut cells = Vec::with_capacity(tokens.len() - 1);
                    for tok in &tokens[1..] {
                        let (xs, ys) = tok
                            .split_once(',')
                            .ok_or_else(|| fail(n, format!("bad cell {tok:?}, want x,y")))?;
                        let x: u32 = xs
                            .parse()
                            .map_err(|_| fail(n, format!("bad cell {tok:?}")))?;
                        let y: u32 = ys
                            .parse()
                            .map_err(|_| fail(n, format!("bad cell {tok:?}")))?;
                        cells.push(Cell::new(x, y));
                    }
                    shapes.push(Shape::Cells(cells));
                }
                "seed" => {
                    arity(3)?;
                    if seed.is_some() {
                        return Err(fail(n, "duplicate seed directive".into()));
                    }
                    let rng_seed: u64 = tokens[1]
                        .parse()
                        .map_err(|_| fail(n, format!("bad rng seed {:?}", tokens[1])))?;
                    let count: u32 = tokens[2]
                        .parse()
                        .map_err(|_| fail(n, format!("bad blocked count {:?}", tokens[2])))?;
                    seed = Some((rng_seed, count));
                }
                other => return Err(fail(n, format!("unknown directive {other:?}"))),
            }
        }

        if !header_seen {
            return Err(fail(0, format!("missing header {SCENARIO_HEADER:?}")));
        }
        let grid = match (uniform, quadrants) {
            (Some(k), None) => {
                if !qmodes.is_empty() {
                    return Err(fail(
                        first_qmode_line,
                        "qmode requires a quadrants directive".into(),
                    ));
                }
                ScenarioGrid::Uniform { k }
            }
            (None, Some(iterations)) => {
                let mut layout = QuadrantLayout::new(iterations);
                for (q, mode) in qmodes {
                    layout.entry_modes[q.position()] = mode;
                }
                ScenarioGrid::Nonuniform { layout }
            }
            (None, None) => {
                return Err(fail(
                    0,
                    "scenario needs one of k, region, or quadrants".into(),
                ))
            }
            (Some(_), Some(_)) => unreachable!("grid directives are mutually exclusive"),
        };

        Ok(Scenario {
            grid,
            start: start.unwrap_or(0),
            shapes,
            seed,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_uniform_scenario() {
        let s = Scenario::parse("sfc-scenario v1\nk 3\n").unwrap();
        assert_eq!(
            s.grid,
            ScenarioGrid::Uniform {
                k: Iteration::new(3).unwrap()
            }
        );
        assert_eq!(s.start, 0);
        assert!(s.shapes.is_empty());
        assert_eq!(s.seed, None);
    }

    #[test]
    fn comments_and_spacing_are_ignored() {
        let text = "\n# a scenario\n  sfc-scenario v1  \n\nk 2   # grid\n start   5\ncells 1,1  2,2 # blocked\n";
        let s = Scenario::parse(text).unwrap();
        assert_eq!(s.start, 5);
        assert_eq!(
            s.shapes,
            vec![Shape::Cells(vec![Cell::new(1, 1), Cell::new(2, 2)])]
        );
    }

    #[test]
    fn region_resolves_through_iteration_selection() {
        let s = Scenario::parse("sfc-scenario v1\nregion 32 1\n").unwrap();
        assert_eq!(
            s.grid,
            ScenarioGrid::Uniform {
                k: Iteration::new(5).unwrap()
            }
        );
    }

    #[test]
    fn nonuniform_round_trip() {
        let mut layout = QuadrantLayout::new([
            Iteration::new(3).unwrap(),
            Iteration::new(4).unwrap(),
            Iteration::new(3).unwrap(),
            Iteration::new(5).unwrap(),
        ]);
        layout.entry_modes[Quadrant::TopLeft.position()] = EntryMode::RestartIfConnected;
        let s = Scenario {
            grid: ScenarioGrid::Nonuniform { layout },
            start: 0,
            shapes: vec![
                Shape::Rect {
                    x0: 1.5,
                    y0: 2.0,
                    x1: 3.25,
                    y1: 4.0,
                },
                Shape::Cells(vec![Cell::new(10, 11)]),
            ],
            seed: Some((99, 40)),
        };
        let text = s.to_text();
        assert!(text.starts_with("sfc-scenario v1\nquadrants 3 4 3 5\nqmode TL restart\n"));
        assert!(text.contains("rect 1.5 2 3.25 4\n"));
        assert!(text.contains("cells 10,11\n"));
        assert!(text.contains("seed 99 40\n"));
        let back = Scenario::parse(&text).unwrap();
        assert_eq!(back, s);
        assert_eq!(back.to_text(), text);
    }

    #[test]
    fn uniform_round_trip() {
        let s = Scenario {
            grid: ScenarioGrid::Uniform {
                k: Iteration::new(3).unwrap(),
            },
            start: 7,
            shapes: vec![Shape::Rect {
                x0: 1.0,
                y0: 6.0,
                x1: 3.0,
                y1: 8.0,
            }],
            seed: None,
        };
        let text = s.to_text();
        assert_eq!(text, "sfc-scenario v1\nk 3\nstart 7\nrect 1 6 3 8\n");
        assert_eq!(Scenario::parse(&text).unwrap(), s);
    }

    #[test]
    fn build_field_merges_shapes_and_seed() {
        let text = "sfc-scenario v1\nk 3\ncells 1,1\nseed 42 5\n";
        let s = Scenario::parse(text).unwrap();
        let f = s.build_field().unwrap();
        assert!(f.is_blocked(Cell::new(1, 1)));
        assert!(!f.is_blocked(Cell::new(0, 0)));
        assert!(f.blocked_count() >= 5);
        assert_eq!(f, s.build_field().unwrap());
    }

    #[test]
    fn build_field_reports_shape_errors() {
        let s = Scenario::parse("sfc-scenario v1\nk 2\ncells 9,9\n").unwrap();
        assert!(matches!(
            s.build_field(),
            Err(Error::ShapeOutOfRegion(_))
        ));
    }

    #[test]
    fn malformed_scenarios_are_rejected() {
        let cases: [(&str, &str); 10] = [
            ("", "missing header"),
            ("not a header\n", "expected header"),
            ("sfc-scenario v1\n", "needs one of"),
            ("sfc-scenario v1\nk 2\nk 3\n", "duplicate k"),
            ("sfc-scenario v1\nk 2\nregion 4 1\n", "conflicts with"),
            ("sfc-scenario v1\nk 2\nqmode BL restart\n", "requires a quadrants"),
            ("sfc-scenario v1\nk 2 3\n", "takes 1 arguments"),
            ("sfc-scenario v1\nk 2\ncells 1;1\n", "bad cell"),
            ("sfc-scenario v1\nk 2\nwander 3\n", "unknown directive"),
            ("sfc-scenario v1\nquadrants 1 2 3\n", "takes 4 arguments"),
        ];
        for (text, needle) in cases {
            match Scenario::parse(text) {
                Err(Error::Parse { msg, .. }) => {
                    assert!(msg.contains(needle), "{msg:?} lacks {needle:?}")
                }
                other => panic!("expected parse error for {text:?}, got {other:?}"),
            }
        }
    }

    #[test]
    fn parse_reports_line_numbers() {
        match Scenario::parse("sfc-scenario v1\nk 2\nstart x\n") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("expected parse error, got {other:?}"),
        }
    }
}
