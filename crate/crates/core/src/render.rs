//! SVG rendering of traces and obstacle fields.
//!
//! Output is deterministic: the same trace, truth field, and spec always
//! produce byte-identical markup. The drawing uses screen coordinates, so
//! the grid's y axis is flipped; cell (0, 0) appears bottom-left.

use std::fmt::Write as _;

use crate::curve::{index_to_cell, Cell, Iteration};
use crate::error::Error;
use crate::nonuniform::Quadrant;
use crate::sim::ObstacleField;
use crate::trace::{EpisodeTrace, EventKind, TraceGrid};

/// Rendering options.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RenderSpec {
    /// Pixel size of one fine-grid cell.
    pub cell_px: u32,
    pub show_curve: bool,
    pub show_walk: bool,
    pub show_obstacles: bool,
    pub show_labels: bool,
}

impl Default for RenderSpec {
    fn default() -> Self {
        RenderSpec {
            cell_px: 24,
            show_curve: true,
            show_walk: true,
            show_obstacles: true,
            show_labels: false,
        }
    }
}

const COLOR_GRID: &str = "#dddddd";
const COLOR_OBSTACLE: &str = "#b0b0b0";
const COLOR_DETECTED: &str = "#8b5a2b";
const COLOR_CURVE: &str = "#7aa2d4";
const COLOR_WALK: &str = "#d9633b";
const COLOR_LABEL: &str = "#555555";

struct Camera {
    px: f64,
    height_units: f64,
}

impl Camera {
    fn point(&self, gx: f64, gy: f64) -> (f64, f64) {
        (gx * self.px, (self.height_units - gy) * self.px)
    }
}

/// One rendered grid patch: a quadrant, or the whole uniform grid.
struct Patch {
    k: Iteration,
    offset: (u32, u32),
    scale: u32,
    quadrant: Option<Quadrant>,
}

impl Patch {
    fn center(&self, c: Cell) -> (f64, f64) {
        (
            self.offset.0 as f64 + (c.x as f64 + 0.5) * self.scale as f64,
            self.offset.1 as f64 + (c.y as f64 + 0.5) * self.scale as f64,
        )
    }

    fn corner(&self, c: Cell) -> (f64, f64) {
        (
            (self.offset.0 + c.x * self.scale) as f64,
            (self.offset.1 + (c.y + 1) * self.scale) as f64,
        )
    }
}

fn patches(grid: TraceGrid) -> Result<Vec<Patch>, Error> {
    match grid {
        TraceGrid::Uniform { k } => Ok(vec![Patch {
            k,
            offset: (0, 0),
            scale: 1,
            quadrant: None,
        }]),
        TraceGrid::Quadrants { iterations } => {
            let fine = crate::nonuniform::QuadrantLayout::new(iterations).fine_iteration()?;
            let half = fine.side() / 2;
            Ok(Quadrant::ORDER
                .into_iter()
                .map(|q| {
                    let k = iterations[q.position()];
                    let (qx, qy) = q.offset();
                    Patch {
                        k,
                        offset: (qx * half, qy * half),
                        scale: half / k.side(),
                        quadrant: Some(q),
                    }
                })
                .collect())
        }
    }
}

fn fine_side(grid: TraceGrid) -> Result<u32, Error> {
    match grid {
        TraceGrid::Uniform { k } => Ok(k.side()),
        TraceGrid::Quadrants { iterations } => Ok(crate::nonuniform::QuadrantLayout::new(
            iterations,
        )
        .fine_iteration()?
        .side()),
    }
}

/// Renders one trace, optionally over its ground-truth field. The truth
/// field must be on the trace's own grid (the fine grid for quadrant
/// traces).
pub fn render_svg(
    trace: &EpisodeTrace,
    truth: Option<&ObstacleField>,
    spec: &RenderSpec,
) -> Result<String, Error> {
    if spec.cell_px == 0 {
        return Err(Error::Contract("cell_px must be positive".into()));
    }
    let side = fine_side(trace.grid)?;
    if let Some(field) = truth {
        if field.side() != side {
            return Err(Error::Contract(format!(
                "truth field side {} does not match the trace grid side {side}",
                field.side()
            )));
        }
    }
    let patches = patches(trace.grid)?;
    for e in &trace.events {
        let patch = patches
            .iter()
            .find(|p| p.quadrant == e.quadrant)
            .ok_or_else(|| {
                Error::Contract(format!("event at step {} is tagged off-grid", e.step))
            })?;
        if e.cell.x >= patch.k.side() || e.cell.y >= patch.k.side() {
            return Err(Error::Contract(format!(
                "event at step {} lies outside its grid",
                e.step
            )));
        }
    }

    let px = spec.cell_px as f64;
    let cam = Camera {
        px,
        height_units: side as f64,
    };
    let size = side * spec.cell_px;
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{size}\" height=\"{size}\" viewBox=\"0 0 {size} {size}\">"
    );
    let _ = writeln!(
        svg,
        "<rect width=\"{size}\" height=\"{size}\" fill=\"#ffffff\"/>"
    );

    for patch in &patches {
        let cell_px = patch.scale as f64 * px;
        for y in 0..patch.k.side() {
            for x in 0..patch.k.side() {
                let (gx, gy) = patch.corner(Cell::new(x, y));
                let (sx, sy) = cam.point(gx, gy);
                let _ = writeln!(
                    svg,
                    "<rect class=\"cell\" x=\"{sx}\" y=\"{sy}\" width=\"{cell_px}\" height=\"{cell_px}\" fill=\"none\" stroke=\"{COLOR_GRID}\"/>"
                );
            }
        }
    }

    if spec.show_obstacles {
        if let Some(field) = truth {
            for c in field.blocked_cells() {
                let (sx, sy) = cam.point(c.x as f64, (c.y + 1) as f64);
                let _ = writeln!(
                    svg,
                    "<rect class=\"obstacle\" x=\"{sx}\" y=\"{sy}\" width=\"{px}\" height=\"{px}\" fill=\"{COLOR_OBSTACLE}\"/>"
                );
            }
        }
        for e in &trace.events {
            if e.kind != EventKind::SenseBlocked {
                continue;
            }
            let patch = patches
                .iter()
                .find(|p| p.quadrant == e.quadrant)
                .expect("validated above");
            let (gx, gy) = patch.corner(e.cell);
            let (sx, sy) = cam.point(gx, gy);
            let d = patch.scale as f64 * px;
            let _ = writeln!(
                svg,
                "<rect class=\"detected\" x=\"{sx}\" y=\"{sy}\" width=\"{d}\" height=\"{d}\" fill=\"{COLOR_DETECTED}\" fill-opacity=\"0.6\"/>"
            );
        }
    }

    if spec.show_curve {
        for patch in &patches {
            let mut points = String::new();
            for d in 0..patch.k.waypoint_count() {
                let c = index_to_cell(patch.k, d).expect("index is in range");
                let (gx, gy) = patch.center(c);
                let (sx, sy) = cam.point(gx, gy);
                if d > 0 {
                    points.push(' ');
                }
                let _ = write!(points, "{sx},{sy}");
            }
            let _ = writeln!(
                svg,
                "<polyline class=\"curve\" points=\"{points}\" fill=\"none\" stroke=\"{COLOR_CURVE}\" stroke-width=\"1\"/>"
            );
        }
    }

    if let Some(half) = (patches.len() == 4).then_some(side / 2) {
        let mid = half as f64 * px;
        let full = side as f64 * px;
        let _ = writeln!(
            svg,
            "<line class=\"qline\" x1=\"{mid}\" y1=\"0\" x2=\"{mid}\" y2=\"{full}\" stroke=\"#999999\"/>"
        );
        let _ = writeln!(
            svg,
            "<line class=\"qline\" x1=\"0\" y1=\"{mid}\" x2=\"{full}\" y2=\"{mid}\" stroke=\"#999999\"/>"
        );
    }

    if spec.show_walk {
        let start_patch = patches
            .first()
            .expect("at least one patch");
        let start_cell = index_to_cell(start_patch.k, trace.start)?;
        let mut points = String::new();
        let (gx, gy) = start_patch.center(start_cell);
        let (sx, sy) = cam.point(gx, gy);
        let _ = write!(points, "{sx},{sy}");
        for e in &trace.events {
            if e.kind != EventKind::Move {
                continue;
            }
            let patch = patches
                .iter()
                .find(|p| p.quadrant == e.quadrant)
                .expect("validated above");
            let (gx, gy) = patch.center(e.cell);
            let (sx, sy) = cam.point(gx, gy);
            let _ = write!(points, " {sx},{sy}");
        }
        let _ = writeln!(
            svg,
            "<polyline class=\"walk\" points=\"{points}\" fill=\"none\" stroke=\"{COLOR_WALK}\" stroke-width=\"2\" stroke-linejoin=\"round\"/>"
        );
    }

    if spec.show_labels {
        for patch in &patches {
            let font = (patch.scale as f64 * px / 3.0).max(4.0);
            for d in 0..patch.k.waypoint_count() {
                let c = index_to_cell(patch.k, d).expect("index is in range");
                let (gx, gy) = patch.center(c);
                let (sx, sy) = cam.point(gx, gy);
                let _ = writeln!(
                    svg,
                    "<text class=\"label\" x=\"{sx}\" y=\"{sy}\" font-size=\"{font}\" text-anchor=\"middle\" dominant-baseline=\"central\" fill=\"{COLOR_LABEL}\">{d}</text>"
                );
            }
        }
    }

    svg.push_str("</svg>\n");
    Ok(svg)
}
