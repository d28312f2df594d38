//! Browser bindings for the coverage planner. Every export returns a
//! ready-to-insert SVG document or a plain-text report so the page needs no
//! framework, only `innerHTML` and `textContent`.

use sfc_coverage::{
    execute, generate_scenario, plan_quadrants, render_svg, run_nonuniform, EpisodeTrace,
    Iteration, ObstacleField, QuadrantLayout, RenderSpec, ScenarioSeed,
};
use wasm_bindgen::prelude::wasm_bindgen;

fn iteration(k: u32) -> Result<Iteration, String> {
    Iteration::new(k).map_err(|e| e.to_string())
}

fn random_field(k: Iteration, blocked: u32, seed: u32) -> Result<ObstacleField, String> {
    let spec = ScenarioSeed {
        k,
        blocked_count: blocked,
        rng_seed: u64::from(seed),
        keep_start_free: true,
    };
    generate_scenario(&spec).map_err(|e| e.to_string())
}

fn svg(trace: &EpisodeTrace, truth: Option<&ObstacleField>, spec: &RenderSpec) -> Result<String, String> {
    render_svg(trace, truth, spec).map_err(|e| e.to_string())
}

/// SVG of the bare curve at iteration `k`, nothing else drawn.
#[wasm_bindgen]
pub fn curve_svg(k: u32, labels: bool) -> Result<String, String> {
    let k = iteration(k)?;
    let field = ObstacleField::empty(k);
    let trace = execute(&field, 0).map_err(|e| e.to_string())?;
    let spec = RenderSpec { show_walk: false, show_labels: labels, ..RenderSpec::default() };
    svg(&trace, None, &spec)
}

/// SVG of one full episode on a random obstacle field.
#[wasm_bindgen]
pub fn episode_svg(k: u32, blocked: u32, seed: u32, labels: bool) -> Result<String, String> {
    let k = iteration(k)?;
    let field = random_field(k, blocked, seed)?;
    let trace = execute(&field, 0).map_err(|e| e.to_string())?;
    let spec = RenderSpec { show_labels: labels, ..RenderSpec::default() };
    svg(&trace, Some(&field), &spec)
}

/// Plain-text metrics for the episode `episode_svg` draws.
#[wasm_bindgen]
pub fn episode_report(k: u32, blocked: u32, seed: u32) -> Result<String, String> {
    let k = iteration(k)?;
    let field = random_field(k, blocked, seed)?;
    let trace = execute(&field, 0).map_err(|e| e.to_string())?;
    let mut out = String::new();
    out.push_str(&format!("grid: uniform k={k}\n", k = k.get()));
    out.push_str(&format!("blocked cells: {}\n", field.blocked_count()));
    out.push_str(&format!("total moves: {}\n", trace.metrics.total_moves));
    out.push_str(&format!("unique visited: {}\n", trace.metrics.unique_visited));
    out.push_str(&format!("revisits: {}\n", trace.metrics.revisit_count));
    out.push_str(&format!("detected obstacles: {}\n", trace.metrics.detected_obstacles));
    if let Some(ratio) = trace.metrics.coverage_ratio {
        out.push_str(&format!("coverage ratio: {ratio}\n"));
    }
    if let Some(pass) = trace.lemma_check {
        out.push_str(&format!("reachability check: {}\n", if pass { "pass" } else { "fail" }));
    }
    Ok(out)
}

/// SVG of a four-quadrant episode; `blocked` cells are drawn on the fine grid.
#[wasm_bindgen]
pub fn nonuniform_svg(
    k_bl: u32,
    k_tl: u32,
    k_tr: u32,
    k_br: u32,
    blocked: u32,
    seed: u32,
    labels: bool,
) -> Result<String, String> {
    let layout = QuadrantLayout::new([
        iteration(k_bl)?,
        iteration(k_tl)?,
        iteration(k_tr)?,
        iteration(k_br)?,
    ]);
    let fine = layout.fine_iteration().map_err(|e| e.to_string())?;
    let field = random_field(fine, blocked, seed)?;
    let plan = plan_quadrants(layout);
    let trace = run_nonuniform(&plan, &field).map_err(|e| e.to_string())?;
    let spec = RenderSpec { show_labels: labels, ..RenderSpec::default() };
    svg(&trace, Some(&field), &spec)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn curve_svg_draws_the_grid() {
        let svg = curve_svg(3, false).unwrap();
        assert!(svg.starts_with("<svg"));
        assert!(svg.contains("class=\"curve\""));
        assert!(!svg.contains("class=\"walk\""));
    }

    #[test]
    fn episode_svg_and_report_agree() {
        let svg = episode_svg(4, 40, 9, false).unwrap();
        assert!(svg.starts_with("<svg"));
        assert!(svg.contains("class=\"walk\""));
        assert!(svg.contains("class=\"obstacle\""));
        let report = episode_report(4, 40, 9).unwrap();
        assert!(report.contains("blocked cells: 40"));
        assert!(report.contains("reachability check: pass"));
    }

    #[test]
    fn nonuniform_svg_draws_quadrants() {
        let svg = nonuniform_svg(2, 3, 2, 2, 12, 5, true).unwrap();
        assert!(svg.starts_with("<svg"));
        assert!(svg.contains("class=\"label\""));
    }

    #[test]
    fn bad_arguments_come_back_as_messages() {
        assert!(curve_svg(16, false).is_err());
        assert!(episode_svg(2, 16, 0, false).is_err());
        assert!(nonuniform_svg(15, 15, 15, 15, 0, 0, false).is_err());
    }
}
