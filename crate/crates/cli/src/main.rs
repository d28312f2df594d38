//! Command-line front end for the coverage planner.
//!
//! Exit codes: 0 on success, 2 for unreadable or malformed input, 3 for a
//! scenario that parses but cannot be executed, 4 when the reachability
//! check fails on an otherwise completed run.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use clap::{Parser, Subcommand};
use sfc_coverage::{
    execute, generate_scenario, plan_quadrants, render_svg, run_nonuniform, EpisodeTrace, Error,
    Iteration, ObstacleField, RenderSpec, Scenario, ScenarioGrid, ScenarioSeed, Shape, TraceGrid,
};

/// Environment variable naming the default output directory.
const OUT_DIR_VAR: &str = "SFC_COVERAGE_OUT";

#[derive(Parser)]
#[command(name = "sfc-coverage", version, about = "Coverage planning on Hilbert-curve grids")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a uniform-grid scenario and write its trace.
    Plan {
        /// Scenario file to execute.
        #[arg(long)]
        scenario: PathBuf,
        /// Trace output path (default: <scenario-stem>.trace.txt).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a quadrant scenario and write its trace.
    PlanNonuniform {
        /// Scenario file to execute.
        #[arg(long)]
        scenario: PathBuf,
        /// Trace output path (default: <scenario-stem>.trace.txt).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generate a random scenario file.
    Generate {
        /// Grid iteration.
        #[arg(long)]
        k: u32,
        /// Number of blocked waypoints.
        #[arg(long)]
        blocked: u32,
        /// Seed for the scenario generator.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Scenario output path (default: scenario-k<k>-b<blocked>-s<seed>.scn).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Render a trace file to SVG.
    Render {
        /// Trace file to render.
        trace: PathBuf,
        /// SVG output path (default: <trace-stem>.svg).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Draw waypoint index labels.
        #[arg(long)]
        labels: bool,
        /// Scenario file supplying the ground-truth obstacle overlay.
        #[arg(long)]
        scenario: Option<PathBuf>,
    },
    /// Re-run every scenario in a directory and report the outcomes.
    Verify {
        /// Directory scanned for *.scn files.
        dir: PathBuf,
        /// Number of worker threads.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Plan { scenario, out } => cmd_plan(&scenario, out, false),
        Command::PlanNonuniform { scenario, out } => cmd_plan(&scenario, out, true),
        Command::Generate { k, blocked, seed, out } => cmd_generate(k, blocked, seed, out),
        Command::Render { trace, out, labels, scenario } => {
            cmd_render(&trace, out, labels, scenario.as_deref())
        }
        Command::Verify { dir, jobs } => cmd_verify(&dir, jobs),
    };
    ExitCode::from(code)
}

/// Maps a library error to the process exit code for the plan, render and
/// verify commands. Anything that failed during parsing is an input error;
/// the rest mean the input was well formed but the run is impossible.
fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::Parse { .. } => 2,
        _ => 3,
    }
}

fn resolve_out(explicit: Option<PathBuf>, default_name: &str) -> PathBuf {
    if let Some(path) = explicit {
        return path;
    }
    match std::env::var(OUT_DIR_VAR) {
        Ok(dir) if !dir.is_empty() => PathBuf::from(dir).join(default_name),
        _ => PathBuf::from(default_name),
    }
}

/// Writes through a sibling temp file so a crash never leaves a partial file
/// at the final path.
fn write_atomic(path: &Path, contents: &str) -> std::io::Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)?;
        }
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    fs::write(&tmp, contents)?;
    fs::rename(&tmp, path)
}

fn file_stem(path: &Path) -> String {
    path.file_stem().map_or_else(|| "out".to_owned(), |s| s.to_string_lossy().into_owned())
}

fn read_scenario(path: &Path) -> Result<Scenario, u8> {
    let text = match fs::read_to_string(path) {
        Ok(text) => text,
        Err(err) => {
            eprintln!("error: cannot read {}: {err}", path.display());
            return Err(2);
        }
    };
    match Scenario::parse(&text) {
        Ok(scenario) => Ok(scenario),
        Err(err) => {
            eprintln!("error: {}: {err}", path.display());
            Err(2)
        }
    }
}

/// Executes a parsed scenario with the planner matching its grid kind.
/// `nonuniform` selects the quadrant planner and must agree with the grid.
fn run_scenario(scenario: &Scenario, nonuniform: bool) -> Result<EpisodeTrace, Error> {
    match (&scenario.grid, nonuniform) {
        (ScenarioGrid::Uniform { .. }, true) => Err(Error::InvalidScenario(
            "the scenario has a uniform grid; use the plan command".into(),
        )),
        (ScenarioGrid::Nonuniform { .. }, false) => Err(Error::InvalidScenario(
            "the scenario has a quadrants grid; use the plan-nonuniform command".into(),
        )),
        (ScenarioGrid::Uniform { .. }, false) => {
            let field = scenario.build_field()?;
            execute(&field, scenario.start)
        }
        (ScenarioGrid::Nonuniform { layout }, true) => {
            if scenario.start != 0 {
                return Err(Error::InvalidScenario(
                    "quadrant scenarios start at waypoint 0".into(),
                ));
            }
            let field = scenario.build_field()?;
            run_nonuniform(&plan_quadrants(*layout), &field)
        }
    }
}

fn grid_summary(grid: &TraceGrid) -> String {
    match grid {
        TraceGrid::Uniform { k } => format!("uniform k={}", k.get()),
        TraceGrid::Quadrants { iterations } => format!(
            "quadrants {}/{}/{}/{}",
            iterations[0].get(),
            iterations[1].get(),
            iterations[2].get(),
            iterations[3].get()
        ),
    }
}

fn cmd_plan(scenario_path: &Path, out: Option<PathBuf>, nonuniform: bool) -> u8 {
    let scenario = match read_scenario(scenario_path) {
        Ok(scenario) => scenario,
        Err(code) => return code,
    };
    let clock = Instant::now();
    let trace = match run_scenario(&scenario, nonuniform) {
        Ok(trace) => trace,
        Err(err) => {
            eprintln!("error: {err}");
            return exit_code_for(&err);
        }
    };
    let duration_ms = clock.elapsed().as_millis();

    let stem = file_stem(scenario_path);
    let out_path = resolve_out(out, &format!("{stem}.trace.txt"));
    if let Err(err) = write_atomic(&out_path, &trace.to_text()) {
        eprintln!("error: cannot write {}: {err}", out_path.display());
        return 2;
    }

    println!("scenario: {stem}");
    println!("grid: {}", grid_summary(&trace.grid));
    println!("start: {}", trace.start);
    println!("total_moves: {}", trace.metrics.total_moves);
    println!("unique_visited: {}", trace.metrics.unique_visited);
    println!("revisit_count: {}", trace.metrics.revisit_count);
    println!("detected_obstacles: {}", trace.metrics.detected_obstacles);
    if let Some(ratio) = trace.metrics.coverage_ratio {
        println!("coverage_ratio: {ratio}");
    }
    match trace.lemma_check {
        Some(true) => println!("lemma: pass"),
        Some(false) => println!("lemma: fail"),
        None => {}
    }
    println!("duration_ms: {duration_ms}");
    println!("trace: {}", out_path.display());

    if trace.lemma_check == Some(false) {
        eprintln!("error: the visited set differs from the reachable set");
        return 4;
    }
    0
}

fn cmd_generate(k: u32, blocked: u32, seed: u64, out: Option<PathBuf>) -> u8 {
    let iteration = match Iteration::new(k) {
        Ok(iteration) => iteration,
        Err(err) => {
            eprintln!("error: {err}");
            return 2;
        }
    };
    let spec = ScenarioSeed { k: iteration, blocked_count: blocked, rng_seed: seed, keep_start_free: true };
    let field = match generate_scenario(&spec) {
        Ok(field) => field,
        Err(err) => {
            eprintln!("error: {err}");
            return 2;
        }
    };
    let scenario = Scenario {
        grid: ScenarioGrid::Uniform { k: iteration },
        start: 0,
        shapes: vec![Shape::Cells(field.blocked_cells())],
        seed: None,
    };
    let out_path = resolve_out(out, &format!("scenario-k{k}-b{blocked}-s{seed}.scn"));
    if let Err(err) = write_atomic(&out_path, &scenario.to_text()) {
        eprintln!("error: cannot write {}: {err}", out_path.display());
        return 2;
    }
    println!("grid: uniform k={k}");
    println!("blocked: {}", field.blocked_count());
    println!("scenario: {}", out_path.display());
    0
}

fn cmd_render(trace_path: &Path, out: Option<PathBuf>, labels: bool, scenario: Option<&Path>) -> u8 {
    let text = match fs::read_to_string(trace_path) {
        Ok(text) => text,
        Err(err) => {
            eprintln!("error: cannot read {}: {err}", trace_path.display());
            return 2;
        }
    };
    let trace = match EpisodeTrace::parse(&text) {
        Ok(trace) => trace,
        Err(err) => {
            eprintln!("error: {}: {err}", trace_path.display());
            return 2;
        }
    };
    let truth: Option<ObstacleField> = match scenario {
        None => None,
        Some(path) => {
            let scenario = match read_scenario(path) {
                Ok(scenario) => scenario,
                Err(code) => return code,
            };
            match scenario.build_field() {
                Ok(field) => Some(field),
                Err(err) => {
                    eprintln!("error: {err}");
                    return exit_code_for(&err);
                }
            }
        }
    };
    let spec = RenderSpec { show_labels: labels, ..RenderSpec::default() };
    let svg = match render_svg(&trace, truth.as_ref(), &spec) {
        Ok(svg) => svg,
        Err(err) => {
            eprintln!("error: {err}");
            return 3;
        }
    };
    let out_path = resolve_out(out, &format!("{}.svg", file_stem(trace_path)));
    if let Err(err) = write_atomic(&out_path, &svg) {
        eprintln!("error: cannot write {}: {err}", out_path.display());
        return 2;
    }
    println!("svg: {}", out_path.display());
    0
}

struct Outcome {
    line: String,
    code: u8,
    /// (total_moves, revisit_count, coverage_ratio) for passing runs.
    metrics: Option<(u32, u32, f64)>,
}

fn verify_one(path: &Path) -> Outcome {
    let name = path.file_name().map_or_else(|| path.to_string_lossy(), |n| n.to_string_lossy());
    let text = match fs::read_to_string(path) {
        Ok(text) => text,
        Err(err) => {
            return Outcome { line: format!("ERROR {name}: cannot read: {err}"), code: 2, metrics: None }
        }
    };
    let scenario = match Scenario::parse(&text) {
        Ok(scenario) => scenario,
        Err(err) => return Outcome { line: format!("ERROR {name}: {err}"), code: 2, metrics: None },
    };
    let nonuniform = matches!(scenario.grid, ScenarioGrid::Nonuniform { .. });
    let trace = match run_scenario(&scenario, nonuniform) {
        Ok(trace) => trace,
        Err(err) => {
            return Outcome {
                line: format!("ERROR {name}: {err}"),
                code: exit_code_for(&err),
                metrics: None,
            }
        }
    };
    if trace.lemma_check == Some(false) {
        return Outcome {
            line: format!("FAIL {name}: the visited set differs from the reachable set"),
            code: 4,
            metrics: None,
        };
    }
    let ratio = trace.metrics.coverage_ratio.unwrap_or(1.0);
    Outcome {
        line: format!(
            "PASS {name} moves={} unique={} revisits={} ratio={ratio}",
            trace.metrics.total_moves, trace.metrics.unique_visited, trace.metrics.revisit_count
        ),
        code: 0,
        metrics: Some((trace.metrics.total_moves, trace.metrics.revisit_count, ratio)),
    }
}

/// Nearest-rank percentile of a non-empty sorted slice.
fn percentile(sorted: &[f64], pct: f64) -> f64 {
    let rank = (pct / 100.0 * sorted.len() as f64).ceil() as usize;
    sorted[rank.clamp(1, sorted.len()) - 1]
}

fn print_stat_line(label: &str, values: &mut [f64]) {
    values.sort_by(f64::total_cmp);
    println!(
        "{label}: p50={} p90={} max={}",
        percentile(values, 50.0),
        percentile(values, 90.0),
        values[values.len() - 1]
    );
}

fn cmd_verify(dir: &Path, jobs: usize) -> u8 {
    let entries = match fs::read_dir(dir) {
        Ok(entries) => entries,
        Err(err) => {
            eprintln!("error: cannot read {}: {err}", dir.display());
            return 2;
        }
    };
    let mut paths: Vec<PathBuf> = entries
        .filter_map(Result::ok)
        .map(|entry| entry.path())
        .filter(|path| path.extension().is_some_and(|ext| ext == "scn"))
        .collect();
    paths.sort();
    if paths.is_empty() {
        eprintln!("error: no .scn scenarios in {}", dir.display());
        return 2;
    }

    let cursor = AtomicUsize::new(0);
    let results: Mutex<Vec<Option<Outcome>>> = Mutex::new((0..paths.len()).map(|_| None).collect());
    let workers = jobs.max(1).min(paths.len());
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let index = cursor.fetch_add(1, Ordering::Relaxed);
                if index >= paths.len() {
                    break;
                }
                let outcome = verify_one(&paths[index]);
                results.lock().unwrap()[index] = Some(outcome);
            });
        }
    });
    let outcomes: Vec<Outcome> =
        results.into_inner().unwrap().into_iter().map(|slot| slot.unwrap()).collect();

    let mut worst = 0u8;
    let mut moves = Vec::new();
    let mut revisits = Vec::new();
    let mut ratios = Vec::new();
    let mut passes = 0usize;
    let mut fails = 0usize;
    let mut errors = 0usize;
    for outcome in &outcomes {
        println!("{}", outcome.line);
        worst = worst.max(outcome.code);
        match (outcome.code, outcome.metrics) {
            (0, Some((m, r, c))) => {
                passes += 1;
                moves.push(f64::from(m));
                revisits.push(f64::from(r));
                ratios.push(c);
            }
            (4, _) => fails += 1,
            _ => errors += 1,
        }
    }
    println!("scenarios: {} pass={passes} fail={fails} error={errors}", outcomes.len());
    if passes > 0 {
        print_stat_line("total_moves", &mut moves);
        print_stat_line("revisit_count", &mut revisits);
        print_stat_line("coverage_ratio", &mut ratios);
    }
    worst
}
