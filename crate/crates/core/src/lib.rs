//! Coverage planning on Hilbert-curve tessellations.
//!
//! The crate tessellates a square region along a Hilbert curve iteration,
//! walks the waypoints with an online planner that senses and evades
//! obstacles, checks the resulting coverage against an independent
//! reachability computation, and serializes scenarios, traces, and SVG
//! renderings.
//!
//! - [`curve`]: index/cell bijection and iteration selection
//! - [`graph`]: waypoint adjacency, frontiers, and routing
//! - [`planner`]: the online evasion strategy and episode driver
//! - [`sim`]: obstacle fields, sensing, generation, and execution
//! - [`nonuniform`]: quadrant partitions with per-quadrant iterations
//! - [`scenario`]: scenario text format
//! - [`trace`]: episode traces and their text format
//! - [`render`]: SVG rendering

pub mod curve;
pub mod error;
pub mod graph;
pub mod nonuniform;
pub mod planner;
pub mod render;
pub mod scenario;
pub mod sim;
pub mod trace;

pub use curve::{
    cell_to_index, index_to_cell, select_iteration, Cell, HilbertIndex, Iteration, SensingSpec,
    MAX_ITERATION,
};
pub use error::Error;
pub use graph::{CoverageGraph, IndexSet, ObstacleSet, VisitSet};
pub use nonuniform::{
    plan_quadrants, run_nonuniform, transfer, EntryMode, Quadrant, QuadrantLayout, QuadrantPlan,
    TransferStep,
};
pub use planner::{decide, on_sense_result, run_episode, AgentState, PlannerDecision, SenseOracle};
pub use render::{render_svg, RenderSpec};
pub use scenario::{Scenario, ScenarioGrid, SCENARIO_HEADER};
pub use sim::{
    execute, generate_scenario, rasterize, reachable_free_set, sense, FieldOracle, ObstacleField,
    ScenarioSeed, Shape, SplitMix64,
};
pub use trace::{
    EpisodeTrace, Event, EventKind, Metrics, QuadrantReport, TraceGrid, TRACE_HEADER,
};
