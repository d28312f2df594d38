use thiserror::Error;

use crate::curve::{Cell, MAX_ITERATION};

/// Errors produced by curve math, graph search, planning, and simulation.
#[derive(Debug, Error)]
pub enum Error {
    /// Requested iteration is above [`MAX_ITERATION`].
    #[error("iteration {0} exceeds the supported maximum {MAX_ITERATION}")]
    IterationTooLarge(u32),

    /// Curve index does not exist at the given iteration.
    #[error("index {index} out of range at iteration {k} ({count} waypoints)")]
    IndexOutOfRange { k: u8, index: u32, count: u32 },

    /// Cell coordinates fall outside the grid.
    #[error("cell {cell} out of bounds at iteration {k} (grid side {side})")]
    CellOutOfBounds { k: u8, cell: Cell, side: u32 },

    /// Sensing specification with non-positive or non-finite lengths.
    #[error(
        "region side and sensor radius must be positive and finite, got {region_side} and {sensor_radius}"
    )]
    InvalidSensingSpec { region_side: f64, sensor_radius: f64 },

    /// The frontier of an empty visited set is undefined.
    #[error("frontier requested for an empty visited set")]
    EmptyVisitSet,

    /// No route exists between the endpoints within the allowed set.
    #[error("no route from {from} to {to} within the allowed set")]
    NoRoute { from: u32, to: u32 },

    /// An operation was called outside its documented protocol.
    #[error("contract violation: {0}")]
    Contract(String),

    /// Sensing is only defined between 4-adjacent cells.
    #[error("sense target {target} is not 4-adjacent to {from}")]
    NonAdjacentSense { from: Cell, target: Cell },

    /// Episodes cannot start on a blocked cell.
    #[error("start cell {cell} is blocked")]
    BlockedStart { cell: Cell },

    /// An obstacle shape extends past the region boundary.
    #[error("shape outside the region: {0}")]
    ShapeOutOfRegion(String),

    /// More blocked cells requested than the grid can yield.
    #[error("cannot block {requested} cells, at most {available} are available")]
    TooManyBlocked { requested: u32, available: u32 },

    /// No admissible waypoint pair connects two quadrants.
    #[error("transfer into quadrant {quadrant} impossible: {reason}")]
    TransferImpossible {
        quadrant: &'static str,
        reason: String,
    },

    /// A scenario or trace file does not follow its documented format.
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    /// A scenario is well-formed but semantically unusable.
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
}
