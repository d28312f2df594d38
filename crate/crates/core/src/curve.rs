//! Hilbert curve index mathematics.
//!
//! A square region is tessellated into a `2^k x 2^k` grid and the cells are
//! linearly ordered along the k-th iteration of the Hilbert curve. The
//! index/cell bijection is computed with the standard iterative
//! rotate-and-reflect recurrence, O(k) per query.
//!
//! Orientation is pinned to one of the eight symmetries of the construction:
//! index 0 is the bottom-left cell and index `4^k - 1` is the bottom-right
//! cell, with `x` growing rightwards and `y` growing upwards.

use std::fmt;

use crate::error::Error;

/// Largest supported curve iteration. Keeps `4^k` within `u32` and lookup
/// tables at a desk-scale memory footprint.
pub const MAX_ITERATION: u8 = 15;

/// Curve iteration (recursion depth). The grid side is `2^k` and the
/// waypoint count `4^k`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Iteration(u8);

/// Position along the curve, `0..4^k` for the governing iteration.
pub type HilbertIndex = u32;

/// Grid cell, origin at the bottom-left corner.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Cell {
    pub x: u32,
    pub y: u32,
}

impl Cell {
    pub const fn new(x: u32, y: u32) -> Self {
        Cell { x, y }
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

impl Iteration {
    pub fn new(k: u32) -> Result<Self, Error> {
        if k > MAX_ITERATION as u32 {
            return Err(Error::IterationTooLarge(k));
        }
        Ok(Iteration(k as u8))
    }

    pub const fn get(self) -> u8 {
        self.0
    }

    /// Grid side length `2^k`.
    pub const fn side(self) -> u32 {
        1 << self.0
    }

    /// Waypoint count `4^k`.
    pub const fn waypoint_count(self) -> u32 {
        1 << (2 * self.0)
    }
}

impl fmt::Display for Iteration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Physical sensing parameters used to choose an iteration.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SensingSpec {
    /// Side length of the square region to cover.
    pub region_side: f64,
    /// Radius within which the sensor sees everything from a cell center.
    pub sensor_radius: f64,
}

fn quadrant_rotate(n: u32, x: &mut u32, y: &mut u32, rx: u32, ry: u32) {
    if ry == 0 {
        if rx == 1 {
            *x = n - 1 - *x;
            *y = n - 1 - *y;
        }
        std::mem::swap(x, y);
    }
}

/// Maps a curve index to its grid cell.
pub fn index_to_cell(k: Iteration, d: HilbertIndex) -> Result<Cell, Error> {
    let count = k.waypoint_count();
    if d >= count {
        return Err(Error::IndexOutOfRange {
            k: k.get(),
            index: d,
            count,
        });
    }
    let side = k.side();
    let (mut x, mut y) = (0u32, 0u32);
    let mut t = d;
    let mut s = 1u32;
    while s < side {
        let rx = 1 & (t >> 1);
        let ry = 1 & (t ^ rx);
        quadrant_rotate(s, &mut x, &mut y, rx, ry);
        x += s * rx;
        y += s * ry;
        t >>= 2;
        s <<= 1;
    }
    Ok(Cell { x, y })
}

/// Maps a grid cell back to its curve index. Exact inverse of
/// [`index_to_cell`].
pub fn cell_to_index(k: Iteration, c: Cell) -> Result<HilbertIndex, Error> {
    let side = k.side();
    if c.x >= side || c.y >= side {
        return Err(Error::CellOutOfBounds {
            k: k.get(),
            cell: c,
            side,
        });
    }
    let (mut x, mut y) = (c.x, c.y);
    let mut d: u32 = 0;
    let mut s = side >> 1;
    while s > 0 {
        let rx = u32::from(x & s > 0);
        let ry = u32::from(y & s > 0);
        d += s * s * ((3 * rx) ^ ry);
        quadrant_rotate(side, &mut x, &mut y, rx, ry);
        s >>= 1;
    }
    Ok(d)
}

/// Smallest iteration whose cells the sensor covers entirely from their
/// centers: minimal `k` with `sensor_radius >= region_side * sqrt(2) /
/// 2^(k+1)`, the right side being half the cell diagonal.
///
/// The threshold is evaluated as a direct inequality rather than through
/// logarithms so that exact ties resolve to the smaller iteration.
pub fn select_iteration(spec: SensingSpec) -> Result<Iteration, Error> {
    if !(spec.region_side.is_finite() && spec.region_side > 0.0)
        || !(spec.sensor_radius.is_finite() && spec.sensor_radius > 0.0)
    {
        return Err(Error::InvalidSensingSpec {
            region_side: spec.region_side,
            sensor_radius: spec.sensor_radius,
        });
    }
    let region_diagonal = spec.region_side * std::f64::consts::SQRT_2;
    let mut k: u32 = 0;
    while spec.sensor_radius * ((1u64 << (k + 1)) as f64) < region_diagonal {
        k += 1;
        if k > MAX_ITERATION as u32 {
            return Err(Error::IterationTooLarge(k));
        }
    }
    Iteration::new(k)
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;

    #[test]
    fn corner_convention() {
        let k1 = Iteration::new(1).unwrap();
        assert_eq!(index_to_cell(k1, 0).unwrap(), Cell::new(0, 0));
        assert_eq!(index_to_cell(k1, 3).unwrap(), Cell::new(1, 0));
        for k in 1..=8u32 {
            let k = Iteration::new(k).unwrap();
            assert_eq!(index_to_cell(k, 0).unwrap(), Cell::new(0, 0));
            assert_eq!(
                index_to_cell(k, k.waypoint_count() - 1).unwrap(),
                Cell::new(k.side() - 1, 0)
            );
        }
    }

    #[test]
    fn full_order_at_small_iterations() {
        let k1 = Iteration::new(1).unwrap();
        let order1: Vec<Cell> = (0..4).map(|d| index_to_cell(k1, d).unwrap()).collect();
        assert_eq!(
            order1,
            [(0, 0), (0, 1), (1, 1), (1, 0)].map(|(x, y)| Cell::new(x, y))
        );

        let k2 = Iteration::new(2).unwrap();
        let order2: Vec<Cell> = (0..16).map(|d| index_to_cell(k2, d).unwrap()).collect();
        assert_eq!(
            order2,
            [
                (0, 0),
                (1, 0),
                (1, 1),
                (0, 1),
                (0, 2),
                (0, 3),
                (1, 3),
                (1, 2),
                (2, 2),
                (2, 3),
                (3, 3),
                (3, 2),
                (3, 1),
                (2, 1),
                (2, 0),
                (3, 0),
            ]
            .map(|(x, y)| Cell::new(x, y))
        );
    }

    #[test]
    fn index_five_at_iteration_two() {
        let k2 = Iteration::new(2).unwrap();
        assert_eq!(index_to_cell(k2, 5).unwrap(), Cell::new(0, 3));
    }

    #[test]
    fn round_trips() {
        let k2 = Iteration::new(2).unwrap();
        let c = index_to_cell(k2, 11).unwrap();
        assert_eq!(cell_to_index(k2, c).unwrap(), 11);

        let k1 = Iteration::new(1).unwrap();
        assert_eq!(cell_to_index(k1, Cell::new(0, 0)).unwrap(), 0);
        let k3 = Iteration::new(3).unwrap();
        assert_eq!(cell_to_index(k3, Cell::new(0, 0)).unwrap(), 0);
    }

    #[test]
    fn out_of_range_inputs_error() {
        let k1 = Iteration::new(1).unwrap();
        assert!(matches!(
            index_to_cell(k1, 4),
            Err(Error::IndexOutOfRange { .. })
        ));
        assert!(matches!(
            cell_to_index(k1, Cell::new(2, 0)),
            Err(Error::CellOutOfBounds { .. })
        ));
        assert!(matches!(
            Iteration::new(16),
            Err(Error::IterationTooLarge(16))
        ));
    }

    /// Independent oracle: the curve built by recursive expansion of the
    /// quadrant grammar (transpose, shift up, shift up-right, anti-transpose)
    /// instead of bit manipulation.
    fn recursive_order(k: u8) -> Vec<(u32, u32)> {
        if k == 0 {
            return vec![(0, 0)];
        }
        let prev = recursive_order(k - 1);
        let s = 1u32 << (k - 1);
        let mut out = Vec::with_capacity(prev.len() * 4);
        out.extend(prev.iter().map(|&(x, y)| (y, x)));
        out.extend(prev.iter().map(|&(x, y)| (x, y + s)));
        out.extend(prev.iter().map(|&(x, y)| (x + s, y + s)));
        out.extend(prev.iter().map(|&(x, y)| (2 * s - 1 - y, s - 1 - x)));
        out
    }

    #[test]
    fn matches_recursive_grammar_expansion() {
        for k in 0..=6u8 {
            let it = Iteration::new(k as u32).unwrap();
            let expected = recursive_order(k);
            for (d, &(x, y)) in expected.iter().enumerate() {
                assert_eq!(
                    index_to_cell(it, d as u32).unwrap(),
                    Cell::new(x, y),
                    "k={k} d={d}"
                );
            }
        }
    }

    #[test]
    fn iteration_selection_examples() {
        let pick = |l, s| {
            select_iteration(SensingSpec {
                region_side: l,
                sensor_radius: s,
            })
            .unwrap()
            .get()
        };
        assert_eq!(pick(4.0, 4.0), 0);
        assert_eq!(pick(4.0, std::f64::consts::SQRT_2), 1);
        assert_eq!(pick(32.0, 1.0), 5);
    }

    #[test]
    fn iteration_selection_rejects_bad_specs() {
        for (l, s) in [
            (0.0, 1.0),
            (-1.0, 1.0),
            (1.0, 0.0),
            (1.0, -2.0),
            (f64::NAN, 1.0),
            (1.0, f64::INFINITY),
        ] {
            assert!(matches!(
                select_iteration(SensingSpec {
                    region_side: l,
                    sensor_radius: s
                }),
                Err(Error::InvalidSensingSpec { .. })
            ));
        }
    }

    #[test]
    fn iteration_selection_is_capped() {
        assert!(matches!(
            select_iteration(SensingSpec {
                region_side: 1.0,
                sensor_radius: 1e-9
            }),
            Err(Error::IterationTooLarge(_))
        ));
    }

    #[test]
    fn iteration_selection_monotonicity() {
        // Lattice points chosen away from exact ties.
        let sides = [1.0, 2.0, 3.0, 5.0, 11.0];
        let radii = [0.3, 0.9, 1.7, 4.1];
        for &l in &sides {
            for window in radii.windows(2) {
                let big = select_iteration(SensingSpec {
                    region_side: l,
                    sensor_radius: window[0],
                })
                .unwrap();
                let small = select_iteration(SensingSpec {
                    region_side: l,
                    sensor_radius: window[1],
                })
                .unwrap();
                assert!(big >= small, "shrinking the radius may not lower k");
            }
        }
        for &l in &sides {
            for &s in &radii {
                let base = select_iteration(SensingSpec {
                    region_side: l,
                    sensor_radius: s,
                })
                .unwrap();
                let doubled = select_iteration(SensingSpec {
                    region_side: 2.0 * l,
                    sensor_radius: s,
                })
                .unwrap();
                if base.get() > 0 {
                    assert_eq!(doubled.get(), base.get() + 1);
                } else {
                    assert!(doubled.get() <= 1, "doubling a covered region adds at most one level");
                }
            }
        }
    }

    proptest! {
        #[test]
        fn consecutive_indices_are_one_hop(
            (k, d) in (1u32..=8).prop_flat_map(|k| {
                let count = 1u32 << (2 * k);
                (Just(k), 0..count - 1)
            })
        ) {
            let it = Iteration::new(k).unwrap();
            let a = index_to_cell(it, d).unwrap();
            let b = index_to_cell(it, d + 1).unwrap();
            prop_assert_eq!(a.x.abs_diff(b.x) + a.y.abs_diff(b.y), 1);
        }

        #[test]
        fn random_round_trip(
            (k, x, y) in (0u32..=8).prop_flat_map(|k| {
                let side = 1u32 << k;
                (Just(k), 0..side, 0..side)
            })
        ) {
            let it = Iteration::new(k).unwrap();
            let d = cell_to_index(it, Cell::new(x, y)).unwrap();
            prop_assert_eq!(index_to_cell(it, d).unwrap(), Cell::new(x, y));
        }
    }
}
