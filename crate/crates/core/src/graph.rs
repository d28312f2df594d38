//! Grid adjacency over the waypoint ordering.
//!
//! The coverage graph has one vertex per waypoint and an edge between
//! waypoints whose cells share a side. Waypoint identity is the Hilbert
//! index, so neighbor queries go through a precomputed index/cell table in
//! both directions.

use std::collections::BTreeSet;

use crate::curve::{index_to_cell, Cell, HilbertIndex, Iteration};
use crate::error::Error;

/// Dense set of waypoint indices with a fixed capacity.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IndexSet {
    bits: Vec<bool>,
    len: u32,
}

impl IndexSet {
    pub fn new(capacity: u32) -> Self {
        IndexSet {
            bits: vec![false; capacity as usize],
            len: 0,
        }
    }

    pub fn capacity(&self) -> u32 {
        self.bits.len() as u32
    }

    /// Returns true when the index was not yet present.
    pub fn insert(&mut self, index: u32) -> bool {
        let slot = &mut self.bits[index as usize];
        if *slot {
            false
        } else {
            *slot = true;
            self.len += 1;
            true
        }
    }

    pub fn contains(&self, index: u32) -> bool {
        self.bits[index as usize]
    }

    pub fn len(&self) -> u32 {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Ascending iteration over the stored indices.
    pub fn iter(&self) -> impl Iterator<Item = u32> + '_ {
        self.bits
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(|(i, _)| i as u32)
    }
}

/// Waypoints already visited by the agent.
pub type VisitSet = IndexSet;
/// Waypoints known to be blocked.
pub type ObstacleSet = IndexSet;

/// Neighbor indices of one waypoint, at most four.
pub struct Neighbors {
    items: [u32; 4],
    len: u8,
    next: u8,
}

impl Iterator for Neighbors {
    type Item = u32;

    fn next(&mut self) -> Option<u32> {
        if self.next < self.len {
            let v = self.items[self.next as usize];
            self.next += 1;
            Some(v)
        } else {
            None
        }
    }
}

/// Precomputed bijection between waypoint indices and grid cells plus the
/// side-sharing adjacency derived from it.
pub struct CoverageGraph {
    k: Iteration,
    cell_of_index: Vec<Cell>,
    index_of_cell: Vec<u32>,
}

impl CoverageGraph {
    pub fn new(k: Iteration) -> Self {
        let side = k.side();
        let count = k.waypoint_count();
        let mut cell_of_index = Vec::with_capacity(count as usize);
        let mut index_of_cell = vec![0u32; count as usize];
        for d in 0..count {
            let c = index_to_cell(k, d).expect("index is in range by construction");
            cell_of_index.push(c);
            index_of_cell[(c.y * side + c.x) as usize] = d;
        }
        CoverageGraph {
            k,
            cell_of_index,
            index_of_cell,
        }
    }

    pub fn iteration(&self) -> Iteration {
        self.k
    }

    pub fn side(&self) -> u32 {
        self.k.side()
    }

    pub fn waypoint_count(&self) -> u32 {
        self.k.waypoint_count()
    }

    pub fn cell_of(&self, d: HilbertIndex) -> Cell {
        self.cell_of_index[d as usize]
    }

    pub fn index_of(&self, c: Cell) -> HilbertIndex {
        let side = self.side();
        assert!(c.x < side && c.y < side, "cell {c} outside {side}x{side}");
        self.index_of_cell[(c.y * side + c.x) as usize]
    }

    /// Indices of the side-sharing neighbors of `d`, in left, right, down,
    /// up order of the underlying cells.
    pub fn neighbors(&self, d: HilbertIndex) -> Neighbors {
        let c = self.cell_of(d);
        let side = self.side();
        let mut items = [0u32; 4];
        let mut len = 0u8;
        if c.x > 0 {
            items[len as usize] = self.index_of(Cell::new(c.x - 1, c.y));
            len += 1;
        }
        if c.x + 1 < side {
            items[len as usize] = self.index_of(Cell::new(c.x + 1, c.y));
            len += 1;
        }
        if c.y > 0 {
            items[len as usize] = self.index_of(Cell::new(c.x, c.y - 1));
            len += 1;
        }
        if c.y + 1 < side {
            items[len as usize] = self.index_of(Cell::new(c.x, c.y + 1));
            len += 1;
        }
        Neighbors {
            items,
            len,
            next: 0,
        }
    }

    /// Number of undirected edges, `2 n (n - 1)` for side `n`.
    pub fn edge_count(&self) -> u64 {
        let n = self.side() as u64;
        2 * n * (n - 1)
    }

    /// All undirected edges as `(min, max)` index pairs, horizontal cell
    /// pairs first, then vertical ones, each group in row-major cell order.
    pub fn edges(&self) -> Vec<(u32, u32)> {
        let side = self.side();
        let mut out = Vec::with_capacity(self.edge_count() as usize);
        for y in 0..side {
            for x in 0..side - 1 {
                let a = self.index_of(Cell::new(x, y));
                let b = self.index_of(Cell::new(x + 1, y));
                out.push((a.min(b), a.max(b)));
            }
        }
        for y in 0..side - 1 {
            for x in 0..side {
                let a = self.index_of(Cell::new(x, y));
                let b = self.index_of(Cell::new(x, y + 1));
                out.push((a.min(b), a.max(b)));
            }
        }
        out
    }

    /// Unvisited waypoints adjacent to at least one visited waypoint.
    pub fn frontier(&self, visited: &VisitSet) -> Result<BTreeSet<u32>, Error> {
        if visited.is_empty() {
            return Err(Error::EmptyVisitSet);
        }
        let mut out = BTreeSet::new();
        for v in visited.iter() {
            for w in self.neighbors(v) {
                if !visited.contains(w) {
                    out.insert(w);
                }
            }
        }
        Ok(out)
    }

    /// Smallest frontier index not in `excluded`, without materializing the
    /// frontier set.
    pub(crate) fn min_frontier_excluding(
        &self,
        visited: &VisitSet,
        excluded: &IndexSet,
    ) -> Option<u32> {
        let mut best: Option<u32> = None;
        for v in visited.iter() {
            for w in self.neighbors(v) {
                if !visited.contains(w) && !excluded.contains(w) && best.is_none_or(|b| w < b) {
                    best = Some(w);
                }
            }
        }
        best
    }

    /// Shortest route from `c` to `p` moving only through waypoints in
    /// `allowed`, except that `p` itself need not be allowed. Returns the
    /// full waypoint sequence including both endpoints. Among equally short
    /// routes the result is the one that is lexicographically smallest from
    /// the target backwards, obtained by always stepping to the
    /// smallest-index predecessor.
    pub fn shortest_route(
        &self,
        allowed: &IndexSet,
        c: HilbertIndex,
        p: HilbertIndex,
    ) -> Result<Vec<u32>, Error> {
        if c == p {
            return Ok(vec![c]);
        }
        const UNSEEN: u32 = u32::MAX;
        let mut dist = vec![UNSEEN; self.waypoint_count() as usize];
        dist[c as usize] = 0;
        let mut queue = std::collections::VecDeque::new();
        queue.push_back(c);
        'bfs: while let Some(v) = queue.pop_front() {
            for w in self.neighbors(v) {
                if dist[w as usize] != UNSEEN {
                    continue;
                }
                if w == p {
                    dist[w as usize] = dist[v as usize] + 1;
                    break 'bfs;
                }
                if allowed.contains(w) {
                    dist[w as usize] = dist[v as usize] + 1;
                    queue.push_back(w);
                }
            }
        }
        if dist[p as usize] == UNSEEN {
            return Err(Error::NoRoute { from: c, to: p });
        }
        let mut route = Vec::with_capacity(dist[p as usize] as usize + 1);
        let mut v = p;
        route.push(v);
        while v != c {
            let prev = self
                .neighbors(v)
                .filter(|&w| dist[w as usize] != UNSEEN && dist[w as usize] + 1 == dist[v as usize])
                .min()
                .expect("a reached vertex has a reached predecessor");
            route.push(prev);
            v = prev;
        }
        route.reverse();
        Ok(route)
    }
}
