//! 16-connected A* search over the height map.
//!
//! Nodes live on a grid of spacing `graph_resolution` anchored at the world
//! origin. An edge is kept only if both endpoints are on the map and have
//! height data, its incline is within limits, the torso box at the child
//! does not intersect the terrain and at least one child foothold is
//! available. Edge costs add foothold, stance and contour penalties to the
//! planar length, so the euclidean heuristic stays consistent.

use std::cell::RefCell;
use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap, HashSet};
use std::fmt;
use std::time::{Duration, Instant};

use crate::error::{Error, Result};
use crate::geometry::{Frame, Vec2, Vec3};
use crate::heightmap::HeightMap;
use crate::params::PlannerParams;
use crate::scalar::{lit, to_f64, Scalar};
use crate::traversability::{Terrain, TraversabilitySample};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GraphNode {
    pub xi: i32,
    pub yi: i32,
}

/// Offsets of the 16-connected transition model.
pub const NEIGHBOR_OFFSETS: [(i32, i32); 16] = [
    (1, 0),
    (0, 1),
    (-1, 0),
    (0, -1),
    (1, 1),
    (-1, 1),
    (-1, -1),
    (1, -1),
    (1, 2),
    (2, 1),
    (-1, 2),
    (-2, 1),
    (-1, -2),
    (-2, -1),
    (1, -2),
    (2, -1),
];

impl GraphNode {
    pub fn new(xi: i32, yi: i32) -> Self {
        Self { xi, yi }
    }

    pub fn position<T: Scalar>(self, spacing: T) -> Vec2<T> {
        Vec2::new(
            T::from_i32(self.xi).unwrap() * spacing,
            T::from_i32(self.yi).unwrap() * spacing,
        )
    }

    /// Node closest to a continuous position.
    pub fn nearest<T: Scalar>(p: Vec2<T>, spacing: T) -> Self {
        Self::new(
            (p.x / spacing).round().to_i32().unwrap_or(i32::MAX),
            (p.y / spacing).round().to_i32().unwrap_or(i32::MAX),
        )
    }

    pub fn expand(self) -> [GraphNode; 16] {
        NEIGHBOR_OFFSETS.map(|(dx, dy)| GraphNode::new(self.xi + dx, self.yi + dy))
    }
}

/// Why an edge was rejected.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Infeasible {
    OutOfBounds,
    NoHeightData,
    TooSteep,
    Collision,
    LowTraversability,
}

impl fmt::Display for Infeasible {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Infeasible::OutOfBounds => "out_of_bounds",
            Infeasible::NoHeightData => "no_height_data",
            Infeasible::TooSteep => "too_steep",
            Infeasible::Collision => "collision",
            Infeasible::LowTraversability => "low_traversability",
        };
        f.write_str(s)
    }
}

/// A feasible transition with everything its cost depends on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GraphEdge<T> {
    pub parent: Vec2<T>,
    pub child: Vec2<T>,
    pub parent_height: T,
    pub child_height: T,
    pub frame: Frame<T>,
    /// Signed pitch of the edge (rad).
    pub incline: T,
    pub sample: TraversabilitySample<T>,
    pub contour_cost: T,
}

impl<T: Scalar> GraphEdge<T> {
    pub fn length(&self) -> T {
        self.child.distance(self.parent)
    }
}

/// Cost of a feasible edge: planar length plus weighted penalties.
pub fn edge_cost<T: Scalar>(edge: &GraphEdge<T>, params: &PlannerParams<T>) -> T {
    let one = T::one();
    edge.length()
        + params.foothold_weight * (one - edge.sample.t_f)
        + params.stance_weight * (one - edge.sample.t_s)
        + params.contour_weight * edge.contour_cost
}

/// Pitch times the roll of the contour normal in the edge frame.
pub fn contour_cost<T: Scalar>(incline: T, normal: Option<Vec3<T>>, frame: &Frame<T>) -> T {
    match normal {
        Some(n) => {
            let roll = n.dot(frame.y_hat3()).max(-T::one()).min(T::one()).asin();
            (incline * roll).abs()
        }
        None => T::zero(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SearchStatus {
    Reached,
    QueueExhausted,
    Timeout,
}

impl fmt::Display for SearchStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SearchStatus::Reached => "reached",
            SearchStatus::QueueExhausted => "queue_exhausted",
            SearchStatus::Timeout => "timeout",
        })
    }
}

#[derive(Debug, Clone)]
pub struct SearchResult<T> {
    pub status: SearchStatus,
    pub path: Vec<Vec2<T>>,
    pub nodes: Vec<GraphNode>,
    /// Edge `k` joins `path[k]` and `path[k + 1]`.
    pub edges: Vec<GraphEdge<T>>,
    pub cost: T,
    pub expanded_nodes: usize,
    pub duration: Duration,
}

#[derive(Debug, Clone, Copy)]
struct QueueEntry<T> {
    f: T,
    h: T,
    g: T,
    node: GraphNode,
}

impl<T: Scalar> PartialEq for QueueEntry<T> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl<T: Scalar> Eq for QueueEntry<T> {}

impl<T: Scalar> PartialOrd for QueueEntry<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<T: Scalar> Ord for QueueEntry<T> {
    // reversed: BinaryHeap pops the greatest entry
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .f
            .partial_cmp(&self.f)
            .unwrap_or(Ordering::Equal)
            .then_with(|| other.h.partial_cmp(&self.h).unwrap_or(Ordering::Equal))
            .then_with(|| other.node.cmp(&self.node))
    }
}

/// Edge evaluator and search driver for one map.
///
/// Node heights and contour normals are memoized per node; a planner is
/// meant to be used from one thread.
pub struct Planner<'m, T> {
    terrain: Terrain<'m, T>,
    heights: RefCell<HashMap<GraphNode, Option<T>>>,
    normals: RefCell<HashMap<GraphNode, Option<Vec3<T>>>>,
}

impl<'m, T: Scalar> Planner<'m, T> {
    pub fn new(map: &'m HeightMap<T>, params: &PlannerParams<T>, seed: u64) -> Result<Self> {
        params.validate()?;
        Ok(Self {
            terrain: Terrain::new(map, params, seed),
            heights: RefCell::new(HashMap::new()),
            normals: RefCell::new(HashMap::new()),
        })
    }

    pub fn terrain(&self) -> &Terrain<'m, T> {
        &self.terrain
    }

    pub fn params(&self) -> &PlannerParams<T> {
        self.terrain.params()
    }

    pub fn map(&self) -> &'m HeightMap<T> {
        self.terrain.map()
    }

    fn spacing(&self) -> T {
        self.params().graph_resolution
    }

    pub fn node_position(&self, node: GraphNode) -> Vec2<T> {
        node.position(self.spacing())
    }

    pub fn node_height(&self, node: GraphNode) -> Option<T> {
        if let Some(&h) = self.heights.borrow().get(&node) {
            return h;
        }
        let h = self.terrain.node_height(self.node_position(node));
        self.heights.borrow_mut().insert(node, h);
        h
    }

    fn node_normal(&self, node: GraphNode) -> Option<Vec3<T>> {
        if let Some(&n) = self.normals.borrow().get(&node) {
            return n;
        }
        let n = self.terrain.contour_normal(self.node_position(node));
        self.normals.borrow_mut().insert(node, n);
        n
    }

    /// Runs the feasibility checks on a graph edge and, if it passes,
    /// returns the measured edge.
    pub fn check_edge(&self, parent: GraphNode, child: GraphNode) -> Result<GraphEdge<T>, Infeasible> {
        let (pp, cp) = (self.node_position(parent), self.node_position(child));
        let map = self.map();
        if !map.contains(pp) || !map.contains(cp) {
            return Err(Infeasible::OutOfBounds);
        }
        let (Some(ph), Some(ch)) = (self.node_height(parent), self.node_height(child)) else {
            return Err(Infeasible::NoHeightData);
        };
        self.assess(pp, ph, cp, ch, || self.node_normal(child))
    }

    /// Same checks for an arbitrary pair of continuous positions, e.g. when
    /// re-validating an optimized path.
    pub fn check_segment(&self, from: Vec2<T>, to: Vec2<T>) -> Result<GraphEdge<T>, Infeasible> {
        let map = self.map();
        if !map.contains(from) || !map.contains(to) {
            return Err(Infeasible::OutOfBounds);
        }
        let (Some(ph), Some(ch)) = (self.terrain.node_height(from), self.terrain.node_height(to)) else {
            return Err(Infeasible::NoHeightData);
        };
        self.assess(from, ph, to, ch, || self.terrain.contour_normal(to))
    }

    /// Checks every consecutive pair of `path`.
    pub fn validate_path(&self, path: &[Vec2<T>]) -> Vec<Result<GraphEdge<T>, Infeasible>> {
        path.windows(2).map(|w| self.check_segment(w[0], w[1])).collect()
    }

    /// Whether the torso box at `frame` intersects the terrain when its
    /// bottom sits at `bottom`.
    pub fn box_collides(&self, frame: &Frame<T>, bottom: T) -> bool {
        let b = self.params().body_box();
        let map = self.map();
        map.cells_in_rect(frame, Vec2::zero(), b.length, b.width)
            .any(|(ix, iy)| map.surface_height(ix, iy).is_some_and(|h| h > bottom))
    }

    fn assess(
        &self,
        pp: Vec2<T>,
        ph: T,
        cp: Vec2<T>,
        ch: T,
        normal: impl FnOnce() -> Option<Vec3<T>>,
    ) -> Result<GraphEdge<T>, Infeasible> {
        let params = self.params();
        let run = cp.distance(pp);
        let incline = if run > T::zero() {
            ((ch - ph) / run).atan()
        } else {
            T::zero()
        };
        if incline.abs() > params.max_incline() {
            return Err(Infeasible::TooSteep);
        }
        let frame = Frame::between(pp, cp, ch);
        if self.box_collides(&frame, ph.max(ch) + params.box_offset) {
            return Err(Infeasible::Collision);
        }
        let sample = self.terrain.sample_edge(&frame, pp, &params.region_spec(), ph, ch);
        if sample.t_f < params.min_foothold_traversability {
            return Err(Infeasible::LowTraversability);
        }
        Ok(GraphEdge {
            parent: pp,
            child: cp,
            parent_height: ph,
            child_height: ch,
            frame,
            incline,
            sample,
            contour_cost: contour_cost(incline, normal(), &frame),
        })
    }

    /// Snaps a continuous position to a node with height data.
    pub fn snap(&self, p: Vec2<T>, what: &str) -> Result<GraphNode> {
        let map = self.map();
        if !map.contains(p) {
            return Err(Error::invalid(format!(
                "{what} ({}, {}) is outside the map",
                to_f64(p.x),
                to_f64(p.y)
            )));
        }
        let node = GraphNode::nearest(p, self.spacing());
        if !map.contains(self.node_position(node)) {
            return Err(Error::invalid(format!("{what} snaps to a node outside the map")));
        }
        if self.node_height(node).is_none() {
            return Err(Error::invalid(format!("{what} node has no height data")));
        }
        Ok(node)
    }

    /// A* from `start` to `goal`. Ties on `g + h` go to the smaller `h`,
    /// then to the smaller `(xi, yi)`.
    pub fn plan(&self, start: Vec2<T>, goal: Vec2<T>) -> Result<SearchResult<T>> {
        let began = Instant::now();
        let start_node = self.snap(start, "start")?;
        let goal_node = self.snap(goal, "goal")?;
        let goal_pos = self.node_position(goal_node);
        let timeout = Duration::from_secs_f64(to_f64(self.params().timeout_seconds));
        let heuristic = |n: GraphNode| self.node_position(n).distance(goal_pos);

        let mut open = BinaryHeap::new();
        let mut best_g: HashMap<GraphNode, T> = HashMap::new();
        let mut came_from: HashMap<GraphNode, (GraphNode, GraphEdge<T>)> = HashMap::new();
        let mut closed: HashSet<GraphNode> = HashSet::new();
        let mut expanded = 0usize;

        let h0 = heuristic(start_node);
        open.push(QueueEntry {
            f: h0,
            h: h0,
            g: T::zero(),
            node: start_node,
        });
        best_g.insert(start_node, T::zero());

        let status = loop {
            let Some(entry) = open.pop() else {
                break SearchStatus::QueueExhausted;
            };
            if !closed.insert(entry.node) {
                continue;
            }
            if entry.node == goal_node {
                break SearchStatus::Reached;
            }
            expanded += 1;
            if expanded.is_multiple_of(64) && began.elapsed() > timeout {
                break SearchStatus::Timeout;
            }
            for child in entry.node.expand() {
                if closed.contains(&child) {
                    continue;
                }
                let Ok(edge) = self.check_edge(entry.node, child) else {
                    continue;
                };
                let g = entry.g + edge_cost(&edge, self.params());
                if best_g.get(&child).is_some_and(|&old| old <= g) {
                    continue;
                }
                best_g.insert(child, g);
                came_from.insert(child, (entry.node, edge));
                let h = heuristic(child);
                open.push(QueueEntry {
                    f: g + h,
                    h,
                    g,
                    node: child,
                });
            }
        };

        let mut result = SearchResult {
            status,
            path: Vec::new(),
            nodes: Vec::new(),
            edges: Vec::new(),
            cost: T::zero(),
            expanded_nodes: expanded,
            duration: Duration::ZERO,
        };
        if status == SearchStatus::Reached {
            let mut nodes = vec![goal_node];
            let mut edges = Vec::new();
            let mut cur = goal_node;
            while let Some(&(prev, edge)) = came_from.get(&cur) {
                nodes.push(prev);
                edges.push(edge);
                cur = prev;
            }
            nodes.reverse();
            edges.reverse();
            result.cost = best_g[&goal_node];
            result.path = nodes.iter().map(|&n| self.node_position(n)).collect();
            result.nodes = nodes;
            result.edges = edges;
        }
        result.duration = began.elapsed();
        Ok(result)
    }
}

/// Planar length of a polyline.
pub fn path_length<T: Scalar>(path: &[Vec2<T>]) -> T {
    path.windows(2).map(|w| w[1].distance(w[0])).sum()
}

/// Default slack used when comparing planner costs.
pub fn cost_tolerance<T: Scalar>() -> T {
    lit(1e-9)
}
