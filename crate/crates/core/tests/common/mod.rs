#![allow(dead_code)]

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};

use bodypath::astar::edge_cost;
use bodypath::{CellState, GraphNode, HeightMap, Planner, Vec2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn flat(width: f64, height: f64) -> HeightMap<f64> {
    let mut m = HeightMap::new(Vec2::zero(), 0.02, width).unwrap();
    let n = m.side_cells();
    for iy in 0..n {
        for ix in 0..n {
            m.set_height(ix, iy, height);
        }
    }
    m
}

/// Small random terrain: steps, blocks, unknown patches and a gentle tilt.
pub fn random_map(seed: u64) -> HeightMap<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let width = 1.2;
    let n = 60usize;
    let mut h = vec![Some(0.0f64); n * n];
    let tilt = (rng.random_range(-0.15..0.15), rng.random_range(-0.15..0.15));
    for iy in 0..n {
        for ix in 0..n {
            let (x, y) = (ix as f64 * 0.02 - 0.59, iy as f64 * 0.02 - 0.59);
            h[iy * n + ix] = Some(tilt.0 * x + tilt.1 * y);
        }
    }
    for _ in 0..rng.random_range(0..6) {
        let (x0, y0) = (rng.random_range(0..n), rng.random_range(0..n));
        let (w, l) = (rng.random_range(2..20), rng.random_range(2..20));
        let kind = rng.random_range(0..4);
        let dz = [0.05, 0.15, 0.3, 0.9][rng.random_range(0..4)];
        for iy in y0..(y0 + l).min(n) {
            for ix in x0..(x0 + w).min(n) {
                let c = &mut h[iy * n + ix];
                *c = match kind {
                    0 => None,
                    _ => c.map(|z| z + dz),
                };
            }
        }
    }
    let cells = h
        .into_iter()
        .map(|z| z.map(CellState::known).unwrap_or_default())
        .collect();
    let m = HeightMap::from_cells(Vec2::zero(), 0.02, n, 0.0, cells).unwrap();
    assert!((m.width() - width).abs() < 1e-12);
    m
}

#[derive(PartialEq)]
struct Entry(f64, GraphNode);

impl Eq for Entry {}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.partial_cmp(&self.0).unwrap().then(other.1.cmp(&self.1))
    }
}

/// Uniform-cost search over every node reachable from `start`.
pub fn dijkstra(planner: &Planner<'_, f64>, start: GraphNode, goal: GraphNode) -> Option<f64> {
    let mut dist: HashMap<GraphNode, f64> = HashMap::new();
    let mut heap = BinaryHeap::new();
    dist.insert(start, 0.0);
    heap.push(Entry(0.0, start));
    while let Some(Entry(d, node)) = heap.pop() {
        if d > dist[&node] {
            continue;
        }
        for child in node.expand() {
            let Ok(edge) = planner.check_edge(node, child) else {
                continue;
            };
            let nd = d + edge_cost(&edge, planner.params());
            if dist.get(&child).is_none_or(|&old| nd < old) {
                dist.insert(child, nd);
                heap.push(Entry(nd, child));
            }
        }
    }
    dist.get(&goal).copied()
}
