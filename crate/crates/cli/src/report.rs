//! Plan reports: the JSON written by `plan` and the run that produces it.

use std::time::Instant;

use bodypath::{BodyPath, HeightMap, Optimizer, Planner, PlannerParams, SearchResult, SearchStatus, Vec2};
use serde::{Deserialize, Serialize};

use crate::CliError;

/// Timings are wall clock seconds; lengths are meters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stats {
    pub astar_seconds: f64,
    pub optimizer_seconds: f64,
    /// Planar length of the optimized path.
    pub path_length_m: f64,
    pub expanded_nodes: usize,
}

/// Diagnostics of one A* edge; `theta` is the signed pitch in radians.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeReport {
    pub t_f: f64,
    pub t_s: f64,
    pub c_c: f64,
    pub theta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanReport {
    pub status: String,
    pub stats: Stats,
    pub initial_path: Vec<[f64; 2]>,
    pub optimized_path: Vec<[f64; 2]>,
    /// Indices into `optimized_path`.
    pub turn_points: Vec<usize>,
    /// Edge `k` joins `initial_path[k]` and `initial_path[k + 1]`.
    pub edges: Vec<EdgeReport>,
}

impl PlanReport {
    pub fn reached(&self) -> bool {
        self.status == SearchStatus::Reached.to_string()
    }

    /// Copy with the wall clock fields zeroed, for comparing runs.
    pub fn without_timing(&self) -> Self {
        let mut r = self.clone();
        r.stats.astar_seconds = 0.0;
        r.stats.optimizer_seconds = 0.0;
        r
    }

    pub fn to_json_string(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports serialize");
        s.push('\n');
        s
    }
}

/// Everything a plan run produced, the report plus the raw paths.
#[derive(Debug, Clone)]
pub struct PlanOutcome {
    pub report: PlanReport,
    pub search: SearchResult<f64>,
    pub optimized: BodyPath<f64>,
}

fn xy(points: &[Vec2<f64>]) -> Vec<[f64; 2]> {
    points.iter().map(|p| [p.x, p.y]).collect()
}

/// Plans, then optimizes when the goal was reached. Invalid endpoints are
/// input errors; a search that ends without reaching the goal is not an
/// error here, the status says so.
pub fn run_plan(
    map: &HeightMap<f64>,
    params: &PlannerParams<f64>,
    start: Vec2<f64>,
    goal: Vec2<f64>,
    seed: u64,
) -> Result<PlanOutcome, CliError> {
    let planner = Planner::new(map, params, seed)?;
    let began = Instant::now();
    let search = planner.plan(start, goal)?;
    let astar_seconds = began.elapsed().as_secs_f64();

    let initial = BodyPath::new(search.path.clone());
    let (optimized, optimizer_seconds) = if search.status == SearchStatus::Reached {
        let began = Instant::now();
        let out = Optimizer::new(planner.terrain()).optimize(&initial);
        (out, began.elapsed().as_secs_f64())
    } else {
        (initial, 0.0)
    };

    let report = PlanReport {
        status: search.status.to_string(),
        stats: Stats {
            astar_seconds,
            optimizer_seconds,
            path_length_m: optimized.length(),
            expanded_nodes: search.expanded_nodes,
        },
        initial_path: xy(&search.path),
        optimized_path: xy(&optimized.waypoints),
        turn_points: optimized.turn_point_indices(),
        edges: search
            .edges
            .iter()
            .map(|e| EdgeReport {
                t_f: e.sample.t_f,
                t_s: e.sample.t_s,
                c_c: e.contour_cost,
                theta: e.incline,
            })
            .collect(),
    };
    Ok(PlanOutcome {
        report,
        search,
        optimized,
    })
}
