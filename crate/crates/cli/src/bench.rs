//! End-to-end timing over a suite of synthetic terrains.

use bodypath::terraingen::{generate, MapParams, Rect, StoneLayout, StoneShape, TerrainKind, TerrainSpec};
use bodypath::{PlannerParams, Vec2};
use serde::{Deserialize, Serialize};

use crate::report::run_plan;
use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteEntry {
    pub name: String,
    pub terrain: TerrainSpec<f64>,
    #[serde(default)]
    pub map: MapParams<f64>,
    pub start: [f64; 2],
    pub goal: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Suite {
    pub terrains: Vec<SuiteEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub name: String,
    /// Search status, or `failed` when the terrain could not be run.
    pub status: String,
    pub astar_seconds: f64,
    pub optimizer_seconds: f64,
    pub path_length_m: f64,
    pub expanded_nodes: usize,
    /// `astar_seconds / expanded_nodes`, zero when nothing was expanded.
    pub astar_seconds_per_iteration: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl BenchRow {
    fn failed(name: &str, err: CliError) -> Self {
        Self {
            name: name.to_string(),
            status: "failed".into(),
            astar_seconds: 0.0,
            optimizer_seconds: 0.0,
            path_length_m: 0.0,
            expanded_nodes: 0,
            astar_seconds_per_iteration: 0.0,
            error: Some(err.to_string()),
        }
    }
}

/// Ramp, stairs, stepping stones and a wall course on 4 m maps.
pub fn default_suite() -> Suite {
    let entry = |name: &str, kind, start, goal| SuiteEntry {
        name: name.into(),
        terrain: TerrainSpec::new(kind),
        map: MapParams::default(),
        start,
        goal,
    };
    let wall = |x_min, x_max, y_min, y_max| Rect {
        x_min,
        x_max,
        y_min,
        y_max,
    };
    Suite {
        terrains: vec![
            entry(
                "ramp",
                TerrainKind::Ramp {
                    incline_deg: 15.0,
                    from_x: Some(-0.5),
                    to_x: Some(0.5),
                },
                [-1.5, -1.0],
                [1.5, 1.0],
            ),
            entry(
                "stairs",
                TerrainKind::Stairs {
                    rise: 0.05,
                    run: 0.3,
                    x_start: -0.9,
                    steps: Some(5),
                },
                [-1.5, 0.0],
                [1.5, 0.3],
            ),
            entry(
                "stones",
                TerrainKind::SteppingStones {
                    stone_radius: 0.3,
                    pitch: 0.66,
                    layout: StoneLayout::Grid,
                    shape: StoneShape::Square,
                    x_from: -1.0,
                    x_to: 1.0,
                    y_offset: 0.0,
                    height: 0.0,
                },
                [-1.6, 0.0],
                [1.6, 0.0],
            ),
            entry(
                "obstacles",
                TerrainKind::WallObstacles {
                    walls: vec![wall(-0.8, -0.6, -2.0, 0.8), wall(0.6, 0.8, -0.8, 2.0)],
                    height: 1.0,
                },
                [-1.6, -1.2],
                [1.6, 1.2],
            ),
        ],
    }
}

pub fn run_entry(entry: &SuiteEntry, params: &PlannerParams<f64>, seed: u64) -> BenchRow {
    let attempt = || -> Result<BenchRow, CliError> {
        let map = generate(&entry.terrain, &entry.map)?;
        let start = Vec2::new(entry.start[0], entry.start[1]);
        let goal = Vec2::new(entry.goal[0], entry.goal[1]);
        let out = run_plan(&map, params, start, goal, seed)?;
        let s = out.report.stats;
        Ok(BenchRow {
            name: entry.name.clone(),
            status: out.report.status,
            astar_seconds: s.astar_seconds,
            optimizer_seconds: s.optimizer_seconds,
            path_length_m: s.path_length_m,
            expanded_nodes: s.expanded_nodes,
            astar_seconds_per_iteration: if s.expanded_nodes > 0 {
                s.astar_seconds / s.expanded_nodes as f64
            } else {
                0.0
            },
            error: None,
        })
    };
    attempt().unwrap_or_else(|e| BenchRow::failed(&entry.name, e))
}

pub fn run_suite(suite: &Suite, params: &PlannerParams<f64>, seed: u64) -> Vec<BenchRow> {
    suite.terrains.iter().map(|e| run_entry(e, params, seed)).collect()
}

pub fn format_table(rows: &[BenchRow]) -> String {
    let mut out = format!(
        "{:<12} {:<16} {:>9} {:>9} {:>9} {:>9} {:>11}\n",
        "terrain", "status", "astar_s", "optim_s", "length_m", "expanded", "ms_per_iter"
    );
    for r in rows {
        out.push_str(&format!(
            "{:<12} {:<16} {:>9.3} {:>9.3} {:>9.3} {:>9} {:>11.4}\n",
            r.name,
            r.status,
            r.astar_seconds,
            r.optimizer_seconds,
            r.path_length_m,
            r.expanded_nodes,
            r.astar_seconds_per_iteration * 1e3
        ));
    }
    out
}
