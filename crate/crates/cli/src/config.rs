//! Input files: planner parameters and terrain generator configs.

use std::fs;
use std::path::Path;

use bodypath::terraingen::{MapParams, TerrainSpec};
use bodypath::PlannerParams;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::CliError;

pub fn read_text(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))
}

pub fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| CliError::Input(format!("cannot write {}: {e}", path.display())))
}

/// Parses a flat parameter object. Keys that are not parameters are
/// rejected so that a typo does not silently fall back to a default.
pub fn parse_params(text: &str) -> Result<PlannerParams<f64>, CliError> {
    let value: Value = serde_json::from_str(text).map_err(|e| CliError::Input(format!("params: {e}")))?;
    let Value::Object(fields) = &value else {
        return Err(CliError::Input("params: expected a JSON object".into()));
    };
    let known = serde_json::to_value(PlannerParams::<f64>::default()).expect("defaults serialize");
    let known = known.as_object().expect("params serialize to an object");
    if let Some(key) = fields.keys().find(|k| !known.contains_key(*k)) {
        return Err(CliError::Input(format!("params: unknown parameter `{key}`")));
    }
    let params: PlannerParams<f64> =
        serde_json::from_value(value).map_err(|e| CliError::Input(format!("params: {e}")))?;
    params.validate()?;
    Ok(params)
}

pub fn load_params(path: Option<&Path>) -> Result<PlannerParams<f64>, CliError> {
    match path {
        Some(p) => parse_params(&read_text(p)?),
        None => Ok(PlannerParams::default()),
    }
}

/// A terrain spec plus the grid it is sampled on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapgenConfig {
    #[serde(flatten)]
    pub terrain: TerrainSpec<f64>,
    #[serde(default)]
    pub map: MapParams<f64>,
}

pub fn parse_mapgen(text: &str) -> Result<MapgenConfig, CliError> {
    let config: MapgenConfig = serde_json::from_str(text).map_err(|e| CliError::Input(format!("terrain spec: {e}")))?;
    config.terrain.validate()?;
    Ok(config)
}

/// `x,y` with optional whitespace.
pub fn parse_point(s: &str) -> Result<[f64; 2], String> {
    let (x, y) = s.split_once(',').ok_or_else(|| format!("expected `x,y`, got `{s}`"))?;
    let parse = |t: &str| {
        t.trim()
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| format!("not a finite number: `{}`", t.trim()))
    };
    Ok([parse(x)?, parse(y)?])
}

/// Unit and meaning of every parameter, in declaration order.
pub const PARAM_DOCS: &[(&str, &str, &str)] = &[
    ("map_resolution", "m", "height map cell size"),
    (
        "sensor_noise_sigma",
        "m",
        "range noise; the ground threshold is twice this",
    ),
    (
        "fuse_window",
        "m",
        "samples further than this below a cell's top sample are dropped",
    ),
    (
        "spike_threshold",
        "m",
        "height above every known neighbor that marks an outlier",
    ),
    (
        "graph_resolution",
        "m",
        "A* node spacing, a multiple of the map resolution",
    ),
    ("max_incline_deg", "deg", "steepest edge pitch"),
    (
        "min_foothold_traversability",
        "1",
        "edges with a lower foothold score are infeasible",
    ),
    (
        "foothold_weight",
        "m",
        "cost per unit of missing foothold traversability",
    ),
    ("stance_weight", "m", "cost per unit of missing stance traversability"),
    ("contour_weight", "m/rad^2", "cost per unit of pitch times roll"),
    ("node_height_radius", "m", "disk sampled for a node's height"),
    (
        "node_height_window",
        "m",
        "band below the disk's top sample that is averaged",
    ),
    ("timeout_seconds", "s", "wall clock budget for one search"),
    ("box_length", "m", "torso box extent along the heading"),
    ("box_width", "m", "torso box extent across the heading"),
    ("box_height", "m", "torso box height"),
    ("box_offset", "m", "box bottom above the node height"),
    (
        "stance_offset",
        "m",
        "lateral distance of a foothold region from the path",
    ),
    ("region_length", "m", "foothold region extent along the heading"),
    ("region_width", "m", "foothold region extent across the heading"),
    (
        "max_cell_incline_deg",
        "deg",
        "steepest cell normal inside a foothold region",
    ),
    (
        "max_height_difference",
        "m",
        "largest cell offset from the node height inside a region",
    ),
    ("ransac_radius", "m", "disk used for per-cell normals"),
    ("ransac_iterations", "count", "plane hypotheses per normal"),
    (
        "ransac_inlier_threshold",
        "m",
        "distance that counts a point as an inlier",
    ),
    ("lsq_radius", "m", "disk used for the least-squares contour normal"),
    ("spacing_weight", "1", "weight of the second-difference spacing cost"),
    ("smoothness_weight", "1", "weight of the heading change cost"),
    ("obstacle_weight", "1/m", "weight of the torso overlap cost"),
    ("traversability_weight", "m", "weight of the foothold gradient"),
    (
        "contour_shaping_weight",
        "m/rad",
        "weight of the contour alignment gradient",
    ),
    ("curvature_deadband", "rad", "heading change that costs nothing"),
    (
        "smoothness_exponent",
        "1",
        "power applied to heading change beyond the deadband",
    ),
    ("gain", "1", "descent step multiplier"),
    ("max_iterations", "count", "descent iterations"),
    (
        "convergence_threshold",
        "m",
        "gradient norm per waypoint that ends descent",
    ),
    (
        "preview_half_width",
        "count",
        "waypoints on each side checked for a better foothold",
    ),
    (
        "lateral_probe_shift",
        "m",
        "shift of the probe regions used for the foothold gradient",
    ),
    (
        "turn_point_threshold",
        "rad",
        "heading change that makes a waypoint a turn point",
    ),
    (
        "turn_point_min_separation",
        "m",
        "closest allowed distance between turn points",
    ),
    ("warmup_iterations", "count", "iterations before turn points are chosen"),
    ("step_cap", "m", "largest move of one waypoint in one iteration"),
];

/// Plain text table of every parameter with its default.
pub fn describe_params() -> String {
    let defaults = serde_json::to_value(PlannerParams::<f64>::default()).expect("defaults serialize");
    let mut out = format!("{:<30} {:>10} {:<8} {}\n", "parameter", "default", "unit", "meaning");
    for (name, unit, meaning) in PARAM_DOCS {
        out.push_str(&format!(
            "{:<30} {:>10} {:<8} {}\n",
            name,
            defaults[*name].to_string(),
            unit,
            meaning
        ));
    }
    out
}
