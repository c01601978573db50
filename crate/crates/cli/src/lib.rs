//! Command-line front end: terrain generation, point cloud ingestion,
//! planning with SVG output, and benchmarking.
//!
//! Exit codes are 0 on success, 2 for bad input and 3 when planning does
//! not reach the goal.

pub mod bench;
pub mod config;
pub mod report;
pub mod svg;

use std::path::PathBuf;

use bodypath::terraingen::generate;
use bodypath::{HeightMap, PointCloud, Vec2};
use clap::{Args, Parser, Subcommand};
use thiserror::Error;

use crate::config::{load_params, parse_mapgen, parse_point, read_text, write_text};
use crate::report::{run_plan, PlanReport};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("planning failed: {0}")]
    Planning(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 2,
            CliError::Planning(_) => 3,
        }
    }
}

impl From<bodypath::Error> for CliError {
    fn from(e: bodypath::Error) -> Self {
        CliError::Input(e.to_string())
    }
}

#[derive(Debug, Parser)]
#[command(name = "bodypath", version, about = "Body path planning on 2.5D height maps")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a height map from a terrain spec.
    Mapgen(MapgenArgs),
    /// Fuse point clouds into a filtered height map.
    Ingest(IngestArgs),
    /// Plan and optimize a path, writing a JSON report.
    Plan(PlanArgs),
    /// Run a terrain suite end to end and tabulate timings.
    Bench(BenchArgs),
    /// Print planner parameters.
    Params(ParamsArgs),
}

#[derive(Debug, Clone, Args)]
pub struct MapgenArgs {
    /// Terrain spec (JSON).
    pub spec: PathBuf,
    /// Output height map.
    #[arg(short, long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct IngestArgs {
    /// Point cloud files with one `x y z` triple per line, fused in order.
    #[arg(required = true)]
    pub clouds: Vec<PathBuf>,
    /// Output height map.
    #[arg(short, long)]
    pub out: PathBuf,
    #[arg(long)]
    pub params: Option<PathBuf>,
    /// Map center as `x,y`.
    #[arg(long, value_parser = parse_point, allow_hyphen_values = true, default_value = "0,0")]
    pub center: [f64; 2],
    /// Map side length (m).
    #[arg(long, default_value_t = 4.0)]
    pub width: f64,
    /// Cell size (m); defaults to the `map_resolution` parameter.
    #[arg(long)]
    pub resolution: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct PlanArgs {
    #[arg(long)]
    pub map: PathBuf,
    /// Start position `x,y` (m).
    #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
    pub start: [f64; 2],
    /// Goal position `x,y` (m).
    #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
    pub goal: [f64; 2],
    /// Parameter overrides (JSON); defaults when omitted.
    #[arg(long)]
    pub params: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub svg: Option<PathBuf>,
    /// Seed for the surface normal estimates.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Args)]
pub struct BenchArgs {
    /// Suite file (JSON); the built-in ramp, stairs, stones and obstacle
    /// suite when omitted.
    #[arg(long)]
    pub suite: Option<PathBuf>,
    #[arg(long)]
    pub params: Option<PathBuf>,
    /// Rows as JSON.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Args)]
pub struct ParamsArgs {
    /// Print the defaults as JSON.
    #[arg(long, conflicts_with_all = ["describe", "params"])]
    pub print_defaults: bool,
    /// Print a table of every parameter with its default, unit and meaning.
    #[arg(long, conflicts_with = "params")]
    pub describe: bool,
    /// Print the effective parameters after applying this file.
    #[arg(long)]
    pub params: Option<PathBuf>,
}

pub fn load_map(path: &std::path::Path) -> Result<HeightMap<f64>, CliError> {
    HeightMap::from_json_str(&read_text(path)?).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

pub fn cmd_mapgen(args: &MapgenArgs) -> Result<(), CliError> {
    let config = parse_mapgen(&read_text(&args.spec)?)?;
    let map = generate(&config.terrain, &config.map)?;
    write_text(&args.out, &map.to_json_string())
}

pub fn cmd_ingest(args: &IngestArgs) -> Result<(), CliError> {
    let params = load_params(args.params.as_deref())?;
    let resolution = args.resolution.unwrap_or(params.map_resolution);
    let mut map = HeightMap::new(Vec2::new(args.center[0], args.center[1]), resolution, args.width)?;
    for path in &args.clouds {
        let cloud = PointCloud::parse_ascii(&read_text(path)?)
            .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        map.fuse_cloud(&cloud, params.fuse_window);
    }
    map.apply_filters(params.ground_threshold(), params.spike_threshold)?;
    write_text(&args.out, &map.to_json_string())
}

/// Writes the report (and SVG) even when the goal is not reached, then
/// reports the failure.
pub fn cmd_plan(args: &PlanArgs) -> Result<PlanReport, CliError> {
    let map = load_map(&args.map)?;
    let params = load_params(args.params.as_deref())?;
    let start = Vec2::new(args.start[0], args.start[1]);
    let goal = Vec2::new(args.goal[0], args.goal[1]);
    let outcome = run_plan(&map, &params, start, goal, args.seed)?;
    let report = outcome.report;
    write_text(&args.out, &report.to_json_string())?;
    if let Some(svg_path) = &args.svg {
        let svg = svg::render(
            &map,
            &outcome.search.path,
            &outcome.optimized.waypoints,
            &report.turn_points,
        );
        write_text(svg_path, &svg)?;
    }
    if !report.reached() {
        return Err(CliError::Planning(format!(
            "search ended with status {}",
            report.status
        )));
    }
    Ok(report)
}

pub fn cmd_bench(args: &BenchArgs) -> Result<Vec<bench::BenchRow>, CliError> {
    let params = load_params(args.params.as_deref())?;
    let suite = match &args.suite {
        Some(path) => serde_json::from_str(&read_text(path)?).map_err(|e| CliError::Input(format!("suite: {e}")))?,
        None => bench::default_suite(),
    };
    let rows = bench::run_suite(&suite, &params, args.seed);
    print!("{}", bench::format_table(&rows));
    if let Some(out) = &args.out {
        let mut text = serde_json::to_string_pretty(&rows).expect("rows serialize");
        text.push('\n');
        write_text(out, &text)?;
    }
    Ok(rows)
}

pub fn cmd_params(args: &ParamsArgs) -> Result<String, CliError> {
    if args.describe {
        return Ok(config::describe_params());
    }
    let params = load_params(args.params.as_deref())?;
    let mut text = serde_json::to_string_pretty(&params).expect("params serialize");
    text.push('\n');
    Ok(text)
}

/// Runs one command, returning the process exit code.
pub fn run(cli: Cli) -> i32 {
    let result = match cli.command {
        Command::Mapgen(a) => cmd_mapgen(&a),
        Command::Ingest(a) => cmd_ingest(&a),
        Command::Plan(a) => cmd_plan(&a).map(|r| {
            println!(
                "{}: {:.3} m, {} nodes expanded, A* {:.3} s, optimizer {:.3} s",
                r.status,
                r.stats.path_length_m,
                r.stats.expanded_nodes,
                r.stats.astar_seconds,
                r.stats.optimizer_seconds
            )
        }),
        Command::Bench(a) => cmd_bench(&a).map(|_| ()),
        Command::Params(a) => cmd_params(&a).map(|t| print!("{t}")),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
