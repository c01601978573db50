//! Terrain-aware body-path planning for legged robots.
//!
//! The pipeline builds a filtered 2.5D [`HeightMap`] from point clouds,
//! searches it with a 16-connected A* whose edge costs reflect foothold and
//! stance availability for a biped ([`astar`]), then smooths the result with
//! a gradient-descent waypoint optimizer ([`optimizer`]).
//!
//! All numerics are generic over [`Scalar`] (`f32` or `f64`); the `*F64`
//! and `*F32` aliases below name the common instantiations.

// `!(x > 0)` style checks are deliberate: they reject NaN as well
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod astar;
pub mod error;
pub mod geometry;
pub mod heightmap;
pub mod optimizer;
pub mod params;
pub mod scalar;
pub mod terraingen;
pub mod traversability;

pub use astar::{GraphEdge, GraphNode, Infeasible, Planner, SearchResult, SearchStatus};
pub use error::{Error, Result};
pub use geometry::{EdgeFrame, Frame, Vec2, Vec3, WaypointFrame};
pub use heightmap::{CellState, HeightMap, PointCloud};
pub use optimizer::{BodyPath, Optimizer};
pub use params::{BodyBox, OptimizerParams, PlannerParams, RegionSpec};
pub use scalar::Scalar;
pub use terraingen::{MapParams, TerrainKind, TerrainSpec};
pub use traversability::{Side, Terrain, TraversabilitySample};

pub type HeightMapF64 = HeightMap<f64>;
pub type HeightMapF32 = HeightMap<f32>;
pub type PointCloudF64 = PointCloud<f64>;
pub type PointCloudF32 = PointCloud<f32>;
pub type PlannerParamsF64 = PlannerParams<f64>;
pub type PlannerParamsF32 = PlannerParams<f32>;
pub type BodyPathF64 = BodyPath<f64>;
pub type BodyPathF32 = BodyPath<f32>;
pub type SearchResultF64 = SearchResult<f64>;
pub type SearchResultF32 = SearchResult<f32>;
pub type TerrainSpecF64 = TerrainSpec<f64>;
pub type TerrainSpecF32 = TerrainSpec<f32>;
