//! Every tunable constant of the pipeline, in one place.
//!
//! The layout is flat so that a single JSON object overrides any subset of
//! fields; omitted fields keep their defaults.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{lit, Scalar};

/// Foothold sampling rectangle relative to a frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegionSpec<T> {
    /// Extent along `x_hat`.
    pub length: T,
    /// Extent along `y_hat`.
    pub width: T,
    /// Nominal lateral distance of the foothold from the sagittal plane.
    pub stance_offset: T,
}

/// Torso bounding volume used for collision checks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BodyBox<T> {
    pub length: T,
    pub width: T,
    pub height: T,
    /// Height of the box bottom above the reference node height.
    pub vertical_offset: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, bound(deserialize = "T: Scalar + Deserialize<'de>"))]
pub struct OptimizerParams<T> {
    pub spacing_weight: T,
    pub smoothness_weight: T,
    pub obstacle_weight: T,
    pub traversability_weight: T,
    pub contour_shaping_weight: T,
    /// Curvature deadband (rad).
    pub curvature_deadband: T,
    pub smoothness_exponent: T,
    pub gain: T,
    pub max_iterations: usize,
    /// Gradient norm per waypoint below which descent stops.
    pub convergence_threshold: T,
    pub preview_half_width: usize,
    pub lateral_probe_shift: T,
    /// Minimum heading change (rad) for a turn point.
    pub turn_point_threshold: T,
    pub turn_point_min_separation: T,
    /// Plain iterations before turn points are designated.
    pub warmup_iterations: usize,
    /// Maximum displacement of a waypoint in a single update.
    pub step_cap: T,
}

impl<T: Scalar> Default for OptimizerParams<T> {
    fn default() -> Self {
        Self {
            spacing_weight: lit(2.0),
            smoothness_weight: lit(0.7),
            obstacle_weight: lit(700.0),
            traversability_weight: lit(20.0),
            contour_shaping_weight: lit(20.0),
            curvature_deadband: lit(0.2),
            smoothness_exponent: lit(2.0),
            gain: lit(0.01),
            max_iterations: 300,
            convergence_threshold: lit(1e-3),
            preview_half_width: 3,
            lateral_probe_shift: lit(0.08),
            turn_point_threshold: lit(0.4),
            turn_point_min_separation: lit(0.5),
            warmup_iterations: 50,
            step_cap: lit(0.01),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, bound(deserialize = "T: Scalar + Deserialize<'de>"))]
pub struct PlannerParams<T> {
    // height map
    pub map_resolution: T,
    pub sensor_noise_sigma: T,
    pub fuse_window: T,
    pub spike_threshold: T,

    // graph
    pub graph_resolution: T,
    pub max_incline_deg: T,
    pub min_foothold_traversability: T,
    pub foothold_weight: T,
    pub stance_weight: T,
    pub contour_weight: T,
    pub node_height_radius: T,
    pub node_height_window: T,
    pub timeout_seconds: T,

    // body box
    pub box_length: T,
    pub box_width: T,
    pub box_height: T,
    pub box_offset: T,

    // foothold regions
    pub stance_offset: T,
    pub region_length: T,
    pub region_width: T,
    pub max_cell_incline_deg: T,
    pub max_height_difference: T,

    // surface normals
    pub ransac_radius: T,
    pub ransac_iterations: usize,
    pub ransac_inlier_threshold: T,
    pub lsq_radius: T,

    #[serde(flatten)]
    pub optimizer: OptimizerParams<T>,
}

impl<T: Scalar> Default for PlannerParams<T> {
    fn default() -> Self {
        Self {
            map_resolution: lit(0.02),
            sensor_noise_sigma: lit(0.018),
            fuse_window: lit(0.05),
            spike_threshold: lit(0.10),
            graph_resolution: lit(0.06),
            max_incline_deg: lit(40.0),
            min_foothold_traversability: lit(0.25),
            foothold_weight: lit(2.5),
            stance_weight: lit(1.0),
            contour_weight: lit(1.0),
            node_height_radius: lit(0.10),
            node_height_window: lit(0.05),
            timeout_seconds: lit(10.0),
            box_length: lit(0.40),
            box_width: lit(0.70),
            box_height: lit(1.2),
            box_offset: lit(0.40),
            stance_offset: lit(0.25),
            region_length: lit(0.35),
            region_width: lit(0.20),
            max_cell_incline_deg: lit(25.0),
            max_height_difference: lit(0.10),
            ransac_radius: lit(0.10),
            ransac_iterations: 60,
            ransac_inlier_threshold: lit(0.02),
            lsq_radius: lit(0.20),
            optimizer: OptimizerParams::default(),
        }
    }
}

impl<T: Scalar> PlannerParams<T> {
    /// Ground clearing threshold, twice the sensor noise.
    pub fn ground_threshold(&self) -> T {
        self.sensor_noise_sigma + self.sensor_noise_sigma
    }

    pub fn max_incline(&self) -> T {
        self.max_incline_deg.to_radians()
    }

    pub fn max_cell_incline(&self) -> T {
        self.max_cell_incline_deg.to_radians()
    }

    pub fn region_spec(&self) -> RegionSpec<T> {
        RegionSpec {
            length: self.region_length,
            width: self.region_width,
            stance_offset: self.stance_offset,
        }
    }

    pub fn body_box(&self) -> BodyBox<T> {
        BodyBox {
            length: self.box_length,
            width: self.box_width,
            height: self.box_height,
            vertical_offset: self.box_offset,
        }
    }

    /// Graph cells per height-map cell, when the ratio is integral.
    pub fn graph_multiple(&self) -> Option<usize> {
        let ratio = self.graph_resolution / self.map_resolution;
        let r = ratio.round();
        if r >= T::one() && (ratio - r).abs() < lit(1e-6) {
            r.to_usize()
        } else {
            None
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("map_resolution", self.map_resolution),
            ("graph_resolution", self.graph_resolution),
            ("box_length", self.box_length),
            ("box_width", self.box_width),
            ("box_height", self.box_height),
            ("stance_offset", self.stance_offset),
            ("region_length", self.region_length),
            ("region_width", self.region_width),
            ("node_height_radius", self.node_height_radius),
            ("ransac_radius", self.ransac_radius),
            ("lsq_radius", self.lsq_radius),
            ("gain", self.optimizer.gain),
            ("timeout_seconds", self.timeout_seconds),
        ];
        for (name, v) in positive {
            if !(v > T::zero()) || !v.is_finite() {
                return Err(Error::invalid(format!("{name} must be positive, got {v}")));
            }
        }
        let nonneg = [
            ("foothold_weight", self.foothold_weight),
            ("stance_weight", self.stance_weight),
            ("contour_weight", self.contour_weight),
            ("node_height_window", self.node_height_window),
            ("box_offset", self.box_offset),
            ("spacing_weight", self.optimizer.spacing_weight),
            ("smoothness_weight", self.optimizer.smoothness_weight),
            ("obstacle_weight", self.optimizer.obstacle_weight),
            ("traversability_weight", self.optimizer.traversability_weight),
            ("contour_shaping_weight", self.optimizer.contour_shaping_weight),
            ("step_cap", self.optimizer.step_cap),
        ];
        for (name, v) in nonneg {
            if !(v >= T::zero()) || !v.is_finite() {
                return Err(Error::invalid(format!("{name} must be non-negative, got {v}")));
            }
        }
        let t = self.min_foothold_traversability;
        if !(t >= T::zero() && t <= T::one()) {
            return Err(Error::invalid(format!(
                "min_foothold_traversability must lie in [0, 1], got {t}"
            )));
        }
        if self.optimizer.smoothness_exponent < T::one() {
            return Err(Error::invalid("smoothness_exponent must be at least 1"));
        }
        if self.graph_multiple().is_none() {
            return Err(Error::invalid(format!(
                "graph_resolution {} is not a multiple of map_resolution {}",
                self.graph_resolution, self.map_resolution
            )));
        }
        Ok(())
    }
}
