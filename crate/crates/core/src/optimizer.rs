//! Gradient-descent smoothing of a body path.
//!
//! Five terms shape the path: uniform spacing and curvature (true gradients
//! of their costs), and obstacle clearance, foothold traversability and
//! contour alignment, which are modelled directly as descent directions
//! from height-map samples. After a warm-up phase the sharpest corners are
//! promoted to turn points and exempted from the curvature cost.

use crate::geometry::{wrap_angle, Frame, Vec2, Vec3};
use crate::params::{OptimizerParams, PlannerParams};
use crate::scalar::{count, lit, Scalar};
use crate::traversability::{Side, Terrain};

#[derive(Debug, Clone, PartialEq)]
pub struct BodyPath<T> {
    pub waypoints: Vec<Vec2<T>>,
    pub turn_points: Vec<bool>,
    pub frames: Vec<Frame<T>>,
}

impl<T: Scalar> BodyPath<T> {
    pub fn new(waypoints: Vec<Vec2<T>>) -> Self {
        let n = waypoints.len();
        let mut path = Self {
            waypoints,
            turn_points: vec![false; n],
            frames: Vec::new(),
        };
        path.recompute_frames(None);
        path
    }

    pub fn len(&self) -> usize {
        self.waypoints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.waypoints.is_empty()
    }

    pub fn length(&self) -> T {
        crate::astar::path_length(&self.waypoints)
    }

    pub fn turn_point_indices(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.turn_points[i]).collect()
    }

    /// Heading of waypoint `i`: along `x[i+1] - x[i-1]`, or the single
    /// adjacent segment at the ends.
    pub fn heading(&self, i: usize) -> Vec2<T> {
        let w = &self.waypoints;
        let n = w.len();
        if n < 2 {
            return Vec2::new(T::one(), T::zero());
        }
        let (a, b) = match i {
            0 => (w[0], w[1]),
            i if i == n - 1 => (w[n - 2], w[n - 1]),
            i => (w[i - 1], w[i + 1]),
        };
        b - a
    }

    /// Rebuilds every waypoint frame; `heights` sets the frame origins' z.
    pub fn recompute_frames(&mut self, heights: Option<&[Option<T>]>) {
        let frames = (0..self.len())
            .map(|i| {
                let z = heights.and_then(|h| h[i]).unwrap_or_else(T::zero);
                let previous = self.frames.get(i).map(|f| f.x_hat);
                let heading = self.heading(i);
                let heading = if heading.normalized().is_none() {
                    previous.unwrap_or(heading)
                } else {
                    heading
                };
                Frame::new(self.waypoints[i].lift(z), heading)
            })
            .collect();
        self.frames = frames;
    }
}

/// Sum of squared second differences, weighted.
pub fn spacing_cost<T: Scalar>(points: &[Vec2<T>], weight: T) -> T {
    points
        .windows(3)
        .map(|w| (w[2] - w[1] * (T::one() + T::one()) + w[0]).norm_squared())
        .sum::<T>()
        * weight
}

/// Gradient of [`spacing_cost`] for every waypoint.
pub fn spacing_gradients<T: Scalar>(points: &[Vec2<T>], weight: T) -> Vec<Vec2<T>> {
    let n = points.len();
    let two = T::one() + T::one();
    // d[i] = x[i+1] - 2 x[i] + x[i-1] for interior i, zero outside
    let d = |i: isize| -> Vec2<T> {
        if i < 1 || i as usize + 1 >= n {
            Vec2::zero()
        } else {
            let i = i as usize;
            points[i + 1] - points[i] * two + points[i - 1]
        }
    };
    (0..n as isize)
        .map(|k| (d(k - 1) - d(k) * two + d(k + 1)) * (two * weight))
        .collect()
}

pub fn spacing_gradient<T: Scalar>(points: &[Vec2<T>], i: usize, weight: T) -> Vec2<T> {
    spacing_gradients(points, weight)[i]
}

/// Signed heading change at each waypoint (zero at the ends).
pub fn heading_changes<T: Scalar>(points: &[Vec2<T>]) -> Vec<T> {
    let n = points.len();
    (0..n)
        .map(|i| {
            if i == 0 || i + 1 >= n {
                return T::zero();
            }
            let u = points[i] - points[i - 1];
            let v = points[i + 1] - points[i];
            if u.normalized().is_none() || v.normalized().is_none() {
                return T::zero();
            }
            wrap_angle(v.angle() - u.angle())
        })
        .collect()
}

fn deadband_excess<T: Scalar>(turn: T, params: &OptimizerParams<T>) -> Option<T> {
    let a = turn.abs() - params.curvature_deadband;
    (a > T::zero()).then_some(a)
}

/// Curvature cost of waypoint `i` alone (zero for turn points).
pub fn curvature_cost<T: Scalar>(turn: T, params: &OptimizerParams<T>) -> T {
    deadband_excess(turn, params)
        .map(|a| params.smoothness_weight * a.powf(params.smoothness_exponent))
        .unwrap_or_else(T::zero)
}

pub fn smoothness_cost<T: Scalar>(path: &BodyPath<T>, params: &OptimizerParams<T>) -> T {
    heading_changes(&path.waypoints)
        .into_iter()
        .enumerate()
        .filter(|&(i, _)| !path.turn_points[i])
        .map(|(_, d)| curvature_cost(d, params))
        .sum()
}

/// `∂ angle(u) / ∂ u`.
fn angle_jacobian<T: Scalar>(u: Vec2<T>) -> Vec2<T> {
    u.perp() * u.norm_squared().recip()
}

/// Analytic gradient of [`smoothness_cost`] for every waypoint.
pub fn smoothness_gradients<T: Scalar>(path: &BodyPath<T>, params: &OptimizerParams<T>) -> Vec<Vec2<T>> {
    let pts = &path.waypoints;
    let n = pts.len();
    let mut grad = vec![Vec2::zero(); n];
    let turns = heading_changes(pts);
    let k = params.smoothness_exponent;
    for i in 1..n.saturating_sub(1) {
        if path.turn_points[i] {
            continue;
        }
        let Some(a) = deadband_excess(turns[i], params) else {
            continue;
        };
        let u = pts[i] - pts[i - 1];
        let v = pts[i + 1] - pts[i];
        let sign = if turns[i] > T::zero() { T::one() } else { -T::one() };
        let coef = params.smoothness_weight * k * a.powf(k - T::one()) * sign;
        let (ju, jv) = (angle_jacobian(u), angle_jacobian(v));
        grad[i + 1] += jv * coef;
        grad[i] -= (jv + ju) * coef;
        grad[i - 1] += ju * coef;
    }
    grad
}

pub fn smoothness_gradient<T: Scalar>(path: &BodyPath<T>, i: usize, params: &OptimizerParams<T>) -> Vec2<T> {
    smoothness_gradients(path, params)[i]
}

/// Marks turn points: candidates are visited by decreasing curvature cost and
/// promoted when their heading change exceeds the threshold and they are far
/// enough from every turn point already chosen.
pub fn designate_turn_points<T: Scalar>(path: &BodyPath<T>, params: &OptimizerParams<T>) -> BodyPath<T> {
    let mut out = path.clone();
    out.turn_points.iter_mut().for_each(|t| *t = false);
    let turns = heading_changes(&path.waypoints);
    let n = path.len();
    let mut queue: Vec<(T, usize)> = (1..n.saturating_sub(1))
        .map(|i| (curvature_cost(turns[i], params), i))
        .collect();
    queue.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap().then(a.1.cmp(&b.1)));
    let mut chosen: Vec<usize> = Vec::new();
    for (_, i) in queue {
        if turns[i].abs() <= params.turn_point_threshold {
            continue;
        }
        let p = path.waypoints[i];
        if chosen
            .iter()
            .all(|&j| path.waypoints[j].distance(p) > params.turn_point_min_separation)
        {
            chosen.push(i);
            out.turn_points[i] = true;
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizationStats<T> {
    pub iterations: usize,
    pub converged: bool,
    pub final_gradient_norm: T,
}

/// Per-waypoint diagnostics of a path against the terrain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaypointDiagnostics<T> {
    /// Best of the two nominal foothold scores.
    pub best_foothold: T,
    /// `|θ (ŷ · n̂)|` with the incline measured across the neighbors.
    pub contour_alignment: T,
}

/// Runs the descent loop over a [`Terrain`].
pub struct Optimizer<'a, 'm, T> {
    terrain: &'a Terrain<'m, T>,
}

struct TermGradients<T> {
    spacing: Vec<Vec2<T>>,
    smoothness: Vec<Vec2<T>>,
    obstacle: Vec<Vec2<T>>,
    traversability: Vec<Vec2<T>>,
    contour: Vec<Vec2<T>>,
}

impl<'a, 'm, T: Scalar> Optimizer<'a, 'm, T> {
    pub fn new(terrain: &'a Terrain<'m, T>) -> Self {
        Self { terrain }
    }

    fn planner_params(&self) -> &PlannerParams<T> {
        self.terrain.params()
    }

    fn params(&self) -> &OptimizerParams<T> {
        &self.terrain.params().optimizer
    }

    pub fn waypoint_heights(&self, path: &BodyPath<T>) -> Vec<Option<T>> {
        path.waypoints.iter().map(|&p| self.terrain.node_height(p)).collect()
    }

    /// Refreshes frames using terrain heights.
    pub fn refresh_frames(&self, path: &mut BodyPath<T>) -> Vec<Option<T>> {
        let heights = self.waypoint_heights(path);
        path.recompute_frames(Some(&heights));
        heights
    }

    /// Obstacle push for waypoint `i`, parallel to its lateral axis.
    pub fn obstacle_gradient(&self, path: &BodyPath<T>, i: usize, height: Option<T>) -> Vec2<T> {
        let Some(h) = height else {
            return Vec2::zero();
        };
        let pp = self.planner_params();
        let frame = &path.frames[i];
        let map = self.terrain.map();
        let bottom = h + pp.box_offset;
        let half_width = pp.box_width * lit::<T>(0.5);
        let mut n = 0usize;
        let mut acc = T::zero();
        for (ix, iy) in map.cells_in_rect(frame, Vec2::zero(), pp.box_length, pp.box_width) {
            if !map.surface_height(ix, iy).is_some_and(|z| z > bottom) {
                continue;
            }
            let d = frame.to_local(map.cell_center(ix, iy)).y;
            let o = half_width - d.abs();
            let sign = if d > T::zero() {
                T::one()
            } else if d < T::zero() {
                -T::one()
            } else {
                T::zero()
            };
            acc += o * sign;
            n += 1;
        }
        if n == 0 {
            return Vec2::zero();
        }
        let two = T::one() + T::one();
        frame.y_hat * (self.params().obstacle_weight * two * acc / count(n))
    }

    fn nominal_scores(&self, path: &BodyPath<T>, heights: &[Option<T>]) -> Vec<[T; 2]> {
        let spec = self.planner_params().region_spec();
        (0..path.len())
            .map(|i| match heights[i] {
                Some(h) => Side::BOTH.map(|s| self.terrain.score_region(&path.frames[i], s, &spec, h, T::zero())),
                None => [T::zero(), T::zero()],
            })
            .collect()
    }

    fn traversability_term(&self, path: &BodyPath<T>, i: usize, height: Option<T>, nominal: &[[T; 2]]) -> Vec2<T> {
        let Some(h) = height else {
            return Vec2::zero();
        };
        let params = self.params();
        let spec = self.planner_params().region_spec();
        let frame = &path.frames[i];
        let lo = i.saturating_sub(params.preview_half_width);
        let hi = (i + params.preview_half_width).min(path.len() - 1);
        let mut g = Vec2::zero();
        for (k, side) in Side::BOTH.into_iter().enumerate() {
            let preview = nominal[lo..=hi].iter().map(|s| s[k]).fold(T::zero(), T::max);
            let deficit = T::one() - preview;
            if deficit <= T::zero() {
                continue;
            }
            let shift = params.lateral_probe_shift;
            let outer = self.terrain.score_region(frame, side, &spec, h, shift);
            let inner = self.terrain.score_region(frame, side, &spec, h, -shift);
            let lateral = frame.y_hat * side.sign::<T>();
            g -= lateral * (deficit * (outer - inner));
        }
        g * params.traversability_weight
    }

    /// Lateral traversability gradient of waypoint `i`.
    pub fn traversability_gradient(&self, path: &BodyPath<T>, i: usize) -> Vec2<T> {
        let heights = self.waypoint_heights(path);
        let nominal = self.nominal_scores(path, &heights);
        self.traversability_term(path, i, heights[i], &nominal)
    }

    /// Incline across the neighbors of `i` and the contour normal at `i`.
    fn contour_geometry(&self, path: &BodyPath<T>, i: usize, heights: &[Option<T>]) -> Option<(T, Vec3<T>)> {
        let (a, b) = (path.waypoints[i - 1], path.waypoints[i + 1]);
        let (Some(za), Some(zb)) = (heights[i - 1], heights[i + 1]) else {
            return None;
        };
        let run = b.distance(a);
        if !(run > T::epsilon()) {
            return None;
        }
        let normal = self.terrain.contour_normal(path.waypoints[i])?;
        Some((((zb - za) / run).atan(), normal))
    }

    /// Contour shaping contribution of waypoint `i` to its neighbors, as
    /// `(to x[i-1], to x[i+1])`.
    pub fn contour_gradient(&self, path: &BodyPath<T>, i: usize, heights: &[Option<T>]) -> (Vec2<T>, Vec2<T>) {
        if i == 0 || i + 1 >= path.len() {
            return (Vec2::zero(), Vec2::zero());
        }
        let Some((incline, normal)) = self.contour_geometry(path, i, heights) else {
            return (Vec2::zero(), Vec2::zero());
        };
        let y_hat = path.frames[i].y_hat;
        let push = y_hat * (incline * normal.dot(y_hat.lift(T::zero())) * self.params().contour_shaping_weight);
        (-push, push)
    }

    fn term_gradients(&self, path: &BodyPath<T>, heights: &[Option<T>]) -> TermGradients<T> {
        let params = self.params();
        let n = path.len();
        let nominal = self.nominal_scores(path, heights);
        let mut contour = vec![Vec2::zero(); n];
        for i in 1..n.saturating_sub(1) {
            let (prev, next) = self.contour_gradient(path, i, heights);
            contour[i - 1] += prev;
            contour[i + 1] += next;
        }
        TermGradients {
            spacing: spacing_gradients(&path.waypoints, params.spacing_weight),
            smoothness: smoothness_gradients(path, params),
            obstacle: (0..n).map(|i| self.obstacle_gradient(path, i, heights[i])).collect(),
            traversability: (0..n)
                .map(|i| self.traversability_term(path, i, heights[i], &nominal))
                .collect(),
            contour,
        }
    }

    /// Full descent direction; endpoints are zero.
    pub fn gradient(&self, path: &BodyPath<T>, heights: &[Option<T>]) -> Vec<Vec2<T>> {
        let t = self.term_gradients(path, heights);
        let n = path.len();
        (0..n)
            .map(|i| {
                if i == 0 || i + 1 == n {
                    return Vec2::zero();
                }
                t.spacing[i] + t.smoothness[i] + t.obstacle[i] + t.traversability[i] + t.contour[i]
            })
            .collect()
    }

    /// Applies one capped descent update and returns the normalized
    /// gradient norm it was computed from.
    pub fn step(&self, path: &mut BodyPath<T>) -> T {
        let heights = self.refresh_frames(path);
        let grad = self.gradient(path, &heights);
        let params = self.params();
        let norm = grad.iter().map(|g| g.norm_squared()).sum::<T>().sqrt() / count(path.len());
        for (x, g) in path.waypoints.iter_mut().zip(&grad) {
            let mut delta = *g * params.gain;
            let len = delta.norm();
            if len > params.step_cap {
                delta = delta * (params.step_cap / len);
            }
            *x -= delta;
        }
        norm
    }

    pub fn optimize(&self, path: &BodyPath<T>) -> BodyPath<T> {
        self.optimize_with_stats(path).0
    }

    pub fn optimize_with_stats(&self, path: &BodyPath<T>) -> (BodyPath<T>, OptimizationStats<T>) {
        let params = self.params();
        let mut path = path.clone();
        let mut stats = OptimizationStats {
            iterations: 0,
            converged: false,
            final_gradient_norm: T::zero(),
        };
        if path.len() < 3 {
            self.refresh_frames(&mut path);
            stats.converged = true;
            return (path, stats);
        }
        let mut designated = false;
        while stats.iterations < params.max_iterations {
            if !designated && stats.iterations >= params.warmup_iterations {
                path = designate_turn_points(&path, params);
                designated = true;
            }
            let heights = self.refresh_frames(&mut path);
            let grad = self.gradient(&path, &heights);
            let norm = grad.iter().map(|g| g.norm_squared()).sum::<T>().sqrt() / count(path.len());
            stats.final_gradient_norm = norm;
            if norm < params.convergence_threshold {
                if designated {
                    stats.converged = true;
                    break;
                }
                path = designate_turn_points(&path, params);
                designated = true;
                if path.turn_points.iter().all(|t| !t) {
                    stats.converged = true;
                    break;
                }
                continue;
            }
            for (x, g) in path.waypoints.iter_mut().zip(&grad) {
                let mut delta = *g * params.gain;
                let len = delta.norm();
                if len > params.step_cap {
                    delta = delta * (params.step_cap / len);
                }
                *x -= delta;
            }
            stats.iterations += 1;
        }
        self.refresh_frames(&mut path);
        (path, stats)
    }

    pub fn diagnostics(&self, path: &BodyPath<T>) -> Vec<WaypointDiagnostics<T>> {
        let mut path = path.clone();
        let heights = self.refresh_frames(&mut path);
        let nominal = self.nominal_scores(&path, &heights);
        (0..path.len())
            .map(|i| {
                let contour_alignment = if i == 0 || i + 1 >= path.len() {
                    T::zero()
                } else {
                    self.contour_geometry(&path, i, &heights)
                        .map(|(theta, n)| (theta * n.dot(path.frames[i].y_hat3())).abs())
                        .unwrap_or_else(T::zero)
                };
                WaypointDiagnostics {
                    best_foothold: nominal[i][0].max(nominal[i][1]),
                    contour_alignment,
                }
            })
            .collect()
    }
}
