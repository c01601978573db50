//! Surface normals and foothold-region scoring.
//!
//! A region is scored as the fraction of its cells that are walkable: the
//! cell is observed, its RANSAC surface incline is below the cell limit and
//! its height is close to the reference (node) height. Unobserved and
//! out-of-map cells count against the score.

use std::sync::OnceLock;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::geometry::{Frame, Vec2, Vec3};
use crate::heightmap::HeightMap;
use crate::params::{PlannerParams, RegionSpec};
use crate::scalar::{count, lit, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    Left,
    Right,
}

impl Side {
    pub const BOTH: [Side; 2] = [Side::Left, Side::Right];

    /// `+1` for the `+y_hat` side.
    pub fn sign<T: Scalar>(self) -> T {
        match self {
            Side::Left => T::one(),
            Side::Right => -T::one(),
        }
    }
}

/// The four region scores of an edge and the two metrics derived from them.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraversabilitySample<T> {
    /// Child node, left side.
    pub t_jl: T,
    /// Child node, right side.
    pub t_jr: T,
    /// Parent node, left side.
    pub t_il: T,
    /// Parent node, right side.
    pub t_ir: T,
    /// Foothold traversability.
    pub t_f: T,
    /// Stance traversability.
    pub t_s: T,
}

impl<T: Scalar> TraversabilitySample<T> {
    pub fn from_scores(t_jl: T, t_jr: T, t_il: T, t_ir: T) -> Self {
        Self {
            t_jl,
            t_jr,
            t_il,
            t_ir,
            t_f: t_jl.max(t_jr),
            t_s: (t_jl * t_ir).sqrt().max((t_jr * t_il).sqrt()),
        }
    }
}

fn surface_points<T: Scalar>(map: &HeightMap<T>, p: Vec2<T>, radius: T) -> Vec<Vec3<T>> {
    map.cells_in_disk(p, radius)
        .filter_map(|(ix, iy)| map.surface_height(ix, iy).map(|h| map.cell_center(ix, iy).lift(h)))
        .collect()
}

/// Least-squares fit of `z = a x + b y + c`; returns the upward unit normal.
fn fit_height_plane<T: Scalar>(points: &[Vec3<T>]) -> Option<Vec3<T>> {
    if points.len() < 3 {
        return None;
    }
    let n = count::<T>(points.len());
    let mean = points
        .iter()
        .fold(Vec3::new(T::zero(), T::zero(), T::zero()), |a, &p| a + p)
        * n.recip();
    let (mut sxx, mut sxy, mut syy, mut sxz, mut syz) = (T::zero(), T::zero(), T::zero(), T::zero(), T::zero());
    for &p in points {
        let d = p - mean;
        sxx += d.x * d.x;
        sxy += d.x * d.y;
        syy += d.y * d.y;
        sxz += d.x * d.z;
        syz += d.y * d.z;
    }
    let det = sxx * syy - sxy * sxy;
    let scale = (sxx + syy) * (sxx + syy);
    if !(det > scale * lit(1e-12)) {
        return None;
    }
    let a = (sxz * syy - syz * sxy) / det;
    let b = (syz * sxx - sxz * sxy) / det;
    Vec3::new(-a, -b, T::one()).normalized()
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn cell_seed(ix: i64, iy: i64, seed: u64) -> u64 {
    splitmix64(splitmix64(ix as u64 ^ seed).wrapping_add(iy as u64))
}

/// RANSAC plane normal over the observed cells within `radius` of `p`,
/// refined by a least-squares fit on the winning inlier set.
///
/// The random stream is seeded from the index of the cell containing `p`
/// and `seed`, so a query always returns the same normal.
pub fn normal_ransac<T: Scalar>(
    map: &HeightMap<T>,
    p: Vec2<T>,
    radius: T,
    iterations: usize,
    inlier_threshold: T,
    seed: u64,
) -> Option<Vec3<T>> {
    let pts = surface_points(map, p, radius);
    if pts.len() < 3 {
        return None;
    }
    let (cx, cy) = map.grid_coords(p);
    let mut rng = ChaCha8Rng::seed_from_u64(cell_seed(cx, cy, seed));
    let n = pts.len();
    let mut best: Option<(usize, Vec3<T>, Vec3<T>)> = None;
    for _ in 0..iterations {
        let a = rng.random_range(0..n);
        let mut b = rng.random_range(0..n - 1);
        if b >= a {
            b += 1;
        }
        let mut c = rng.random_range(0..n - 2);
        for taken in [a.min(b), a.max(b)] {
            if c >= taken {
                c += 1;
            }
        }
        let (pa, pb, pc) = (pts[a], pts[b], pts[c]);
        let Some(normal) = (pb - pa).cross(pc - pa).normalized() else {
            continue;
        };
        let normal = normal.upward();
        let inliers = pts
            .iter()
            .filter(|&&q| normal.dot(q - pa).abs() <= inlier_threshold)
            .count();
        if best.is_none_or(|(k, _, _)| inliers > k) {
            best = Some((inliers, normal, pa));
        }
    }
    let (_, normal, anchor) = best?;
    let inliers: Vec<Vec3<T>> = pts
        .iter()
        .copied()
        .filter(|&q| normal.dot(q - anchor).abs() <= inlier_threshold)
        .collect();
    Some(fit_height_plane(&inliers).unwrap_or(normal))
}

/// Least-squares plane normal over every observed cell within `radius`.
pub fn normal_lsq<T: Scalar>(map: &HeightMap<T>, p: Vec2<T>, radius: T) -> Option<Vec3<T>> {
    fit_height_plane(&surface_points(map, p, radius))
}

/// Mean of the sampled heights within `window` of the highest sample in
/// the disk of `radius` around `p`.
pub fn node_height<T: Scalar>(map: &HeightMap<T>, p: Vec2<T>, radius: T, window: T) -> Option<T> {
    let heights: Vec<T> = map
        .cells_in_disk(p, radius)
        .filter_map(|(ix, iy)| map.surface_height(ix, iy))
        .collect();
    let top = heights.iter().copied().reduce(T::max)?;
    let floor = top - window;
    let (sum, k) = heights
        .iter()
        .filter(|&&h| h >= floor)
        .fold((T::zero(), 0usize), |(s, k), &h| (s + h, k + 1));
    if heights.iter().all(|&h| h == top) {
        return Some(top);
    }
    Some(sum / count(k))
}

/// Read-only view of a height map with per-cell incline memoization.
///
/// Safe to share across threads; the memo is filled on first use and each
/// entry depends only on the map, parameters and seed.
pub struct Terrain<'m, T> {
    map: &'m HeightMap<T>,
    params: PlannerParams<T>,
    seed: u64,
    incline: Vec<OnceLock<Option<T>>>,
}

impl<'m, T: Scalar> Terrain<'m, T> {
    pub fn new(map: &'m HeightMap<T>, params: &PlannerParams<T>, seed: u64) -> Self {
        let n = map.side_cells() * map.side_cells();
        Self {
            map,
            params: params.clone(),
            seed,
            incline: (0..n).map(|_| OnceLock::new()).collect(),
        }
    }

    pub fn map(&self) -> &'m HeightMap<T> {
        self.map
    }

    pub fn params(&self) -> &PlannerParams<T> {
        &self.params
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn normal_ransac(&self, p: Vec2<T>, radius: T) -> Option<Vec3<T>> {
        normal_ransac(
            self.map,
            p,
            radius,
            self.params.ransac_iterations,
            self.params.ransac_inlier_threshold,
            self.seed,
        )
    }

    pub fn normal_lsq(&self, p: Vec2<T>, radius: T) -> Option<Vec3<T>> {
        normal_lsq(self.map, p, radius)
    }

    /// Contour normal used by both planner stages.
    pub fn contour_normal(&self, p: Vec2<T>) -> Option<Vec3<T>> {
        self.normal_lsq(p, self.params.lsq_radius)
    }

    pub fn node_height(&self, p: Vec2<T>) -> Option<T> {
        node_height(
            self.map,
            p,
            self.params.node_height_radius,
            self.params.node_height_window,
        )
    }

    /// RANSAC incline of an in-grid cell, memoized.
    pub fn cell_incline(&self, ix: i64, iy: i64) -> Option<T> {
        if !self.map.in_bounds(ix, iy) {
            return None;
        }
        let slot = &self.incline[iy as usize * self.map.side_cells() + ix as usize];
        *slot.get_or_init(|| {
            self.normal_ransac(self.map.cell_center(ix, iy), self.params.ransac_radius)
                .map(Vec3::incline)
        })
    }

    pub fn cell_traversable(&self, ix: i64, iy: i64, reference_height: T) -> bool {
        let Some(h) = self.map.surface_height(ix, iy) else {
            return false;
        };
        if (h - reference_height).abs() > self.params.max_height_difference {
            return false;
        }
        self.cell_incline(ix, iy)
            .is_some_and(|a| a <= self.params.max_cell_incline())
    }

    /// Fraction of walkable cells in the foothold rectangle on `side` of
    /// `frame`, shifted `lateral_shift` further outward.
    pub fn score_region(
        &self,
        frame: &Frame<T>,
        side: Side,
        spec: &RegionSpec<T>,
        reference_height: T,
        lateral_shift: T,
    ) -> T {
        let offset = Vec2::new(T::zero(), side.sign::<T>() * (spec.stance_offset + lateral_shift));
        let mut sampled = 0usize;
        let mut walkable = 0usize;
        for (ix, iy) in self.map.cells_in_rect(frame, offset, spec.length, spec.width) {
            sampled += 1;
            if self.cell_traversable(ix, iy, reference_height) {
                walkable += 1;
            }
        }
        if sampled == 0 {
            T::zero()
        } else {
            count::<T>(walkable) / count(sampled)
        }
    }

    /// Scores both sides of the parent and child footholds, all oriented
    /// along the child edge frame.
    pub fn sample_edge(
        &self,
        child_frame: &Frame<T>,
        parent: Vec2<T>,
        spec: &RegionSpec<T>,
        parent_height: T,
        child_height: T,
    ) -> TraversabilitySample<T> {
        let parent_frame = child_frame.moved_to(parent.lift(parent_height));
        let zero = T::zero();
        TraversabilitySample::from_scores(
            self.score_region(child_frame, Side::Left, spec, child_height, zero),
            self.score_region(child_frame, Side::Right, spec, child_height, zero),
            self.score_region(&parent_frame, Side::Left, spec, parent_height, zero),
            self.score_region(&parent_frame, Side::Right, spec, parent_height, zero),
        )
    }
}
