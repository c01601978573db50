//! Synthetic terrains with closed-form heights and normals.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Vec2, Vec3};
use crate::heightmap::{CellState, HeightMap};
use crate::scalar::{lit, to_f64, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum StoneLayout {
    #[default]
    Grid,
    Hex,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum StoneShape {
    Disk,
    /// Axis-aligned square whose half side is the stone radius.
    #[default]
    Square,
}

/// Axis-aligned rectangle in world coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect<T> {
    pub x_min: T,
    pub x_max: T,
    pub y_min: T,
    pub y_max: T,
}

impl<T: Scalar> Rect<T> {
    pub fn contains(&self, p: Vec2<T>) -> bool {
        p.x >= self.x_min && p.x <= self.x_max && p.y >= self.y_min && p.y <= self.y_max
    }

    fn on_boundary(&self, p: Vec2<T>, eps: T) -> bool {
        let inside_x = p.x >= self.x_min - eps && p.x <= self.x_max + eps;
        let inside_y = p.y >= self.y_min - eps && p.y <= self.y_max + eps;
        let near_x = (p.x - self.x_min).abs() <= eps || (p.x - self.x_max).abs() <= eps;
        let near_y = (p.y - self.y_min).abs() <= eps || (p.y - self.y_max).abs() <= eps;
        (near_x && inside_y) || (near_y && inside_x)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TerrainKind<T> {
    Flat {
        #[serde(default)]
        height: T,
    },
    /// Plane rising along +x, optionally limited to `[from_x, to_x]` with
    /// level ground outside. Heights are zero at `from_x` (or at `x = 0`).
    Ramp {
        incline_deg: T,
        #[serde(default)]
        from_x: Option<T>,
        #[serde(default)]
        to_x: Option<T>,
    },
    /// `rise * floor((x - x_start) / run)`, clamped to `[0, steps]` when a
    /// step count is given.
    Stairs {
        rise: T,
        run: T,
        #[serde(default)]
        x_start: T,
        #[serde(default)]
        steps: Option<u32>,
    },
    /// Stones of equal height separated by unobserved gaps inside
    /// `[x_from, x_to]`; level floor elsewhere.
    SteppingStones {
        stone_radius: T,
        pitch: T,
        #[serde(default)]
        layout: StoneLayout,
        #[serde(default)]
        shape: StoneShape,
        x_from: T,
        x_to: T,
        #[serde(default)]
        y_offset: T,
        #[serde(default)]
        height: T,
    },
    /// Adjacent blocks inside `[x_from, x_to]` with heights cycling through
    /// 0, 1 and 2 block heights.
    CinderBlocks {
        block_length: T,
        block_width: T,
        block_height: T,
        x_from: T,
        x_to: T,
    },
    WallObstacles {
        walls: Vec<Rect<T>>,
        height: T,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TerrainSpec<T> {
    #[serde(flatten)]
    pub kind: TerrainKind<T>,
    #[serde(default)]
    pub noise_sigma: T,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MapParams<T> {
    pub center_x: T,
    pub center_y: T,
    pub resolution: T,
    pub width: T,
}

impl<T: Scalar> Default for MapParams<T> {
    fn default() -> Self {
        Self {
            center_x: T::zero(),
            center_y: T::zero(),
            resolution: lit(0.02),
            width: lit(4.0),
        }
    }
}

impl<T: Scalar> MapParams<T> {
    pub fn center(&self) -> Vec2<T> {
        Vec2::new(self.center_x, self.center_y)
    }
}

fn boundary_eps<T: Scalar>() -> T {
    lit(1e-9)
}

fn positive<T: Scalar>(name: &str, v: T) -> Result<()> {
    if v > T::zero() && v.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!("{name} must be positive, got {v}")))
    }
}

fn finite<T: Scalar>(name: &str, v: T) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!("{name} must be finite, got {v}")))
    }
}

/// Where a planar point falls relative to a stone field.
enum StoneSite<T> {
    Floor,
    Stone,
    Gap,
    Edge(T),
}

impl<T: Scalar> TerrainSpec<T> {
    pub fn new(kind: TerrainKind<T>) -> Self {
        Self {
            kind,
            noise_sigma: T::zero(),
            seed: 0,
        }
    }

    pub fn with_noise(mut self, sigma: T, seed: u64) -> Self {
        self.noise_sigma = sigma;
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.noise_sigma >= T::zero()) || !self.noise_sigma.is_finite() {
            return Err(Error::invalid(format!(
                "noise_sigma must be non-negative, got {}",
                self.noise_sigma
            )));
        }
        match &self.kind {
            TerrainKind::Flat { height } => finite("height", *height),
            TerrainKind::Ramp {
                incline_deg,
                from_x,
                to_x,
            } => {
                positive("incline_deg", *incline_deg)?;
                if *incline_deg >= lit(90.0) {
                    return Err(Error::invalid("incline_deg must be below 90"));
                }
                if let (Some(a), Some(b)) = (from_x, to_x) {
                    if !(a < b) {
                        return Err(Error::invalid("ramp from_x must be below to_x"));
                    }
                }
                Ok(())
            }
            TerrainKind::Stairs { rise, run, x_start, .. } => {
                positive("rise", *rise)?;
                positive("run", *run)?;
                finite("x_start", *x_start)
            }
            TerrainKind::SteppingStones {
                stone_radius,
                pitch,
                x_from,
                x_to,
                height,
                y_offset,
                ..
            } => {
                positive("stone_radius", *stone_radius)?;
                positive("pitch", *pitch)?;
                finite("height", *height)?;
                finite("y_offset", *y_offset)?;
                if !(x_from < x_to) {
                    return Err(Error::invalid("stone field x_from must be below x_to"));
                }
                Ok(())
            }
            TerrainKind::CinderBlocks {
                block_length,
                block_width,
                block_height,
                x_from,
                x_to,
            } => {
                positive("block_length", *block_length)?;
                positive("block_width", *block_width)?;
                positive("block_height", *block_height)?;
                if !(x_from < x_to) {
                    return Err(Error::invalid("block field x_from must be below x_to"));
                }
                Ok(())
            }
            TerrainKind::WallObstacles { walls, height } => {
                positive("height", *height)?;
                for (i, w) in walls.iter().enumerate() {
                    if !(w.x_min < w.x_max && w.y_min < w.y_max) {
                        return Err(Error::invalid(format!("wall {i} has an empty extent")));
                    }
                }
                Ok(())
            }
        }
    }

    fn stone_site(&self, p: Vec2<T>) -> StoneSite<T> {
        let TerrainKind::SteppingStones {
            stone_radius: r,
            pitch,
            layout,
            shape,
            x_from,
            x_to,
            y_offset,
            height,
        } = &self.kind
        else {
            return StoneSite::Floor;
        };
        let eps = boundary_eps::<T>();
        if p.x < *x_from - eps || p.x > *x_to + eps {
            return StoneSite::Floor;
        }
        let (r, pitch) = (*r, *pitch);
        let half = lit::<T>(0.5);
        let row_pitch = match layout {
            StoneLayout::Grid => pitch,
            StoneLayout::Hex => pitch * lit::<T>(3.0).sqrt() * half,
        };
        let first_x = *x_from + r;
        let y_rel = p.y - *y_offset;
        let row = (y_rel / row_pitch).round();
        let mut nearest: Option<T> = None;
        // the two closest rows cover every stone that can reach p
        for dr in [-T::one(), T::zero(), T::one()] {
            let j = row + dr;
            let shift = match layout {
                StoneLayout::Hex if j.to_i64().unwrap_or(0).rem_euclid(2) == 1 => pitch * half,
                _ => T::zero(),
            };
            let cy = j * row_pitch;
            let col = ((p.x - first_x - shift) / pitch).round();
            for dc in [-T::one(), T::zero(), T::one()] {
                let cx = first_x + shift + (col + dc) * pitch;
                if cx + r > *x_to + eps || cx - r < *x_from - eps {
                    continue;
                }
                let (dx, dy) = (p.x - cx, y_rel - cy);
                // signed distance to the stone outline, negative inside
                let sd = match shape {
                    StoneShape::Disk => (dx * dx + dy * dy).sqrt() - r,
                    StoneShape::Square => dx.abs().max(dy.abs()) - r,
                };
                nearest = Some(nearest.map_or(sd, |n: T| n.min(sd)));
            }
        }
        match nearest {
            Some(sd) if sd.abs() <= eps => StoneSite::Edge(*height),
            Some(sd) if sd < T::zero() => StoneSite::Stone,
            _ => StoneSite::Gap,
        }
    }

    fn block_level(&self, p: Vec2<T>) -> Option<(i64, i64)> {
        let TerrainKind::CinderBlocks {
            block_length,
            block_width,
            x_from,
            x_to,
            ..
        } = &self.kind
        else {
            return None;
        };
        if p.x < *x_from || p.x >= *x_to {
            return None;
        }
        let i = ((p.x - *x_from) / *block_length).floor().to_i64()?;
        let j = (p.y / *block_width).floor().to_i64()?;
        Some((i, j))
    }

    /// Noiseless surface height at `p`; `None` where the terrain has a gap.
    pub fn surface_height(&self, p: Vec2<T>) -> Option<T> {
        match &self.kind {
            TerrainKind::Flat { height } => Some(*height),
            TerrainKind::Ramp {
                incline_deg,
                from_x,
                to_x,
            } => {
                let base = from_x.unwrap_or_else(T::zero);
                let mut x = p.x;
                if let Some(a) = from_x {
                    x = x.max(*a);
                }
                if let Some(b) = to_x {
                    x = x.min(*b);
                }
                Some(incline_deg.to_radians().tan() * (x - base))
            }
            TerrainKind::Stairs {
                rise,
                run,
                x_start,
                steps,
            } => {
                let mut k = ((p.x - *x_start) / *run).floor();
                if let Some(n) = steps {
                    k = k.max(T::zero()).min(lit(*n as f64));
                }
                Some(*rise * k)
            }
            TerrainKind::SteppingStones { height, .. } => match self.stone_site(p) {
                StoneSite::Gap => None,
                StoneSite::Edge(h) => Some(h),
                _ => Some(*height),
            },
            TerrainKind::CinderBlocks { block_height, .. } => Some(match self.block_level(p) {
                None => T::zero(),
                Some((i, j)) => *block_height * lit::<T>((i + 2 * j).rem_euclid(3) as f64),
            }),
            TerrainKind::WallObstacles { walls, height } => Some(if walls.iter().any(|w| w.contains(p)) {
                *height
            } else {
                T::zero()
            }),
        }
    }

    /// Closed-form unit normal of the noiseless surface at `p`.
    pub fn analytic_normal(&self, p: Vec2<T>) -> Result<Vec3<T>> {
        let eps = boundary_eps::<T>();
        let undefined = |reason: &str| Error::UndefinedNormal {
            x: to_f64(p.x),
            y: to_f64(p.y),
            reason: reason.to_string(),
        };
        match &self.kind {
            TerrainKind::Flat { .. } => Ok(Vec3::unit_z()),
            TerrainKind::Ramp {
                incline_deg,
                from_x,
                to_x,
            } => {
                for edge in [from_x, to_x].into_iter().flatten() {
                    if (p.x - *edge).abs() <= eps {
                        return Err(undefined("on a ramp crease"));
                    }
                }
                let below = from_x.is_some_and(|a| p.x < a);
                let above = to_x.is_some_and(|b| p.x > b);
                if below || above {
                    return Ok(Vec3::unit_z());
                }
                let a = incline_deg.to_radians();
                Ok(Vec3::new(-a.sin(), T::zero(), a.cos()))
            }
            TerrainKind::Stairs {
                run, x_start, steps, ..
            } => {
                let s = (p.x - *x_start) / *run;
                let k = s.round();
                let on_riser = (s - k).abs() * *run <= eps;
                // with a step count, risers exist only at k = 1..=steps
                let clamped = steps.is_some_and(|n| k < T::one() || k > lit(n as f64));
                if on_riser && !clamped {
                    return Err(undefined("on a stair riser"));
                }
                Ok(Vec3::unit_z())
            }
            TerrainKind::SteppingStones { .. } => match self.stone_site(p) {
                StoneSite::Gap => Err(undefined("no surface between stones")),
                StoneSite::Edge(_) => Err(undefined("on a stone edge")),
                _ => Ok(Vec3::unit_z()),
            },
            TerrainKind::CinderBlocks {
                block_length,
                block_width,
                x_from,
                x_to,
                ..
            } => {
                let on_line = |v: T, size: T| {
                    let s = v / size;
                    (s - s.round()).abs() * size <= eps
                };
                let inside = p.x >= *x_from - eps && p.x <= *x_to + eps;
                if inside && (on_line(p.x - *x_from, *block_length) || on_line(p.y, *block_width)) {
                    return Err(undefined("on a block edge"));
                }
                Ok(Vec3::unit_z())
            }
            TerrainKind::WallObstacles { walls, .. } => {
                if walls.iter().any(|w| w.on_boundary(p, eps)) {
                    return Err(undefined("on a wall face"));
                }
                Ok(Vec3::unit_z())
            }
        }
    }
}

/// Rasterizes `spec` at cell centers and adds per-cell Gaussian noise.
pub fn generate<T: Scalar>(spec: &TerrainSpec<T>, map_params: &MapParams<T>) -> Result<HeightMap<T>> {
    spec.validate()?;
    let mut map = HeightMap::new(map_params.center(), map_params.resolution, map_params.width)?;
    let n = map.side_cells();
    let sigma = to_f64(spec.noise_sigma);
    let mut noise = (sigma > 0.0).then(|| {
        let normal = Normal::new(0.0, sigma).expect("sigma checked non-negative");
        (ChaCha8Rng::seed_from_u64(spec.seed), normal)
    });
    let mut cells = Vec::with_capacity(n * n);
    for iy in 0..n {
        for ix in 0..n {
            let c = map.cell_center(ix as i64, iy as i64);
            // one draw per cell keeps the noise pattern independent of gaps
            let e = noise
                .as_mut()
                .map(|(rng, d)| lit::<T>(d.sample(rng)))
                .unwrap_or_else(T::zero);
            cells.push(match spec.surface_height(c) {
                Some(h) => CellState::known(h + e),
                None => CellState::default(),
            });
        }
    }
    map = HeightMap::from_cells(map.center(), map.resolution(), n, T::zero(), cells)?;
    Ok(map)
}
