//! 2.5D height map: construction, point-cloud fusion, ground and outlier
//! filtering, spatial queries and the JSON file format.

use serde_json::{Map, Number, Value};

use crate::error::{Error, Result};
use crate::geometry::{Frame, Vec2, Vec3};
use crate::scalar::{count, lit, to_f64, Scalar};

/// Per-cell fusion state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellState<T> {
    pub height: Option<T>,
    pub observations: u32,
    pub ground: bool,
}

impl<T> Default for CellState<T> {
    fn default() -> Self {
        Self {
            height: None,
            observations: 0,
            ground: false,
        }
    }
}

impl<T: Scalar> CellState<T> {
    pub fn known(height: T) -> Self {
        Self {
            height: Some(height),
            observations: 1,
            ground: false,
        }
    }

    pub fn ground() -> Self {
        Self {
            height: None,
            observations: 0,
            ground: true,
        }
    }

    fn clear_to_ground(&mut self) {
        *self = Self::ground();
    }
}

/// A set of points in the map frame.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PointCloud<T> {
    pub points: Vec<Vec3<T>>,
}

impl<T: Scalar> PointCloud<T> {
    pub fn new(points: Vec<Vec3<T>>) -> Self {
        Self { points }
    }

    /// Parses whitespace separated `x y z` triples, one per line. Blank lines
    /// and lines starting with `#` are skipped.
    pub fn parse_ascii(text: &str) -> Result<Self> {
        let mut points = Vec::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let field = || format!("line {}", n + 1);
            let mut coords = [T::zero(); 3];
            let mut parts = line.split_whitespace();
            for c in coords.iter_mut() {
                let tok = parts
                    .next()
                    .ok_or_else(|| Error::parse(field(), "expected three coordinates"))?;
                let v: f64 = tok
                    .parse()
                    .map_err(|_| Error::parse(field(), format!("not a number: `{tok}`")))?;
                if !v.is_finite() {
                    return Err(Error::parse(field(), "non-finite coordinate"));
                }
                *c = lit(v);
            }
            if parts.next().is_some() {
                return Err(Error::parse(field(), "expected exactly three coordinates"));
            }
            points.push(Vec3::new(coords[0], coords[1], coords[2]));
        }
        Ok(Self { points })
    }

    pub fn extend(&mut self, other: &PointCloud<T>) {
        self.points.extend_from_slice(&other.points);
    }
}

/// Square grid of optional cell heights centered on `center`.
#[derive(Debug, Clone, PartialEq)]
pub struct HeightMap<T> {
    center: Vec2<T>,
    resolution: T,
    side_cells: usize,
    cells: Vec<CellState<T>>,
    ground_height: T,
}

const NEIGHBORS: [(i64, i64); 8] = [(-1, -1), (0, -1), (1, -1), (-1, 0), (1, 0), (-1, 1), (0, 1), (1, 1)];

impl<T: Scalar> HeightMap<T> {
    /// Empty map of `round(width / resolution)` cells per side.
    pub fn new(center: Vec2<T>, resolution: T, width: T) -> Result<Self> {
        if !(resolution > T::zero()) || !resolution.is_finite() {
            return Err(Error::invalid(format!("resolution must be positive, got {resolution}")));
        }
        if !(width >= resolution) || !width.is_finite() {
            return Err(Error::invalid(format!(
                "width must be at least the resolution, got {width}"
            )));
        }
        if !center.x.is_finite() || !center.y.is_finite() {
            return Err(Error::invalid("center must be finite"));
        }
        let side_cells = (width / resolution)
            .round()
            .to_usize()
            .filter(|&n| n >= 1)
            .ok_or_else(|| Error::invalid("width / resolution out of range"))?;
        Ok(Self {
            center,
            resolution,
            side_cells,
            cells: vec![CellState::default(); side_cells * side_cells],
            ground_height: T::zero(),
        })
    }

    pub fn from_cells(
        center: Vec2<T>,
        resolution: T,
        side_cells: usize,
        ground_height: T,
        cells: Vec<CellState<T>>,
    ) -> Result<Self> {
        if !(resolution > T::zero()) || !resolution.is_finite() {
            return Err(Error::invalid("resolution must be positive"));
        }
        if side_cells == 0 {
            return Err(Error::invalid("side_cells must be at least 1"));
        }
        if cells.len() != side_cells * side_cells {
            return Err(Error::invalid(format!(
                "expected {} cells, got {}",
                side_cells * side_cells,
                cells.len()
            )));
        }
        if cells.iter().any(|c| c.height.is_some_and(|h| !h.is_finite())) {
            return Err(Error::invalid("cell heights must be finite"));
        }
        Ok(Self {
            center,
            resolution,
            side_cells,
            cells,
            ground_height,
        })
    }

    pub fn center(&self) -> Vec2<T> {
        self.center
    }

    pub fn resolution(&self) -> T {
        self.resolution
    }

    pub fn side_cells(&self) -> usize {
        self.side_cells
    }

    pub fn width(&self) -> T {
        count::<T>(self.side_cells) * self.resolution
    }

    pub fn ground_height(&self) -> T {
        self.ground_height
    }

    pub fn set_ground_height(&mut self, h: T) {
        self.ground_height = h;
    }

    pub fn cells(&self) -> &[CellState<T>] {
        &self.cells
    }

    /// Lower-left corner of the grid.
    pub fn origin(&self) -> Vec2<T> {
        let half = self.width() * lit(0.5);
        Vec2::new(self.center.x - half, self.center.y - half)
    }

    #[inline]
    fn index(&self, ix: usize, iy: usize) -> usize {
        iy * self.side_cells + ix
    }

    pub fn cell(&self, ix: usize, iy: usize) -> &CellState<T> {
        &self.cells[self.index(ix, iy)]
    }

    pub fn cell_mut(&mut self, ix: usize, iy: usize) -> &mut CellState<T> {
        let i = self.index(ix, iy);
        &mut self.cells[i]
    }

    /// Marks a cell as observed once at `height`.
    pub fn set_height(&mut self, ix: usize, iy: usize, height: T) {
        *self.cell_mut(ix, iy) = CellState::known(height);
    }

    /// Signed grid index of the cell containing `p`, without bounds checks.
    #[inline]
    pub fn grid_coords(&self, p: Vec2<T>) -> (i64, i64) {
        let o = self.origin();
        let fx = ((p.x - o.x) / self.resolution).floor();
        let fy = ((p.y - o.y) / self.resolution).floor();
        (fx.to_i64().unwrap_or(i64::MIN), fy.to_i64().unwrap_or(i64::MIN))
    }

    #[inline]
    pub fn in_bounds(&self, ix: i64, iy: i64) -> bool {
        let n = self.side_cells as i64;
        ix >= 0 && iy >= 0 && ix < n && iy < n
    }

    pub fn cell_index(&self, p: Vec2<T>) -> Option<(usize, usize)> {
        let (ix, iy) = self.grid_coords(p);
        self.in_bounds(ix, iy).then_some((ix as usize, iy as usize))
    }

    pub fn contains(&self, p: Vec2<T>) -> bool {
        self.cell_index(p).is_some()
    }

    #[inline]
    pub fn cell_center(&self, ix: i64, iy: i64) -> Vec2<T> {
        let o = self.origin();
        let half: T = lit(0.5);
        Vec2::new(
            o.x + (T::from_i64(ix).unwrap() + half) * self.resolution,
            o.y + (T::from_i64(iy).unwrap() + half) * self.resolution,
        )
    }

    /// Height a planner should see for a cell: its fused height, the ground
    /// height for ground cells, or `None` when unobserved or out of bounds.
    #[inline]
    pub fn surface_height(&self, ix: i64, iy: i64) -> Option<T> {
        if !self.in_bounds(ix, iy) {
            return None;
        }
        let c = &self.cells[self.index(ix as usize, iy as usize)];
        if c.ground {
            Some(self.ground_height)
        } else {
            c.height
        }
    }

    /// Height of the cell enclosing `p`; ground cells report the ground height.
    pub fn height_at(&self, p: Vec2<T>) -> Option<T> {
        let (ix, iy) = self.grid_coords(p);
        self.surface_height(ix, iy)
    }

    pub fn known_cells(&self) -> usize {
        self.cells.iter().filter(|c| c.height.is_some() || c.ground).count()
    }

    /// Cells whose centers lie within `radius` of `p`, clipped to the grid.
    pub fn cells_in_disk(&self, p: Vec2<T>, radius: T) -> impl Iterator<Item = (i64, i64)> + '_ {
        let (x0, y0) = self.grid_coords(Vec2::new(p.x - radius, p.y - radius));
        let (x1, y1) = self.grid_coords(Vec2::new(p.x + radius, p.y + radius));
        let n = self.side_cells as i64 - 1;
        let (x0, y0, x1, y1) = (x0.max(0), y0.max(0), x1.min(n), y1.min(n));
        let r2 = radius * radius * (T::one() + lit(1e-9));
        (y0..=y1).flat_map(move |iy| {
            (x0..=x1).filter_map(move |ix| {
                let c = self.cell_center(ix, iy);
                ((c - p).norm_squared() <= r2).then_some((ix, iy))
            })
        })
    }

    /// Cells whose centers lie in the rectangle centered at `offset` (frame
    /// local coordinates) with the given full extents. Indices outside the
    /// grid are included so callers can count them.
    pub fn cells_in_rect(
        &self,
        frame: &Frame<T>,
        offset: Vec2<T>,
        length: T,
        width: T,
    ) -> impl Iterator<Item = (i64, i64)> + '_ {
        let half: T = lit(0.5);
        let slack = self.resolution * lit(1e-6);
        let hl = length * half + slack;
        let hw = width * half + slack;
        let center = frame.planar_origin() + frame.x_hat * offset.x + frame.y_hat * offset.y;
        let ex = frame.x_hat.x.abs() * hl + frame.y_hat.x.abs() * hw;
        let ey = frame.x_hat.y.abs() * hl + frame.y_hat.y.abs() * hw;
        let (x0, y0) = self.grid_coords(Vec2::new(center.x - ex, center.y - ey));
        let (x1, y1) = self.grid_coords(Vec2::new(center.x + ex, center.y + ey));
        let (xa, ya) = (frame.x_hat, frame.y_hat);
        (y0..=y1).flat_map(move |iy| {
            (x0..=x1).filter_map(move |ix| {
                let d = self.cell_center(ix, iy) - center;
                (d.dot(xa).abs() <= hl && d.dot(ya).abs() <= hw).then_some((ix, iy))
            })
        })
    }

    /// Bins points into cells. Within each cell only samples no more than
    /// `window` below the highest sample are kept and averaged; previously
    /// fused data enters as one sample weighted by its observation count.
    /// Points outside the grid are dropped.
    pub fn fuse_cloud(&mut self, cloud: &PointCloud<T>, window: T) {
        let mut binned: Vec<(usize, T)> = cloud
            .points
            .iter()
            .filter(|p| p.x.is_finite() && p.y.is_finite() && p.z.is_finite())
            .filter_map(|p| self.cell_index(p.xy()).map(|(ix, iy)| (self.index(ix, iy), p.z)))
            .collect();
        // sorting by height too makes the sums independent of point order
        binned.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.partial_cmp(&b.1).unwrap()));

        for group in binned.chunk_by(|a, b| a.0 == b.0) {
            let cell = &mut self.cells[group[0].0];
            let previous = cell.height.map(|h| (h, cell.observations.max(1)));
            let mut top = group.iter().map(|&(_, z)| z).fold(T::neg_infinity(), T::max);
            if let Some((h, _)) = previous {
                top = top.max(h);
            }
            let floor = top - window;
            let mut sum = T::zero();
            let mut weight: u32 = 0;
            if let Some((h, n)) = previous.filter(|&(h, _)| h >= floor) {
                sum += h * T::from_u32(n).unwrap();
                weight += n;
            }
            for &(_, z) in group.iter().filter(|&&(_, z)| z >= floor) {
                sum += z;
                weight += 1;
            }
            *cell = CellState {
                height: Some(sum / T::from_u32(weight).unwrap()),
                observations: weight,
                ground: false,
            };
        }
    }

    /// Ground plane height: mean of the known heights ranked between the
    /// 2nd and 6th percentile (nearest rank). Ground cells count at the
    /// current ground height.
    pub fn estimate_ground(&self) -> Result<T> {
        let mut heights: Vec<T> = self
            .cells
            .iter()
            .filter_map(|c| if c.ground { Some(self.ground_height) } else { c.height })
            .collect();
        if heights.is_empty() {
            return Err(Error::EmptyMap);
        }
        heights.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let n = heights.len();
        let rank = |pct: usize| ((pct * n).div_ceil(100)).min(n - 1);
        let window = &heights[rank(2)..=rank(6)];
        let (first, last) = (window[0], window[window.len() - 1]);
        if first == last {
            return Ok(first);
        }
        Ok(window.iter().copied().sum::<T>() / count(window.len()))
    }

    /// Runs the ground and outlier filters and stores the estimated ground
    /// height. The passes are cycled until none of them changes the map.
    ///
    /// 1. cells below `h_G + ground_threshold` are cleared and flagged ground;
    /// 2. unobserved cells whose in-grid neighbors are all ground become ground;
    /// 3. cells more than `spike_threshold` above every known neighbor are
    ///    reset to the neighbor mean.
    pub fn apply_filters(&mut self, ground_threshold: T, spike_threshold: T) -> Result<()> {
        let h_g = self.estimate_ground()?;
        self.ground_height = h_g;
        let limit = h_g + ground_threshold;
        for _ in 0..self.side_cells.max(1) {
            let mut changed = self.clear_ground(limit);
            changed |= self.propagate_ground();
            changed |= self.reset_spikes(spike_threshold);
            if !changed {
                break;
            }
        }
        Ok(())
    }

    fn clear_ground(&mut self, limit: T) -> bool {
        let mut changed = false;
        for c in self.cells.iter_mut() {
            if c.height.is_some_and(|h| h < limit) {
                c.clear_to_ground();
                changed = true;
            }
        }
        changed
    }

    fn all_neighbors_ground(&self, ix: i64, iy: i64) -> bool {
        NEIGHBORS
            .iter()
            .map(|&(dx, dy)| (ix + dx, iy + dy))
            .filter(|&(x, y)| self.in_bounds(x, y))
            .all(|(x, y)| self.cells[self.index(x as usize, y as usize)].ground)
    }

    fn propagate_ground(&mut self) -> bool {
        let n = self.side_cells as i64;
        let mut changed = false;
        for _ in 0..self.side_cells {
            let mut grew = false;
            for iy in 0..n {
                for ix in 0..n {
                    let i = self.index(ix as usize, iy as usize);
                    let c = self.cells[i];
                    if !c.ground && c.height.is_none() && self.all_neighbors_ground(ix, iy) {
                        self.cells[i].clear_to_ground();
                        grew = true;
                    }
                }
            }
            changed |= grew;
            if !grew {
                break;
            }
        }
        changed
    }

    fn reset_spikes(&mut self, spike_threshold: T) -> bool {
        let n = self.side_cells as i64;
        let mut changed = false;
        for _ in 0..self.side_cells {
            let mut resets = Vec::new();
            for iy in 0..n {
                for ix in 0..n {
                    let c = &self.cells[self.index(ix as usize, iy as usize)];
                    let Some(h) = c.height.filter(|_| !c.ground) else {
                        continue;
                    };
                    let mut max = T::neg_infinity();
                    let mut sum = T::zero();
                    let mut k = 0usize;
                    for &(dx, dy) in &NEIGHBORS {
                        if let Some(nh) = self.surface_height(ix + dx, iy + dy) {
                            max = max.max(nh);
                            sum += nh;
                            k += 1;
                        }
                    }
                    if k > 0 && h > max + spike_threshold {
                        resets.push((ix as usize, iy as usize, sum / count(k)));
                    }
                }
            }
            if resets.is_empty() {
                break;
            }
            changed = true;
            for (ix, iy, h) in resets {
                self.cell_mut(ix, iy).height = Some(h);
            }
        }
        changed
    }

    /// Serializes to the JSON height-map file format.
    pub fn to_json(&self) -> Value {
        let num = |v: T| Number::from_f64(to_f64(v)).map(Value::Number).unwrap_or(Value::Null);
        let cells = self
            .cells
            .iter()
            .map(|c| match (c.ground, c.height) {
                (true, _) => Value::String("g".into()),
                (false, Some(h)) => num(h),
                (false, None) => Value::Null,
            })
            .collect();
        let observations = self.cells.iter().map(|c| Value::from(c.observations)).collect();
        let mut obj = Map::new();
        obj.insert(
            "center".into(),
            Value::Array(vec![num(self.center.x), num(self.center.y)]),
        );
        obj.insert("resolution".into(), num(self.resolution));
        obj.insert("side_cells".into(), Value::from(self.side_cells));
        obj.insert("ground_height".into(), num(self.ground_height));
        obj.insert("cells".into(), Value::Array(cells));
        obj.insert("observations".into(), Value::Array(observations));
        Value::Object(obj)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string(&self.to_json()).expect("height map serializes")
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let value: Value = serde_json::from_str(text)
            .map_err(|e| Error::parse("<stream>", format!("{e} (line {}, column {})", e.line(), e.column())))?;
        Self::from_json(&value)
    }

    pub fn from_json(value: &Value) -> Result<Self> {
        let obj = value
            .as_object()
            .ok_or_else(|| Error::parse("<root>", "expected a JSON object"))?;
        let get = |key: &str| obj.get(key).ok_or_else(|| Error::parse(key, "missing field"));
        let number = |key: &str, v: &Value| -> Result<T> {
            v.as_f64()
                .filter(|x| x.is_finite())
                .map(lit)
                .ok_or_else(|| Error::parse(key, "expected a finite number"))
        };

        let center = get("center")?
            .as_array()
            .filter(|a| a.len() == 2)
            .ok_or_else(|| Error::parse("center", "expected [x, y]"))?;
        let center = Vec2::new(number("center[0]", &center[0])?, number("center[1]", &center[1])?);
        let resolution = number("resolution", get("resolution")?)?;
        let side_cells = get("side_cells")?
            .as_u64()
            .ok_or_else(|| Error::parse("side_cells", "expected a non-negative integer"))?
            as usize;
        let ground_height = number("ground_height", get("ground_height")?)?;
        let raw = get("cells")?
            .as_array()
            .ok_or_else(|| Error::parse("cells", "expected an array"))?;
        if raw.len() != side_cells * side_cells {
            return Err(Error::parse(
                "cells",
                format!("expected {} entries, got {}", side_cells * side_cells, raw.len()),
            ));
        }
        let observations = match obj.get("observations") {
            None => None,
            Some(v) => {
                let a = v
                    .as_array()
                    .filter(|a| a.len() == raw.len())
                    .ok_or_else(|| Error::parse("observations", "expected one count per cell"))?;
                Some(a)
            }
        };
        let mut cells = Vec::with_capacity(raw.len());
        for (i, entry) in raw.iter().enumerate() {
            let field = || format!("cells[{i}]");
            let mut cell = match entry {
                Value::Null => CellState::default(),
                Value::String(s) if s == "g" => CellState::ground(),
                Value::Number(_) => CellState::known(number(&field(), entry)?),
                _ => return Err(Error::parse(field(), "expected null, \"g\" or a number")),
            };
            if let Some(obs) = observations {
                let n = obs[i]
                    .as_u64()
                    .and_then(|n| u32::try_from(n).ok())
                    .ok_or_else(|| Error::parse(format!("observations[{i}]"), "expected a count"))?;
                if cell.height.is_some() {
                    cell.observations = n;
                }
            }
            cells.push(cell);
        }
        Self::from_cells(center, resolution, side_cells, ground_height, cells)
    }
}
