//! Observation synthesis: closest obstacle, lidar-style raycast, local
//! egocentric occupancy grid (LEOG) and the relative goal.
//!
//! All modalities work in world-frame axes centered on the agent. The agent's
//! own body is never sensed.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::geometry::{Shape, Vec2};
use crate::sim::WorldState;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Modality {
    #[serde(alias = "closest")]
    ClosestObstacle,
    Raycast,
    Leog,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoordFormat {
    #[default]
    Polar,
    Cartesian,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SensorConfig {
    pub modalities: Vec<Modality>,
    pub closest_format: CoordFormat,
    pub ray_count: usize,
    pub ray_max_range: f64,
    pub leog_side: f64,
    pub leog_resolution: f64,
}

impl Default for SensorConfig {
    fn default() -> Self {
        SensorConfig {
            modalities: vec![Modality::ClosestObstacle, Modality::Raycast, Modality::Leog],
            closest_format: CoordFormat::Polar,
            ray_count: 360,
            ray_max_range: 5.0,
            leog_side: 6.0,
            leog_resolution: 0.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SensorConfigError {
    #[error("ray_count must be at least 4, got {0}")]
    RayCount(usize),
    #[error("ray_max_range must be > 0, got {0}")]
    RayRange(f64),
    #[error("leog_side and leog_resolution must be > 0")]
    LeogNonPositive,
    #[error("leog_side / leog_resolution = {0} is not a whole number of cells")]
    LeogFraction(f64),
    #[error("modality {0:?} listed more than once")]
    DuplicateModality(Modality),
}

impl SensorConfig {
    pub fn has(&self, m: Modality) -> bool {
        self.modalities.contains(&m)
    }

    /// Cells per grid side.
    pub fn leog_cells(&self) -> usize {
        (self.leog_side / self.leog_resolution).round() as usize
    }

    pub fn validate(&self) -> Result<(), SensorConfigError> {
        if self.ray_count < 4 {
            return Err(SensorConfigError::RayCount(self.ray_count));
        }
        if !(self.ray_max_range.is_finite() && self.ray_max_range > 0.0) {
            return Err(SensorConfigError::RayRange(self.ray_max_range));
        }
        if !(self.leog_side > 0.0 && self.leog_resolution > 0.0)
            || !self.leog_side.is_finite()
            || !self.leog_resolution.is_finite()
        {
            return Err(SensorConfigError::LeogNonPositive);
        }
        let cells = self.leog_side / self.leog_resolution;
        if (cells - cells.round()).abs() > 1e-9 || cells.round() < 1.0 {
            return Err(SensorConfigError::LeogFraction(cells));
        }
        for (i, m) in self.modalities.iter().enumerate() {
            if self.modalities[..i].contains(m) {
                return Err(SensorConfigError::DuplicateModality(*m));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SensingError {
    #[error("no obstacles to sense")]
    NoObstacles,
}

/// Binary occupancy grid, row-major, row 0 at minimum y and column 0 at
/// minimum x.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OccupancyGrid {
    pub rows: usize,
    pub cols: usize,
    pub cells: Vec<u8>,
}

impl OccupancyGrid {
    pub fn empty(n: usize) -> Self {
        OccupancyGrid {
            rows: n,
            cols: n,
            cells: vec![0; n * n],
        }
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> u8 {
        self.cells[row * self.cols + col]
    }

    pub fn occupied_count(&self) -> usize {
        self.cells.iter().filter(|&&c| c != 0).count()
    }
}

/// Goal position relative to the agent; `angle` in `(-π, π]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GoalRel {
    pub distance: f64,
    pub angle: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub closest: Option<[f64; 2]>,
    pub raycast: Option<Vec<f64>>,
    pub leog: Option<OccupancyGrid>,
    pub goal_rel: GoalRel,
}

/// Flat view of one observation component, as handed to training code.
#[derive(Debug, Clone, PartialEq)]
pub enum BufferData<'a> {
    F64(&'a [f64]),
    U8(&'a [u8]),
}

#[derive(Debug, Clone, PartialEq)]
pub struct NamedBuffer<'a> {
    pub name: &'static str,
    pub shape: Vec<usize>,
    pub data: BufferData<'a>,
}

impl Observation {
    /// One buffer per enabled modality plus `goal` as `[distance, angle]`.
    /// The slices borrow the observation's own storage.
    pub fn named_buffers(&self) -> (Vec<NamedBuffer<'_>>, [f64; 2]) {
        let mut out = Vec::with_capacity(3);
        if let Some(c) = &self.closest {
            out.push(NamedBuffer {
                name: "closest",
                shape: vec![2],
                data: BufferData::F64(c),
            });
        }
        if let Some(r) = &self.raycast {
            out.push(NamedBuffer {
                name: "raycast",
                shape: vec![r.len()],
                data: BufferData::F64(r),
            });
        }
        if let Some(g) = &self.leog {
            out.push(NamedBuffer {
                name: "leog",
                shape: vec![g.rows, g.cols],
                data: BufferData::U8(&g.cells),
            });
        }
        (out, [self.goal_rel.distance, self.goal_rel.angle])
    }
}

/// Nearest obstacle surface point relative to the agent, as
/// `(distance, bearing)` or `(dx, dy)`. Ties go to the earlier obstacle,
/// statics before humans.
pub fn sense_closest(state: &WorldState, format: CoordFormat) -> Result<[f64; 2], SensingError> {
    let p = state.agent_pos;
    let mut best: Option<(f64, Shape)> = None;
    for s in state.obstacle_shapes() {
        let d = s.distance_to_surface(p).abs();
        if best.is_none_or(|(bd, _)| d < bd) {
            best = Some((d, s));
        }
    }
    let (_, shape) = best.ok_or(SensingError::NoObstacles)?;
    let offset = shape.closest_surface_point(p) - p;
    Ok(match format {
        CoordFormat::Polar => [offset.length(), offset.angle()],
        CoordFormat::Cartesian => [offset.x, offset.y],
    })
}

/// Precomputed unit directions; ray `k` points at angle `2πk/n`.
#[derive(Debug, Clone, PartialEq)]
pub struct RayFan {
    dirs: Vec<Vec2>,
}

impl RayFan {
    pub fn new(count: usize) -> Self {
        let n = count as f64;
        let dirs = (0..count)
            .map(|k| Vec2::from_angle(TAU * k as f64 / n))
            .collect();
        RayFan { dirs }
    }

    pub fn len(&self) -> usize {
        self.dirs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dirs.is_empty()
    }

    pub fn directions(&self) -> &[Vec2] {
        &self.dirs
    }
}

pub fn sense_raycast(state: &WorldState, cfg: &SensorConfig) -> Vec<f64> {
    let fan = RayFan::new(cfg.ray_count);
    let mut out = vec![0.0; cfg.ray_count];
    sense_raycast_into(state, &fan, cfg.ray_max_range, &mut out);
    out
}

/// Writes one clamped hit distance per ray of `fan` into `out`.
pub fn sense_raycast_into(state: &WorldState, fan: &RayFan, max_range: f64, out: &mut [f64]) {
    debug_assert_eq!(fan.len(), out.len());
    let origin = state.agent_pos;
    out.fill(max_range);
    for shape in state.obstacle_shapes() {
        // Shapes whose nearest point is past max range cannot shorten a ray.
        if shape.distance_to_surface(origin) >= max_range {
            continue;
        }
        for (slot, &dir) in out.iter_mut().zip(fan.directions()) {
            if let Some(t) = shape.ray_intersect(origin, dir) {
                if t < *slot {
                    *slot = t;
                }
            }
        }
    }
}

pub fn sense_leog(state: &WorldState, cfg: &SensorConfig) -> OccupancyGrid {
    let mut grid = OccupancyGrid::empty(cfg.leog_cells());
    sense_leog_into(state, cfg, &mut grid);
    grid
}

/// Marks every cell whose center lies inside (or on) an obstacle.
pub fn sense_leog_into(state: &WorldState, cfg: &SensorConfig, grid: &mut OccupancyGrid) {
    let n = cfg.leog_cells();
    debug_assert!(grid.rows == n && grid.cols == n);
    grid.cells.fill(0);
    let res = cfg.leog_resolution;
    let half = cfg.leog_side / 2.0;
    let x0 = state.agent_pos.x - half;
    let y0 = state.agent_pos.y - half;

    // Candidate index range for a coordinate interval, widened by one cell so
    // rounding in the division never drops a boundary cell; the exact
    // decision is made by `contains` on the cell center.
    let span = |lo: f64, hi: f64, origin: f64| -> Option<(usize, usize)> {
        let a = ((lo - origin) / res - 0.5).floor() - 1.0;
        let b = ((hi - origin) / res - 0.5).ceil() + 1.0;
        if b < 0.0 || a >= n as f64 {
            return None;
        }
        Some((a.max(0.0) as usize, (b.min(n as f64 - 1.0)) as usize))
    };

    for shape in state.obstacle_shapes() {
        let (lo, hi) = shape.bounds();
        let (Some((c0, c1)), Some((r0, r1))) = (span(lo.x, hi.x, x0), span(lo.y, hi.y, y0)) else {
            continue;
        };
        for row in r0..=r1 {
            let cy = y0 + (row as f64 + 0.5) * res;
            let line = &mut grid.cells[row * n..(row + 1) * n];
            for (col, cell) in line.iter_mut().enumerate().take(c1 + 1).skip(c0) {
                let cx = x0 + (col as f64 + 0.5) * res;
                if *cell == 0 && shape.contains(Vec2::new(cx, cy)) {
                    *cell = 1;
                }
            }
        }
    }
}

pub fn sense_goal(state: &WorldState) -> GoalRel {
    let offset = state.agent_goal - state.agent_pos;
    GoalRel {
        distance: offset.length(),
        angle: offset.angle(),
    }
}

/// Reusable observation builder for one sensor configuration.
#[derive(Debug, Clone)]
pub struct Sensors {
    cfg: SensorConfig,
    fan: RayFan,
}

impl Sensors {
    pub fn new(cfg: SensorConfig) -> Self {
        let fan = RayFan::new(cfg.ray_count);
        Sensors { cfg, fan }
    }

    pub fn config(&self) -> &SensorConfig {
        &self.cfg
    }

    /// Builds an observation with exactly the configured modalities. With no
    /// obstacle in the scene the closest-obstacle reading saturates at
    /// `ray_max_range` along +x.
    pub fn observe(&self, state: &WorldState) -> Observation {
        let cfg = &self.cfg;
        let closest = cfg
            .has(Modality::ClosestObstacle)
            .then(|| sense_closest(state, cfg.closest_format).unwrap_or([cfg.ray_max_range, 0.0]));
        let raycast = cfg.has(Modality::Raycast).then(|| {
            let mut out = vec![0.0; self.fan.len()];
            sense_raycast_into(state, &self.fan, cfg.ray_max_range, &mut out);
            out
        });
        let leog = cfg.has(Modality::Leog).then(|| sense_leog(state, cfg));
        Observation {
            closest,
            raycast,
            leog,
            goal_rel: sense_goal(state),
        }
    }
}
