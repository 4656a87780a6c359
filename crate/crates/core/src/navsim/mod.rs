//! Navigation benchmark: a robot senses, optionally inpaints its local map,
//! fuses it into a global map, plans over a cost map with Dijkstra and moves
//! with confidence-dependent speed. Episodes are scored with SPD, success
//! weighted by normalized inverse path duration.

mod episode;
mod planner;

pub use episode::{
    generate_specs, reference_duration, run_episode, run_suite, spd, suite_report, EpisodeResult, EpisodeSpec,
    NavContext, NavMethod, SuiteResult, Termination,
};
pub use planner::{plan, CostGrid, Path};

use serde::{Deserialize, Serialize};

use crate::geometry::Vec2;
use crate::occupancy::{fuse_pair, CellState, LogOddsGrid, OccupancyConfig, ProbGrid};
use crate::sensor::Pose2D;
use crate::worldgen::{cells_for, FloorPlan};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NavConfig {
    pub cell: f64,
    pub move_step: f64,
    pub los_tolerance_deg: f64,
    pub s_max: usize,
    pub v_max: f64,
    pub omega_max_deg: f64,
    pub v_min_fraction: f64,
    /// Path cells ahead of the robot that set its speed.
    pub lookahead_cells: usize,
    /// Treat predicted-free cells like observed-free ones for speed.
    pub full_speed_inpainted: bool,
    /// Minimum straight-line distance between start and goal.
    pub min_goal_distance: f64,
}

impl Default for NavConfig {
    fn default() -> Self {
        Self {
            cell: 0.2,
            move_step: 0.2,
            los_tolerance_deg: 1.0,
            s_max: 100,
            v_max: 1.0,
            omega_max_deg: 90.0,
            v_min_fraction: 0.1,
            lookahead_cells: 3,
            full_speed_inpainted: false,
            min_goal_distance: 1.5,
        }
    }
}

impl NavConfig {
    pub fn validate(&self) -> Result<()> {
        let pos = [self.cell, self.move_step, self.los_tolerance_deg, self.v_max, self.omega_max_deg, self.v_min_fraction];
        if pos.iter().any(|v| !(*v > 0.0)) || self.s_max == 0 || self.lookahead_cells == 0 {
            return Err(Error::Config("nav: all settings must be positive".into()));
        }
        if self.los_tolerance_deg >= 180.0 || self.v_min_fraction > 1.0 {
            return Err(Error::Config("nav: los_tolerance < 180 and v_min_fraction <= 1 required".into()));
        }
        if !(self.min_goal_distance >= 0.0) {
            return Err(Error::Config("nav: min_goal_distance must be >= 0".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CostMapConfig {
    pub observed_free: f64,
    pub observed_occupied: f64,
    pub predicted_free: f64,
    pub predicted_occupied: f64,
    pub unknown: f64,
}

impl Default for CostMapConfig {
    fn default() -> Self {
        Self {
            observed_free: 1.0,
            observed_occupied: 100000.0,
            predicted_free: 2.0,
            predicted_occupied: 1000.0,
            unknown: 10.0,
        }
    }
}

impl CostMapConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = self.observed_occupied > self.predicted_occupied
            && self.predicted_occupied > self.unknown
            && self.unknown > self.predicted_free
            && self.predicted_free > self.observed_free
            && self.observed_free > 0.0;
        if !ok {
            return Err(Error::Config(
                "costmap: need observed_occupied > predicted_occupied > unknown > predicted_free > observed_free > 0"
                    .into(),
            ));
        }
        Ok(())
    }
}

/// World-frame map over the room interior. Row `r` covers
/// `[min_y + r*cell, min_y + (r+1)*cell)`, column `c` likewise in x.
#[derive(Debug, Clone, PartialEq)]
pub struct GlobalMap {
    pub origin: Vec2,
    pub cell: f64,
    pub rows: usize,
    pub cols: usize,
    /// Fused log-odds evidence.
    pub observed: Vec<f32>,
    /// Inpainted probabilities, 0.5 where nothing was predicted.
    pub predicted: Vec<f32>,
}

impl GlobalMap {
    pub fn unknown(plan: &FloorPlan, cell: f64) -> Self {
        let rows = cells_for(plan.boundary.height(), cell);
        let cols = cells_for(plan.boundary.width(), cell);
        Self {
            origin: Vec2::new(plan.boundary.min_x, plan.boundary.min_y),
            cell,
            rows,
            cols,
            observed: vec![0.0; rows * cols],
            predicted: vec![0.5; rows * cols],
        }
    }

    /// Full-knowledge map: every cell observed at the strongest evidence
    /// `bin_points` can produce, occupied where the truth raster is.
    pub fn from_truth(plan: &FloorPlan, cell: f64, occ: &OccupancyConfig) -> Self {
        let mut g = Self::unknown(plan, cell);
        let raster = plan.interior_raster(cell);
        let l = occ.max_logodds();
        for r in 0..g.rows {
            for c in 0..g.cols {
                g.observed[r * g.cols + c] = if raster.get(r, c) { l } else { -l };
            }
        }
        g
    }

    pub fn len(&self) -> usize {
        self.rows * self.cols
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn cell_of(&self, p: Vec2) -> Option<(usize, usize)> {
        let c = ((p.x - self.origin.x) / self.cell).floor();
        let r = ((p.y - self.origin.y) / self.cell).floor();
        if c < 0.0 || r < 0.0 || c >= self.cols as f64 || r >= self.rows as f64 {
            return None;
        }
        Some((r as usize, c as usize))
    }

    pub fn cell_center(&self, row: usize, col: usize) -> Vec2 {
        Vec2::new(
            self.origin.x + (col as f64 + 0.5) * self.cell,
            self.origin.y + (row as f64 + 0.5) * self.cell,
        )
    }

    pub fn observed_prob(&self, i: usize) -> f32 {
        (1.0 / (1.0 + (-f64::from(self.observed[i])).exp())) as f32
    }

    pub fn observed_state(&self, i: usize, occ: &OccupancyConfig) -> CellState {
        occ.classify_prob(self.observed_prob(i))
    }

    pub fn predicted_state(&self, i: usize, occ: &OccupancyConfig) -> CellState {
        occ.classify_prob(self.predicted[i])
    }
}

/// Fuse a robot-frame observation and its inpainted version into the map.
///
/// Every local cell is carried by its center into the world frame and
/// assigned to the global cell containing it. The observed layer fuses
/// pairwise with the three-view rule. Among the inpainted values landing in
/// one global cell this update, the one farthest from 0.5 is kept (the
/// first in row-major local order on ties); it is stored only where the
/// global cell is still unknown in the observed layer, otherwise the
/// predicted layer is reset to 0.5.
pub fn update_global(
    g: &mut GlobalMap,
    local_obs: &LogOddsGrid,
    local_inpainted: &ProbGrid,
    robot: Pose2D,
    occ: &OccupancyConfig,
) -> Result<()> {
    if local_obs.spec != local_inpainted.spec {
        return Err(Error::ShapeMismatch("observation and inpainted grids differ".into()));
    }
    let spec = local_obs.spec;
    let (s, c) = robot.yaw.sin_cos();
    let mut touched: Vec<Option<f32>> = vec![None; g.len()];
    let mut order = Vec::new();
    for row in 0..spec.resolution {
        for col in 0..spec.resolution {
            let p = spec.cell_center(row, col);
            let w = Vec2::new(robot.x + c * p.x - s * p.y, robot.y + s * p.x + c * p.y);
            let Some((gr, gc)) = g.cell_of(w) else { continue };
            let gi = gr * g.cols + gc;
            let li = row * spec.resolution + col;
            g.observed[gi] = fuse_pair(g.observed[gi], local_obs.values[li]);
            let v = local_inpainted.values[li];
            match touched[gi] {
                None => {
                    touched[gi] = Some(v);
                    order.push(gi);
                }
                Some(old) if (v - 0.5).abs() > (old - 0.5).abs() => touched[gi] = Some(v),
                Some(_) => {}
            }
        }
    }
    for gi in order {
        g.predicted[gi] = if g.observed_state(gi, occ).is_known() {
            0.5
        } else {
            touched[gi].expect("touched cell has a value")
        };
    }
    Ok(())
}

/// Per-cell traversal weights: the observed classification decides when it
/// is known, then the predicted one, else the unknown weight.
pub fn build_costmap(g: &GlobalMap, cfg: &CostMapConfig, occ: &OccupancyConfig) -> CostGrid {
    let weights = (0..g.len())
        .map(|i| match g.observed_state(i, occ) {
            CellState::Free => cfg.observed_free,
            CellState::Occupied => cfg.observed_occupied,
            CellState::Unknown => match g.predicted_state(i, occ) {
                CellState::Free => cfg.predicted_free,
                CellState::Occupied => cfg.predicted_occupied,
                CellState::Unknown => cfg.unknown,
            },
        })
        .collect();
    CostGrid { rows: g.rows, cols: g.cols, weights }
}

/// Speed over a path segment: full speed when every cell is observed free,
/// otherwise `clamp(2 * (1 - q) * v_max, v_min_fraction * v_max, v_max)`
/// where `q` is the largest occupancy probability along the segment.
pub fn compute_speed(segment: &[(usize, usize)], g: &GlobalMap, cfg: &NavConfig, occ: &OccupancyConfig) -> f64 {
    let free_enough = |i: usize| match g.observed_state(i, occ) {
        CellState::Free => true,
        CellState::Unknown => cfg.full_speed_inpainted && g.predicted_state(i, occ) == CellState::Free,
        CellState::Occupied => false,
    };
    let idx: Vec<usize> = segment.iter().map(|&(r, c)| r * g.cols + c).collect();
    if idx.iter().all(|&i| free_enough(i)) {
        return cfg.v_max;
    }
    let q = idx
        .iter()
        .map(|&i| {
            if g.observed_state(i, occ).is_known() {
                f64::from(g.observed_prob(i))
            } else if g.predicted_state(i, occ).is_known() {
                f64::from(g.predicted[i])
            } else {
                0.5
            }
        })
        .fold(0.0, f64::max);
    (cfg.v_max * 2.0 * (1.0 - q)).clamp(cfg.v_min_fraction * cfg.v_max, cfg.v_max)
}
