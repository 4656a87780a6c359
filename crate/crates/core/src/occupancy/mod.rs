//! Robot-frame occupancy grids.
//!
//! Grids cover a square window in front of the robot: the robot sits at the
//! midpoint of the window's rear edge, `forward` runs along the columns and
//! the robot's left (+y) is row 0. Rendered as an image the robot is on the
//! left edge, looking right.
//!
//! Log-odds grids hold `m * clip(obstacle_count - floor_count)`; probability
//! grids hold the logistic of that value, with 0.5 meaning unknown.

mod binning;
mod fusion;

pub use binning::{bin_points, observe, rig_poses, to_robot_frame, CameraRig};
pub use fusion::{fuse3, fuse_pair, logodds_to_prob, prob_to_logodds, sign0};

use serde::{Deserialize, Serialize};

use crate::geometry::Vec2;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSpec {
    pub forward_extent: f64,
    pub lateral_extent: f64,
    pub resolution: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            forward_extent: 5.0,
            lateral_extent: 5.0,
            resolution: 256,
        }
    }
}

impl GridSpec {
    /// The 64x64 grid used for desk-scale training.
    pub fn desk() -> Self {
        Self {
            resolution: 64,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.forward_extent > 0.0 && self.lateral_extent > 0.0) {
            return Err(Error::Config("grid: extents must be positive".into()));
        }
        if self.resolution < 8 {
            return Err(Error::Config("grid: resolution must be >= 8".into()));
        }
        if self.forward_extent != self.lateral_extent {
            return Err(Error::Config("grid: cells must be square (equal extents)".into()));
        }
        Ok(())
    }

    pub fn cell_size(&self) -> f64 {
        self.forward_extent / self.resolution as f64
    }

    pub fn len(&self) -> usize {
        self.resolution * self.resolution
    }

    pub fn is_empty(&self) -> bool {
        self.resolution == 0
    }

    /// `(row, col)` of a robot-frame point, or `None` outside the window
    /// `[0, forward) x [-lateral/2, lateral/2)`.
    pub fn cell_of(&self, p: Vec2) -> Option<(usize, usize)> {
        let cs = self.cell_size();
        let half = self.lateral_extent / 2.0;
        if !(p.x >= 0.0 && p.x < self.forward_extent && p.y >= -half && p.y < half) {
            return None;
        }
        let col = ((p.x / cs).floor() as usize).min(self.resolution - 1);
        // y == -half lands exactly on `resolution`; it belongs to the last row
        let row = (((half - p.y) / cs).floor() as usize).min(self.resolution - 1);
        Some((row, col))
    }

    /// Robot-frame center of a cell.
    pub fn cell_center(&self, row: usize, col: usize) -> Vec2 {
        let cs = self.cell_size();
        Vec2::new((col as f64 + 0.5) * cs, self.lateral_extent / 2.0 - (row as f64 + 0.5) * cs)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OccupancyConfig {
    /// Log-odds per net point.
    pub m: f64,
    pub clip_counts: i32,
    pub free_threshold: f64,
    pub occupied_threshold: f64,
    /// Clamp applied when converting probabilities 0 or 1 back to log-odds.
    pub l_max: f64,
}

impl Default for OccupancyConfig {
    fn default() -> Self {
        Self {
            m: 0.01,
            clip_counts: 10,
            free_threshold: 0.495,
            occupied_threshold: 0.505,
            l_max: 10.0,
        }
    }
}

impl OccupancyConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.m > 0.0) || self.clip_counts <= 0 {
            return Err(Error::Config("occupancy: m and clip_counts must be positive".into()));
        }
        if !(self.free_threshold < 0.5 && 0.5 < self.occupied_threshold) {
            return Err(Error::Config("occupancy: thresholds must straddle 0.5".into()));
        }
        if !(self.l_max > 0.0) {
            return Err(Error::Config("occupancy: l_max must be positive".into()));
        }
        Ok(())
    }

    /// Largest log-odds magnitude `bin_points` can produce.
    pub fn max_logodds(&self) -> f32 {
        (self.m * self.clip_counts as f64) as f32
    }

    pub fn classify_prob(&self, p: f32) -> CellState {
        // Thresholds compare in f32 so that a stored 0.505 counts as occupied.
        if p < self.free_threshold as f32 {
            CellState::Free
        } else if p >= self.occupied_threshold as f32 {
            CellState::Occupied
        } else {
            CellState::Unknown
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CellState {
    Free,
    Occupied,
    Unknown,
}

impl CellState {
    pub fn is_known(self) -> bool {
        self != CellState::Unknown
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LogOddsGrid {
    pub spec: GridSpec,
    pub values: Vec<f32>,
}

impl LogOddsGrid {
    pub fn unknown(spec: GridSpec) -> Self {
        Self {
            spec,
            values: vec![0.0; spec.len()],
        }
    }

    pub fn from_values(spec: GridSpec, values: Vec<f32>) -> Result<Self> {
        if values.len() != spec.len() {
            return Err(Error::ShapeMismatch(format!(
                "grid expects {} values, got {}",
                spec.len(),
                values.len()
            )));
        }
        Ok(Self { spec, values })
    }

    pub fn get(&self, row: usize, col: usize) -> f32 {
        self.values[row * self.spec.resolution + col]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProbGrid {
    pub spec: GridSpec,
    pub values: Vec<f32>,
}

impl ProbGrid {
    pub fn unknown(spec: GridSpec) -> Self {
        Self {
            spec,
            values: vec![0.5; spec.len()],
        }
    }

    pub fn from_values(spec: GridSpec, values: Vec<f32>) -> Result<Self> {
        if values.len() != spec.len() {
            return Err(Error::ShapeMismatch(format!(
                "grid expects {} values, got {}",
                spec.len(),
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numeric("probability grid has non-finite values".into()));
        }
        Ok(Self { spec, values })
    }

    pub fn get(&self, row: usize, col: usize) -> f32 {
        self.values[row * self.spec.resolution + col]
    }

    pub fn known_count(&self, cfg: &OccupancyConfig) -> usize {
        self.values.iter().filter(|&&p| cfg.classify_prob(p).is_known()).count()
    }
}

pub fn classify(p: &ProbGrid, cfg: &OccupancyConfig) -> Vec<CellState> {
    p.values.iter().map(|&v| cfg.classify_prob(v)).collect()
}

/// 8-bit gray level of a probability: 0 at p = 0, 128 at p = 0.5, 255 at
/// p = 1, piecewise linear on each half, rounded to nearest.
pub fn prob_to_gray(p: f32) -> u8 {
    let p = f64::from(p).clamp(0.0, 1.0);
    let v = if p <= 0.5 {
        p * 256.0
    } else {
        128.0 + (p - 0.5) * 254.0
    };
    v.round().min(255.0) as u8
}
