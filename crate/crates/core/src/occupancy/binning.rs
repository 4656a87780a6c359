use serde::{Deserialize, Serialize};

use super::{GridSpec, LogOddsGrid, OccupancyConfig};
use crate::geometry::Vec2;
use crate::sensor::{cast_rays, sample_points, CameraIntrinsics, LabeledPoint, PointLabel, Pose2D};
use crate::worldgen::FloorPlan;
use crate::{Error, Result};

/// Three-camera rig: a center camera at the robot and two side cameras
/// displaced laterally and turned inward toward the area ahead.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CameraRig {
    pub lateral_offset: f64,
    pub inward_rotation_deg: f64,
    /// Mounting height; carried as metadata only in the planar model.
    pub height: f64,
}

impl Default for CameraRig {
    fn default() -> Self {
        Self {
            lateral_offset: 0.3,
            inward_rotation_deg: 30.0,
            height: 0.5,
        }
    }
}

impl CameraRig {
    pub fn degenerate() -> Self {
        Self {
            lateral_offset: 0.0,
            inward_rotation_deg: 0.0,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lateral_offset >= 0.0) {
            return Err(Error::Config("rig: lateral_offset must be >= 0".into()));
        }
        if !(self.inward_rotation_deg >= 0.0 && self.inward_rotation_deg < 90.0) {
            return Err(Error::Config("rig: inward_rotation must be in [0, 90)".into()));
        }
        Ok(())
    }
}

/// Poses of the (center, left, right) cameras for a robot pose.
pub fn rig_poses(robot: Pose2D, rig: &CameraRig) -> (Pose2D, Pose2D, Pose2D) {
    let rot = rig.inward_rotation_deg.to_radians();
    let p = robot.position();
    let left = p + robot.left() * rig.lateral_offset;
    let right = p - robot.left() * rig.lateral_offset;
    (
        robot,
        Pose2D::new(left.x, left.y, robot.yaw - rot),
        Pose2D::new(right.x, right.y, robot.yaw + rot),
    )
}

/// Express world points in the robot frame (translate, then rotate by -yaw).
pub fn to_robot_frame(points: &[LabeledPoint], robot: Pose2D) -> Vec<LabeledPoint> {
    let (s, c) = robot.yaw.sin_cos();
    points
        .iter()
        .map(|p| {
            let dx = p.position.x - robot.x;
            let dy = p.position.y - robot.y;
            LabeledPoint {
                position: Vec2::new(c * dx + s * dy, -s * dx + c * dy),
                label: p.label,
            }
        })
        .collect()
}

/// Bin robot-frame points: obstacle points add one, floor points subtract
/// one, the per-cell count is clipped and then scaled by `m`.
pub fn bin_points(points: &[LabeledPoint], spec: &GridSpec, cfg: &OccupancyConfig) -> LogOddsGrid {
    let mut counts = vec![0i64; spec.len()];
    for p in points {
        if let Some((r, c)) = spec.cell_of(p.position) {
            counts[r * spec.resolution + c] += match p.label {
                PointLabel::Obstacle => 1,
                PointLabel::Floor => -1,
            };
        }
    }
    let clip = i64::from(cfg.clip_counts);
    let values = counts
        .into_iter()
        .map(|n| (cfg.m * n.clamp(-clip, clip) as f64) as f32)
        .collect();
    LogOddsGrid { spec: *spec, values }
}

/// Log-odds grid seen by a camera at `camera`, expressed in the frame of
/// `robot`.
pub fn observe(
    plan: &FloorPlan,
    camera: Pose2D,
    robot: Pose2D,
    intr: &CameraIntrinsics,
    spec: &GridSpec,
    cfg: &OccupancyConfig,
) -> Result<LogOddsGrid> {
    let hits = cast_rays(plan, camera, intr)?;
    let world = sample_points(&hits, camera, intr);
    Ok(bin_points(&to_robot_frame(&world, robot), spec, cfg))
}
