//! Planar depth sensing.
//!
//! A camera is modeled as a fan of rays in the floor plane. Each ray reports
//! the exact first intersection with a wall or obstacle; the hit is then
//! expanded into labeled points (free floor up to the hit, one obstacle point
//! at the hit) which feed the occupancy binning.

use serde::{Deserialize, Serialize};

use crate::geometry::{normalize_angle, Vec2};
use crate::worldgen::{FloorPlan, SolidKind};
use crate::{Error, Result};

/// Planar pose. `yaw` is counterclockwise from +x, kept in (-pi, pi].
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Pose2D {
    pub x: f64,
    pub y: f64,
    pub yaw: f64,
}

impl Pose2D {
    pub fn new(x: f64, y: f64, yaw: f64) -> Self {
        Self {
            x,
            y,
            yaw: normalize_angle(yaw),
        }
    }

    pub fn position(&self) -> Vec2 {
        Vec2::new(self.x, self.y)
    }

    pub fn heading(&self) -> Vec2 {
        Vec2::from_angle(self.yaw)
    }

    /// Unit vector pointing to the robot's left.
    pub fn left(&self) -> Vec2 {
        let (s, c) = self.yaw.sin_cos();
        Vec2::new(-s, c)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CameraIntrinsics {
    pub hfov_deg: f64,
    pub ray_count: usize,
    pub max_range: f64,
    pub sample_step: f64,
}

impl Default for CameraIntrinsics {
    fn default() -> Self {
        Self {
            hfov_deg: 90.0,
            ray_count: 256,
            max_range: 6.0,
            sample_step: 0.05,
        }
    }
}

impl CameraIntrinsics {
    pub fn validate(&self) -> Result<()> {
        if !(self.hfov_deg > 0.0 && self.hfov_deg < 180.0) {
            return Err(Error::Config("camera: hfov must be in (0, 180)".into()));
        }
        if self.ray_count < 2 {
            return Err(Error::Config("camera: ray_count must be >= 2".into()));
        }
        if !(self.sample_step > 0.0) || !(self.max_range > 0.0) {
            return Err(Error::Config("camera: sample_step and max_range must be positive".into()));
        }
        Ok(())
    }

    /// Ray angle relative to the camera axis; ray 0 is the rightmost.
    pub fn ray_angle(&self, i: usize) -> f64 {
        let hfov = self.hfov_deg.to_radians();
        -hfov / 2.0 + hfov * i as f64 / (self.ray_count - 1) as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HitLabel {
    Obstacle,
    Wall,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RayHit {
    /// Radians relative to the camera axis.
    pub angle: f64,
    pub distance: Option<f64>,
    pub label: HitLabel,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PointLabel {
    Floor,
    Obstacle,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LabeledPoint {
    pub position: Vec2,
    pub label: PointLabel,
}

pub fn cast_rays(plan: &FloorPlan, pose: Pose2D, intr: &CameraIntrinsics) -> Result<Vec<RayHit>> {
    intr.validate()?;
    let origin = pose.position();
    if !plan.boundary.contains(origin) || plan.is_solid(origin) {
        return Err(Error::PoseInSolid { x: pose.x, y: pose.y });
    }
    let hits = (0..intr.ray_count)
        .map(|i| {
            let angle = intr.ray_angle(i);
            let dir = Vec2::from_angle(pose.yaw + angle);
            let mut best: Option<(f64, SolidKind)> = None;
            for (kind, rect) in plan.solids() {
                if let Some(t) = rect.ray_entry(origin, dir) {
                    if best.is_none_or(|(bt, _)| t < bt) {
                        best = Some((t, kind));
                    }
                }
            }
            match best {
                Some((t, kind)) if t <= intr.max_range => RayHit {
                    angle,
                    distance: Some(t),
                    label: match kind {
                        SolidKind::Wall => HitLabel::Wall,
                        SolidKind::Obstacle => HitLabel::Obstacle,
                    },
                },
                _ => RayHit {
                    angle,
                    distance: None,
                    label: HitLabel::None,
                },
            }
        })
        .collect();
    Ok(hits)
}

/// Number of floor samples a ray contributes: samples at `k * step` for
/// `k >= 1` up to `hit - step/2`, or up to `max_range` without a hit.
pub fn floor_sample_count(distance: Option<f64>, intr: &CameraIntrinsics) -> usize {
    let limit = match distance {
        Some(d) => d - intr.sample_step / 2.0,
        None => intr.max_range,
    };
    if limit < intr.sample_step {
        return 0;
    }
    // tolerate representation error in ratios such as 6.0 / 0.05
    (limit / intr.sample_step + 1e-9).floor() as usize
}

pub fn sample_points(hits: &[RayHit], pose: Pose2D, intr: &CameraIntrinsics) -> Vec<LabeledPoint> {
    let origin = pose.position();
    let mut out = Vec::new();
    for hit in hits {
        let dir = Vec2::from_angle(pose.yaw + hit.angle);
        let n = floor_sample_count(hit.distance, intr);
        out.extend((1..=n).map(|k| LabeledPoint {
            position: origin + dir * (k as f64 * intr.sample_step),
            label: PointLabel::Floor,
        }));
        if let Some(d) = hit.distance {
            out.push(LabeledPoint {
                position: origin + dir * d,
                label: PointLabel::Obstacle,
            });
        }
    }
    out
}
