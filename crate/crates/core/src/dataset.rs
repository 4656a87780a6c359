//! Pose sweeps over generated rooms, (input, target) map pairs and the OCCD
//! dataset container.
//!
//! OCCD layout, little-endian: `"OCCD"`, u32 version, u32 pair count, u32
//! height, u32 width, then per pair the input plane and the target plane as
//! `height * width` f32 each, then a u32-length-prefixed UTF-8 metadata
//! block with one header line and one line per pair.

use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::binio::{len_u32, put_f32s, put_text, put_u32, Reader};
use crate::geometry::Vec2;
use crate::occupancy::{
    fuse3, logodds_to_prob, observe, rig_poses, CameraRig, CellState, GridSpec, OccupancyConfig, ProbGrid,
};
use crate::sensor::{CameraIntrinsics, Pose2D};
use crate::worldgen::{generate_world, FloorPlan, WorldSpec};
use crate::{Error, Result};

pub const OCCD_MAGIC: &str = "OCCD";
pub const OCCD_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DatasetConfig {
    /// Spacing of the position lattice in meters.
    pub pose_grid: f64,
    pub yaw_step_deg: f64,
    /// Pairs whose target has a larger occupied fraction are dropped.
    pub occupied_filter: f64,
    pub train_worlds: Vec<u64>,
    pub test_worlds: Vec<u64>,
}

impl Default for DatasetConfig {
    fn default() -> Self {
        Self {
            pose_grid: 0.5,
            yaw_step_deg: 45.0,
            occupied_filter: 0.2,
            train_worlds: (0..10).collect(),
            test_worlds: (100..104).collect(),
        }
    }
}

impl DatasetConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.pose_grid > 0.0) {
            return Err(Error::Config("dataset: pose_grid must be positive".into()));
        }
        let n = 360.0 / self.yaw_step_deg;
        if !(self.yaw_step_deg > 0.0) || (n - n.round()).abs() > 1e-9 {
            return Err(Error::Config("dataset: 360 must be divisible by yaw_step_deg".into()));
        }
        if !(self.occupied_filter > 0.0 && self.occupied_filter <= 1.0) {
            return Err(Error::Config("dataset: occupied_filter must be in (0, 1]".into()));
        }
        if let Some(w) = self.train_worlds.iter().find(|w| self.test_worlds.contains(w)) {
            return Err(Error::Config(format!("dataset: world {w} is in both train and test splits")));
        }
        Ok(())
    }

    pub fn headings(&self) -> usize {
        (360.0 / self.yaw_step_deg).round() as usize
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairMeta {
    pub world: u64,
    pub pose: Pose2D,
    pub rig: CameraRig,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SamplePair {
    /// Center-camera map.
    pub input: ProbGrid,
    /// Fusion of the three rig views.
    pub target: ProbGrid,
    pub meta: PairMeta,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub grid: GridSpec,
    pub pairs: Vec<SamplePair>,
}

impl Dataset {
    pub fn empty(grid: GridSpec) -> Self {
        Self { grid, pairs: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn world_ids(&self) -> Vec<u64> {
        let mut ids: Vec<u64> = self.pairs.iter().map(|p| p.meta.world).collect();
        ids.sort_unstable();
        ids.dedup();
        ids
    }
}

/// Lattice positions at which the robot and both side cameras are free for
/// every heading, each expanded into the configured headings. Positions run
/// row by row (increasing y, then x); headings increase from 0.
pub fn sweep_poses(plan: &FloorPlan, cfg: &DatasetConfig, rig: &CameraRig) -> Vec<Pose2D> {
    let b = plan.boundary;
    let g = cfg.pose_grid;
    let heads: Vec<f64> = (0..cfg.headings())
        .map(|k| (k as f64 * cfg.yaw_step_deg).to_radians())
        .collect();
    let mut out = Vec::new();
    let mut j = 0;
    loop {
        let y = b.min_y + (j as f64 + 0.5) * g;
        if y >= b.max_y {
            break;
        }
        let mut i = 0;
        loop {
            let x = b.min_x + (i as f64 + 0.5) * g;
            if x >= b.max_x {
                break;
            }
            let camera_ok = |p: Vec2| b.contains_strict(p) && !plan.is_solid(p);
            let ok = camera_ok(Vec2::new(x, y))
                && heads.iter().all(|&yaw| {
                    let (_, l, r) = rig_poses(Pose2D::new(x, y, yaw), rig);
                    camera_ok(l.position()) && camera_ok(r.position())
                });
            if ok {
                out.extend(heads.iter().map(|&yaw| Pose2D::new(x, y, yaw)));
            }
            i += 1;
        }
        j += 1;
    }
    out
}

pub fn build_pair(
    plan: &FloorPlan,
    pose: Pose2D,
    rig: &CameraRig,
    intr: &CameraIntrinsics,
    spec: &GridSpec,
    cfg: &OccupancyConfig,
) -> Result<SamplePair> {
    let (c, l, r) = rig_poses(pose, rig);
    let oc = observe(plan, c, pose, intr, spec, cfg)?;
    let ol = observe(plan, l, pose, intr, spec, cfg)?;
    let or = observe(plan, r, pose, intr, spec, cfg)?;
    let target = logodds_to_prob(&fuse3(&oc, &ol, &or)?);
    Ok(SamplePair {
        input: logodds_to_prob(&oc),
        target,
        meta: PairMeta {
            world: plan.seed,
            pose,
            rig: rig.clone(),
        },
    })
}

pub fn occupied_fraction(p: &ProbGrid, occ: &OccupancyConfig) -> f64 {
    let n = p.values.iter().filter(|&&v| occ.classify_prob(v) == CellState::Occupied).count();
    n as f64 / p.values.len() as f64
}

/// Keep a pair unless more than `occupied_filter` of its target is occupied.
pub fn filter_pair(pair: &SamplePair, cfg: &DatasetConfig, occ: &OccupancyConfig) -> bool {
    occupied_fraction(&pair.target, occ) <= cfg.occupied_filter
}

/// Filtered pairs of one world, in sweep order.
pub fn world_pairs(
    plan: &FloorPlan,
    cfg: &DatasetConfig,
    rig: &CameraRig,
    intr: &CameraIntrinsics,
    spec: &GridSpec,
    occ: &OccupancyConfig,
) -> Result<Vec<SamplePair>> {
    let poses = sweep_poses(plan, cfg, rig);
    let built: Vec<Result<SamplePair>> = poses
        .par_iter()
        .map(|&pose| build_pair(plan, pose, rig, intr, spec, occ))
        .collect();
    let mut out = Vec::new();
    for p in built {
        let p = p?;
        if filter_pair(&p, cfg, occ) {
            out.push(p);
        }
    }
    Ok(out)
}

/// Everything a dataset build depends on.
#[derive(Debug, Clone, Copy)]
pub struct BuildInputs<'a> {
    pub world: &'a WorldSpec,
    pub dataset: &'a DatasetConfig,
    pub rig: &'a CameraRig,
    pub intr: &'a CameraIntrinsics,
    pub grid: &'a GridSpec,
    pub occ: &'a OccupancyConfig,
}

/// Generate the worlds with the given seeds and collect their pairs.
pub fn build_dataset(inputs: BuildInputs<'_>, world_seeds: &[u64]) -> Result<Dataset> {
    inputs.dataset.validate()?;
    inputs.grid.validate()?;
    inputs.rig.validate()?;
    let mut pairs = Vec::new();
    for &seed in world_seeds {
        let plan = generate_world(&inputs.world.with_seed(seed))?;
        pairs.extend(world_pairs(&plan, inputs.dataset, inputs.rig, inputs.intr, inputs.grid, inputs.occ)?);
    }
    Ok(Dataset { grid: *inputs.grid, pairs })
}

/// `(train, test)` datasets from the configured world splits.
pub fn build_split(inputs: BuildInputs<'_>) -> Result<(Dataset, Dataset)> {
    let train = build_dataset(inputs, &inputs.dataset.train_worlds)?;
    let test = build_dataset(inputs, &inputs.dataset.test_worlds)?;
    Ok((train, test))
}

fn meta_line(m: &PairMeta) -> String {
    format!(
        "world={} x={} y={} yaw={} rig_offset={} rig_rotation_deg={} rig_height={}",
        m.world, m.pose.x, m.pose.y, m.pose.yaw, m.rig.lateral_offset, m.rig.inward_rotation_deg, m.rig.height
    )
}

fn parse_meta_line(line: &str) -> Result<PairMeta> {
    let bad = || Error::Format(format!("bad pair metadata line {line:?}"));
    let mut fields = std::collections::BTreeMap::new();
    for tok in line.split_whitespace() {
        let (k, v) = tok.split_once('=').ok_or_else(bad)?;
        fields.insert(k, v);
    }
    let num = |k: &str| -> Result<f64> { fields.get(k).ok_or_else(bad)?.parse().map_err(|_| bad()) };
    let world = fields.get("world").ok_or_else(bad)?.parse().map_err(|_| bad())?;
    // stored yaw is already normalized; keep it bit-exact
    let pose = Pose2D {
        x: num("x")?,
        y: num("y")?,
        yaw: num("yaw")?,
    };
    Ok(PairMeta {
        world,
        pose,
        rig: CameraRig {
            lateral_offset: num("rig_offset")?,
            inward_rotation_deg: num("rig_rotation_deg")?,
            height: num("rig_height")?,
        },
    })
}

pub fn encode_dataset(ds: &Dataset) -> Result<Vec<u8>> {
    let res = ds.grid.resolution;
    let plane = ds.grid.len();
    let mut out = Vec::with_capacity(20 + ds.pairs.len() * plane * 8);
    out.extend_from_slice(OCCD_MAGIC.as_bytes());
    put_u32(&mut out, OCCD_VERSION);
    put_u32(&mut out, len_u32(ds.pairs.len(), "pair count")?);
    put_u32(&mut out, len_u32(res, "height")?);
    put_u32(&mut out, len_u32(res, "width")?);
    let mut meta = format!(
        "grid forward_extent={} lateral_extent={} resolution={}\n",
        ds.grid.forward_extent, ds.grid.lateral_extent, res
    );
    for p in &ds.pairs {
        if p.input.spec != ds.grid || p.target.spec != ds.grid {
            return Err(Error::ShapeMismatch("pair grid differs from dataset grid".into()));
        }
        put_f32s(&mut out, &p.input.values);
        put_f32s(&mut out, &p.target.values);
        meta.push_str(&meta_line(&p.meta));
        meta.push('\n');
    }
    put_text(&mut out, &meta);
    Ok(out)
}

pub fn decode_dataset(bytes: &[u8]) -> Result<Dataset> {
    let mut r = Reader::new(bytes);
    r.magic(OCCD_MAGIC)?;
    let version = r.u32("version")?;
    if version != OCCD_VERSION {
        return Err(Error::BadVersion { found: version, expected: OCCD_VERSION });
    }
    let count = r.u32("pair count")? as usize;
    let h = r.u32("height")? as usize;
    let w = r.u32("width")? as usize;
    if h != w {
        return Err(Error::Format(format!("non-square grid {h}x{w}")));
    }
    let plane = h * w;
    let mut planes = Vec::with_capacity(count.min(1 << 16));
    for i in 0..count {
        let a = r.f32s(plane, &format!("pair {i} input"))?;
        let b = r.f32s(plane, &format!("pair {i} target"))?;
        planes.push((a, b));
    }
    let meta = r.text("metadata")?;
    r.finish()?;
    let mut lines = meta.lines();
    let header = lines.next().ok_or_else(|| Error::Format("missing metadata header".into()))?;
    let grid = parse_grid_header(header, h)?;
    let mut pairs = Vec::with_capacity(count);
    for (a, b) in planes {
        let line = lines.next().ok_or_else(|| Error::Format("missing pair metadata".into()))?;
        pairs.push(SamplePair {
            input: ProbGrid::from_values(grid, a)?,
            target: ProbGrid::from_values(grid, b)?,
            meta: parse_meta_line(line)?,
        });
    }
    if lines.next().is_some() {
        return Err(Error::Format("extra metadata lines".into()));
    }
    Ok(Dataset { grid, pairs })
}

fn parse_grid_header(line: &str, res: usize) -> Result<GridSpec> {
    let bad = || Error::Format(format!("bad grid header {line:?}"));
    let rest = line.strip_prefix("grid ").ok_or_else(bad)?;
    let mut spec = GridSpec { resolution: res, ..GridSpec::default() };
    for tok in rest.split_whitespace() {
        let (k, v) = tok.split_once('=').ok_or_else(bad)?;
        match k {
            "forward_extent" => spec.forward_extent = v.parse().map_err(|_| bad())?,
            "lateral_extent" => spec.lateral_extent = v.parse().map_err(|_| bad())?,
            "resolution" => {
                if v.parse::<usize>().map_err(|_| bad())? != res {
                    return Err(Error::Format("grid header disagrees with plane size".into()));
                }
            }
            _ => return Err(bad()),
        }
    }
    Ok(spec)
}

pub fn save_dataset(ds: &Dataset, path: &Path) -> Result<()> {
    std::fs::write(path, encode_dataset(ds)?).map_err(|e| Error::io(path, e))
}

pub fn load_dataset(path: &Path) -> Result<Dataset> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_dataset(&bytes)
}
