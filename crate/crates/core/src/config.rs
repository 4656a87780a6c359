//! The aggregated run configuration, read from a single TOML file.
//!
//! Every section is optional and falls back to its defaults; unknown keys
//! are rejected. A minimal file is just `seed = 7`.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::dataset::{BuildInputs, DatasetConfig};
use crate::models::TrainConfig;
use crate::navsim::{CostMapConfig, NavConfig, NavContext};
use crate::occupancy::{CameraRig, GridSpec, OccupancyConfig};
use crate::sensor::CameraIntrinsics;
use crate::worldgen::{generate_world, FloorPlan, WorldSpec};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Drives training and episode sampling.
    pub seed: u64,
    /// Template for every generated room. Its `seed` is replaced by the
    /// world ids listed under `[dataset]`.
    pub world: WorldSpec,
    pub dataset: DatasetConfig,
    pub grid: GridSpec,
    pub occupancy: OccupancyConfig,
    pub rig: CameraRig,
    pub camera: CameraIntrinsics,
    pub train: TrainConfig,
    pub nav: NavConfig,
    pub costmap: CostMapConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            world: WorldSpec::default(),
            dataset: DatasetConfig::default(),
            grid: GridSpec::desk(),
            occupancy: OccupancyConfig::default(),
            rig: CameraRig::default(),
            camera: CameraIntrinsics::default(),
            train: TrainConfig::default(),
            nav: NavConfig::default(),
            costmap: CostMapConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Config(e.message().to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn validate(&self) -> Result<()> {
        self.world.validate()?;
        self.dataset.validate()?;
        self.grid.validate()?;
        self.occupancy.validate()?;
        self.rig.validate()?;
        self.camera.validate()?;
        self.train.validate()?;
        self.nav.validate()?;
        self.costmap.validate()?;
        if self.train.seed != 0 && self.train.seed != self.seed {
            return Err(Error::Config("train.seed conflicts with the top-level seed; set only `seed`".into()));
        }
        Ok(())
    }

    /// Canonical TOML form; equal configs give equal text.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("run config always serializes")
    }

    /// First 16 hex digits of the SHA-256 of the canonical form.
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.to_toml().as_bytes());
        digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }

    pub fn train_config(&self) -> TrainConfig {
        TrainConfig { seed: self.seed, ..self.train.clone() }
    }

    pub fn nav_context(&self) -> NavContext {
        NavContext {
            nav: self.nav.clone(),
            costmap: self.costmap.clone(),
            occ: self.occupancy.clone(),
            grid: self.grid,
            intr: self.camera.clone(),
            rig: self.rig.clone(),
        }
    }

    pub fn build_inputs(&self) -> BuildInputs<'_> {
        BuildInputs {
            world: &self.world,
            dataset: &self.dataset,
            rig: &self.rig,
            intr: &self.camera,
            grid: &self.grid,
            occ: &self.occupancy,
        }
    }

    pub fn world(&self, id: u64) -> Result<FloorPlan> {
        generate_world(&self.world.with_seed(id))
    }

    /// Worlds used by navigation suites: the test split.
    pub fn nav_worlds(&self) -> Result<Vec<FloorPlan>> {
        self.dataset.test_worlds.iter().map(|&id| self.world(id)).collect()
    }
}
