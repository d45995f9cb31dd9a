//! TOML run manifests.
//!
//! ```toml
//! seed = 7
//! output_dir = "runs/ascending"
//!
//! [dataset]
//! root = "kitti/training"
//! al_split = "al.txt"
//! test_split = "test.txt"
//!
//! [cycle]
//! ordering = "ascending"   # descending | shuffle
//! score_kind = "nob"       # iou
//! training_mode = "scratch"
//!
//! [matching]
//! iou_threshold = 0.5
//!
//! [detector]
//! mirror_decorrelation = 0.3
//!
//! [eval]
//! recall_points = 40
//! ```
//!
//! Every table and key is optional except `[dataset]`; unknown keys are
//! rejected. Relative paths are resolved against the manifest's directory.
//! The single `seed` feeds every random stream through [`derive`].

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::cycle::CycleConfig;
use crate::detector::SimDetectorParams;
use crate::error::{Error, Result};
use crate::evaluation::EvalConfig;
use crate::inconsistency::MatchConfig;
use crate::seeding::derive;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetPaths {
    pub root: PathBuf,
    pub al_split: PathBuf,
    pub test_split: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunManifest {
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    pub dataset: DatasetPaths,
    #[serde(default)]
    pub cycle: CycleConfig,
    #[serde(default)]
    pub matching: MatchConfig,
    #[serde(default)]
    pub detector: SimDetectorParams,
    #[serde(default)]
    pub eval: EvalConfig,
}

impl RunManifest {
    pub fn new(dataset: DatasetPaths) -> Self {
        Self {
            seed: 0,
            output_dir: None,
            dataset,
            cycle: CycleConfig::default(),
            matching: MatchConfig::default(),
            detector: SimDetectorParams::default(),
            eval: EvalConfig::default(),
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        let m: Self = toml::from_str(text).map_err(|e| Error::Manifest(e.to_string()))?;
        m.validate()?;
        Ok(m)
    }

    /// Reads a manifest and resolves its relative paths against its directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut m = Self::parse(&text)?;
        if let Some(base) = path.parent() {
            m.resolve_paths(base);
        }
        Ok(m)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Manifest(e.to_string()))
    }

    pub fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        fix(&mut self.dataset.root);
        fix(&mut self.dataset.al_split);
        fix(&mut self.dataset.test_split);
        if let Some(out) = self.output_dir.as_mut() {
            fix(out);
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.cycle_config().validate()?;
        self.detector.validate()?;
        self.eval.validate()
    }

    /// Cycle settings with the split/rank seed and matching filled in.
    pub fn cycle_config(&self) -> CycleConfig {
        CycleConfig {
            seed: derive(self.seed, "cycle"),
            match_config: self.matching,
            ..self.cycle.clone()
        }
    }

    pub fn detector_params(&self) -> SimDetectorParams {
        SimDetectorParams {
            seed: derive(self.seed, "detector"),
            ..self.detector.clone()
        }
    }
}
