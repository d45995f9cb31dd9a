//! Manifest-driven entry points shared by the command line and tests.

use std::path::Path;

use crate::cycle::{initial_scores, run, RunOutcome};
use crate::detector::{SimDetector, SimTrainer};
use crate::error::{Error, Result};
use crate::inconsistency::InconsistencyRecord;
use crate::kitti::{load_dataset, read_split_index, Frame};
use crate::manifest::RunManifest;
use crate::output::write_run;
use crate::seeding::{derive, hash_str, key};

/// Frames in the canonical KITTI object training set.
pub const KITTI_TRAIN_FRAMES: usize = 7481;
/// Size of the usual active-learning half of that set.
pub const KITTI_AL_FRAMES: usize = 3712;

/// Seeded two-way split of `ids`: `al_count` ids for active learning, the
/// rest for testing. Both halves come back sorted.
pub fn split_ids(ids: &[String], al_count: usize, seed: u64) -> Result<(Vec<String>, Vec<String>)> {
    if al_count > ids.len() {
        return Err(Error::InvalidConfig(format!(
            "cannot take {al_count} frames out of {}",
            ids.len()
        )));
    }
    let stream = derive(seed, "split");
    let mut order = ids.to_vec();
    order.sort_by_cached_key(|id| (key(&[stream, hash_str(id)]), id.clone()));
    let mut test = order.split_off(al_count);
    order.sort();
    test.sort();
    Ok((order, test))
}

/// Loads the active-learning and test frames named by the manifest.
pub fn load_splits(m: &RunManifest) -> Result<(Vec<Frame>, Vec<Frame>)> {
    let al_ids = read_split_index(&m.dataset.al_split)?;
    let test_ids = read_split_index(&m.dataset.test_split)?;
    if let Some(id) = al_ids.iter().find(|id| test_ids.contains(id)) {
        return Err(Error::InvalidConfig(format!("frame {id} is in both splits")));
    }
    Ok((load_dataset(&m.dataset.root, &al_ids)?, load_dataset(&m.dataset.root, &test_ids)?))
}

/// Runs the full loop for a manifest and writes its artifacts to `out_dir`.
pub fn run_manifest(m: &RunManifest, out_dir: &Path) -> Result<RunOutcome<SimDetector>> {
    m.validate()?;
    let (al, test) = load_splits(m)?;
    let trainer = SimTrainer::new(m.detector_params())?;
    let outcome = run(&al, &test, &m.cycle_config(), &m.eval, &trainer)?;
    write_run(out_dir, &outcome, al.len(), Some(&outcome.final_model.state.to_bytes()))?;
    Ok(outcome)
}

/// Fits on the initial labeled split and scores the remaining pool.
pub fn score_manifest(m: &RunManifest) -> Result<Vec<InconsistencyRecord>> {
    m.validate()?;
    let (al, _) = load_splits(m)?;
    let trainer = SimTrainer::new(m.detector_params())?;
    let (_, records) = initial_scores(&al, &m.cycle_config(), &trainer)?;
    Ok(records)
}
