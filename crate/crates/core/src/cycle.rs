//! Pool-based active-learning loop.
//!
//! A seeded fraction of the AL split is labeled up front and the detector is
//! fitted on it. Each cycle then scores the remaining pool, ranks it, moves
//! one chunk (a fixed fraction of the *original* split size) into the
//! labeled set, refits, and evaluates on the held-out test frames. The loop
//! ends when the pool is empty.
//!
//! Ranking always puts frames with a positive score first (sorted ascending
//! or descending), then zero-score frames, then discarded frames; the last
//! two strata are seeded shuffles. In pseudo mode the pool is scored and
//! ranked once, and later cycles consume that fixed order.

use std::collections::{BTreeMap, HashMap, HashSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::detector::{Detector, TrainingMode, Trainer};
use crate::error::{Error, Result};
use crate::evaluation::{evaluate, EvalConfig, EvalSummary};
use crate::inconsistency::{score_frame, InconsistencyRecord, MatchConfig};
use crate::kitti::{Frame, ObjectClass};
use crate::seeding::{derive, hash_str, key};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RankOrder {
    #[default]
    Ascending,
    Descending,
    /// Random baseline: a seeded permutation that ignores scores.
    #[serde(rename = "shuffle")]
    SeededShuffle,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScoreKind {
    #[default]
    Nob,
    Iou,
}

impl ScoreKind {
    pub fn of(self, record: &InconsistencyRecord) -> Option<f64> {
        match self {
            ScoreKind::Nob => record.s_nob,
            ScoreKind::Iou => record.s_iou,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CycleConfig {
    pub initial_fraction: f64,
    pub chunk_fraction: f64,
    pub ordering: RankOrder,
    pub score_kind: ScoreKind,
    pub normalized: bool,
    pub training_mode: TrainingMode,
    pub pseudo: bool,
    #[serde(skip)]
    pub seed: u64,
    #[serde(skip)]
    pub match_config: MatchConfig,
}

impl Default for CycleConfig {
    fn default() -> Self {
        Self {
            initial_fraction: 0.10,
            chunk_fraction: 0.10,
            ordering: RankOrder::Ascending,
            score_kind: ScoreKind::Nob,
            normalized: true,
            training_mode: TrainingMode::Scratch,
            pseudo: false,
            seed: 0,
            match_config: MatchConfig::default(),
        }
    }
}

impl CycleConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.initial_fraction > 0.0 && self.initial_fraction < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "initial_fraction must lie in (0, 1), got {}",
                self.initial_fraction
            )));
        }
        if !(self.chunk_fraction > 0.0 && self.chunk_fraction <= 1.0 - self.initial_fraction + 1e-12) {
            return Err(Error::InvalidConfig(format!(
                "chunk_fraction must lie in (0, 1 - initial_fraction], got {}",
                self.chunk_fraction
            )));
        }
        self.match_config.validate()
    }

    pub fn chunk_size(&self, n_total: usize) -> usize {
        fraction_count(self.chunk_fraction, n_total).max(1)
    }
}

/// `ceil(fraction * n)`, ignoring floating-point excess below 1e-9.
pub fn fraction_count(fraction: f64, n: usize) -> usize {
    let x = fraction * n as f64;
    ((x - 1e-9).ceil().max(0.0) as usize).min(n)
}

fn tie_key(seed: u64, id: &str) -> u64 {
    key(&[seed, hash_str(id)])
}

/// Sorts ids into the seeded order, with the id itself as last resort.
fn seeded_order(ids: &mut [String], seed: u64) {
    ids.sort_by_cached_key(|id| (tie_key(seed, id), id.clone()));
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Stratum {
    Inconsistent,
    Consistent,
    Discarded,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankedFrame {
    pub frame_id: String,
    pub stratum: Stratum,
}

pub fn stratum_of(record: &InconsistencyRecord, kind: ScoreKind) -> Stratum {
    match kind.of(record) {
        _ if record.discarded => Stratum::Discarded,
        None => Stratum::Discarded,
        Some(s) if s > 0.0 => Stratum::Inconsistent,
        Some(_) => Stratum::Consistent,
    }
}

/// Orders the records' frames for selection; see the module docs for the
/// strata. `seed` drives the shuffles and within-score tie breaks.
pub fn rank_pool(
    records: &[InconsistencyRecord],
    kind: ScoreKind,
    ordering: RankOrder,
    seed: u64,
) -> Vec<RankedFrame> {
    let mut tagged: Vec<(Stratum, f64, u64, &str)> = records
        .iter()
        .map(|r| {
            let stratum = stratum_of(r, kind);
            let score = kind.of(r).unwrap_or(0.0);
            (stratum, score, tie_key(seed, &r.frame_id), r.frame_id.as_str())
        })
        .collect();
    match ordering {
        RankOrder::SeededShuffle => tagged.sort_by(|a, b| (a.2, a.3).cmp(&(b.2, b.3))),
        RankOrder::Ascending | RankOrder::Descending => tagged.sort_by(|a, b| {
            let by_score = if a.0 == Stratum::Inconsistent && b.0 == Stratum::Inconsistent {
                match ordering {
                    RankOrder::Descending => b.1.total_cmp(&a.1),
                    _ => a.1.total_cmp(&b.1),
                }
            } else {
                std::cmp::Ordering::Equal
            };
            a.0.cmp(&b.0).then(by_score).then((a.2, a.3).cmp(&(b.2, b.3)))
        }),
    }
    tagged
        .into_iter()
        .map(|(stratum, _, _, id)| RankedFrame {
            frame_id: id.to_string(),
            stratum,
        })
        .collect()
}

/// Checks that `records` holds exactly one record per pool frame, then ranks.
pub fn rank_pool_checked(
    pool: &[String],
    records: &[InconsistencyRecord],
    kind: ScoreKind,
    ordering: RankOrder,
    seed: u64,
) -> Result<Vec<RankedFrame>> {
    let by_id: HashMap<&str, &InconsistencyRecord> =
        records.iter().map(|r| (r.frame_id.as_str(), r)).collect();
    let mut subset = Vec::with_capacity(pool.len());
    for id in pool {
        let r = by_id.get(id.as_str()).ok_or_else(|| Error::MissingRecord(id.clone()))?;
        subset.push((*r).clone());
    }
    Ok(rank_pool(&subset, kind, ordering, seed))
}

#[derive(Debug, Clone, PartialEq)]
pub struct CycleRecord {
    pub cycle_index: usize,
    pub selected_ids: Vec<String>,
    pub n_inconsistent_selected: usize,
    pub n_consistent_fill: usize,
    /// Labeled-set size after this cycle's selection.
    pub labeled_count: usize,
    pub labeled_fraction: f64,
    /// Non-DontCare instances per class in the labeled set.
    pub class_instance_counts: BTreeMap<ObjectClass, usize>,
    pub eval: Option<EvalSummary>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CycleState {
    pub labeled: Vec<String>,
    pub pool: Vec<String>,
    pub cycle_index: usize,
    pub n_total: usize,
    pub history: Vec<CycleRecord>,
}

impl CycleState {
    pub fn labeled_fraction(&self) -> f64 {
        self.labeled.len() as f64 / self.n_total as f64
    }
}

/// Seeded uniform draw of `ceil(initial_fraction * N)` ids for the labeled
/// set; the rest, in input order, form the pool.
pub fn initial_split(all_ids: &[String], cfg: &CycleConfig) -> Result<CycleState> {
    if all_ids.is_empty() {
        return Err(Error::InvalidConfig("empty id list".into()));
    }
    if all_ids.len() < 2 {
        return Err(Error::InvalidConfig("need at least two frames to split".into()));
    }
    let unique: HashSet<&String> = all_ids.iter().collect();
    if unique.len() != all_ids.len() {
        return Err(Error::InvalidConfig("duplicate frame ids".into()));
    }
    let n = all_ids.len();
    let k = fraction_count(cfg.initial_fraction, n).clamp(1, n - 1);
    let mut shuffled = all_ids.to_vec();
    seeded_order(&mut shuffled, derive(cfg.seed, "split"));
    let labeled: Vec<String> = shuffled.into_iter().take(k).collect();
    let chosen: HashSet<&String> = labeled.iter().collect();
    let pool = all_ids.iter().filter(|id| !chosen.contains(id)).cloned().collect();
    Ok(CycleState {
        labeled,
        pool,
        cycle_index: 0,
        n_total: n,
        history: Vec::new(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Selection {
    pub ids: Vec<String>,
    pub n_inconsistent: usize,
    pub n_consistent_fill: usize,
}

/// Moves the head of `ranked` from the pool into the labeled set and opens
/// the next cycle's record (its `eval` and class counts are filled in by the
/// driver).
pub fn select_chunk(state: &mut CycleState, ranked: &[RankedFrame], cfg: &CycleConfig) -> Result<Selection> {
    let pool: HashSet<&str> = state.pool.iter().map(String::as_str).collect();
    let ranked_ids: HashSet<&str> = ranked.iter().map(|r| r.frame_id.as_str()).collect();
    if ranked.len() != state.pool.len() || ranked_ids != pool {
        return Err(Error::InvalidConfig(
            "ranking does not cover exactly the pool".into(),
        ));
    }
    let take = cfg.chunk_size(state.n_total).min(state.pool.len());
    let head = &ranked[..take];
    let n_inconsistent = head
        .iter()
        .filter(|r| r.stratum == Stratum::Inconsistent)
        .count();
    let ids: Vec<String> = head.iter().map(|r| r.frame_id.clone()).collect();
    let chosen: HashSet<&str> = ids.iter().map(String::as_str).collect();
    state.pool.retain(|id| !chosen.contains(id.as_str()));
    state.labeled.extend(ids.iter().cloned());
    state.cycle_index += 1;
    state.history.push(CycleRecord {
        cycle_index: state.cycle_index,
        selected_ids: ids.clone(),
        n_inconsistent_selected: n_inconsistent,
        n_consistent_fill: take - n_inconsistent,
        labeled_count: state.labeled.len(),
        labeled_fraction: state.labeled_fraction(),
        class_instance_counts: BTreeMap::new(),
        eval: None,
    });
    Ok(Selection {
        ids,
        n_inconsistent,
        n_consistent_fill: take - n_inconsistent,
    })
}

/// Scores every frame, in parallel when the detector allows it.
pub fn score_pool<D: Detector>(
    frames: &[&Frame],
    detector: &D,
    match_config: &MatchConfig,
    normalized: bool,
) -> Result<Vec<InconsistencyRecord>> {
    if detector.inference_thread_safe() {
        frames
            .par_iter()
            .map(|f| score_frame(f, detector, match_config, normalized))
            .collect()
    } else {
        frames
            .iter()
            .map(|f| score_frame(f, detector, match_config, normalized))
            .collect()
    }
}

fn instance_counts<'a>(frames: impl IntoIterator<Item = &'a Frame>) -> BTreeMap<ObjectClass, usize> {
    let mut counts = BTreeMap::new();
    for f in frames {
        for o in &f.objects {
            *counts.entry(o.class).or_default() += 1;
        }
    }
    counts
}

/// Fits on the initial labeled set and scores the pool once, ranked.
pub fn initial_scores<T: Trainer>(
    al_frames: &[Frame],
    cfg: &CycleConfig,
    trainer: &T,
) -> Result<(CycleState, Vec<InconsistencyRecord>)> {
    cfg.validate()?;
    let all_ids: Vec<String> = al_frames.iter().map(|f| f.frame_id.clone()).collect();
    let state = initial_split(&all_ids, cfg)?;
    let by_id: HashMap<&str, &Frame> = al_frames.iter().map(|f| (f.frame_id.as_str(), f)).collect();
    let labeled: Vec<&Frame> = state.labeled.iter().map(|id| by_id[id.as_str()]).collect();
    let pool: Vec<&Frame> = state.pool.iter().map(|id| by_id[id.as_str()]).collect();
    let model = trainer.fit(&labeled, TrainingMode::Scratch, None)?;
    let records = score_pool(&pool, &model, &cfg.match_config, cfg.normalized)?;
    Ok((state, records))
}

/// Everything a run produces.
#[derive(Debug)]
pub struct RunOutcome<M> {
    pub initial_labeled: Vec<String>,
    pub initial_eval: EvalSummary,
    pub history: Vec<CycleRecord>,
    /// Scoring dumps, keyed by the cycle whose selection they drove.
    pub score_dumps: Vec<(usize, Vec<InconsistencyRecord>)>,
    pub scoring_passes: usize,
    pub final_model: M,
}

/// Full active-learning run over `al_frames`, evaluated on `test_frames`.
pub fn run<T: Trainer>(
    al_frames: &[Frame],
    test_frames: &[Frame],
    cfg: &CycleConfig,
    eval_cfg: &EvalConfig,
    trainer: &T,
) -> Result<RunOutcome<T::Model>> {
    cfg.validate()?;
    eval_cfg.validate()?;
    let by_id: HashMap<&str, &Frame> = al_frames.iter().map(|f| (f.frame_id.as_str(), f)).collect();
    let lookup = |ids: &[String]| -> Result<Vec<&Frame>> {
        ids.iter()
            .map(|id| by_id.get(id.as_str()).copied().ok_or_else(|| Error::UnknownFrame(id.clone())))
            .collect()
    };
    let all_ids: Vec<String> = al_frames.iter().map(|f| f.frame_id.clone()).collect();
    let mut state = initial_split(&all_ids, cfg)?;
    let initial_labeled = state.labeled.clone();
    let at = |cycle: usize| move |e: Error| Error::Cycle {
        cycle,
        source: Box::new(e),
    };

    let mut model = trainer
        .fit(&lookup(&state.labeled)?, TrainingMode::Scratch, None)
        .map_err(at(0))?;
    let initial_eval = evaluate(&model, test_frames, eval_cfg).map_err(at(0))?;

    let rank_seed = derive(cfg.seed, "rank");
    let mut fixed_order: Option<Vec<RankedFrame>> = None;
    let mut score_dumps = Vec::new();
    let mut scoring_passes = 0;

    while !state.pool.is_empty() {
        let cycle = state.cycle_index + 1;
        let ranked = match &fixed_order {
            Some(order) => {
                let pool: HashSet<&str> = state.pool.iter().map(String::as_str).collect();
                order
                    .iter()
                    .filter(|r| pool.contains(r.frame_id.as_str()))
                    .cloned()
                    .collect()
            }
            None => {
                let pool_frames = lookup(&state.pool)?;
                let records = score_pool(&pool_frames, &model, &cfg.match_config, cfg.normalized)
                    .map_err(at(cycle))?;
                scoring_passes += 1;
                log::info!("cycle {cycle}: scored {} pool frames", records.len());
                let seed = if cfg.pseudo { rank_seed } else { key(&[rank_seed, cycle as u64]) };
                let ranked = rank_pool_checked(&state.pool, &records, cfg.score_kind, cfg.ordering, seed)
                    .map_err(at(cycle))?;
                score_dumps.push((cycle, records));
                if cfg.pseudo {
                    fixed_order = Some(ranked.clone());
                }
                ranked
            }
        };

        let selection = select_chunk(&mut state, &ranked, cfg).map_err(at(cycle))?;
        model = match cfg.training_mode {
            TrainingMode::Scratch => trainer.fit(&lookup(&state.labeled)?, TrainingMode::Scratch, None),
            TrainingMode::Retrain => {
                trainer.fit(&lookup(&state.labeled)?, TrainingMode::Retrain, Some(&model))
            }
            TrainingMode::FineTune => {
                trainer.fit(&lookup(&selection.ids)?, TrainingMode::FineTune, Some(&model))
            }
        }
        .map_err(at(cycle))?;
        let eval = evaluate(&model, test_frames, eval_cfg).map_err(at(cycle))?;
        let counts = instance_counts(lookup(&state.labeled)?);
        let record = state.history.last_mut().expect("select_chunk pushed a record");
        record.eval = Some(eval);
        record.class_instance_counts = counts;
    }

    Ok(RunOutcome {
        initial_labeled,
        initial_eval,
        history: state.history,
        score_dumps,
        scoring_passes,
        final_model: model,
    })
}
