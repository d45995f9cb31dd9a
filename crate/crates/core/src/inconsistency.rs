//! Per-frame inconsistency between predictions on a cloud and on its mirror.
//!
//! Two scores are provided. The number-of-boxes score compares only how many
//! boxes were emitted on each side:
//!
//! ```text
//! s_nob = |N_o - N_a| / max(N_o, N_a)
//! ```
//!
//! The IoU score counts one-to-one matches `N_m` between the two sets after
//! the mirrored predictions are mapped back into the original frame:
//!
//! ```text
//! s_iou = (max(N_o, N_a) - N_m) / max(N_o, N_a)
//! ```
//!
//! Frames where neither side produced a box carry no information and are
//! reported as discarded.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::augmentation::{mirror_cloud, mirror_detections, mirror_ground_truth};
use crate::detector::Detector;
use crate::error::{Error, Result};
use crate::geometry::{iou_3d, iou_bev, Box3D};
use crate::kitti::{Frame, ObjectClass};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Detection {
    pub class: ObjectClass,
    pub bbox: Box3D,
    pub confidence: f64,
}

/// Which overlap measure decides a match.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IouKind {
    /// Volumetric IoU.
    #[default]
    #[serde(rename = "3d")]
    Bev3d,
    /// Footprint-only IoU.
    Bev,
}

impl IouKind {
    pub fn iou(self, a: &Box3D, b: &Box3D) -> f64 {
        match self {
            IouKind::Bev3d => iou_3d(a, b),
            IouKind::Bev => iou_bev(a, b),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MatchConfig {
    pub iou_threshold: f64,
    pub class_aware: bool,
    pub iou_kind: IouKind,
}

impl Default for MatchConfig {
    fn default() -> Self {
        Self {
            iou_threshold: 0.5,
            class_aware: true,
            iou_kind: IouKind::Bev3d,
        }
    }
}

impl MatchConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.iou_threshold > 0.0 && self.iou_threshold < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "iou_threshold must lie in (0, 1), got {}",
                self.iou_threshold
            )));
        }
        Ok(())
    }
}

/// Outcome of a score: a value, or the frame carries no detections at all.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Score {
    Value(f64),
    Discarded,
}

impl Score {
    pub fn value(self) -> Option<f64> {
        match self {
            Score::Value(v) => Some(v),
            Score::Discarded => None,
        }
    }
}

pub fn score_nob(n_original: usize, n_augmented: usize, normalized: bool) -> Score {
    if n_original == 0 && n_augmented == 0 {
        return Score::Discarded;
    }
    let diff = n_original.abs_diff(n_augmented) as f64;
    if normalized {
        Score::Value(diff / n_original.max(n_augmented) as f64)
    } else {
        Score::Value(diff)
    }
}

/// The IoU score from counts alone. Unnormalized, it is the number of
/// unmatched boxes on the larger side.
pub fn score_iou_counts(
    n_original: usize,
    n_augmented: usize,
    n_matched: usize,
    normalized: bool,
) -> Score {
    let larger = n_original.max(n_augmented);
    if larger == 0 {
        return Score::Discarded;
    }
    let unmatched = larger.saturating_sub(n_matched) as f64;
    if normalized {
        Score::Value(unmatched / larger as f64)
    } else {
        Score::Value(unmatched)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoxMatch {
    pub original: usize,
    pub augmented: usize,
    pub iou: f64,
}

/// Greedy one-to-one matching by descending IoU.
///
/// `augmented` must already be expressed in the original frame. Candidate
/// pairs need IoU at or above the threshold (and equal classes when
/// class-aware); ties are broken by original index, then augmented index.
pub fn match_boxes(original: &[Detection], augmented: &[Detection], cfg: &MatchConfig) -> Vec<BoxMatch> {
    let mut candidates = Vec::new();
    for (i, o) in original.iter().enumerate() {
        for (j, a) in augmented.iter().enumerate() {
            if cfg.class_aware && o.class != a.class {
                continue;
            }
            let iou = cfg.iou_kind.iou(&o.bbox, &a.bbox);
            if iou >= cfg.iou_threshold {
                candidates.push(BoxMatch {
                    original: i,
                    augmented: j,
                    iou,
                });
            }
        }
    }
    candidates.sort_by(|x, y| {
        y.iou
            .total_cmp(&x.iou)
            .then(x.original.cmp(&y.original))
            .then(x.augmented.cmp(&y.augmented))
    });
    let mut used_o = vec![false; original.len()];
    let mut used_a = vec![false; augmented.len()];
    let mut matches = Vec::new();
    for c in candidates {
        if !used_o[c.original] && !used_a[c.augmented] {
            used_o[c.original] = true;
            used_a[c.augmented] = true;
            matches.push(c);
        }
    }
    matches
}

pub fn score_iou(
    original: &[Detection],
    augmented: &[Detection],
    cfg: &MatchConfig,
    normalized: bool,
) -> Score {
    if original.is_empty() && augmented.is_empty() {
        return Score::Discarded;
    }
    let n_matched = match_boxes(original, augmented, cfg).len();
    score_iou_counts(original.len(), augmented.len(), n_matched, normalized)
}

#[derive(Debug, Clone, PartialEq)]
pub struct InconsistencyRecord {
    pub frame_id: String,
    pub n_original: usize,
    pub n_augmented: usize,
    pub n_matched: usize,
    pub s_nob: Option<f64>,
    pub s_iou: Option<f64>,
    pub discarded: bool,
}

impl InconsistencyRecord {
    pub fn from_detections(
        frame_id: impl Into<String>,
        original: &[Detection],
        augmented_back: &[Detection],
        cfg: &MatchConfig,
        normalized: bool,
    ) -> Self {
        let n_original = original.len();
        let n_augmented = augmented_back.len();
        let n_matched = match_boxes(original, augmented_back, cfg).len();
        let s_nob = score_nob(n_original, n_augmented, normalized);
        let s_iou = score_iou_counts(n_original, n_augmented, n_matched, normalized);
        Self {
            frame_id: frame_id.into(),
            n_original,
            n_augmented,
            n_matched,
            s_nob: s_nob.value(),
            s_iou: s_iou.value(),
            discarded: s_nob == Score::Discarded,
        }
    }
}

/// Runs the detector on the frame and on its mirror, and scores the pair.
pub fn score_frame<D: Detector + ?Sized>(
    frame: &Frame,
    detector: &D,
    cfg: &MatchConfig,
    normalized: bool,
) -> Result<InconsistencyRecord> {
    let wrap = |e: Error| match e {
        Error::Detector { message, .. } => Error::Detector {
            frame_id: frame.frame_id.clone(),
            message,
        },
        other => Error::Detector {
            frame_id: frame.frame_id.clone(),
            message: other.to_string(),
        },
    };
    let original = detector.infer(&frame.cloud, &frame.objects).map_err(wrap)?;
    let mirrored = mirror_cloud(&frame.cloud);
    detector.register_mirrored(&mirrored);
    let mirrored_gt = mirror_ground_truth(&frame.objects);
    let augmented = detector.infer(&mirrored, &mirrored_gt).map_err(wrap)?;
    let augmented_back = mirror_detections(&augmented);
    Ok(InconsistencyRecord::from_detections(
        frame.frame_id.clone(),
        &original,
        &augmented_back,
        cfg,
        normalized,
    ))
}

pub const RECORD_CSV_HEADER: &str = "frame_id,n_original,n_augmented,n_matched,s_nob,s_iou,discarded";

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.6}")).unwrap_or_default()
}

/// Renders records as CSV with a header row and LF line endings.
pub fn records_to_csv(records: &[InconsistencyRecord]) -> String {
    let mut out = String::with_capacity(64 * (records.len() + 1));
    out.push_str(RECORD_CSV_HEADER);
    out.push('\n');
    for r in records {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.frame_id,
            r.n_original,
            r.n_augmented,
            r.n_matched,
            fmt_opt(r.s_nob),
            fmt_opt(r.s_iou),
            r.discarded
        );
    }
    out
}
