//! Per-class average precision on 3D IoU, mAP, and the label / selection
//! diagnostics tracked across cycles.
//!
//! AP uses interpolated precision sampled at `recall_points` evenly spaced
//! recall values `i / recall_points`, `i = 1..=recall_points` (the 40-point
//! protocol by default). There are no difficulty buckets: every ground-truth
//! box of an evaluated class counts.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::cycle::CycleRecord;
use crate::detector::Detector;
use crate::error::{Error, Result};
use crate::geometry::iou_3d;
use crate::inconsistency::Detection;
use crate::kitti::{Frame, GroundTruth, ObjectClass};

pub const EVALUATED_CLASSES: [ObjectClass; 3] =
    [ObjectClass::Car, ObjectClass::Pedestrian, ObjectClass::Cyclist];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvalConfig {
    pub iou_thresholds: BTreeMap<ObjectClass, f64>,
    pub recall_points: usize,
    pub evaluated_classes: Vec<ObjectClass>,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            iou_thresholds: BTreeMap::from([
                (ObjectClass::Car, 0.7),
                (ObjectClass::Pedestrian, 0.5),
                (ObjectClass::Cyclist, 0.5),
            ]),
            recall_points: 40,
            evaluated_classes: EVALUATED_CLASSES.to_vec(),
        }
    }
}

impl EvalConfig {
    pub fn validate(&self) -> Result<()> {
        if self.recall_points < 2 {
            return Err(Error::InvalidConfig("recall_points must be >= 2".into()));
        }
        if self.evaluated_classes.is_empty() {
            return Err(Error::InvalidConfig("no evaluated classes".into()));
        }
        for c in &self.evaluated_classes {
            let t = self.threshold(*c).ok_or_else(|| {
                Error::InvalidConfig(format!("no IoU threshold for evaluated class {c}"))
            })?;
            if !(t > 0.0 && t < 1.0) {
                return Err(Error::InvalidConfig(format!(
                    "IoU threshold for {c} must lie in (0, 1), got {t}"
                )));
            }
        }
        Ok(())
    }

    pub fn threshold(&self, class: ObjectClass) -> Option<f64> {
        self.iou_thresholds.get(&class).copied()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrPoint {
    pub confidence_cutoff: f64,
    pub precision: f64,
    pub recall: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalMatch {
    /// Index into the detection slice passed in.
    pub detection: usize,
    pub confidence: f64,
    /// Assigned ground-truth index, `None` for a false positive.
    pub ground_truth: Option<usize>,
}

impl EvalMatch {
    pub fn is_tp(&self) -> bool {
        self.ground_truth.is_some()
    }
}

/// Greedy assignment of one class's detections to ground truth.
///
/// Detections of `class` are visited by descending confidence (stable on
/// ties); each takes the unassigned ground-truth box of the same class with
/// the highest 3D IoU at or above `threshold`.
pub fn match_for_eval(
    dets: &[Detection],
    gts: &[GroundTruth],
    class: ObjectClass,
    threshold: f64,
) -> Vec<EvalMatch> {
    let mut order: Vec<usize> = (0..dets.len()).filter(|&i| dets[i].class == class).collect();
    order.sort_by(|&a, &b| dets[b].confidence.total_cmp(&dets[a].confidence));
    let mut taken = vec![false; gts.len()];
    order
        .into_iter()
        .map(|i| {
            let mut best: Option<(usize, f64)> = None;
            for (j, g) in gts.iter().enumerate() {
                if taken[j] || g.class != class {
                    continue;
                }
                let iou = iou_3d(&dets[i].bbox, &g.bbox);
                if iou >= threshold && best.is_none_or(|(_, b)| iou > b) {
                    best = Some((j, iou));
                }
            }
            if let Some((j, _)) = best {
                taken[j] = true;
            }
            EvalMatch {
                detection: i,
                confidence: dets[i].confidence,
                ground_truth: best.map(|(j, _)| j),
            }
        })
        .collect()
}

/// Precision/recall at every distinct confidence cutoff, highest first.
pub fn pr_curve(scored: &[(f64, bool)], n_gt: usize) -> Vec<PrPoint> {
    let mut sorted = scored.to_vec();
    sorted.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut out = Vec::new();
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut i = 0;
    while i < sorted.len() {
        let cutoff = sorted[i].0;
        while i < sorted.len() && sorted[i].0 == cutoff {
            if sorted[i].1 {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        out.push(PrPoint {
            confidence_cutoff: cutoff,
            precision: tp as f64 / (tp + fp) as f64,
            recall: if n_gt == 0 { 0.0 } else { tp as f64 / n_gt as f64 },
        });
    }
    out
}

/// Interpolated AP. `None` when there is neither ground truth nor any
/// detection (the class does not take part in mAP).
pub fn average_precision(scored: &[(f64, bool)], n_gt: usize, recall_points: usize) -> Option<f64> {
    if n_gt == 0 {
        return if scored.is_empty() { None } else { Some(0.0) };
    }
    let curve = pr_curve(scored, n_gt);
    let mut sum = 0.0;
    for i in 1..=recall_points {
        let r = i as f64 / recall_points as f64;
        let p = curve
            .iter()
            .filter(|pt| pt.recall >= r - 1e-12)
            .map(|pt| pt.precision)
            .fold(0.0, f64::max);
        sum += p;
    }
    Some(sum / recall_points as f64)
}

/// Unweighted mean of the defined per-class APs.
pub fn map_over_classes<I: IntoIterator<Item = Option<f64>>>(aps: I) -> Result<f64> {
    let defined: Vec<f64> = aps.into_iter().flatten().collect();
    if defined.is_empty() {
        return Err(Error::NoDefinedAp);
    }
    if defined.iter().all(|&v| v == defined[0]) {
        return Ok(defined[0]);
    }
    Ok(defined.iter().sum::<f64>() / defined.len() as f64)
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalSummary {
    pub ap: BTreeMap<ObjectClass, Option<f64>>,
    pub map: f64,
}

impl EvalSummary {
    pub fn ap_of(&self, class: ObjectClass) -> Option<f64> {
        self.ap.get(&class).copied().flatten()
    }
}

/// Runs the detector on each test frame (original clouds only) and scores
/// the evaluated classes.
pub fn evaluate<D: Detector + ?Sized>(
    detector: &D,
    frames: &[Frame],
    cfg: &EvalConfig,
) -> Result<EvalSummary> {
    let mut scored: BTreeMap<ObjectClass, Vec<(f64, bool)>> = BTreeMap::new();
    let mut n_gt: BTreeMap<ObjectClass, usize> = BTreeMap::new();
    for frame in frames {
        let dets = detector
            .infer(&frame.cloud, &frame.objects)
            .map_err(|e| Error::Detector {
                frame_id: frame.frame_id.clone(),
                message: e.to_string(),
            })?;
        for &class in &cfg.evaluated_classes {
            let thr = cfg.threshold(class).unwrap_or(0.5);
            *n_gt.entry(class).or_default() +=
                frame.objects.iter().filter(|g| g.class == class).count();
            let entry = scored.entry(class).or_default();
            entry.extend(
                match_for_eval(&dets, &frame.objects, class, thr)
                    .iter()
                    .map(|m| (m.confidence, m.is_tp())),
            );
        }
    }
    let ap: BTreeMap<_, _> = cfg
        .evaluated_classes
        .iter()
        .map(|&c| {
            let s = scored.get(&c).map(Vec::as_slice).unwrap_or(&[]);
            (c, average_precision(s, n_gt.get(&c).copied().unwrap_or(0), cfg.recall_points))
        })
        .collect();
    let map = map_over_classes(ap.values().copied())?;
    Ok(EvalSummary { ap, map })
}

/// Instance counts per class over a set of frames.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ClassDistribution {
    /// Every non-DontCare label, by class.
    pub counts: BTreeMap<ObjectClass, usize>,
    pub evaluated: Vec<ObjectClass>,
}

impl ClassDistribution {
    pub fn total_all(&self) -> usize {
        self.counts.values().sum()
    }

    pub fn total_evaluated(&self) -> usize {
        self.evaluated
            .iter()
            .map(|c| self.counts.get(c).copied().unwrap_or(0))
            .sum()
    }

    pub fn is_degenerate(&self) -> bool {
        self.total_evaluated() == 0
    }

    fn fractions(&self, denom: usize) -> BTreeMap<ObjectClass, f64> {
        self.evaluated
            .iter()
            .map(|&c| {
                let n = self.counts.get(&c).copied().unwrap_or(0);
                (c, if denom == 0 { 0.0 } else { n as f64 / denom as f64 })
            })
            .collect()
    }

    /// Shares among the evaluated classes; sums to 1 unless degenerate.
    pub fn fractions_over_evaluated(&self) -> BTreeMap<ObjectClass, f64> {
        self.fractions(self.total_evaluated())
    }

    /// Shares of the evaluated classes among all non-DontCare labels.
    pub fn fractions_over_all_labels(&self) -> BTreeMap<ObjectClass, f64> {
        self.fractions(self.total_all())
    }
}

pub fn class_distribution<'a, I>(frames: I, evaluated: &[ObjectClass]) -> ClassDistribution
where
    I: IntoIterator<Item = &'a Frame>,
{
    let mut counts = BTreeMap::new();
    for f in frames {
        for l in f.labels.iter().filter(|l| !l.is_dont_care()) {
            *counts.entry(l.class).or_default() += 1;
        }
    }
    ClassDistribution {
        counts,
        evaluated: evaluated.to_vec(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InconsistencyProportion {
    pub cycle_index: usize,
    /// Inconsistent frames among this cycle's selection.
    pub per_cycle: f64,
    /// Inconsistent frames selected so far among all labeled frames.
    pub cumulative: f64,
}

pub fn inconsistency_proportion(history: &[CycleRecord]) -> Vec<InconsistencyProportion> {
    let mut inconsistent = 0usize;
    history
        .iter()
        .map(|r| {
            inconsistent += r.n_inconsistent_selected;
            let chunk = r.selected_ids.len();
            InconsistencyProportion {
                cycle_index: r.cycle_index,
                per_cycle: if chunk == 0 {
                    0.0
                } else {
                    r.n_inconsistent_selected as f64 / chunk as f64
                },
                cumulative: if r.labeled_count == 0 {
                    0.0
                } else {
                    inconsistent as f64 / r.labeled_count as f64
                },
            }
        })
        .collect()
}
