//! Detector seam and the simulated detector.
//!
//! [`Detector`] is what scoring and evaluation call; [`Trainer`] is what the
//! active-learning loop calls once per cycle. A neural detector would
//! implement both and ignore the ground-truth argument of `infer`.
//!
//! The simulated detector reads ground truth and degrades it. Per class, its
//! recall follows a saturating curve in the number of labeled instances:
//!
//! ```text
//! r_c = floor + (ceiling - floor) * n_c / (n_c + k)
//! ```
//!
//! Each ground-truth box is emitted with probability `r_c * decay(range)`.
//! The detect/miss coin for a box is keyed by the frame content, the box
//! index and the model's stream, never by draw order. On a mirrored input,
//! with probability `mirror_decorrelation` the coin (and the box's jitter) is
//! re-drawn from an independent key; otherwise the output is exactly the
//! mirror of the output on the original cloud.

use std::borrow::Cow;
use std::collections::HashSet;
use std::sync::{Arc, Mutex};

use rand::Rng;
use rand_distr::{Distribution, Normal, Poisson};
use serde::{Deserialize, Serialize};

use crate::augmentation::{mirror_cloud, mirror_detections, mirror_ground_truth};
use crate::error::{Error, Result};
use crate::geometry::Box3D;
use crate::inconsistency::Detection;
use crate::kitti::{Frame, GroundTruth, ObjectClass, PointCloud};
use crate::seeding::{self, hash_str, key, unit};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TrainingMode {
    /// Fresh model on the whole labeled set.
    #[default]
    Scratch,
    /// Continue from the previous model on the whole labeled set.
    Retrain,
    /// Continue from the previous model on the newest chunk only.
    #[serde(rename = "finetune")]
    FineTune,
}

/// Inference half of the detector contract.
pub trait Detector: Sync {
    /// Detections for one cloud. `ground_truth` is expressed in the same
    /// frame as `cloud`; learned detectors ignore it.
    fn infer(&self, cloud: &PointCloud, ground_truth: &[GroundTruth]) -> Result<Vec<Detection>>;

    /// Called by scoring with each mirrored cloud before it is inferred on.
    fn register_mirrored(&self, _cloud: &PointCloud) {}

    /// Whether `infer` may be called from several threads at once.
    fn inference_thread_safe(&self) -> bool {
        true
    }
}

/// Training half of the detector contract. `fit` never mutates its inputs.
pub trait Trainer {
    type Model: Detector;

    fn fit(
        &self,
        labeled: &[&Frame],
        mode: TrainingMode,
        prior: Option<&Self::Model>,
    ) -> Result<Self::Model>;
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimDetectorParams {
    /// Set from the run seed, never read from a manifest.
    #[serde(skip)]
    pub seed: u64,
    pub recall_floor: f64,
    pub recall_ceiling: f64,
    /// Labeled instances of a class at which its recall is halfway between
    /// floor and ceiling.
    pub samples_to_half_quality: f64,
    /// Per-axis center jitter at zero range, meters.
    pub localization_sigma_base: f64,
    /// Heading jitter, radians.
    pub yaw_sigma: f64,
    pub confidence_noise_sigma: f64,
    /// Expected spurious boxes per frame.
    pub false_positive_rate: f64,
    /// Probability that a box's coin is re-flipped for the mirrored input.
    pub mirror_decorrelation: f64,
    pub min_points_detectable: usize,
    /// Scale detection probability by `max(0, 1 - range / 80 m)`.
    pub distance_decay: bool,
}

impl Default for SimDetectorParams {
    fn default() -> Self {
        Self {
            seed: 0,
            recall_floor: 0.3,
            recall_ceiling: 0.95,
            samples_to_half_quality: 40.0,
            localization_sigma_base: 0.05,
            yaw_sigma: 0.05,
            confidence_noise_sigma: 0.1,
            false_positive_rate: 0.3,
            mirror_decorrelation: 0.3,
            min_points_detectable: 5,
            distance_decay: true,
        }
    }
}

pub const DECAY_RANGE_M: f64 = 80.0;
const JITTER_RANGE_SCALE_M: f64 = 50.0;

impl SimDetectorParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if !(0.0 <= self.recall_floor
            && self.recall_floor <= self.recall_ceiling
            && self.recall_ceiling <= 1.0)
        {
            return bad(format!(
                "need 0 <= recall_floor <= recall_ceiling <= 1, got {} / {}",
                self.recall_floor, self.recall_ceiling
            ));
        }
        if self.samples_to_half_quality.is_nan() || self.samples_to_half_quality <= 0.0 {
            return bad("samples_to_half_quality must be positive".into());
        }
        for (name, v) in [
            ("localization_sigma_base", self.localization_sigma_base),
            ("yaw_sigma", self.yaw_sigma),
            ("confidence_noise_sigma", self.confidence_noise_sigma),
            ("false_positive_rate", self.false_positive_rate),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return bad(format!("{name} must be finite and >= 0, got {v}"));
            }
        }
        if !(0.0..=1.0).contains(&self.mirror_decorrelation) {
            return bad(format!(
                "mirror_decorrelation must lie in [0, 1], got {}",
                self.mirror_decorrelation
            ));
        }
        Ok(())
    }

    pub fn recall_for(&self, instances: u64) -> f64 {
        let n = instances as f64;
        self.recall_floor
            + (self.recall_ceiling - self.recall_floor) * n / (n + self.samples_to_half_quality)
    }
}

const N_CLASSES: usize = ObjectClass::ALL.len();

/// Fitted simulator state. Immutable once produced.
#[derive(Debug, Clone, PartialEq)]
pub struct SimState {
    /// Number of fits in this model's lineage (1 for a fresh model).
    pub generation: u32,
    /// Key of the model's random stream; chains through Retrain/FineTune.
    pub stream: u64,
    pub instance_counts: [u64; N_CLASSES],
    pub recall: [f64; N_CLASSES],
}

impl SimState {
    pub fn recall_of(&self, class: ObjectClass) -> f64 {
        self.recall[class.index()]
    }

    pub fn instances_of(&self, class: ObjectClass) -> u64 {
        self.instance_counts[class.index()]
    }

    pub const MAGIC: [u8; 4] = *b"LALS";
    pub const VERSION: u16 = 1;
    pub const BLOB_LEN: usize = 4 + 2 + 4 + 8 + N_CLASSES * 16;

    /// Binary dump: magic `LALS`, u16 version, u32 generation, u64 stream,
    /// then per class (in [`ObjectClass::ALL`] order) u64 count and f64
    /// recall. All little-endian.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(Self::BLOB_LEN);
        out.extend_from_slice(&Self::MAGIC);
        out.extend_from_slice(&Self::VERSION.to_le_bytes());
        out.extend_from_slice(&self.generation.to_le_bytes());
        out.extend_from_slice(&self.stream.to_le_bytes());
        for i in 0..N_CLASSES {
            out.extend_from_slice(&self.instance_counts[i].to_le_bytes());
            out.extend_from_slice(&self.recall[i].to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < 6 || bytes[..4] != Self::MAGIC {
            return Err(Error::StateFormat("bad magic".into()));
        }
        let version = u16::from_le_bytes([bytes[4], bytes[5]]);
        if version != Self::VERSION {
            return Err(Error::StateFormat(format!("unsupported version {version}")));
        }
        if bytes.len() != Self::BLOB_LEN {
            return Err(Error::StateFormat(format!(
                "expected {} bytes, found {}",
                Self::BLOB_LEN,
                bytes.len()
            )));
        }
        let u64_at = |o: usize| u64::from_le_bytes(bytes[o..o + 8].try_into().unwrap());
        let generation = u32::from_le_bytes(bytes[6..10].try_into().unwrap());
        let stream = u64_at(10);
        let mut instance_counts = [0; N_CLASSES];
        let mut recall = [0.0; N_CLASSES];
        for i in 0..N_CLASSES {
            let o = 18 + 16 * i;
            instance_counts[i] = u64_at(o);
            recall[i] = f64::from_bits(u64_at(o + 8));
        }
        Ok(Self {
            generation,
            stream,
            instance_counts,
            recall,
        })
    }
}

const TAG_SCRATCH: u64 = 0x5343_5241_5443_4800;
const TAG_RETRAIN: u64 = 0x5245_5452_4149_4e00;
const TAG_FINETUNE: u64 = 0x4649_4e45_5455_4e45;
const TAG_DECOR: u64 = 1;
const TAG_MIRROR: u64 = 2;
const TAG_COIN: u64 = 3;
const TAG_JITTER: u64 = 4;
const TAG_FALSE_POS: u64 = 5;

fn labeled_set_key(frames: &[&Frame]) -> u64 {
    let mut ids: Vec<&str> = frames.iter().map(|f| f.frame_id.as_str()).collect();
    ids.sort_unstable();
    let words: Vec<u64> = ids.iter().map(|id| hash_str(id)).collect();
    key(&words)
}

/// Fits the simulator. Scratch ignores `prior`; Retrain counts the whole
/// labeled set but chains the prior stream; FineTune is given (and counts)
/// only the newest chunk.
pub fn sim_fit(
    labeled: &[&Frame],
    mode: TrainingMode,
    prior: Option<&SimState>,
    params: &SimDetectorParams,
) -> Result<SimState> {
    let set_key = labeled_set_key(labeled);
    let (stream, generation) = match (mode, prior) {
        (TrainingMode::Retrain, Some(p)) => (key(&[p.stream, TAG_RETRAIN, set_key]), p.generation + 1),
        (TrainingMode::FineTune, Some(p)) => {
            (key(&[p.stream, TAG_FINETUNE, set_key]), p.generation + 1)
        }
        _ => {
            if labeled.is_empty() {
                return Err(Error::EmptyTrainingSet);
            }
            (key(&[params.seed, TAG_SCRATCH, set_key]), 1)
        }
    };
    let mut instance_counts = [0u64; N_CLASSES];
    for f in labeled {
        for o in &f.objects {
            instance_counts[o.class.index()] += 1;
        }
    }
    let mut recall = [0.0; N_CLASSES];
    for (r, &n) in recall.iter_mut().zip(&instance_counts) {
        *r = params.recall_for(n);
    }
    Ok(SimState {
        generation,
        stream,
        instance_counts,
        recall,
    })
}

fn normal(rng: &mut impl Rng, sigma: f64) -> f64 {
    if sigma > 0.0 {
        Normal::new(0.0, sigma).expect("finite sigma").sample(rng)
    } else {
        0.0
    }
}

/// Typical (length, width, height) per class, used for spurious boxes.
fn typical_dims(class: ObjectClass) -> [f64; 3] {
    match class {
        ObjectClass::Pedestrian => [0.8, 0.6, 1.75],
        ObjectClass::Cyclist => [1.76, 0.6, 1.73],
        _ => [3.9, 1.6, 1.56],
    }
}

/// Simulated inference on one cloud.
///
/// `mirrored` selects the decorrelated coins; the caller derives it from the
/// mirror registry. Output lists detected ground-truth boxes in input order,
/// then spurious boxes.
pub fn sim_infer(
    state: &SimState,
    params: &SimDetectorParams,
    cloud: &PointCloud,
    ground_truth: &[GroundTruth],
    mirrored: bool,
) -> Vec<Detection> {
    // All draws happen in the un-mirrored frame so that a shared coin gives
    // bit-identical (mirrored) output.
    let (cloud, gt): (Cow<'_, PointCloud>, Cow<'_, [GroundTruth]>) = if mirrored {
        (
            Cow::Owned(mirror_cloud(cloud)),
            Cow::Owned(mirror_ground_truth(ground_truth)),
        )
    } else {
        (Cow::Borrowed(cloud), Cow::Borrowed(ground_truth))
    };
    let frame_key = key(&[params.seed, state.stream, cloud.content_hash()]);
    let decorrelate = |k: u64| {
        if mirrored && unit(key(&[k, TAG_DECOR])) < params.mirror_decorrelation {
            key(&[k, TAG_MIRROR])
        } else {
            k
        }
    };

    let mut out = Vec::new();
    for (idx, obj) in gt.iter().enumerate() {
        if obj.class == ObjectClass::DontCare {
            continue;
        }
        if params.min_points_detectable > 0
            && cloud.count_inside(&obj.bbox) < params.min_points_detectable
        {
            continue;
        }
        let range = obj.bbox.range();
        let decay = if params.distance_decay {
            (1.0 - range / DECAY_RANGE_M).max(0.0)
        } else {
            1.0
        };
        let recall = state.recall_of(obj.class);
        let box_key = decorrelate(key(&[frame_key, idx as u64, obj.class.index() as u64]));
        if unit(key(&[box_key, TAG_COIN])) >= recall * decay {
            continue;
        }
        let mut rng = seeding::rng(key(&[box_key, TAG_JITTER]));
        let sigma = params.localization_sigma_base * (1.0 + range / JITTER_RANGE_SCALE_M);
        let b = &obj.bbox;
        let center = [
            b.center[0] + normal(&mut rng, sigma),
            b.center[1] + normal(&mut rng, sigma),
            b.center[2] + normal(&mut rng, sigma),
        ];
        let yaw = b.yaw + normal(&mut rng, params.yaw_sigma);
        let confidence = (recall + normal(&mut rng, params.confidence_noise_sigma)).clamp(0.0, 1.0);
        let bbox = if center == b.center && yaw == b.yaw {
            *b
        } else {
            Box3D::new(center, b.dims, yaw).expect("jittered box keeps valid dims")
        };
        out.push(Detection {
            class: obj.class,
            bbox,
            confidence,
        });
    }

    if params.false_positive_rate > 0.0 {
        if let Some((lo, hi)) = cloud.bounds() {
            let mut rng = seeding::rng(decorrelate(key(&[frame_key, TAG_FALSE_POS])));
            let count = Poisson::new(params.false_positive_rate)
                .expect("positive rate")
                .sample(&mut rng) as usize;
            const FP_CLASSES: [ObjectClass; 3] =
                [ObjectClass::Car, ObjectClass::Pedestrian, ObjectClass::Cyclist];
            for _ in 0..count {
                let class = FP_CLASSES[rng.random_range(0..FP_CLASSES.len())];
                let dims = typical_dims(class);
                let mut center = [0.0; 3];
                for k in 0..3 {
                    center[k] = if hi[k] > lo[k] { rng.random_range(lo[k]..hi[k]) } else { lo[k] };
                }
                let yaw = rng.random_range(-std::f64::consts::PI..std::f64::consts::PI);
                let confidence = rng.random_range(0.0..params.recall_ceiling.max(1e-6));
                out.push(Detection {
                    class,
                    bbox: Box3D::new(center, dims, yaw).expect("typical dims are positive"),
                    confidence,
                });
            }
        }
    }

    if mirrored {
        mirror_detections(&out)
    } else {
        out
    }
}

/// Content hashes of clouds known to be mirrored copies.
#[derive(Debug, Default)]
pub struct MirrorRegistry {
    hashes: Mutex<HashSet<u64>>,
}

impl MirrorRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn register(&self, cloud: &PointCloud) {
        self.hashes.lock().unwrap().insert(cloud.content_hash());
    }

    pub fn detect_mirror_flag(&self, cloud: &PointCloud) -> bool {
        self.hashes.lock().unwrap().contains(&cloud.content_hash())
    }

    pub fn len(&self) -> usize {
        self.hashes.lock().unwrap().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// A fitted simulated detector.
#[derive(Debug, Clone)]
pub struct SimDetector {
    pub params: SimDetectorParams,
    pub state: SimState,
    registry: Arc<MirrorRegistry>,
}

impl SimDetector {
    pub fn new(params: SimDetectorParams, state: SimState, registry: Arc<MirrorRegistry>) -> Self {
        Self {
            params,
            state,
            registry,
        }
    }

    pub fn registry(&self) -> &Arc<MirrorRegistry> {
        &self.registry
    }
}

impl Detector for SimDetector {
    fn infer(&self, cloud: &PointCloud, ground_truth: &[GroundTruth]) -> Result<Vec<Detection>> {
        let mirrored = self.registry.detect_mirror_flag(cloud);
        Ok(sim_infer(&self.state, &self.params, cloud, ground_truth, mirrored))
    }

    fn register_mirrored(&self, cloud: &PointCloud) {
        self.registry.register(cloud);
    }
}

/// Produces [`SimDetector`]s sharing one mirror registry.
#[derive(Debug, Clone)]
pub struct SimTrainer {
    pub params: SimDetectorParams,
    registry: Arc<MirrorRegistry>,
}

impl SimTrainer {
    pub fn new(params: SimDetectorParams) -> Result<Self> {
        params.validate()?;
        Ok(Self {
            params,
            registry: Arc::new(MirrorRegistry::new()),
        })
    }

    pub fn model(&self, state: SimState) -> SimDetector {
        SimDetector::new(self.params.clone(), state, Arc::clone(&self.registry))
    }
}

impl Trainer for SimTrainer {
    type Model = SimDetector;

    fn fit(
        &self,
        labeled: &[&Frame],
        mode: TrainingMode,
        prior: Option<&SimDetector>,
    ) -> Result<SimDetector> {
        let state = sim_fit(labeled, mode, prior.map(|p| &p.state), &self.params)?;
        Ok(self.model(state))
    }
}

/// Emits every ground-truth box unchanged with confidence 1. Mirror
/// equivariant by construction.
#[derive(Debug, Clone, Copy, Default)]
pub struct OracleDetector;

impl Detector for OracleDetector {
    fn infer(&self, _cloud: &PointCloud, ground_truth: &[GroundTruth]) -> Result<Vec<Detection>> {
        Ok(ground_truth
            .iter()
            .map(|g| Detection {
                class: g.class,
                bbox: g.bbox,
                confidence: 1.0,
            })
            .collect())
    }
}

/// Trainer that always hands back a clone of one fixed detector.
#[derive(Debug, Clone, Default)]
pub struct FixedTrainer<D>(pub D);

impl<D: Detector + Clone> Trainer for FixedTrainer<D> {
    type Model = D;

    fn fit(&self, _labeled: &[&Frame], _mode: TrainingMode, _prior: Option<&D>) -> Result<D> {
        Ok(self.0.clone())
    }
}
