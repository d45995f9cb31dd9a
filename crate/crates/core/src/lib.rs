//! Mirror-consistency active learning for LiDAR 3D object detection.
//!
//! A detector is run on a point cloud and on its left-right mirror; frames
//! whose two prediction sets disagree are labeled first. The crate covers
//! KITTI input, oriented-box geometry, inconsistency scoring, a seeded
//! simulated detector, the active-learning loop and KITTI-style AP.

pub mod augmentation;
pub mod cycle;
pub mod detector;
pub mod error;
pub mod evaluation;
pub mod experiment;
pub mod geometry;
pub mod inconsistency;
pub mod kitti;
pub mod manifest;
pub mod output;
pub mod seeding;
pub mod synthetic;

pub use augmentation::{mirror_box, mirror_cloud, mirror_detections, MirrorAxis};
pub use cycle::{
    initial_split, rank_pool, run, select_chunk, CycleConfig, CycleRecord, CycleState, RankOrder,
    RunOutcome, ScoreKind,
};
pub use detector::{
    Detector, OracleDetector, SimDetector, SimDetectorParams, SimState, SimTrainer, Trainer,
    TrainingMode,
};
pub use error::{Error, Result};
pub use evaluation::{average_precision, evaluate, map_over_classes, EvalConfig, EvalSummary};
pub use geometry::{iou_3d, iou_bev, Box3D};
pub use inconsistency::{
    score_frame, score_iou, score_nob, Detection, InconsistencyRecord, MatchConfig, Score,
};
pub use kitti::{load_dataset, Calibration, Frame, GroundTruth, LabelRecord, ObjectClass, PointCloud};
pub use manifest::RunManifest;
