//! Seeded KITTI-like scenes for tests, benches and offline demos.
//!
//! Labels are written at the same two-decimal precision the label writer
//! uses, so a generated frame survives a disk round trip unchanged.

use std::path::Path;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::geometry::{bev_corners, iou_bev, Box3D};
use crate::kitti::{
    frame_id, lidar_box_to_camera, project_to_image, write_frame, Calibration, Frame, LabelRecord,
    ObjectClass, Point, PointCloud,
};
use crate::seeding::{key, rng};

pub const SENSOR_HEIGHT_M: f64 = 1.73;
const IMAGE_SIZE: [f64; 2] = [1242.0, 375.0];

#[derive(Debug, Clone, PartialEq)]
pub struct SceneConfig {
    pub seed: u64,
    pub n_frames: usize,
    /// Id of the first frame; ids are consecutive.
    pub first_id: usize,
    pub max_objects: usize,
    /// Share of frames with no objects at all.
    pub empty_fraction: f64,
    pub ground_points: usize,
    pub max_dont_care: usize,
}

impl Default for SceneConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            n_frames: 20,
            first_id: 0,
            max_objects: 12,
            empty_fraction: 0.25,
            ground_points: 600,
            max_dont_care: 2,
        }
    }
}

const CLASS_WEIGHTS: [(ObjectClass, f64); 6] = [
    (ObjectClass::Car, 0.72),
    (ObjectClass::Pedestrian, 0.12),
    (ObjectClass::Cyclist, 0.05),
    (ObjectClass::Van, 0.06),
    (ObjectClass::Truck, 0.03),
    (ObjectClass::Misc, 0.02),
];

fn pick_class(rng: &mut ChaCha8Rng) -> ObjectClass {
    let total: f64 = CLASS_WEIGHTS.iter().map(|(_, w)| w).sum();
    let mut u = rng.random_range(0.0..total);
    for &(c, w) in &CLASS_WEIGHTS {
        if u < w {
            return c;
        }
        u -= w;
    }
    ObjectClass::Car
}

/// Mean (length, width, height) per class.
fn mean_dims(class: ObjectClass) -> [f64; 3] {
    match class {
        ObjectClass::Pedestrian => [0.84, 0.66, 1.76],
        ObjectClass::Cyclist => [1.76, 0.60, 1.74],
        ObjectClass::Van => [5.08, 1.90, 2.21],
        ObjectClass::Truck => [10.1, 2.59, 3.25],
        ObjectClass::Misc => [3.58, 1.51, 1.91],
        _ => [3.88, 1.63, 1.53],
    }
}

fn round2(x: f64) -> f64 {
    (x * 100.0).round() / 100.0
}

fn image_box(b: &Box3D, calib: &Calibration) -> [f64; 4] {
    let mut lo = [f64::INFINITY; 2];
    let mut hi = [f64::NEG_INFINITY; 2];
    for v in bev_corners(b).vertices() {
        for z in [b.bottom(), b.top()] {
            if let Some(p) = project_to_image(calib, calib.lidar_to_camera([v[0], v[1], z])) {
                for k in 0..2 {
                    lo[k] = lo[k].min(p[k]);
                    hi[k] = hi[k].max(p[k]);
                }
            }
        }
    }
    if !lo[0].is_finite() {
        return [0.0; 4];
    }
    let clamp = |v: f64, k: usize| round2(v.clamp(0.0, IMAGE_SIZE[k] - 1.0));
    [clamp(lo[0], 0), clamp(lo[1], 1), clamp(hi[0], 0), clamp(hi[1], 1)]
}

fn make_label(class: ObjectClass, b: &Box3D, calib: &Calibration, rng: &mut ChaCha8Rng) -> LabelRecord {
    let (dims, location, rotation_y) = lidar_box_to_camera(b, calib);
    let location = location.map(round2);
    let rotation_y = round2(rotation_y);
    let alpha = round2(crate::geometry::wrap_angle(rotation_y - location[0].atan2(location[2])));
    LabelRecord {
        class,
        truncated: 0.0,
        occluded: rng.random_range(0..3),
        alpha,
        bbox2d: image_box(b, calib),
        dims: dims.map(round2),
        location,
        rotation_y,
        score: None,
    }
}

fn dont_care(rng: &mut ChaCha8Rng) -> LabelRecord {
    let x = round2(rng.random_range(0.0..1100.0));
    let y = round2(rng.random_range(150.0..250.0));
    LabelRecord {
        class: ObjectClass::DontCare,
        truncated: -1.0,
        occluded: -1,
        alpha: -10.0,
        bbox2d: [x, y, round2(x + rng.random_range(10.0..80.0)), round2(y + rng.random_range(5.0..40.0))],
        dims: [-1.0; 3],
        location: [-1000.0; 3],
        rotation_y: -10.0,
        score: None,
    }
}

fn sample_in_box(b: &Box3D, rng: &mut ChaCha8Rng) -> Point {
    let (s, c) = b.yaw.sin_cos();
    let u = 0.45 * b.length() * rng.random_range(-1.0..1.0);
    let v = 0.45 * b.width() * rng.random_range(-1.0..1.0);
    let w = 0.45 * b.height() * rng.random_range(-1.0..1.0);
    [
        (b.center[0] + c * u - s * v) as f32,
        (b.center[1] + s * u + c * v) as f32,
        (b.center[2] + w) as f32,
        rng.random_range(0.0..1.0f32),
    ]
}

/// Returning points per object falls off with range, like a spinning sensor.
fn points_for_range(range: f64) -> usize {
    ((900.0 / range.max(1.0)).round() as usize).clamp(2, 150)
}

/// Generates one scene. Objects never overlap in bird's-eye view.
pub fn scene(cfg: &SceneConfig, index: usize) -> Result<Frame> {
    let calib = Calibration::kitti_like();
    let mut rng = rng(key(&[cfg.seed, index as u64]));
    let n_objects = if rng.random_bool(cfg.empty_fraction.clamp(0.0, 1.0)) {
        0
    } else {
        rng.random_range(1..=cfg.max_objects.max(1))
    };

    let mut labels = Vec::new();
    let mut placed: Vec<Box3D> = Vec::new();
    for _ in 0..n_objects {
        let class = pick_class(&mut rng);
        let mean = mean_dims(class);
        let dims = mean.map(|d| d * rng.random_range(0.9..1.1));
        for _attempt in 0..20 {
            let x: f64 = rng.random_range(5.0..70.0);
            let y = rng.random_range(-0.5 * x..0.5 * x).clamp(-25.0, 25.0);
            let yaw = rng.random_range(-std::f64::consts::PI..std::f64::consts::PI);
            let center = [x, y, -SENSOR_HEIGHT_M + 0.5 * dims[2]];
            let b = Box3D::new(center, dims, yaw)?;
            if placed.iter().any(|p| iou_bev(p, &b) > 0.0) {
                continue;
            }
            labels.push(make_label(class, &b, &calib, &mut rng));
            placed.push(b);
            break;
        }
    }
    for _ in 0..rng.random_range(0..=cfg.max_dont_care) {
        labels.push(dont_care(&mut rng));
    }

    let mut frame = Frame::new(frame_id(cfg.first_id + index), PointCloud::default(), labels, calib)?;
    let mut points = Vec::new();
    for _ in 0..cfg.ground_points {
        points.push([
            rng.random_range(0.0..80.0f32),
            rng.random_range(-40.0..40.0f32),
            (-SENSOR_HEIGHT_M + rng.random_range(-0.05..0.05)) as f32,
            rng.random_range(0.0..0.3f32),
        ]);
    }
    for obj in &frame.objects {
        for _ in 0..points_for_range(obj.bbox.range()) {
            points.push(sample_in_box(&obj.bbox, &mut rng));
        }
    }
    frame.cloud = PointCloud::new(points);
    Ok(frame)
}

pub fn scenes(cfg: &SceneConfig) -> Result<Vec<Frame>> {
    (0..cfg.n_frames).map(|i| scene(cfg, i)).collect()
}

/// Writes `cfg.n_frames` scenes under `root` in KITTI layout and returns them.
pub fn write_scenes(root: &Path, cfg: &SceneConfig) -> Result<Vec<Frame>> {
    let frames = scenes(cfg)?;
    for f in &frames {
        write_frame(root, f)?;
    }
    Ok(frames)
}

/// Uniform points in a 160 m x 160 m x 8 m block, intensities in `[0, 1)`.
pub fn random_cloud(n: usize, seed: u64) -> PointCloud {
    let mut rng = rng(seed);
    PointCloud::new(
        (0..n)
            .map(|_| {
                [
                    rng.random_range(-80.0..80.0f32),
                    rng.random_range(-80.0..80.0f32),
                    rng.random_range(-3.0..5.0f32),
                    rng.random_range(0.0..1.0f32),
                ]
            })
            .collect(),
    )
}
