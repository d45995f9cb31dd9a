//! Left-right reflection of scenes.
//!
//! The mirror plane is `y = 0` in the LiDAR frame, i.e. the street as seen
//! with left and right swapped. Reflection is an involution, so the same
//! functions also map predictions made on a mirrored cloud back into the
//! original frame.

use crate::geometry::{wrap_angle, Box3D};
use crate::inconsistency::Detection;
use crate::kitti::{GroundTruth, PointCloud};

/// Reflection plane. Only the LiDAR `y = 0` plane is implemented.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MirrorAxis {
    #[default]
    LidarY,
}

pub fn mirror_cloud(cloud: &PointCloud) -> PointCloud {
    PointCloud::new(cloud.points.iter().map(|&[x, y, z, i]| [x, -y, z, i]).collect())
}

pub fn mirror_box(b: &Box3D) -> Box3D {
    Box3D {
        center: [b.center[0], -b.center[1], b.center[2]],
        dims: b.dims,
        yaw: wrap_angle(-b.yaw),
    }
}

pub fn mirror_detections(dets: &[Detection]) -> Vec<Detection> {
    dets.iter()
        .map(|d| Detection {
            bbox: mirror_box(&d.bbox),
            ..*d
        })
        .collect()
}

pub fn mirror_ground_truth(objects: &[GroundTruth]) -> Vec<GroundTruth> {
    objects
        .iter()
        .map(|o| GroundTruth {
            class: o.class,
            bbox: mirror_box(&o.bbox),
        })
        .collect()
}

impl MirrorAxis {
    pub fn cloud(self, cloud: &PointCloud) -> PointCloud {
        match self {
            MirrorAxis::LidarY => mirror_cloud(cloud),
        }
    }

    pub fn detections(self, dets: &[Detection]) -> Vec<Detection> {
        match self {
            MirrorAxis::LidarY => mirror_detections(dets),
        }
    }

    pub fn ground_truth(self, objects: &[GroundTruth]) -> Vec<GroundTruth> {
        match self {
            MirrorAxis::LidarY => mirror_ground_truth(objects),
        }
    }
}
