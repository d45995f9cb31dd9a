//! KITTI object-detection artifacts: label text files, calibration files and
//! velodyne binaries, plus the camera-to-LiDAR box conversion.
//!
//! Everything downstream works in the LiDAR frame. Labels are converted once,
//! when a [`Frame`] is loaded; the raw records are kept alongside.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use nalgebra::{Matrix3, Matrix3x4, Matrix4, Vector4};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{wrap_angle, Box3D};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ObjectClass {
    Car,
    Pedestrian,
    Cyclist,
    Van,
    Truck,
    #[serde(rename = "Person_sitting")]
    PersonSitting,
    Tram,
    Misc,
    DontCare,
}

impl ObjectClass {
    pub const ALL: [ObjectClass; 9] = [
        ObjectClass::Car,
        ObjectClass::Pedestrian,
        ObjectClass::Cyclist,
        ObjectClass::Van,
        ObjectClass::Truck,
        ObjectClass::PersonSitting,
        ObjectClass::Tram,
        ObjectClass::Misc,
        ObjectClass::DontCare,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ObjectClass::Car => "Car",
            ObjectClass::Pedestrian => "Pedestrian",
            ObjectClass::Cyclist => "Cyclist",
            ObjectClass::Van => "Van",
            ObjectClass::Truck => "Truck",
            ObjectClass::PersonSitting => "Person_sitting",
            ObjectClass::Tram => "Tram",
            ObjectClass::Misc => "Misc",
            ObjectClass::DontCare => "DontCare",
        }
    }

    /// Stable small integer, used when hashing class identity.
    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for ObjectClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ObjectClass {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        ObjectClass::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| format!("unknown class {s:?}"))
    }
}

/// One line of a KITTI label file, in the rectified camera frame.
#[derive(Debug, Clone, PartialEq)]
pub struct LabelRecord {
    pub class: ObjectClass,
    pub truncated: f64,
    pub occluded: i8,
    pub alpha: f64,
    /// left, top, right, bottom in pixels.
    pub bbox2d: [f64; 4],
    /// height, width, length in meters.
    pub dims: [f64; 3],
    /// Bottom-face center, camera frame.
    pub location: [f64; 3],
    pub rotation_y: f64,
    /// Optional 16th field; present in prediction dumps, ignored for ground truth.
    pub score: Option<f64>,
}

impl LabelRecord {
    pub fn is_dont_care(&self) -> bool {
        self.class == ObjectClass::DontCare
    }

    /// Formats the record as a KITTI label line (without trailing newline).
    pub fn to_line(&self) -> String {
        let mut s = format!(
            "{} {:.2} {} {:.2} {:.2} {:.2} {:.2} {:.2} {:.2} {:.2} {:.2} {:.2} {:.2} {:.2} {:.2}",
            self.class,
            self.truncated,
            self.occluded,
            self.alpha,
            self.bbox2d[0],
            self.bbox2d[1],
            self.bbox2d[2],
            self.bbox2d[3],
            self.dims[0],
            self.dims[1],
            self.dims[2],
            self.location[0],
            self.location[1],
            self.location[2],
            self.rotation_y
        );
        if let Some(score) = self.score {
            s.push_str(&format!(" {score:.4}"));
        }
        s
    }
}

fn field(tokens: &[&str], line: usize, idx: usize) -> Result<f64> {
    tokens[idx]
        .parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| Error::LabelParse {
            line,
            field: idx + 1,
            message: format!("expected a number, got {:?}", tokens[idx]),
        })
}

fn parse_label_line(text: &str, line: usize) -> Result<LabelRecord> {
    let tokens: Vec<&str> = text.split_whitespace().collect();
    if tokens.len() != 15 && tokens.len() != 16 {
        return Err(Error::LabelParse {
            line,
            field: tokens.len(),
            message: format!("expected 15 or 16 fields, found {}", tokens.len()),
        });
    }
    let class = tokens[0]
        .parse::<ObjectClass>()
        .map_err(|_| Error::UnknownClass {
            line,
            name: tokens[0].to_string(),
        })?;
    let num = |idx| field(&tokens, line, idx);
    let bad = |idx: usize, message: String| Error::LabelParse {
        line,
        field: idx + 1,
        message,
    };

    let truncated = num(1)?;
    let occluded_raw = num(2)?;
    let alpha = num(3)?;
    let bbox2d = [num(4)?, num(5)?, num(6)?, num(7)?];
    let dims = [num(8)?, num(9)?, num(10)?];
    let location = [num(11)?, num(12)?, num(13)?];
    let rotation_y = num(14)?;
    let score = if tokens.len() == 16 { Some(num(15)?) } else { None };

    if occluded_raw.fract() != 0.0 {
        return Err(bad(2, format!("occlusion must be an integer, got {occluded_raw}")));
    }
    let occluded = occluded_raw as i8;
    if bbox2d[2] < bbox2d[0] {
        return Err(bad(6, "bbox right < left".into()));
    }
    if bbox2d[3] < bbox2d[1] {
        return Err(bad(7, "bbox bottom < top".into()));
    }
    // DontCare regions carry -1 / -10 / -1000 sentinels in the 3D fields.
    if class != ObjectClass::DontCare {
        if !(0.0..=1.0).contains(&truncated) {
            return Err(bad(1, format!("truncation {truncated} outside [0, 1]")));
        }
        if !(0..=3).contains(&occluded) {
            return Err(bad(2, format!("occlusion {occluded} outside 0..=3")));
        }
        if let Some(i) = dims.iter().position(|d| *d <= 0.0) {
            return Err(bad(8 + i, format!("dimension {} must be positive", dims[i])));
        }
        if !(-PI..=PI).contains(&rotation_y) {
            return Err(bad(14, format!("rotation_y {rotation_y} outside [-pi, pi]")));
        }
    }

    Ok(LabelRecord {
        class,
        truncated,
        occluded,
        alpha,
        bbox2d,
        dims,
        location,
        rotation_y,
        score,
    })
}

/// Parses a KITTI label file. Blank lines are skipped; line numbers in
/// errors are 1-based and count every physical line.
pub fn parse_label_file(bytes: &[u8]) -> Result<Vec<LabelRecord>> {
    let text = std::str::from_utf8(bytes).map_err(|e| Error::LabelParse {
        line: 0,
        field: 0,
        message: format!("not UTF-8: {e}"),
    })?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| parse_label_line(l, i + 1))
        .collect()
}

/// Rigid and projective matrices of one KITTI calibration file.
#[derive(Debug, Clone, PartialEq)]
pub struct Calibration {
    pub velo_to_cam: Matrix3x4<f64>,
    pub rect: Matrix3<f64>,
    pub proj: Matrix3x4<f64>,
}

pub const CALIB_VELO_TO_CAM: &str = "Tr_velo_to_cam";
pub const CALIB_RECT: &str = "R0_rect";
pub const CALIB_PROJ: &str = "P2";

impl Calibration {
    /// All-identity chain: camera and LiDAR frames coincide.
    pub fn identity() -> Self {
        Self {
            velo_to_cam: Matrix3x4::identity(),
            rect: Matrix3::identity(),
            proj: Matrix3x4::identity(),
        }
    }

    /// Typical KITTI extrinsics: camera x right, y down, z forward; LiDAR
    /// x forward, y left, z up; small offset between sensors.
    pub fn kitti_like() -> Self {
        #[rustfmt::skip]
        let velo_to_cam = Matrix3x4::new(
            0.0, -1.0,  0.0, -0.0041,
            0.0,  0.0, -1.0, -0.0763,
            1.0,  0.0,  0.0, -0.2718,
        );
        #[rustfmt::skip]
        let proj = Matrix3x4::new(
            721.5377, 0.0, 609.5593, 44.85728,
            0.0, 721.5377, 172.854, 0.2163791,
            0.0, 0.0, 1.0, 0.002745884,
        );
        Self {
            velo_to_cam,
            rect: Matrix3::identity(),
            proj,
        }
    }

    /// LiDAR point -> rectified camera point.
    pub fn transform(&self) -> Matrix4<f64> {
        let mut velo = Matrix4::identity();
        velo.fixed_view_mut::<3, 4>(0, 0).copy_from(&self.velo_to_cam);
        let mut rect = Matrix4::identity();
        rect.fixed_view_mut::<3, 3>(0, 0).copy_from(&self.rect);
        rect * velo
    }

    pub fn lidar_to_camera(&self, p: [f64; 3]) -> [f64; 3] {
        let v = self.transform() * Vector4::new(p[0], p[1], p[2], 1.0);
        [v.x, v.y, v.z]
    }

    pub fn camera_to_lidar(&self, p: [f64; 3]) -> Result<[f64; 3]> {
        let inv = self
            .transform()
            .try_inverse()
            .ok_or(Error::SingularTransform("rect * velo_to_cam"))?;
        let v = inv * Vector4::new(p[0], p[1], p[2], 1.0);
        Ok([v.x, v.y, v.z])
    }

    /// Serializes in KITTI key: value form (only the keys this crate reads,
    /// with the projection written as P2).
    pub fn to_text(&self) -> String {
        let row_major = |rows: usize, cols: usize, get: &dyn Fn(usize, usize) -> f64| {
            let mut out = Vec::with_capacity(rows * cols);
            for r in 0..rows {
                for c in 0..cols {
                    out.push(format!("{:e}", get(r, c)));
                }
            }
            out.join(" ")
        };
        format!(
            "{CALIB_PROJ}: {}\n{CALIB_RECT}: {}\n{CALIB_VELO_TO_CAM}: {}\n",
            row_major(3, 4, &|r, c| self.proj[(r, c)]),
            row_major(3, 3, &|r, c| self.rect[(r, c)]),
            row_major(3, 4, &|r, c| self.velo_to_cam[(r, c)]),
        )
    }
}

fn calib_values(text: &str, key: &str, expected: usize) -> Result<Vec<f64>> {
    let line = text
        .lines()
        .find_map(|l| {
            let (k, v) = l.split_once(':')?;
            (k.trim() == key).then_some(v)
        })
        .ok_or_else(|| Error::CalibMissingKey(key.to_string()))?;
    let values = line
        .split_whitespace()
        .map(|t| {
            t.parse::<f64>()
                .map_err(|_| Error::CalibInvalid(format!("{key}: bad number {t:?}")))
        })
        .collect::<Result<Vec<_>>>()?;
    if values.len() != expected {
        return Err(Error::CalibShape {
            key: key.to_string(),
            expected,
            found: values.len(),
        });
    }
    Ok(values)
}

/// Tolerance for the orthonormality check on the rectification rotation.
pub const RECT_ORTHONORMAL_TOL: f64 = 1e-4;

pub fn parse_calib_file(bytes: &[u8]) -> Result<Calibration> {
    let text = std::str::from_utf8(bytes)
        .map_err(|e| Error::CalibInvalid(format!("not UTF-8: {e}")))?;
    let velo = calib_values(text, CALIB_VELO_TO_CAM, 12)?;
    let rect = calib_values(text, CALIB_RECT, 9)?;
    let proj = calib_values(text, CALIB_PROJ, 12)?;
    let rect = Matrix3::from_row_slice(&rect);
    let gram = rect * rect.transpose();
    let err = (gram - Matrix3::identity()).abs().max();
    if err > RECT_ORTHONORMAL_TOL {
        return Err(Error::CalibInvalid(format!(
            "{CALIB_RECT} is not a rotation (max |R R^T - I| = {err:e})"
        )));
    }
    Ok(Calibration {
        velo_to_cam: Matrix3x4::from_row_slice(&velo),
        rect,
        proj: Matrix3x4::from_row_slice(&proj),
    })
}

/// One LiDAR return: x, y, z in meters and reflectance.
pub type Point = [f32; 4];

#[derive(Debug, Clone, Default, PartialEq)]
pub struct PointCloud {
    pub points: Vec<Point>,
}

impl PointCloud {
    pub fn new(points: Vec<Point>) -> Self {
        Self { points }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Number of points whose intensity falls outside `[0, 1]`.
    pub fn intensity_outliers(&self) -> usize {
        self.points
            .iter()
            .filter(|p| !(0.0..=1.0).contains(&p[3]))
            .count()
    }

    /// 64-bit FNV-1a over the little-endian bytes of every value.
    pub fn content_hash(&self) -> u64 {
        const OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
        const PRIME: u64 = 0x0000_0100_0000_01b3;
        let mut h = OFFSET;
        for p in &self.points {
            for v in p {
                for byte in v.to_le_bytes() {
                    h ^= byte as u64;
                    h = h.wrapping_mul(PRIME);
                }
            }
        }
        h
    }

    /// Axis-aligned extent of the xyz coordinates, or `None` when empty.
    pub fn bounds(&self) -> Option<([f64; 3], [f64; 3])> {
        let mut it = self.points.iter();
        let first = it.next()?;
        let mut lo = [first[0] as f64, first[1] as f64, first[2] as f64];
        let mut hi = lo;
        for p in it {
            for k in 0..3 {
                lo[k] = lo[k].min(p[k] as f64);
                hi[k] = hi[k].max(p[k] as f64);
            }
        }
        Some((lo, hi))
    }

    pub fn count_inside(&self, b: &Box3D) -> usize {
        self.points
            .iter()
            .filter(|p| b.contains([p[0] as f64, p[1] as f64, p[2] as f64]))
            .count()
    }
}

/// Decodes a velodyne binary: packed little-endian f32 quadruples.
pub fn read_point_cloud(bytes: &[u8]) -> Result<PointCloud> {
    if bytes.len() % 16 != 0 {
        return Err(Error::PointCloudLength(bytes.len()));
    }
    let points = bytes
        .chunks_exact(16)
        .map(|c| {
            let v = |i: usize| f32::from_le_bytes([c[i], c[i + 1], c[i + 2], c[i + 3]]);
            [v(0), v(4), v(8), v(12)]
        })
        .collect::<Vec<_>>();
    let cloud = PointCloud { points };
    let outliers = cloud.intensity_outliers();
    if outliers > 0 {
        log::warn!("{outliers} points have intensity outside [0, 1]");
    }
    Ok(cloud)
}

pub fn encode_point_cloud(cloud: &PointCloud) -> Vec<u8> {
    let mut out = Vec::with_capacity(cloud.points.len() * 16);
    for p in &cloud.points {
        for v in p {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    out
}

/// Converts a camera-frame label to a LiDAR-frame box.
///
/// The label location is the bottom-face center; the box center is that
/// point transformed into the LiDAR frame and raised by half the height.
/// Heading becomes `-rotation_y - pi/2` about LiDAR +z.
pub fn camera_label_to_lidar_box(label: &LabelRecord, calib: &Calibration) -> Result<Box3D> {
    if label.is_dont_care() {
        return Err(Error::InvalidBox("DontCare labels have no 3D box".into()));
    }
    let [h, w, l] = label.dims;
    let mut center = calib.camera_to_lidar(label.location)?;
    center[2] += 0.5 * h;
    Box3D::new(center, [l, w, h], -label.rotation_y - FRAC_PI_2)
}

/// Inverse of [`camera_label_to_lidar_box`] for the 3D fields: returns
/// (dims as h, w, l; bottom-center location; rotation_y in `[-pi, pi)`).
pub fn lidar_box_to_camera(b: &Box3D, calib: &Calibration) -> ([f64; 3], [f64; 3], f64) {
    let bottom = [b.center[0], b.center[1], b.center[2] - 0.5 * b.dims[2]];
    let location = calib.lidar_to_camera(bottom);
    let rotation_y = wrap_angle(-b.yaw - FRAC_PI_2);
    ([b.dims[2], b.dims[1], b.dims[0]], location, rotation_y)
}

/// Projects a 3D point in the rectified camera frame into pixel coordinates.
pub fn project_to_image(calib: &Calibration, p: [f64; 3]) -> Option<[f64; 2]> {
    let v = calib.proj * Vector4::new(p[0], p[1], p[2], 1.0);
    (v.z > 1e-6).then(|| [v.x / v.z, v.y / v.z])
}

/// A ground-truth object in the LiDAR frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroundTruth {
    pub class: ObjectClass,
    pub bbox: Box3D,
}

/// One dataset sample.
#[derive(Debug, Clone)]
pub struct Frame {
    pub frame_id: String,
    pub cloud: PointCloud,
    pub labels: Vec<LabelRecord>,
    pub calib: Calibration,
    /// Non-DontCare labels converted to the LiDAR frame, in label order.
    pub objects: Vec<GroundTruth>,
}

impl Frame {
    pub fn new(
        frame_id: impl Into<String>,
        cloud: PointCloud,
        labels: Vec<LabelRecord>,
        calib: Calibration,
    ) -> Result<Self> {
        let objects = labels
            .iter()
            .filter(|l| !l.is_dont_care())
            .map(|l| {
                Ok(GroundTruth {
                    class: l.class,
                    bbox: camera_label_to_lidar_box(l, &calib)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            frame_id: frame_id.into(),
            cloud,
            labels,
            calib,
            objects,
        })
    }
}

pub const VELODYNE_DIR: &str = "velodyne";
pub const LABEL_DIR: &str = "label_2";
pub const CALIB_DIR: &str = "calib";

fn read_artifact(root: &Path, id: &str, kind: &'static str, ext: &str) -> Result<Vec<u8>> {
    let file = format!("{id}.{ext}");
    let path = root.join(kind).join(&file);
    match fs::read(&path) {
        Ok(bytes) => Ok(bytes),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Err(Error::MissingArtifact {
            id: id.to_string(),
            kind,
            file,
        }),
        Err(e) => Err(Error::io(path, e)),
    }
}

pub fn load_frame(root: &Path, id: &str) -> Result<Frame> {
    let velo = read_artifact(root, id, VELODYNE_DIR, "bin")?;
    let label = read_artifact(root, id, LABEL_DIR, "txt")?;
    let calib = read_artifact(root, id, CALIB_DIR, "txt")?;
    let cloud = read_point_cloud(&velo)?;
    let labels = parse_label_file(&label)?;
    let calib = parse_calib_file(&calib)?;
    Frame::new(id, cloud, labels, calib)
}

/// Loads every indexed frame eagerly, in index order.
pub fn load_dataset(root: &Path, index: &[String]) -> Result<Vec<Frame>> {
    let mut seen = std::collections::HashSet::new();
    for id in index {
        if !seen.insert(id.as_str()) {
            return Err(Error::InvalidConfig(format!("duplicate frame id {id} in index")));
        }
    }
    index.iter().map(|id| load_frame(root, id)).collect()
}

/// Writes one frame in KITTI layout under `root`.
pub fn write_frame(root: &Path, frame: &Frame) -> Result<()> {
    for dir in [VELODYNE_DIR, LABEL_DIR, CALIB_DIR] {
        let d = root.join(dir);
        fs::create_dir_all(&d).map_err(|e| Error::io(&d, e))?;
    }
    let id = &frame.frame_id;
    let write = |dir: &str, ext: &str, bytes: &[u8]| {
        let p = root.join(dir).join(format!("{id}.{ext}"));
        fs::write(&p, bytes).map_err(|e| Error::io(&p, e))
    };
    write(VELODYNE_DIR, "bin", &encode_point_cloud(&frame.cloud))?;
    let mut labels = String::new();
    for l in &frame.labels {
        labels.push_str(&l.to_line());
        labels.push('\n');
    }
    write(LABEL_DIR, "txt", labels.as_bytes())?;
    write(CALIB_DIR, "txt", frame.calib.to_text().as_bytes())
}

/// Reads a split index: one frame id per line.
pub fn read_split_index(path: &Path) -> Result<Vec<String>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(parse_split_index(&text))
}

pub fn parse_split_index(text: &str) -> Vec<String> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .map(str::to_string)
        .collect()
}

pub fn format_split_index(ids: &[String]) -> String {
    let mut s = String::with_capacity(ids.len() * 7);
    for id in ids {
        s.push_str(id);
        s.push('\n');
    }
    s
}

/// Zero-padded six-digit KITTI frame id.
pub fn frame_id(n: usize) -> String {
    format!("{n:06}")
}

/// Frame ids present under `root/velodyne`, sorted.
pub fn discover_frame_ids(root: &Path) -> Result<Vec<String>> {
    let dir = root.join(VELODYNE_DIR);
    let entries = fs::read_dir(&dir).map_err(|e| Error::io(&dir, e))?;
    let mut ids = Vec::new();
    for entry in entries {
        let entry = entry.map_err(|e| Error::io(&dir, e))?;
        let name = entry.file_name();
        let name = name.to_string_lossy();
        if let Some(stem) = name.strip_suffix(".bin") {
            ids.push(stem.to_string());
        }
    }
    ids.sort();
    Ok(ids)
}
