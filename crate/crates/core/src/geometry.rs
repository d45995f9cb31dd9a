//! Oriented 3D boxes and exact bird's-eye-view / volumetric IoU.
//!
//! Footprint overlap is computed by clipping one rectangle against the
//! half-planes of the other (Sutherland-Hodgman); both rectangles are convex
//! so the result is exact up to floating point. Boxes are upright: the
//! vertical overlap is a plain interval intersection on z.

use std::cmp::Ordering;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Clipped polygons with less area than this are treated as empty.
pub const DEGENERATE_AREA: f64 = 1e-12;

/// Wraps an angle into `[-pi, pi)`. Values already in range are returned
/// unchanged so that wrapping is idempotent bit-for-bit.
pub fn wrap_angle(angle: f64) -> f64 {
    if (-PI..PI).contains(&angle) {
        return angle;
    }
    let mut r = (angle + PI).rem_euclid(2.0 * PI) - PI;
    if r >= PI {
        r -= 2.0 * PI;
    }
    if r < -PI {
        r = -PI;
    }
    r
}

/// Oriented, upright 3D box in the LiDAR frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Box3D {
    /// Geometric center (x, y, z) in meters.
    pub center: [f64; 3],
    /// (length, width, height) in meters. Length runs along the heading.
    pub dims: [f64; 3],
    /// Heading about +z, radians in `[-pi, pi)`.
    pub yaw: f64,
}

impl Box3D {
    pub fn new(center: [f64; 3], dims: [f64; 3], yaw: f64) -> Result<Self> {
        if !dims.iter().all(|d| d.is_finite() && *d > 0.0) {
            return Err(Error::InvalidBox(format!(
                "dimensions must be positive, got {dims:?}"
            )));
        }
        if !center.iter().all(|c| c.is_finite()) || !yaw.is_finite() {
            return Err(Error::InvalidBox("non-finite center or yaw".into()));
        }
        Ok(Self {
            center,
            dims,
            yaw: wrap_angle(yaw),
        })
    }

    pub fn length(&self) -> f64 {
        self.dims[0]
    }

    pub fn width(&self) -> f64 {
        self.dims[1]
    }

    pub fn height(&self) -> f64 {
        self.dims[2]
    }

    pub fn volume(&self) -> f64 {
        self.dims[0] * self.dims[1] * self.dims[2]
    }

    pub fn bottom(&self) -> f64 {
        self.center[2] - 0.5 * self.dims[2]
    }

    pub fn top(&self) -> f64 {
        self.center[2] + 0.5 * self.dims[2]
    }

    /// Horizontal distance of the center from the sensor origin.
    pub fn range(&self) -> f64 {
        self.center[0].hypot(self.center[1])
    }

    /// Whether a point lies inside the box (boundary inclusive).
    pub fn contains(&self, p: [f64; 3]) -> bool {
        let dz = p[2] - self.center[2];
        if dz.abs() > 0.5 * self.dims[2] {
            return false;
        }
        let (s, c) = self.yaw.sin_cos();
        let dx = p[0] - self.center[0];
        let dy = p[1] - self.center[1];
        let lx = c * dx + s * dy;
        let ly = -s * dx + c * dy;
        lx.abs() <= 0.5 * self.dims[0] && ly.abs() <= 0.5 * self.dims[1]
    }

    fn total_cmp(&self, other: &Self) -> Ordering {
        let a = self.center.iter().chain(&self.dims).chain([&self.yaw]);
        let b = other.center.iter().chain(&other.dims).chain([&other.yaw]);
        a.zip(b)
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(Ordering::Equal)
    }
}

/// Convex polygon with counter-clockwise vertex order.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvexPolygon2D {
    vertices: Vec<[f64; 2]>,
}

impl ConvexPolygon2D {
    /// Builds a polygon from convex vertices, reversing clockwise input.
    pub fn new(mut vertices: Vec<[f64; 2]>) -> Self {
        if shoelace(&vertices) < 0.0 {
            vertices.reverse();
        }
        Self { vertices }
    }

    pub fn vertices(&self) -> &[[f64; 2]] {
        &self.vertices
    }

    pub fn signed_area(&self) -> f64 {
        shoelace(&self.vertices)
    }

    pub fn area(&self) -> f64 {
        self.signed_area().abs()
    }
}

fn shoelace(v: &[[f64; 2]]) -> f64 {
    if v.len() < 3 {
        return 0.0;
    }
    let mut acc = 0.0;
    for i in 0..v.len() {
        let a = v[i];
        let b = v[(i + 1) % v.len()];
        acc += a[0] * b[1] - a[1] * b[0];
    }
    0.5 * acc
}

/// Footprint corners, counter-clockwise starting at the front-left corner.
pub fn bev_corners(b: &Box3D) -> ConvexPolygon2D {
    let (s, c) = b.yaw.sin_cos();
    let hl = 0.5 * b.dims[0];
    let hw = 0.5 * b.dims[1];
    let local = [[hl, hw], [-hl, hw], [-hl, -hw], [hl, -hw]];
    let vertices = local
        .iter()
        .map(|&[x, y]| [c * x - s * y + b.center[0], s * x + c * y + b.center[1]])
        .collect();
    ConvexPolygon2D { vertices }
}

#[inline]
fn side(a: [f64; 2], b: [f64; 2], p: [f64; 2]) -> f64 {
    (b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0])
}

/// Keeps the part of `poly` on the left of the directed edge `a -> b`.
fn clip_half_plane(poly: &[[f64; 2]], a: [f64; 2], b: [f64; 2], out: &mut Vec<[f64; 2]>) {
    out.clear();
    let n = poly.len();
    for i in 0..n {
        let s = poly[i];
        let e = poly[(i + 1) % n];
        let ds = side(a, b, s);
        let de = side(a, b, e);
        let s_in = ds >= 0.0;
        let e_in = de >= 0.0;
        if s_in != e_in {
            let t = ds / (ds - de);
            out.push([s[0] + (e[0] - s[0]) * t, s[1] + (e[1] - s[1]) * t]);
        }
        if e_in {
            out.push(e);
        }
    }
}

/// Area of the intersection of two convex CCW polygons.
pub fn convex_intersection_area(a: &ConvexPolygon2D, b: &ConvexPolygon2D) -> f64 {
    if a.vertices.len() < 3 || b.vertices.len() < 3 {
        return 0.0;
    }
    let mut current = a.vertices.clone();
    let mut scratch = Vec::with_capacity(current.len() + b.vertices.len());
    let clip = &b.vertices;
    for i in 0..clip.len() {
        clip_half_plane(&current, clip[i], clip[(i + 1) % clip.len()], &mut scratch);
        std::mem::swap(&mut current, &mut scratch);
        if current.len() < 3 {
            return 0.0;
        }
    }
    let area = shoelace(&current);
    if area < DEGENERATE_AREA {
        0.0
    } else {
        area
    }
}

/// Footprint intersection with the arguments put in a canonical order, so
/// that the result does not depend on which box is clipped against which.
fn footprint_intersection(a: &Box3D, b: &Box3D) -> f64 {
    let (first, second) = if a.total_cmp(b).is_le() { (a, b) } else { (b, a) };
    convex_intersection_area(&bev_corners(first), &bev_corners(second))
}

/// Bird's-eye-view IoU of the two footprints.
pub fn iou_bev(a: &Box3D, b: &Box3D) -> f64 {
    let inter = footprint_intersection(a, b);
    if inter <= 0.0 {
        return 0.0;
    }
    let union = a.dims[0] * a.dims[1] + b.dims[0] * b.dims[1] - inter;
    (inter / union).clamp(0.0, 1.0)
}

/// Volumetric IoU of two upright boxes.
pub fn iou_3d(a: &Box3D, b: &Box3D) -> f64 {
    let dz = a.top().min(b.top()) - a.bottom().max(b.bottom());
    if dz <= 0.0 {
        return 0.0;
    }
    let inter = footprint_intersection(a, b) * dz;
    if inter <= 0.0 {
        return 0.0;
    }
    let union = a.volume() + b.volume() - inter;
    (inter / union).clamp(0.0, 1.0)
}
