#![allow(dead_code)]

use lidar_al::geometry::{bev_corners, Box3D};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn random_box(rng: &mut ChaCha8Rng) -> Box3D {
    let center = [
        rng.random_range(-5.0..5.0),
        rng.random_range(-5.0..5.0),
        rng.random_range(-1.0..1.0),
    ];
    let dims = [
        rng.random_range(0.5..5.0),
        rng.random_range(0.5..3.0),
        rng.random_range(0.5..3.0),
    ];
    let yaw = rng.random_range(-std::f64::consts::PI..std::f64::consts::PI);
    Box3D::new(center, dims, yaw).unwrap()
}

/// A box overlapping `a` more often than not.
pub fn nearby_box(a: &Box3D, rng: &mut ChaCha8Rng) -> Box3D {
    let center = [
        a.center[0] + rng.random_range(-1.0..1.0) * a.length(),
        a.center[1] + rng.random_range(-1.0..1.0) * a.width(),
        a.center[2] + rng.random_range(-0.7..0.7) * a.height(),
    ];
    let dims = a.dims.map(|d| d * rng.random_range(0.6..1.4));
    let yaw = a.yaw + rng.random_range(-1.0..1.0);
    Box3D::new(center, dims, yaw).unwrap()
}

/// IoU estimated from uniform samples over the pair's joint bounding box.
pub fn monte_carlo_iou(a: &Box3D, b: &Box3D, samples: usize, rng: &mut ChaCha8Rng) -> f64 {
    let mut lo = [f64::INFINITY; 3];
    let mut hi = [f64::NEG_INFINITY; 3];
    for bx in [a, b] {
        for v in bev_corners(bx).vertices() {
            for k in 0..2 {
                lo[k] = lo[k].min(v[k]);
                hi[k] = hi[k].max(v[k]);
            }
        }
        lo[2] = lo[2].min(bx.bottom());
        hi[2] = hi[2].max(bx.top());
    }
    let (mut in_a, mut in_b, mut both) = (0usize, 0usize, 0usize);
    for _ in 0..samples {
        let p = [
            rng.random_range(lo[0]..hi[0]),
            rng.random_range(lo[1]..hi[1]),
            rng.random_range(lo[2]..hi[2]),
        ];
        let (ia, ib) = (a.contains(p), b.contains(p));
        in_a += ia as usize;
        in_b += ib as usize;
        both += (ia && ib) as usize;
    }
    let union = in_a + in_b - both;
    if union == 0 {
        0.0
    } else {
        both as f64 / union as f64
    }
}
