use std::collections::HashSet;

use lidar_al::augmentation::{mirror_cloud, mirror_ground_truth};
use lidar_al::detector::OracleDetector;
use lidar_al::geometry::{iou_3d, Box3D};
use lidar_al::inconsistency::{
    match_boxes, score_frame, score_iou, Detection, MatchConfig, Score,
};
use lidar_al::kitti::ObjectClass;
use lidar_al::synthetic::{scenes, SceneConfig};
use proptest::prelude::*;

fn det(class: ObjectClass, x: f64, y: f64, yaw: f64) -> Detection {
    Detection {
        class,
        bbox: Box3D::new([x, y, 0.0], [4.0, 1.8, 1.6], yaw).unwrap(),
        confidence: 0.5,
    }
}

/// Repeatedly takes the best remaining admissible pair.
fn greedy_oracle(o: &[Detection], a: &[Detection], cfg: &MatchConfig) -> Vec<(usize, usize)> {
    let mut used_o = vec![false; o.len()];
    let mut used_a = vec![false; a.len()];
    let mut out = Vec::new();
    loop {
        let mut best: Option<(f64, usize, usize)> = None;
        for i in 0..o.len() {
            for j in 0..a.len() {
                if used_o[i] || used_a[j] || (cfg.class_aware && o[i].class != a[j].class) {
                    continue;
                }
                let iou = iou_3d(&o[i].bbox, &a[j].bbox);
                if iou < cfg.iou_threshold {
                    continue;
                }
                if best.is_none_or(|(b, _, _)| iou > b) {
                    best = Some((iou, i, j));
                }
            }
        }
        match best {
            Some((_, i, j)) => {
                used_o[i] = true;
                used_a[j] = true;
                out.push((i, j));
            }
            None => return out,
        }
    }
}

/// Size of a maximum-cardinality matching, by exhaustive search.
fn max_matching(o: &[Detection], a: &[Detection], cfg: &MatchConfig) -> usize {
    fn go(i: usize, used: &mut Vec<bool>, adj: &[Vec<usize>]) -> usize {
        if i == adj.len() {
            return 0;
        }
        let mut best = go(i + 1, used, adj);
        for &j in &adj[i] {
            if !used[j] {
                used[j] = true;
                best = best.max(1 + go(i + 1, used, adj));
                used[j] = false;
            }
        }
        best
    }
    let adj: Vec<Vec<usize>> = o
        .iter()
        .map(|x| {
            (0..a.len())
                .filter(|&j| {
                    (!cfg.class_aware || x.class == a[j].class)
                        && iou_3d(&x.bbox, &a[j].bbox) >= cfg.iou_threshold
                })
                .collect()
        })
        .collect();
    go(0, &mut vec![false; a.len()], &adj)
}

fn arb_dets(max: usize) -> impl Strategy<Value = Vec<Detection>> {
    prop::collection::vec(
        (0usize..2, -4.0..4.0f64, -2.0..2.0f64, -0.6..0.6f64),
        0..max,
    )
    .prop_map(|v| {
        v.into_iter()
            .map(|(c, x, y, yaw)| {
                let class = if c == 0 { ObjectClass::Car } else { ObjectClass::Van };
                det(class, x, y, yaw)
            })
            .collect()
    })
}

proptest! {
    #[test]
    fn greedy_matches_oracle(o in arb_dets(7), a in arb_dets(7), aware in any::<bool>(), thr in 0.1..0.8f64) {
        let cfg = MatchConfig { iou_threshold: thr, class_aware: aware, ..Default::default() };
        let got: Vec<(usize, usize)> = match_boxes(&o, &a, &cfg).iter().map(|m| (m.original, m.augmented)).collect();
        prop_assert_eq!(&got, &greedy_oracle(&o, &a, &cfg));
        let oi: HashSet<usize> = got.iter().map(|p| p.0).collect();
        let ai: HashSet<usize> = got.iter().map(|p| p.1).collect();
        prop_assert_eq!(oi.len(), got.len());
        prop_assert_eq!(ai.len(), got.len());
        let best = max_matching(&o, &a, &cfg);
        prop_assert!(got.len() <= best);
        // A greedy matching is maximal, so it is at least half the maximum.
        prop_assert!(2 * got.len() >= best);
    }

    #[test]
    fn iou_score_closed_form(o in arb_dets(7), a in arb_dets(7)) {
        let cfg = MatchConfig::default();
        let n_m = match_boxes(&o, &a, &cfg).len();
        let n = o.len().max(a.len());
        match score_iou(&o, &a, &cfg, true) {
            Score::Discarded => prop_assert_eq!(n, 0),
            Score::Value(v) => prop_assert_eq!(v, (n - n_m) as f64 / n as f64),
        }
    }
}

#[test]
fn equivariant_detector_scores_zero_on_every_frame() {
    let frames = scenes(&SceneConfig { n_frames: 30, ..Default::default() }).unwrap();
    for f in &frames {
        let r = score_frame(f, &OracleDetector, &MatchConfig::default(), true).unwrap();
        if f.objects.is_empty() {
            assert!(r.discarded);
        } else {
            assert_eq!((r.s_nob, r.s_iou), (Some(0.0), Some(0.0)), "{}", f.frame_id);
        }
    }
}

#[test]
fn mirrored_ground_truth_maps_back_exactly() {
    let frames = scenes(&SceneConfig { n_frames: 10, ..Default::default() }).unwrap();
    for f in &frames {
        let twice = mirror_ground_truth(&mirror_ground_truth(&f.objects));
        for (a, b) in f.objects.iter().zip(&twice) {
            assert!((iou_3d(&a.bbox, &b.bbox) - 1.0).abs() < 1e-12);
        }
        assert_eq!(mirror_cloud(&mirror_cloud(&f.cloud)), f.cloud);
    }
}
