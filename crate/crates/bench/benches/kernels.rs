use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use lidar_al::inconsistency::{score_iou_counts, score_nob};
use lidar_al::synthetic::{scene, SceneConfig};
use lidar_al::{
    average_precision, iou_3d, rank_pool, score_frame, score_iou, Box3D, Detection, InconsistencyRecord,
    MatchConfig, ObjectClass, OracleDetector, RankOrder, ScoreKind,
};

// Cheap deterministic spread in [0, 1).
fn unit(i: usize, salt: f64) -> f64 {
    ((i as f64 * 12.9898 + salt * 78.233).sin() * 43758.5453).rem_euclid(1.0)
}

fn boxes(n: usize, salt: f64) -> Vec<Box3D> {
    (0..n)
        .map(|i| {
            Box3D::new(
                [40.0 * unit(i, salt), 10.0 * unit(i, salt + 1.0) - 5.0, -0.8],
                [3.5 + unit(i, salt + 2.0), 1.6, 1.5],
                std::f64::consts::TAU * unit(i, salt + 3.0),
            )
            .unwrap()
        })
        .collect()
}

fn detections(n: usize, salt: f64) -> Vec<Detection> {
    boxes(n, salt)
        .into_iter()
        .enumerate()
        .map(|(i, bbox)| Detection { class: ObjectClass::Car, bbox, confidence: unit(i, salt + 4.0) })
        .collect()
}

fn geometry(c: &mut Criterion) {
    let a = boxes(64, 0.0);
    let b: Vec<Box3D> = a
        .iter()
        .map(|x| Box3D::new([x.center[0] + 0.4, x.center[1] - 0.2, x.center[2]], x.dims, x.yaw + 0.3).unwrap())
        .collect();
    c.bench_function("iou_3d x64", |bench| {
        bench.iter(|| a.iter().zip(&b).map(|(x, y)| iou_3d(black_box(x), black_box(y))).sum::<f64>())
    });
}

fn matching(c: &mut Criterion) {
    let cfg = MatchConfig::default();
    let orig = detections(30, 0.0);
    let aug = detections(30, 0.5);
    c.bench_function("score_iou 30x30", |bench| {
        bench.iter(|| score_iou(black_box(&orig), black_box(&aug), &cfg, true))
    });
    let frame = scene(&SceneConfig { max_objects: 30, empty_fraction: 0.0, ..Default::default() }, 0).unwrap();
    c.bench_function("score_frame oracle", |bench| {
        bench.iter(|| score_frame(black_box(&frame), &OracleDetector, &cfg, true).unwrap())
    });
}

fn ranking(c: &mut Criterion) {
    let records: Vec<InconsistencyRecord> = (0..3712)
        .map(|i| {
            let n_o = (unit(i, 9.0) * 12.0) as usize;
            let n_a = (unit(i, 10.0) * 12.0) as usize;
            let n_m = n_o.min(n_a) / 2;
            InconsistencyRecord {
                frame_id: format!("{i:06}"),
                n_original: n_o,
                n_augmented: n_a,
                n_matched: n_m,
                s_nob: score_nob(n_o, n_a, true).value(),
                s_iou: score_iou_counts(n_o, n_a, n_m, true).value(),
                discarded: n_o + n_a == 0,
            }
        })
        .collect();
    for ordering in [RankOrder::Ascending, RankOrder::SeededShuffle] {
        c.bench_function(&format!("rank_pool 3712 {ordering:?}"), |bench| {
            bench.iter(|| rank_pool(black_box(&records), ScoreKind::Nob, ordering, 7))
        });
    }
}

fn evaluation(c: &mut Criterion) {
    let scored: Vec<(f64, bool)> = (0..10_000).map(|i| (unit(i, 11.0), unit(i, 12.0) < 0.6)).collect();
    c.bench_function("average_precision 10k", |bench| {
        bench.iter(|| average_precision(black_box(&scored), 7000, 40))
    });
}

criterion_group!(benches, geometry, matching, ranking, evaluation);
criterion_main!(benches);
