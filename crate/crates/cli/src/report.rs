//! Cross-run report: SVG curves and the improvement summary.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use lidar_al::output::{COUNTED_CLASSES, CYCLES_CSV, EVAL_CSV};

use crate::svg::{LineChart, Series, StackedBars};
use crate::DataError;

pub const SUMMARY_CSV: &str = "summary.csv";
pub const PLOTS: [&str; 4] = [
    "ap_per_class.svg",
    "map.svg",
    "class_distribution.svg",
    "inconsistency_proportion.svg",
];

const AP_COLUMNS: [(&str, &str); 3] = [
    ("ap_car", "Car"),
    ("ap_pedestrian", "Pedestrian"),
    ("ap_cyclist", "Cyclist"),
];

#[derive(Debug, Clone, PartialEq)]
pub struct EvalRow {
    pub cycle_index: usize,
    pub labeled_fraction: f64,
    pub ap: [Option<f64>; 3],
    pub map: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CycleRow {
    pub cycle_index: usize,
    pub n_inconsistent_selected: usize,
    pub n_consistent_fill: usize,
    pub counts: BTreeMap<String, usize>,
}

#[derive(Debug, Clone)]
pub struct RunTables {
    pub name: String,
    pub eval: Vec<EvalRow>,
    pub cycles: Vec<CycleRow>,
}

/// A CSV table indexed by column name.
struct Table {
    file: PathBuf,
    columns: BTreeMap<String, usize>,
    rows: Vec<csv::StringRecord>,
}

impl Table {
    fn read(file: PathBuf, required: &[&str]) -> Result<Self> {
        let mut reader = csv::Reader::from_path(&file)
            .map_err(|e| DataError(format!("{}: {e}", file.display())))?;
        let columns: BTreeMap<String, usize> = reader
            .headers()
            .map_err(|e| DataError(format!("{}: {e}", file.display())))?
            .iter()
            .enumerate()
            .map(|(i, h)| (h.to_string(), i))
            .collect();
        for col in required {
            if !columns.contains_key(*col) {
                return Err(DataError(format!("{}: missing column {col}", file.display())).into());
            }
        }
        let rows = reader
            .records()
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| DataError(format!("{}: {e}", file.display())))?;
        Ok(Self { file, columns, rows })
    }

    fn cell<'a>(&self, row: &'a csv::StringRecord, col: &str) -> &'a str {
        row.get(self.columns[col]).unwrap_or("")
    }

    fn parse<T: std::str::FromStr>(&self, row_idx: usize, col: &str) -> Result<T> {
        let raw = self.cell(&self.rows[row_idx], col);
        raw.parse().map_err(|_| {
            DataError(format!(
                "{}: row {}, column {col}: cannot parse {raw:?}",
                self.file.display(),
                row_idx + 2
            ))
            .into()
        })
    }

    fn parse_opt(&self, row_idx: usize, col: &str) -> Result<Option<f64>> {
        if self.cell(&self.rows[row_idx], col).is_empty() {
            Ok(None)
        } else {
            self.parse(row_idx, col).map(Some)
        }
    }
}

pub fn read_run(dir: &Path) -> Result<RunTables> {
    let name = dir
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| dir.display().to_string());

    let mut required = vec!["cycle_index", "labeled_fraction", "map"];
    required.extend(AP_COLUMNS.iter().map(|(c, _)| *c));
    let t = Table::read(dir.join(EVAL_CSV), &required)?;
    let mut eval = Vec::with_capacity(t.rows.len());
    for i in 0..t.rows.len() {
        let mut ap = [None; 3];
        for (k, (col, _)) in AP_COLUMNS.iter().enumerate() {
            ap[k] = t.parse_opt(i, col)?;
        }
        eval.push(EvalRow {
            cycle_index: t.parse(i, "cycle_index")?,
            labeled_fraction: t.parse(i, "labeled_fraction")?,
            ap,
            map: t.parse(i, "map")?,
        });
    }

    let count_cols: Vec<String> = COUNTED_CLASSES
        .iter()
        .map(|c| format!("n_{}", c.as_str().to_ascii_lowercase()))
        .collect();
    let mut required = vec!["cycle_index", "n_inconsistent_selected", "n_consistent_fill"];
    required.extend(count_cols.iter().map(String::as_str));
    let t = Table::read(dir.join(CYCLES_CSV), &required)?;
    let mut cycles = Vec::with_capacity(t.rows.len());
    for i in 0..t.rows.len() {
        let mut counts = BTreeMap::new();
        for col in &count_cols {
            counts.insert(col.clone(), t.parse(i, col)?);
        }
        cycles.push(CycleRow {
            cycle_index: t.parse(i, "cycle_index")?,
            n_inconsistent_selected: t.parse(i, "n_inconsistent_selected")?,
            n_consistent_fill: t.parse(i, "n_consistent_fill")?,
            counts,
        });
    }
    Ok(RunTables { name, eval, cycles })
}

/// Mean over cycles of `strategy mAP - baseline mAP`, in percentage points.
pub fn improvement(strategy: &RunTables, baseline: &RunTables) -> Result<f64> {
    let base: BTreeMap<usize, f64> = baseline.eval.iter().map(|r| (r.cycle_index, r.map)).collect();
    if strategy.eval.len() != base.len() || strategy.eval.is_empty() {
        bail!(DataError(format!(
            "runs {} and {} cover different cycles",
            strategy.name, baseline.name
        )));
    }
    let mut sum = 0.0;
    for r in &strategy.eval {
        let Some(b) = base.get(&r.cycle_index) else {
            bail!(DataError(format!(
                "cycle {} of {} missing from baseline {}",
                r.cycle_index, strategy.name, baseline.name
            )));
        };
        sum += r.map - b;
    }
    Ok(100.0 * sum / strategy.eval.len() as f64)
}

pub fn summary_csv(runs: &[RunTables], baseline: &RunTables) -> Result<String> {
    let mut out = String::from("run,mean_map,improvement_pp_vs_baseline\n");
    for r in runs {
        let mean = r.eval.iter().map(|e| e.map).sum::<f64>() / r.eval.len().max(1) as f64;
        let _ = writeln!(out, "{},{:.4},{:+.2}", r.name, mean, improvement(r, baseline)?);
    }
    Ok(out)
}

pub fn plots(runs: &[RunTables]) -> [(&'static str, String); 4] {
    let mut per_class = Vec::new();
    for r in runs {
        for (k, (_, class)) in AP_COLUMNS.iter().enumerate() {
            per_class.push(Series {
                name: format!("{} {class}", r.name),
                points: r
                    .eval
                    .iter()
                    .filter_map(|e| e.ap[k].map(|ap| (e.labeled_fraction, ap)))
                    .collect(),
            });
        }
    }
    let ap = LineChart {
        title: "AP per class".into(),
        x_label: "labeled fraction".into(),
        y_label: "AP".into(),
        series: per_class,
    };
    let map = LineChart {
        title: "mAP".into(),
        x_label: "labeled fraction".into(),
        y_label: "mAP".into(),
        series: runs
            .iter()
            .map(|r| Series {
                name: r.name.clone(),
                points: r.eval.iter().map(|e| (e.labeled_fraction, e.map)).collect(),
            })
            .collect(),
    };
    let shown = ["n_car", "n_pedestrian", "n_cyclist"];
    let mut bars = Vec::new();
    for r in runs {
        for c in &r.cycles {
            let counts: Vec<f64> = shown.iter().map(|k| c.counts[*k] as f64).collect();
            let total: f64 = counts.iter().sum();
            let shares = counts.iter().map(|n| if total > 0.0 { n / total } else { 0.0 }).collect();
            bars.push((format!("{}/{}", r.name, c.cycle_index), shares));
        }
    }
    let classes = StackedBars {
        title: "Class distribution of the labeled set".into(),
        x_label: "run / cycle".into(),
        bars,
        segment_names: vec!["Car".into(), "Pedestrian".into(), "Cyclist".into()],
    };
    let proportion = LineChart {
        title: "Inconsistent share of each selected chunk".into(),
        x_label: "cycle".into(),
        y_label: "proportion".into(),
        series: runs
            .iter()
            .map(|r| Series {
                name: r.name.clone(),
                points: r
                    .cycles
                    .iter()
                    .map(|c| {
                        let n = c.n_inconsistent_selected + c.n_consistent_fill;
                        let p = if n == 0 { 0.0 } else { c.n_inconsistent_selected as f64 / n as f64 };
                        (c.cycle_index as f64, p)
                    })
                    .collect(),
            })
            .collect(),
    };
    [
        (PLOTS[0], ap.render()),
        (PLOTS[1], map.render()),
        (PLOTS[2], classes.render()),
        (PLOTS[3], proportion.render()),
    ]
}

/// Reads every run, writes plots and `summary.csv` into `out`, and returns
/// the summary text.
pub fn report(dirs: &[PathBuf], baseline: Option<&Path>, out: &Path) -> Result<String> {
    let runs = dirs.iter().map(|d| read_run(d)).collect::<Result<Vec<_>>>()?;
    let baseline = match baseline {
        Some(b) => read_run(b)?,
        None => runs.first().cloned().context("no run directories given")?,
    };
    std::fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let mut all = runs.clone();
    if !all.iter().any(|r| r.name == baseline.name) {
        all.push(baseline.clone());
    }
    for (name, svg) in plots(&all) {
        std::fs::write(out.join(name), svg).with_context(|| format!("writing {name}"))?;
    }
    let summary = summary_csv(&runs, &baseline)?;
    std::fs::write(out.join(SUMMARY_CSV), &summary).context("writing summary")?;
    Ok(summary)
}
