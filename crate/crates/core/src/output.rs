//! Run directory artifacts.
//!
//! | file | content |
//! |---|---|
//! | `cycles.csv` | one row per cycle: fractions, APs, selection counts, labeled instances |
//! | `eval.csv` | `cycle_index,labeled_fraction,ap_car,ap_pedestrian,ap_cyclist,map` |
//! | `selected_<k>.txt` | frame ids chosen in cycle `k` |
//! | `inconsistency_<k>.csv` | every score computed for cycle `k` |
//! | `detector.state` | final simulator state blob |
//! | `run.log` | plain-text summary, including the number of scoring passes |
//!
//! Numbers use fixed precision and rows are written in a fixed order, so two
//! runs with the same inputs produce identical bytes. Undefined APs are left
//! empty.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::cycle::{CycleRecord, RunOutcome};
use crate::error::{Error, Result};
use crate::evaluation::EvalSummary;
use crate::inconsistency::records_to_csv;
use crate::kitti::{format_split_index, ObjectClass};

pub const CYCLES_CSV: &str = "cycles.csv";
pub const EVAL_CSV: &str = "eval.csv";
pub const RUN_LOG: &str = "run.log";
pub const DETECTOR_STATE: &str = "detector.state";

pub const EVAL_CSV_HEADER: &str = "cycle_index,labeled_fraction,ap_car,ap_pedestrian,ap_cyclist,map";

const REPORTED: [ObjectClass; 3] = [ObjectClass::Car, ObjectClass::Pedestrian, ObjectClass::Cyclist];

/// Classes whose labeled instances are counted in `cycles.csv`.
pub const COUNTED_CLASSES: [ObjectClass; 8] = [
    ObjectClass::Car,
    ObjectClass::Van,
    ObjectClass::Truck,
    ObjectClass::Pedestrian,
    ObjectClass::PersonSitting,
    ObjectClass::Cyclist,
    ObjectClass::Tram,
    ObjectClass::Misc,
];

pub fn selected_file(cycle: usize) -> String {
    format!("selected_{cycle}.txt")
}

pub fn inconsistency_file(cycle: usize) -> String {
    format!("inconsistency_{cycle}.csv")
}

fn fmt4(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.4}")).unwrap_or_default()
}

fn eval_cells(eval: Option<&EvalSummary>) -> String {
    let mut s = String::new();
    for c in REPORTED {
        s.push_str(&fmt4(eval.and_then(|e| e.ap_of(c))));
        s.push(',');
    }
    s.push_str(&fmt4(eval.map(|e| e.map)));
    s
}

pub fn cycles_csv_header() -> String {
    let mut h = String::from(
        "cycle_index,labeled_fraction,ap_car,ap_pedestrian,ap_cyclist,map,n_inconsistent_selected,n_consistent_fill",
    );
    for c in COUNTED_CLASSES {
        let _ = write!(h, ",n_{}", c.as_str().to_ascii_lowercase());
    }
    h
}

pub fn cycles_csv(history: &[CycleRecord]) -> String {
    let mut out = cycles_csv_header();
    out.push('\n');
    for r in history {
        let _ = write!(
            out,
            "{},{:.4},{},{},{}",
            r.cycle_index,
            r.labeled_fraction,
            eval_cells(r.eval.as_ref()),
            r.n_inconsistent_selected,
            r.n_consistent_fill
        );
        for c in COUNTED_CLASSES {
            let _ = write!(out, ",{}", r.class_instance_counts.get(&c).copied().unwrap_or(0));
        }
        out.push('\n');
    }
    out
}

pub fn eval_csv(history: &[CycleRecord]) -> String {
    let mut out = String::from(EVAL_CSV_HEADER);
    out.push('\n');
    for r in history {
        let _ = writeln!(
            out,
            "{},{:.4},{}",
            r.cycle_index,
            r.labeled_fraction,
            eval_cells(r.eval.as_ref())
        );
    }
    out
}

pub fn run_log<M>(outcome: &RunOutcome<M>, n_total: usize) -> String {
    let mut log = String::new();
    let _ = writeln!(log, "frames {n_total}");
    let _ = writeln!(log, "initial labeled {}", outcome.initial_labeled.len());
    let _ = writeln!(log, "initial map {:.4}", outcome.initial_eval.map);
    for r in &outcome.history {
        let _ = writeln!(
            log,
            "cycle {} selected {} inconsistent {} labeled {} map {}",
            r.cycle_index,
            r.selected_ids.len(),
            r.n_inconsistent_selected,
            r.labeled_count,
            fmt4(r.eval.as_ref().map(|e| e.map))
        );
    }
    let _ = writeln!(log, "scoring passes {}", outcome.scoring_passes);
    log
}

fn write(dir: &Path, name: &str, bytes: &[u8]) -> Result<()> {
    let p = dir.join(name);
    fs::write(&p, bytes).map_err(|e| Error::io(&p, e))
}

/// Writes every artifact of a finished run into `dir` (created if needed).
pub fn write_run<M>(
    dir: &Path,
    outcome: &RunOutcome<M>,
    n_total: usize,
    detector_state: Option<&[u8]>,
) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    write(dir, CYCLES_CSV, cycles_csv(&outcome.history).as_bytes())?;
    write(dir, EVAL_CSV, eval_csv(&outcome.history).as_bytes())?;
    write(dir, &selected_file(0), format_split_index(&outcome.initial_labeled).as_bytes())?;
    for r in &outcome.history {
        write(dir, &selected_file(r.cycle_index), format_split_index(&r.selected_ids).as_bytes())?;
    }
    for (cycle, records) in &outcome.score_dumps {
        write(dir, &inconsistency_file(*cycle), records_to_csv(records).as_bytes())?;
    }
    if let Some(state) = detector_state {
        write(dir, DETECTOR_STATE, state)?;
    }
    write(dir, RUN_LOG, run_log(outcome, n_total).as_bytes())
}
