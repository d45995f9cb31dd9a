//! `lidar-al` command line.
//!
//! Verbs: `split`, `score`, `run`, `report`, and `synth` for a synthetic
//! KITTI-like dataset. Exit codes: 0 success, 1 usage error, 2 data error,
//! 3 internal error.

pub mod report;
pub mod svg;

use std::ffi::OsString;
use std::fmt;
use std::fs::{self, OpenOptions};
use std::io::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use lidar_al::cycle::RankOrder;
use lidar_al::experiment::{run_manifest, score_manifest, split_ids, KITTI_AL_FRAMES, KITTI_TRAIN_FRAMES};
use lidar_al::inconsistency::records_to_csv;
use lidar_al::kitti::{discover_frame_ids, format_split_index, VELODYNE_DIR};
use lidar_al::manifest::{DatasetPaths, RunManifest};
use lidar_al::output::CYCLES_CSV;
use lidar_al::seeding::derive;
use lidar_al::synthetic::{write_scenes, SceneConfig};

pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;
pub const EXIT_INTERNAL: i32 = 3;

pub const LOCK_FILE: &str = ".lidar-al.lock";
pub const SCORES_CSV: &str = "inconsistency.csv";

#[derive(Debug, Parser)]
#[command(name = "lidar-al", version, about = "Mirror-inconsistency active learning for LiDAR detection")]
pub struct Cli {
    /// Run manifest (TOML).
    #[arg(long, global = true)]
    pub manifest: Option<PathBuf>,
    /// Overrides the manifest seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Overwrite existing outputs.
    #[arg(long, global = true)]
    pub force: bool,
    /// More log output (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Split a KITTI-layout dataset into active-learning and test indices.
    Split {
        /// Dataset root; defaults to the manifest's dataset root.
        #[arg(long)]
        dataset: Option<PathBuf>,
        /// Frames in the active-learning split.
        #[arg(long, conflicts_with = "al_fraction")]
        al_count: Option<usize>,
        /// Share of frames in the active-learning split (default 3712/7481).
        #[arg(long)]
        al_fraction: Option<f64>,
    },
    /// Fit on the initial labeled split and score the remaining pool.
    Score,
    /// Run the full active-learning loop.
    Run,
    /// Plot and compare finished runs.
    Report {
        /// Run output directories.
        #[arg(required = true)]
        runs: Vec<PathBuf>,
        /// Run to compare against (defaults to the first run).
        #[arg(long)]
        baseline: Option<PathBuf>,
    },
    /// Write a synthetic KITTI-like dataset with splits and two manifests.
    Synth {
        #[arg(long, default_value_t = 200)]
        frames: usize,
        #[arg(long, default_value_t = 100)]
        test_frames: usize,
    },
}

/// Bad invocation: missing arguments, conflicting paths, locked outputs.
#[derive(Debug)]
pub struct UsageError(pub String);

/// Unusable input data.
#[derive(Debug)]
pub struct DataError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Display for DataError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}
impl std::error::Error for DataError {}

pub fn exit_code(err: &anyhow::Error) -> i32 {
    for cause in err.chain() {
        if cause.is::<UsageError>() {
            return EXIT_USAGE;
        }
        if cause.is::<DataError>() || cause.is::<csv::Error>() {
            return EXIT_DATA;
        }
        if let Some(e) = cause.downcast_ref::<lidar_al::Error>() {
            return if e.is_data_error() { EXIT_DATA } else { EXIT_INTERNAL };
        }
        if cause.is::<std::io::Error>() {
            return EXIT_DATA;
        }
    }
    EXIT_INTERNAL
}

/// Advisory lock on an output directory, released on drop.
pub struct OutputLock {
    path: PathBuf,
}

impl OutputLock {
    pub fn acquire(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        let path = dir.join(LOCK_FILE);
        match OpenOptions::new().write(true).create_new(true).open(&path) {
            Ok(mut f) => {
                let _ = writeln!(f, "{}", std::process::id());
                Ok(Self { path })
            }
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => Err(UsageError(format!(
                "{} is in use by another command (remove {} if it is stale)",
                dir.display(),
                path.display()
            ))
            .into()),
            Err(e) => Err(e).with_context(|| format!("creating {}", path.display())),
        }
    }
}

impl Drop for OutputLock {
    fn drop(&mut self) {
        let _ = fs::remove_file(&self.path);
    }
}

fn refuse_overwrite(path: &Path, force: bool) -> Result<()> {
    if path.exists() && !force {
        return Err(UsageError(format!("{} exists; pass --force to overwrite", path.display())).into());
    }
    Ok(())
}

fn load_manifest(cli: &Cli) -> Result<RunManifest> {
    let path = cli
        .manifest
        .as_ref()
        .ok_or_else(|| UsageError("this command needs --manifest <path>".into()))?;
    let mut m = RunManifest::load(path).with_context(|| format!("reading manifest {}", path.display()))?;
    if let Some(seed) = cli.seed {
        m.seed = seed;
    }
    if let Some(out) = &cli.out {
        m.output_dir = Some(out.clone());
    }
    Ok(m)
}

fn cmd_split(cli: &Cli, dataset: Option<&Path>, al_count: Option<usize>, al_fraction: Option<f64>) -> Result<()> {
    let manifest = match &cli.manifest {
        Some(_) => Some(load_manifest(cli)?),
        None => None,
    };
    let root = dataset
        .map(Path::to_path_buf)
        .or_else(|| manifest.as_ref().map(|m| m.dataset.root.clone()))
        .ok_or_else(|| UsageError("split needs --dataset <root> or --manifest".into()))?;
    if !root.join(VELODYNE_DIR).is_dir() {
        return Err(DataError(format!(
            "no dataset at {}: expected KITTI object layout ({}/, label_2/, calib/); \
             point --dataset at KITTI's training/ folder or create one with `lidar-al synth`",
            root.display(),
            VELODYNE_DIR
        ))
        .into());
    }
    let ids = discover_frame_ids(&root)?;
    let count = match (al_count, al_fraction) {
        (Some(n), _) => n,
        (None, Some(f)) if (0.0..=1.0).contains(&f) => (f * ids.len() as f64).round() as usize,
        (None, Some(f)) => return Err(UsageError(format!("--al-fraction {f} outside [0, 1]")).into()),
        (None, None) => {
            (ids.len() as f64 * KITTI_AL_FRAMES as f64 / KITTI_TRAIN_FRAMES as f64).round() as usize
        }
    };
    let seed = cli.seed.or(manifest.as_ref().map(|m| m.seed)).unwrap_or(0);
    let (al, test) = split_ids(&ids, count, seed).map_err(|e| UsageError(e.to_string()))?;

    let (al_path, test_path) = match &manifest {
        Some(m) => (m.dataset.al_split.clone(), m.dataset.test_split.clone()),
        None => {
            let dir = cli.out.clone().unwrap_or_else(|| PathBuf::from("."));
            (dir.join("al.txt"), dir.join("test.txt"))
        }
    };
    if al_path == test_path {
        return Err(UsageError(format!("both splits would be written to {}", al_path.display())).into());
    }
    refuse_overwrite(&al_path, cli.force)?;
    refuse_overwrite(&test_path, cli.force)?;
    for p in [&al_path, &test_path] {
        if let Some(parent) = p.parent().filter(|p| !p.as_os_str().is_empty()) {
            fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
        }
    }
    fs::write(&al_path, format_split_index(&al)).with_context(|| format!("writing {}", al_path.display()))?;
    fs::write(&test_path, format_split_index(&test))
        .with_context(|| format!("writing {}", test_path.display()))?;
    println!(
        "{} frames: {} -> {}, {} -> {}",
        ids.len(),
        al.len(),
        al_path.display(),
        test.len(),
        test_path.display()
    );
    Ok(())
}

fn cmd_score(cli: &Cli) -> Result<()> {
    let m = load_manifest(cli)?;
    let records = score_manifest(&m)?;
    let csv = records_to_csv(&records);
    match &cli.out {
        None => print!("{csv}"),
        Some(dir) => {
            let _lock = OutputLock::acquire(dir)?;
            let path = dir.join(SCORES_CSV);
            refuse_overwrite(&path, cli.force)?;
            fs::write(&path, csv).with_context(|| format!("writing {}", path.display()))?;
            println!("{} pool frames scored -> {}", records.len(), path.display());
        }
    }
    Ok(())
}

fn cmd_run(cli: &Cli) -> Result<()> {
    let m = load_manifest(cli)?;
    let out = m
        .output_dir
        .clone()
        .ok_or_else(|| UsageError("no output directory: pass --out or set output_dir".into()))?;
    refuse_overwrite(&out.join(CYCLES_CSV), cli.force)?;
    let _lock = OutputLock::acquire(&out)?;
    let outcome = run_manifest(&m, &out)?;
    let last = outcome.history.last().and_then(|r| r.eval.as_ref()).map(|e| e.map);
    println!(
        "{} cycles, {} scoring passes, final mAP {} -> {}",
        outcome.history.len(),
        outcome.scoring_passes,
        last.map(|v| format!("{v:.4}")).unwrap_or_else(|| "n/a".into()),
        out.display()
    );
    Ok(())
}

fn cmd_report(cli: &Cli, runs: &[PathBuf], baseline: Option<&Path>) -> Result<()> {
    let out = cli.out.clone().unwrap_or_else(|| PathBuf::from("report"));
    refuse_overwrite(&out.join(report::SUMMARY_CSV), cli.force)?;
    let _lock = OutputLock::acquire(&out)?;
    let summary = report::report(runs, baseline, &out)?;
    println!("# improvement = mean over cycles of (run mAP - baseline mAP), percentage points");
    print!("{summary}");
    Ok(())
}

fn cmd_synth(cli: &Cli, frames: usize, test_frames: usize) -> Result<()> {
    let out = cli
        .out
        .clone()
        .ok_or_else(|| UsageError("synth needs --out <dir>".into()))?;
    if frames < 2 || test_frames < 1 {
        return Err(UsageError("need at least 2 frames and 1 test frame".into()).into());
    }
    let data = out.join("data");
    refuse_overwrite(&data, cli.force)?;
    let _lock = OutputLock::acquire(&out)?;
    let seed = cli.seed.unwrap_or(0);
    let scene_seed = derive(seed, "synth");
    let al = write_scenes(&data, &SceneConfig { seed: scene_seed, n_frames: frames, ..Default::default() })?;
    let test = write_scenes(
        &data,
        &SceneConfig {
            seed: scene_seed ^ 1,
            n_frames: test_frames,
            first_id: frames,
            ..Default::default()
        },
    )?;
    let ids = |fs: &[lidar_al::Frame]| fs.iter().map(|f| f.frame_id.clone()).collect::<Vec<_>>();
    fs::write(out.join("al.txt"), format_split_index(&ids(&al)))?;
    fs::write(out.join("test.txt"), format_split_index(&ids(&test)))?;

    let mut m = RunManifest::new(DatasetPaths {
        root: "data".into(),
        al_split: "al.txt".into(),
        test_split: "test.txt".into(),
    });
    m.seed = seed;
    m.output_dir = Some("runs/ascending".into());
    fs::write(out.join("ascending.toml"), m.to_toml()?)?;
    m.cycle.ordering = RankOrder::SeededShuffle;
    m.output_dir = Some("runs/baseline".into());
    fs::write(out.join("baseline.toml"), m.to_toml()?)?;
    println!(
        "{} + {} frames -> {}; manifests ascending.toml and baseline.toml",
        al.len(),
        test.len(),
        out.display()
    );
    Ok(())
}

pub fn execute(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Split {
            dataset,
            al_count,
            al_fraction,
        } => cmd_split(cli, dataset.as_deref(), *al_count, *al_fraction),
        Command::Score => cmd_score(cli),
        Command::Run => cmd_run(cli),
        Command::Report { runs, baseline } => cmd_report(cli, runs, baseline.as_deref()),
        Command::Synth { frames, test_frames } => cmd_synth(cli, *frames, *test_frames),
    }
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { 0 };
        }
    };
    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    let _ = env_logger::Builder::new().filter_level(level).try_init();
    match execute(&cli) {
        Ok(()) => 0,
        Err(err) => {
            eprintln!("error: {err:#}");
            exit_code(&err)
        }
    }
}
