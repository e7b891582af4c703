//! Command-line front end.
//!
//! Subcommands: `evaluate`, `fuse`, `select`, `pipeline`, `synth`, and
//! `report`. Exit codes: 0 success, 1 validation or runtime failure (one
//! diagnostic line on stderr), 2 usage error. `pipeline` chains the
//! stages — ingest, fuse, select, assemble, evaluate — through the same
//! functions the individual subcommands use, so running them by hand with
//! the same config produces the same bytes.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use vosfuse_core::features::extract_features;
use vosfuse_core::fusion::{build_pseudo_labels, FusionMethod, PseudoLabelSet};
use vosfuse_core::mask::VideoSequence;
use vosfuse_core::metrics::evaluate_dataset;
use vosfuse_core::selection::{assemble_final, recommend, Granularity, PerformanceDB};
use vosfuse_core::synth::{generate_sequence, synthesize_predictions, NoiseProfile, SynthConfig};
use vosfuse_core::{MetricConfig, PredictionSet, ScoreTable};

use crate::config::{override_flag, ConfigError, FileConfig};
use crate::dataset::{
    load_ground_truth, load_label_tree, load_prediction_set, save_label_tree,
    write_dir_atomically, DatasetError,
};
use crate::db_file::{read_db, DbFileError};
use crate::png_io::PngIoError;
use crate::report::{
    choice_from_json, choice_to_json, consistency_to_json, mean_fractions, read_json,
    table_to_csv, table_to_json, write_json_atomic, write_text_atomic, ChoiceJson,
    FusionMetaJson, MeanFractionsJson, ReportError, RunReportJson, SummaryJson, TableJson,
    VideoConsistencyJson,
};

/// A failed run: usage errors exit 2, everything else exits 1.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Run(String),
}

macro_rules! run_failure_from {
    ($($ty:ty),* $(,)?) => {$(
        impl From<$ty> for Failure {
            fn from(e: $ty) -> Self {
                Failure::Run(e.to_string())
            }
        }
    )*};
}

run_failure_from!(
    DatasetError,
    PngIoError,
    DbFileError,
    ReportError,
    ConfigError,
    vosfuse_core::fusion::FusionError,
    vosfuse_core::selection::SelectionError,
    vosfuse_core::metrics::MetricsError,
    vosfuse_core::synth::SynthError,
    vosfuse_core::mask::MaskError,
    vosfuse_core::mask::PredictionSetError,
);

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

#[derive(Debug, Parser)]
#[command(
    name = "vosfuse",
    version,
    about = "Evaluate, fuse, and adaptively select video-object-segmentation models"
)]
struct Cli {
    /// Worker threads for per-video parallelism (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// TOML config file; its values override command-line flags.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Score each model's predictions against ground truth.
    Evaluate(EvaluateArgs),
    /// Fuse model predictions into pseudo-labels.
    Fuse(FuseArgs),
    /// Pick the best model per video or frame against pseudo-labels.
    Select(SelectArgs),
    /// Run fuse, select, assemble, and evaluate end to end.
    Pipeline(PipelineArgs),
    /// Generate a seeded synthetic benchmark dataset.
    Synth(SynthArgs),
    /// Recompose the run report from a pipeline output tree.
    Report(ReportArgs),
}

#[derive(Debug, Args)]
struct EvaluateArgs {
    /// Directory holding <model>/<video>/<frame>.png predictions.
    #[arg(long)]
    pred_root: Option<PathBuf>,
    /// Dataset root holding Annotations/<video>/<frame>.png ground truth.
    #[arg(long)]
    gt_root: Option<PathBuf>,
    /// Comma-separated model ids (default: every directory under the root).
    #[arg(long, value_delimiter = ',')]
    models: Option<Vec<String>>,
    /// Output directory for per-model score tables.
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    metric: MetricArgs,
    /// Score table format.
    #[arg(long, value_parser = ["json", "csv", "both"])]
    report_format: Option<String>,
}

#[derive(Debug, Args)]
struct FuseArgs {
    #[arg(long)]
    pred_root: Option<PathBuf>,
    /// Comma-separated model ids (default: every directory under the root).
    #[arg(long, value_delimiter = ',')]
    models: Option<Vec<String>>,
    /// Fusion method.
    #[arg(long, value_parser = ["vote", "avg-bbox", "max-bbox", "pgmr"])]
    method: Option<String>,
    /// Performance database supplying historical weights.
    #[arg(long)]
    db: Option<PathBuf>,
    /// Output directory for the pseudo-label tree.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SelectArgs {
    #[arg(long)]
    pred_root: Option<PathBuf>,
    /// Pseudo-label tree produced by `fuse`.
    #[arg(long)]
    pseudo_root: Option<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    models: Option<Vec<String>>,
    /// Performance database; selection ties break toward its priors.
    #[arg(long)]
    db: Option<PathBuf>,
    /// Selection granularity.
    #[arg(long, value_parser = ["video", "frame"])]
    granularity: Option<String>,
    /// Output directory for the assembled final tree and updated db.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Where to write the model-choice report (default <out>/choice.json).
    #[arg(long)]
    report: Option<PathBuf>,
    #[command(flatten)]
    metric: MetricArgs,
}

#[derive(Debug, Args)]
struct PipelineArgs {
    #[arg(long)]
    pred_root: Option<PathBuf>,
    /// Optional ground truth; when given, the final output is scored.
    #[arg(long)]
    gt_root: Option<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    models: Option<Vec<String>>,
    #[arg(long, value_parser = ["vote", "avg-bbox", "max-bbox", "pgmr"])]
    method: Option<String>,
    #[arg(long, value_parser = ["video", "frame"])]
    granularity: Option<String>,
    /// Performance database to start from.
    #[arg(long)]
    db: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    metric: MetricArgs,
    #[arg(long, value_parser = ["json", "csv", "both"])]
    report_format: Option<String>,
    /// Record per-stage wall-clock timings in the run report.
    #[arg(long)]
    timings: bool,
}

#[derive(Debug, Args)]
struct SynthArgs {
    /// Master seed; every video and model stream derives from it.
    #[arg(long)]
    seed: Option<u64>,
    /// Number of videos.
    #[arg(long)]
    videos: Option<usize>,
    /// Frames per video.
    #[arg(long)]
    frames: Option<usize>,
    /// Frame size as WIDTHxHEIGHT, e.g. 64x64.
    #[arg(long)]
    size: Option<String>,
    /// Output dataset root (gets gt/ and predictions/ subtrees).
    #[arg(long)]
    out: Option<PathBuf>,
    /// JSON file with noise profiles (default: five built-in models).
    #[arg(long)]
    profiles: Option<PathBuf>,
    #[arg(long)]
    objects_min: Option<usize>,
    #[arg(long)]
    objects_max: Option<usize>,
    /// Per-frame probability of starting an occlusion event.
    #[arg(long)]
    occlusion_rate: Option<f64>,
    /// Per-object probability of one disappearance span.
    #[arg(long)]
    disappear_rate: Option<f64>,
}

#[derive(Debug, Args)]
struct ReportArgs {
    /// Pipeline output tree to summarize.
    #[arg(long)]
    out_root: Option<PathBuf>,
    /// Where to write the recomposed run report.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct MetricArgs {
    /// Weight of the region metric in the composite score.
    #[arg(long)]
    j_weight: Option<f64>,
    /// Weight of the boundary-style F metric in the composite score.
    #[arg(long)]
    f_weight: Option<f64>,
    /// Include the annotated first frame in scoring.
    #[arg(long)]
    score_first_frame: bool,
}

/// Parse argv and run; returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    if let Some(jobs) = cli.jobs {
        // A second initialization in the same process is harmless: the
        // pool keeps its first size.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global();
    }
    let file = match cli.config.as_deref().map(FileConfig::load) {
        None => FileConfig::default(),
        Some(Ok(cfg)) => cfg,
        Some(Err(e)) => {
            eprintln!("error: {e}");
            return 1;
        }
    };
    let outcome = match cli.command {
        Command::Evaluate(args) => run_evaluate(args, &file),
        Command::Fuse(args) => run_fuse(args, &file),
        Command::Select(args) => run_select(args, &file),
        Command::Pipeline(args) => run_pipeline(args, &file),
        Command::Synth(args) => run_synth(args, &file),
        Command::Report(args) => run_report(args, &file),
    };
    match outcome {
        Ok(()) => 0,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            2
        }
        Err(Failure::Run(msg)) => {
            eprintln!("error: {msg}");
            1
        }
    }
}

fn require(path: Option<PathBuf>, flag: &str) -> Result<PathBuf, Failure> {
    path.ok_or_else(|| usage(format!("missing required --{flag}")))
}

fn metric_config(metric: &MetricArgs, file: &FileConfig) -> Result<MetricConfig, Failure> {
    let j = override_flag(metric.j_weight, file.j_weight).unwrap_or(0.5);
    let f = override_flag(metric.f_weight, file.f_weight).unwrap_or(0.5);
    let first = file.score_first_frame.unwrap_or(metric.score_first_frame);
    Ok(MetricConfig::new(j, f)?.with_score_first_frame(first))
}

fn parse_method(value: Option<String>, file: &FileConfig) -> Result<FusionMethod, Failure> {
    let name = override_flag(value, file.method.clone()).unwrap_or_else(|| String::from("pgmr"));
    FusionMethod::parse(&name).ok_or_else(|| usage(format!("unknown fusion method {name:?}")))
}

fn parse_granularity(value: Option<String>, file: &FileConfig) -> Result<Granularity, Failure> {
    let name =
        override_flag(value, file.granularity.clone()).unwrap_or_else(|| String::from("video"));
    Granularity::parse(&name).ok_or_else(|| usage(format!("unknown granularity {name:?}")))
}

fn parse_report_format(value: Option<String>, file: &FileConfig) -> Result<String, Failure> {
    let name =
        override_flag(value, file.report_format.clone()).unwrap_or_else(|| String::from("both"));
    match name.as_str() {
        "json" | "csv" | "both" => Ok(name),
        other => Err(usage(format!("unknown report format {other:?}"))),
    }
}

/// Models from flags/config, or every subdirectory of the root.
fn resolve_models(
    models: Option<Vec<String>>,
    file: &FileConfig,
    pred_root: &Path,
) -> Result<Vec<String>, Failure> {
    if let Some(models) = override_flag(models, file.models.clone()) {
        if models.is_empty() {
            return Err(usage("empty --models list"));
        }
        return Ok(models);
    }
    let mut names = Vec::new();
    let entries = std::fs::read_dir(pred_root).map_err(|e| {
        Failure::Run(format!("cannot list {}: {e}", pred_root.display()))
    })?;
    for entry in entries {
        let entry = entry.map_err(|e| Failure::Run(e.to_string()))?;
        if entry.file_type().map(|t| t.is_dir()).unwrap_or(false) {
            names.push(entry.file_name().to_string_lossy().into_owned());
        }
    }
    names.sort();
    if names.is_empty() {
        return Err(Failure::Run(format!(
            "no model directories under {}",
            pred_root.display()
        )));
    }
    Ok(names)
}

fn load_db_opt(path: Option<PathBuf>, file: &FileConfig) -> Result<Option<PerformanceDB>, Failure> {
    match override_flag(path, file.db.clone()) {
        Some(path) => Ok(Some(read_db(&path)?)),
        None => Ok(None),
    }
}

// ---------------------------------------------------------------------
// Stage functions (shared between subcommands and `pipeline`)
// ---------------------------------------------------------------------

/// Fuse predictions and write the pseudo-label tree:
/// `<out>/<video>/<frame>.png`, `<out>/consistency/<video>.json`, and a
/// `fusion.json` stamp with the method and contributing models.
fn fuse_stage(
    preds: &PredictionSet,
    db: Option<&PerformanceDB>,
    method: FusionMethod,
    out: &Path,
) -> Result<PseudoLabelSet, Failure> {
    let pseudo = build_pseudo_labels(preds, db, method)?;
    write_dir_atomically(out, |tmp| -> Result<(), Failure> {
        save_label_tree(tmp, &pseudo.videos)?;
        for (video, fractions) in &pseudo.summaries {
            let names = pseudo.videos[video].frame_names();
            let json = consistency_to_json(video, names, fractions);
            write_json_atomic(&tmp.join("consistency").join(format!("{video}.json")), &json)?;
        }
        let meta = FusionMetaJson {
            method: String::from(method.as_str()),
            models: preds.models().to_vec(),
            db_version: db.map(PerformanceDB::version),
        };
        write_json_atomic(&tmp.join("fusion.json"), &meta)?;
        Ok(())
    })?;
    Ok(pseudo)
}

/// Outputs of the selection stage.
struct SelectOutcome {
    choice_json: ChoiceJson,
    final_videos: BTreeMap<String, VideoSequence>,
    updated_db: PerformanceDB,
}

/// Recommend a model per unit, assemble the final tree, and fold every
/// observed (video, model) score into the performance database.
fn select_stage(
    preds: &PredictionSet,
    pseudo: &PseudoLabelSet,
    db: Option<PerformanceDB>,
    granularity: Granularity,
    cfg: &MetricConfig,
) -> Result<SelectOutcome, Failure> {
    let choice = recommend(preds, pseudo, db.as_ref(), granularity, cfg)?;
    let final_videos = assemble_final(preds, &choice)?;
    let mut updated_db = db.unwrap_or_default();
    for (video, models) in &choice.scores {
        // The annotated first frame stands in for the video's features.
        let features = extract_features(&pseudo.videos[video].frames()[0]);
        for (model, &score) in models {
            updated_db.record(&features, model, score.clamp(0.0, 1.0))?;
        }
    }
    Ok(SelectOutcome {
        choice_json: choice_to_json(&choice),
        final_videos,
        updated_db,
    })
}

/// Score one tree of videos against ground truth and write the table in
/// the requested formats under `dir` with the given file stem.
fn write_score_table(
    table: &ScoreTable,
    dir: &Path,
    stem: &str,
    format: &str,
) -> Result<TableJson, Failure> {
    let json = table_to_json(table);
    if format == "json" || format == "both" {
        write_json_atomic(&dir.join(format!("{stem}.json")), &json)?;
    }
    if format == "csv" || format == "both" {
        write_text_atomic(&dir.join(format!("{stem}.csv")), &table_to_csv(table))?;
    }
    Ok(json)
}

// ---------------------------------------------------------------------
// Subcommands
// ---------------------------------------------------------------------

fn run_evaluate(args: EvaluateArgs, file: &FileConfig) -> Result<(), Failure> {
    let pred_root = require(override_flag(args.pred_root, file.pred_root.clone()), "pred-root")?;
    let gt_root = require(override_flag(args.gt_root, file.gt_root.clone()), "gt-root")?;
    let out = require(override_flag(args.out, file.out.clone()), "out")?;
    let cfg = metric_config(&args.metric, file)?;
    let format = parse_report_format(args.report_format, file)?;
    let models = resolve_models(args.models, file, &pred_root)?;

    let preds = load_prediction_set(&pred_root, &models)?;
    let gt = load_ground_truth(&gt_root)?;

    write_dir_atomically(&out, |tmp| -> Result<(), Failure> {
        let mut summary: BTreeMap<String, SummaryJson> = BTreeMap::new();
        for model in preds.models() {
            let videos = preds.videos_of(model).expect("model is present");
            let table = evaluate_dataset(videos, &gt, &cfg)?;
            let json = write_score_table(&table, tmp, model, &format)?;
            summary.insert(model.clone(), json.global);
        }
        write_json_atomic(&tmp.join("summary.json"), &summary)?;
        Ok(())
    })
}

fn run_fuse(args: FuseArgs, file: &FileConfig) -> Result<(), Failure> {
    let pred_root = require(override_flag(args.pred_root, file.pred_root.clone()), "pred-root")?;
    let out = require(override_flag(args.out, file.out.clone()), "out")?;
    let method = parse_method(args.method, file)?;
    let models = resolve_models(args.models, file, &pred_root)?;
    let db = load_db_opt(args.db, file)?;

    let preds = load_prediction_set(&pred_root, &models)?;
    fuse_stage(&preds, db.as_ref(), method, &out)?;
    Ok(())
}

fn run_select(args: SelectArgs, file: &FileConfig) -> Result<(), Failure> {
    let pred_root = require(override_flag(args.pred_root, file.pred_root.clone()), "pred-root")?;
    let pseudo_root = require(
        override_flag(args.pseudo_root, file.pseudo_root.clone()),
        "pseudo-root",
    )?;
    let out = require(override_flag(args.out, file.out.clone()), "out")?;
    let report_path = override_flag(args.report, file.report.clone())
        .unwrap_or_else(|| out.join("choice.json"));
    let granularity = parse_granularity(args.granularity, file)?;
    let cfg = metric_config(&args.metric, file)?;
    let models = resolve_models(args.models, file, &pred_root)?;
    let db = load_db_opt(args.db, file)?;

    let preds = load_prediction_set(&pred_root, &models)?;
    let pseudo = load_pseudo_tree(&pseudo_root)?;
    let outcome = select_stage(&preds, &pseudo, db, granularity, &cfg)?;

    write_dir_atomically(&out.join("final"), |tmp| -> Result<(), Failure> {
        save_label_tree(tmp, &outcome.final_videos)?;
        Ok(())
    })?;
    crate::db_file::write_db(&out.join("performance_db.json"), &outcome.updated_db)?;
    write_json_atomic(&report_path, &outcome.choice_json)?;
    Ok(())
}

/// Load a pseudo-label tree written by `fuse`, restoring the method stamp
/// when one is present.
fn load_pseudo_tree(root: &Path) -> Result<PseudoLabelSet, Failure> {
    let videos = load_label_tree(root)?;
    let method = match read_json::<FusionMetaJson>(&root.join("fusion.json")) {
        Ok(meta) => FusionMethod::parse(&meta.method).unwrap_or(FusionMethod::Vote),
        Err(_) => FusionMethod::Vote,
    };
    Ok(PseudoLabelSet {
        videos,
        consistency: BTreeMap::new(),
        summaries: BTreeMap::new(),
        method,
    })
}

fn run_pipeline(args: PipelineArgs, file: &FileConfig) -> Result<(), Failure> {
    let started = Instant::now();
    let pred_root = require(override_flag(args.pred_root, file.pred_root.clone()), "pred-root")?;
    let gt_root = override_flag(args.gt_root, file.gt_root.clone());
    let out = require(override_flag(args.out, file.out.clone()), "out")?;
    let method = parse_method(args.method, file)?;
    let granularity = parse_granularity(args.granularity, file)?;
    let cfg = metric_config(&args.metric, file)?;
    let format = parse_report_format(args.report_format, file)?;
    let models = resolve_models(args.models, file, &pred_root)?;
    let timings_wanted = file.timings.unwrap_or(args.timings);
    let db_path = override_flag(args.db, file.db.clone());

    let mut timings: BTreeMap<String, u64> = BTreeMap::new();
    let stamp = |timings: &mut BTreeMap<String, u64>, name: &str, from: Instant| {
        timings.insert(String::from(name), from.elapsed().as_millis() as u64);
    };

    // Ingest.
    let db = match &db_path {
        Some(path) => Some(read_db(path)?),
        None => None,
    };
    let preds = load_prediction_set(&pred_root, &models)?;
    let gt = match &gt_root {
        Some(root) => Some(load_ground_truth(root)?),
        None => None,
    };
    stamp(&mut timings, "ingest", started);

    std::fs::create_dir_all(&out)
        .map_err(|e| Failure::Run(format!("cannot create {}: {e}", out.display())))?;

    // Fuse.
    let fuse_started = Instant::now();
    let pseudo = fuse_stage(&preds, db.as_ref(), method, &out.join("pseudo"))?;
    stamp(&mut timings, "fuse", fuse_started);

    // Select + assemble.
    let select_started = Instant::now();
    let outcome = select_stage(&preds, &pseudo, db, granularity, &cfg)?;
    write_dir_atomically(&out.join("final"), |tmp| -> Result<(), Failure> {
        save_label_tree(tmp, &outcome.final_videos)?;
        Ok(())
    })?;
    crate::db_file::write_db(&out.join("performance_db.json"), &outcome.updated_db)?;
    stamp(&mut timings, "select", select_started);

    // Reports.
    let evaluate_started = Instant::now();
    let config_echo = effective_config_echo(
        &pred_root,
        gt_root.as_deref(),
        &models,
        method,
        granularity,
        &cfg,
        &format,
        db_path.as_deref(),
    );
    write_dir_atomically(&out.join("reports"), |tmp| -> Result<(), Failure> {
        write_json_atomic(&tmp.join("config.json"), &config_echo)?;
        write_json_atomic(&tmp.join("choice.json"), &outcome.choice_json)?;
        if let Some(gt) = &gt {
            let table = evaluate_dataset(&outcome.final_videos, gt, &cfg)?;
            write_score_table(&table, tmp, "final_scores", &format)?;
        }
        Ok(())
    })?;
    if gt.is_some() {
        stamp(&mut timings, "evaluate", evaluate_started);
    }

    // The run report is recomposed from the tree itself, so `report` run
    // later over the same tree produces identical bytes.
    let mut report = compose_run_report(&out)?;
    if timings_wanted {
        report.timings_ms = Some(timings);
    }
    write_json_atomic(&out.join("reports/run.json"), &report)?;
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn effective_config_echo(
    pred_root: &Path,
    gt_root: Option<&Path>,
    models: &[String],
    method: FusionMethod,
    granularity: Granularity,
    cfg: &MetricConfig,
    format: &str,
    db: Option<&Path>,
) -> serde_json::Value {
    serde_json::json!({
        "pred_root": pred_root.to_string_lossy(),
        "gt_root": gt_root.map(|p| p.to_string_lossy().into_owned()),
        "models": models,
        "method": method.as_str(),
        "granularity": granularity.as_str(),
        "j_weight": cfg.j_weight(),
        "f_weight": cfg.f_weight(),
        "score_first_frame": cfg.score_first_frame(),
        "report_format": format,
        "db": db.map(|p| p.to_string_lossy().into_owned()),
    })
}

fn run_synth(args: SynthArgs, file: &FileConfig) -> Result<(), Failure> {
    let out = require(override_flag(args.out, file.out.clone()), "out")?;
    let flag_size = match args.size {
        Some(size) => Some(parse_size(&size)?),
        None => None,
    };
    let defaults = SynthConfig::default();
    let cfg = SynthConfig {
        seed: override_flag(args.seed, file.seed).unwrap_or(0),
        videos: override_flag(args.videos, file.videos).unwrap_or(defaults.videos),
        frames_per_video: override_flag(args.frames, file.frames)
            .unwrap_or(defaults.frames_per_video),
        width: file
            .width
            .or(flag_size.map(|s| s.0))
            .unwrap_or(defaults.width),
        height: file
            .height
            .or(flag_size.map(|s| s.1))
            .unwrap_or(defaults.height),
        objects_min: override_flag(args.objects_min, file.objects_min)
            .unwrap_or(defaults.objects_min),
        objects_max: override_flag(args.objects_max, file.objects_max)
            .unwrap_or(defaults.objects_max),
        shape_kinds: defaults.shape_kinds.clone(),
        occlusion_rate: override_flag(args.occlusion_rate, file.occlusion_rate)
            .unwrap_or(defaults.occlusion_rate),
        disappear_rate: override_flag(args.disappear_rate, file.disappear_rate)
            .unwrap_or(defaults.disappear_rate),
    };

    let profiles = match override_flag(args.profiles, file.profiles.clone()) {
        Some(path) => load_profiles(&path)?,
        None => default_profiles(),
    };

    let gt = generate_sequence(&cfg)?;
    let preds = synthesize_predictions(&gt, &profiles, cfg.seed)?;

    write_dir_atomically(&out, |tmp| -> Result<(), Failure> {
        save_label_tree(&tmp.join("gt/Annotations"), &gt)?;
        for model in preds.models() {
            let videos = preds.videos_of(model).expect("model is present");
            save_label_tree(&tmp.join("predictions").join(model), videos)?;
        }
        write_json_atomic(&tmp.join("profiles.json"), &profiles_to_json(&profiles))?;
        Ok(())
    })
}

fn parse_size(size: &str) -> Result<(u32, u32), Failure> {
    let mut parts = size.split('x');
    let parse = |part: Option<&str>| -> Option<u32> { part?.parse().ok() };
    match (parse(parts.next()), parse(parts.next()), parts.next()) {
        (Some(w), Some(h), None) => Ok((w, h)),
        _ => Err(usage(format!(
            "--size must look like 64x64, got {size:?}"
        ))),
    }
}

/// JSON form of a noise profile list.
#[derive(Debug, serde::Serialize, serde::Deserialize)]
struct ProfileJson {
    model: String,
    boundary_jitter: u32,
    drop_object_prob: f64,
    label_swap_prob: f64,
    translation_sigma: f64,
}

fn profiles_to_json(profiles: &[NoiseProfile]) -> Vec<ProfileJson> {
    profiles
        .iter()
        .map(|p| ProfileJson {
            model: p.model.clone(),
            boundary_jitter: p.boundary_jitter,
            drop_object_prob: p.drop_object_prob,
            label_swap_prob: p.label_swap_prob,
            translation_sigma: p.translation_sigma,
        })
        .collect()
}

fn load_profiles(path: &Path) -> Result<Vec<NoiseProfile>, Failure> {
    let raw: Vec<ProfileJson> = read_json(path)?;
    Ok(raw
        .into_iter()
        .map(|p| NoiseProfile {
            model: p.model,
            boundary_jitter: p.boundary_jitter,
            drop_object_prob: p.drop_object_prob,
            label_swap_prob: p.label_swap_prob,
            translation_sigma: p.translation_sigma,
        })
        .collect())
}

/// Five models with distinct failure modes, so no single one dominates
/// every video.
pub fn default_profiles() -> Vec<NoiseProfile> {
    let profile = |model: &str, jitter: u32, drop: f64, swap: f64, sigma: f64| NoiseProfile {
        model: String::from(model),
        boundary_jitter: jitter,
        drop_object_prob: drop,
        label_swap_prob: swap,
        translation_sigma: sigma,
    };
    vec![
        profile("alpha", 0, 0.00, 0.00, 0.6),
        profile("bravo", 1, 0.00, 0.00, 0.3),
        profile("charlie", 0, 0.06, 0.00, 0.2),
        profile("delta", 1, 0.02, 0.02, 1.2),
        profile("echo", 2, 0.04, 0.01, 2.0),
    ]
}

fn run_report(args: ReportArgs, file: &FileConfig) -> Result<(), Failure> {
    let out_root = require(override_flag(args.out_root, file.out.clone()), "out-root")?;
    let report_path = require(override_flag(args.report, file.report.clone()), "report")?;
    let report = compose_run_report(&out_root)?;
    write_json_atomic(&report_path, &report)?;
    Ok(())
}

/// Build the run report purely from a pipeline output tree.
fn compose_run_report(out_root: &Path) -> Result<RunReportJson, Failure> {
    let reports = out_root.join("reports");
    let config: serde_json::Value = read_json(&reports.join("config.json"))
        .unwrap_or(serde_json::Value::Null);
    let fusion: Option<FusionMetaJson> = read_json(&out_root.join("pseudo/fusion.json")).ok();
    let choice: Option<ChoiceJson> = read_json(&reports.join("choice.json")).ok();
    let final_scores: Option<TableJson> = read_json(&reports.join("final_scores.json")).ok();
    let db_version = read_db(&out_root.join("performance_db.json"))
        .ok()
        .map(|db| db.version());

    let mut consistency: BTreeMap<String, MeanFractionsJson> = BTreeMap::new();
    let consistency_dir = out_root.join("pseudo/consistency");
    if consistency_dir.is_dir() {
        let mut paths: Vec<PathBuf> = std::fs::read_dir(&consistency_dir)
            .map_err(|e| Failure::Run(format!("cannot list {}: {e}", consistency_dir.display())))?
            .filter_map(|entry| entry.ok().map(|e| e.path()))
            .filter(|p| p.extension().and_then(|e| e.to_str()) == Some("json"))
            .collect();
        paths.sort();
        for path in paths {
            let video: VideoConsistencyJson = read_json(&path)?;
            consistency.insert(video.video.clone(), mean_fractions(&video.frames));
        }
    }

    // Validate the choice file decodes to a real granularity.
    if let Some(json) = &choice {
        choice_from_json(json, &reports.join("choice.json"))?;
    }

    let mut stages = vec![
        String::from("ingest"),
        String::from("fuse"),
        String::from("select"),
        String::from("assemble"),
    ];
    if final_scores.is_some() {
        stages.push(String::from("evaluate"));
    }

    Ok(RunReportJson {
        tool_version: String::from(env!("CARGO_PKG_VERSION")),
        config,
        stages,
        fusion,
        consistency,
        choice,
        final_scores,
        db_version,
        timings_ms: None,
    })
}
