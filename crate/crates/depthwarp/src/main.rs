use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use depthwarp::config::{
    AlignMode, Interval, MetricsAlign, PipelineConfig, Resolution, Triple, DEFAULT_CAMERAS, DEFAULT_FRAMES, DEFAULT_HFOV_DEG, DEFAULT_RESOLUTION, THREADS_ENV,
};
use depthwarp::manifest::{manifest_path, Provenance};
use depthwarp::stages::{self, DepthStream, SynthOptions};
use depthwarp::telemetry::{log, RunReport, Telemetry};
use depthwarp::{resolve_threads, with_pool, write_json, PipelineError};
use depthwarp_core::encode::AugmentRanges;
use depthwarp_core::raster::WarpParams;
use depthwarp_core::trajectory::TrajectoryRanges;
use depthwarp_core::Intrinsics;

/// Depth alignment, depth-mesh warping with occlusion masks, depth encoding,
/// camera trajectories, camera metrics and synthetic multi-camera data.
///
/// Progress goes to stderr as `event=... key=value` lines.
#[derive(Parser)]
#[command(name = "depthwarp", version, about, long_about)]
struct Cli {
    /// Worker threads; 0 uses all available cores.
    #[arg(long, global = true, env = THREADS_ENV, default_value_t = 0)]
    threads: usize,

    /// Write a JSON run summary (status, stage timings, results) here.
    #[arg(long, global = true)]
    report: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit scale and shift in inverse depth between a relative and a metric
    /// depth sequence; writes {s, b, residual, n_pixels}.
    Align(AlignArgs),
    /// Warp a depth sequence from the source cameras to target cameras,
    /// writing depth (PFM) and occlusion masks (PNG, 0/255).
    Warp(WarpArgs),
    /// Log-normalize and colorize a warped depth sequence into RGB PNG frames.
    Encode(EncodeArgs),
    /// Sample look-at camera trajectories around a point.
    SampleTraj(SampleTrajArgs),
    /// Accumulated rotation, translation and pose-matrix errors between two
    /// camera files.
    Metrics(MetricsArgs),
    /// Render procedural multi-camera scenes with exact depth.
    Synth(SynthArgs),
    /// Run align, warp, encode and (when estimated cameras are listed)
    /// metrics over a pairs manifest.
    Pipeline(PipelineArgs),
}

#[derive(Args)]
struct ClipArgs {
    /// Near clip plane in meters (training default).
    #[arg(long, default_value_t = depthwarp_core::DEFAULT_NEAR)]
    near: f64,
    /// Far clip plane in meters (training default).
    #[arg(long, default_value_t = depthwarp_core::DEFAULT_FAR)]
    far: f64,
}

#[derive(Args)]
struct AugmentArgs {
    /// Apply the random depth scale/shift augmentation.
    #[arg(long)]
    augment: bool,
    /// Augmentation scale range lo,hi (artifact default).
    #[arg(long, default_value = "0.8,1.25")]
    aug_scale: Interval,
    /// Augmentation shift range lo,hi in meters (artifact default).
    #[arg(long, default_value = "-0.2,0.2", allow_hyphen_values = true)]
    aug_shift: Interval,
}

impl AugmentArgs {
    fn ranges(&self) -> AugmentRanges {
        AugmentRanges { scale: self.aug_scale.0, shift: self.aug_shift.0 }
    }
}

#[derive(Args)]
struct AlignArgs {
    /// Manifest (or its directory) of the relative depth; its relative_depth
    /// stream is used when present, its depth stream otherwise.
    #[arg(long)]
    relative: PathBuf,
    /// Manifest (or its directory) of the metric depth.
    #[arg(long)]
    metric: PathBuf,
    /// Output alignment JSON.
    #[arg(long)]
    out: PathBuf,
    /// Also write the aligned depth sequence and its manifest to this directory.
    #[arg(long)]
    aligned_out: Option<PathBuf>,
}

#[derive(Args)]
struct WarpArgs {
    /// Depth manifest (or its directory) of the source view.
    #[arg(long)]
    depth: PathBuf,
    /// Source camera file.
    #[arg(long)]
    cams_src: PathBuf,
    /// Target camera file.
    #[arg(long)]
    cams_tgt: PathBuf,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    clip: ClipArgs,
    /// Relative depth spread above which a triangle counts as stretched
    /// (artifact default).
    #[arg(long, default_value_t = depthwarp_core::DEFAULT_STRETCH_THRESHOLD)]
    stretch: f64,
    /// Debug: write each frame's mesh as OBJ into this directory.
    #[arg(long)]
    obj_dump: Option<PathBuf>,
}

#[derive(Args)]
struct EncodeArgs {
    /// Warped depth manifest (or its directory).
    #[arg(long)]
    depth: PathBuf,
    /// Mask manifest (or its directory); usually the same warp output.
    #[arg(long)]
    mask: PathBuf,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    /// Augmentation seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    augment: AugmentArgs,
    #[command(flatten)]
    clip: ClipArgs,
    /// Also write a strip of evenly spaced frames as contact_sheet.png.
    #[arg(long)]
    contact_sheet: bool,
}

#[derive(Args)]
struct SampleTrajArgs {
    /// Look-at point x,y,z in world meters (z up).
    #[arg(long, allow_hyphen_values = true)]
    lookat: Triple,
    /// Frames per trajectory (training default).
    #[arg(long, default_value_t = DEFAULT_FRAMES)]
    frames: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Trajectories sharing one start (training setups use 8 per scene).
    #[arg(long, default_value_t = 1)]
    count: usize,
    /// Image size HEIGHTxWIDTH recorded in the camera file (training default).
    #[arg(long, default_value_t = DEFAULT_RESOLUTION)]
    res: Resolution,
    /// Horizontal field of view in degrees (artifact default).
    #[arg(long, default_value_t = DEFAULT_HFOV_DEG)]
    hfov: f64,
    /// Output camera file; with --count > 1, files are named <stem>_NN.json.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct MetricsArgs {
    /// Ground-truth camera file.
    #[arg(long)]
    gt: PathBuf,
    /// Estimated camera file.
    #[arg(long)]
    est: PathBuf,
    /// Align the estimate to the ground truth with a similarity first.
    #[arg(long, value_enum, default_value_t = MetricsAlign::None)]
    align: MetricsAlign,
    /// Output report JSON.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long, default_value_t = 1)]
    scenes: usize,
    /// Cameras per scene (training default); camera 0 is the static source.
    #[arg(long, default_value_t = DEFAULT_CAMERAS)]
    cams: usize,
    /// Frames per camera (artifact default; training uses 81).
    #[arg(long, default_value_t = 33)]
    frames: usize,
    /// Image size HEIGHTxWIDTH (artifact default; training uses 576x1024).
    #[arg(long, default_value = "256x448")]
    res: Resolution,
    /// Horizontal field of view in degrees (artifact default).
    #[arg(long, default_value_t = DEFAULT_HFOV_DEG)]
    hfov: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct PipelineArgs {
    /// Pairs manifest, e.g. scene_0000/pairs.json from `synth`.
    #[arg(long)]
    input: PathBuf,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    clip: ClipArgs,
    /// Relative depth spread above which a triangle counts as stretched
    /// (artifact default).
    #[arg(long, default_value_t = depthwarp_core::DEFAULT_STRETCH_THRESHOLD)]
    stretch: f64,
    /// Seed of the per-pair augmentation draws.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    augment: AugmentArgs,
    /// Source depth: fit the relative depth to the metric depth, or warp the
    /// metric depth as is.
    #[arg(long, value_enum, default_value_t = AlignMode::Fit)]
    align: AlignMode,
    /// Camera alignment used when scoring estimated cameras.
    #[arg(long, value_enum, default_value_t = MetricsAlign::None)]
    metrics_align: MetricsAlign,
}

/// Failure of a command, labeled with the stage that failed.
struct Failure {
    stage: String,
    error: anyhow::Error,
}

impl Failure {
    fn of(stage: &str) -> impl FnOnce(anyhow::Error) -> Failure + '_ {
        move |error| Failure { stage: stage.to_string(), error }
    }
}

impl From<PipelineError> for Failure {
    fn from(e: PipelineError) -> Self {
        let stage = e.stage.to_string();
        Failure { stage, error: anyhow::Error::new(e) }
    }
}

fn params(clip: &ClipArgs, stretch: f64) -> WarpParams {
    WarpParams { stretch_threshold: stretch, near: clip.near, far: clip.far }
}

fn run(cmd: &Command, tel: &mut Telemetry) -> Result<serde_json::Value, Failure> {
    match cmd {
        Command::Align(a) => {
            let result = tel.stage("align", "", 0, || stages::align_sequences(&a.relative, &a.metric)).map_err(Failure::of("align"))?;
            write_json(&a.out, &result).map_err(|e| Failure::of("align")(e.into()))?;
            if let Some(dir) = &a.aligned_out {
                tel.stage("write_aligned", "", 0, || -> Result<_> {
                    std::fs::create_dir_all(dir)?;
                    stages::write_aligned(&manifest_path(&a.relative), DepthStream::RelativeOrDepth, &result, dir, Provenance::new("align"))
                })
                .map_err(Failure::of("write_aligned"))?;
            }
            Ok(serde_json::to_value(result).unwrap_or_default())
        }
        Command::Warp(a) => {
            let p = params(&a.clip, a.stretch);
            let s = tel
                .stage("warp", "", 0, || -> Result<_> {
                    std::fs::create_dir_all(&a.out)?;
                    let prov =
                        Provenance::new("warp").with_config(&serde_json::json!({"near": p.near, "far": p.far, "stretch_threshold": p.stretch_threshold}));
                    stages::warp_stage(&a.depth, &a.cams_src, &a.cams_tgt, &a.out, &p, a.obj_dump.as_deref(), prov)
                })
                .map_err(Failure::of("warp"))?;
            Ok(serde_json::to_value(s).unwrap_or_default())
        }
        Command::Encode(a) => {
            let augment = a.augment.augment.then(|| (a.seed, a.augment.ranges()));
            let s = tel
                .stage("encode", "", 0, || -> Result<_> {
                    std::fs::create_dir_all(&a.out)?;
                    let mut prov = Provenance::new("encode");
                    prov.seed = augment.map(|x| x.0);
                    stages::encode_stage(&a.depth, &a.mask, &a.out, a.clip.near, a.clip.far, augment, a.contact_sheet, prov)
                })
                .map_err(Failure::of("encode"))?;
            Ok(serde_json::to_value(s).unwrap_or_default())
        }
        Command::SampleTraj(a) => {
            let files = tel
                .stage("sample_traj", "", a.frames, || -> Result<_> {
                    let k = Intrinsics::from_horizontal_fov(a.res.width, a.res.height, a.hfov)?;
                    stages::sample_traj_stage(a.lookat.0, a.frames, a.seed, a.count, &k, &TrajectoryRanges::default(), &a.out)
                })
                .map_err(Failure::of("sample_traj"))?;
            Ok(serde_json::json!({ "files": files }))
        }
        Command::Metrics(a) => {
            let r = tel.stage("metrics", "", 0, || stages::metrics_stage(&a.gt, &a.est, a.align.into(), Some(&a.out))).map_err(Failure::of("metrics"))?;
            Ok(serde_json::to_value(r).unwrap_or_default())
        }
        Command::Synth(a) => {
            let opts = SynthOptions { scenes: a.scenes, cams: a.cams, frames: a.frames, resolution: a.res, hfov_deg: a.hfov, seed: a.seed };
            let files = tel
                .stage("synth", "", a.frames, || {
                    stages::synth_stage(&opts, &a.out, |s, p| log("scene_done", &[("scene", s.to_string()), ("pairs", p.display().to_string())]))
                })
                .map_err(Failure::of("synth"))?;
            Ok(serde_json::json!({ "pairs": files }))
        }
        Command::Pipeline(a) => {
            let config = PipelineConfig {
                near: a.clip.near,
                far: a.clip.far,
                stretch_threshold: a.stretch,
                seed: a.seed,
                augment: a.augment.augment,
                augment_ranges: a.augment.ranges(),
                align_mode: a.align,
                metrics_alignment: a.metrics_align.into(),
                ..PipelineConfig::default()
            };
            let s = depthwarp::run_pipeline(&config, &a.input, &a.out, tel)?;
            Ok(serde_json::to_value(s).unwrap_or_default())
        }
    }
}

fn command_name(cmd: &Command) -> &'static str {
    match cmd {
        Command::Align(_) => "align",
        Command::Warp(_) => "warp",
        Command::Encode(_) => "encode",
        Command::SampleTraj(_) => "sample-traj",
        Command::Metrics(_) => "metrics",
        Command::Synth(_) => "synth",
        Command::Pipeline(_) => "pipeline",
    }
}

fn write_report(path: &Path, report: &RunReport) -> Result<()> {
    report.write(path).with_context(|| format!("writing report {}", path.display()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let threads = resolve_threads(cli.threads);
    let name = command_name(&cli.command);
    log("start", &[("command", name.into()), ("threads", threads.to_string())]);
    let mut tel = Telemetry::new();
    let outcome = match with_pool(threads, || run(&cli.command, &mut tel)) {
        Ok(r) => r,
        Err(e) => Err(Failure { stage: "setup".into(), error: e.into() }),
    };
    let (status, error, failed_stage, summary) = match &outcome {
        Ok(v) => ("ok", None, None, v.clone()),
        Err(f) => ("failed", Some(format!("{:#}", f.error)), Some(f.stage.clone()), serde_json::Value::Null),
    };
    log("done", &[("command", name.into()), ("status", status.into()), ("elapsed_ms", format!("{:.1}", tel.elapsed_ms()))]);
    if let Some(path) = &cli.report {
        let report = RunReport {
            command: name.into(),
            status: status.into(),
            threads,
            elapsed_ms: tel.elapsed_ms(),
            stages: tel.stages.clone(),
            error,
            failed_stage,
            summary,
        };
        if let Err(e) = write_report(path, &report) {
            eprintln!("error: {e:#}");
            return ExitCode::FAILURE;
        }
    }
    match outcome {
        Ok(_) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: stage `{}`: {:#}", f.stage, f.error);
            ExitCode::FAILURE
        }
    }
}
