//! `align → warp → encode → metrics` over a pairs manifest.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context};
use depthwarp_core::align::AlignmentResult;
use depthwarp_core::trajectory::derive_seed;
use serde::Serialize;

use crate::config::{AlignMode, PipelineConfig};
use crate::manifest::{base_dir, input_ref, relative_path, resolve, save_pairs, validate_pairs, write_json, PairEntry, PairsManifest, Provenance};
use crate::stages::{align_sequences, encode_stage, metrics_stage, warp_stage, write_aligned, DepthInput, DepthStream};
use crate::telemetry::Telemetry;

/// Marker left in the output directory while a run is in progress or after
/// it failed.
pub const PARTIAL_MARKER: &str = ".partial";

/// A pipeline failure and the stage it happened in.
#[derive(Debug)]
pub struct PipelineError {
    pub stage: &'static str,
    pub item: String,
    pub source: anyhow::Error,
}

impl fmt::Display for PipelineError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.item.is_empty() {
            write!(f, "stage `{}` failed: {:#}", self.stage, self.source)
        } else {
            write!(f, "stage `{}` failed ({}): {:#}", self.stage, self.item, self.source)
        }
    }
}

impl std::error::Error for PipelineError {}

#[derive(Debug, Clone, Serialize)]
pub struct PairSummary {
    pub source: usize,
    pub target: usize,
    pub covered: f64,
    pub observed: f64,
    pub norm_min: f64,
    pub norm_max: f64,
    pub rot_err: Option<f64>,
    pub trans_err: Option<f64>,
    pub cam_mc: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct PipelineSummary {
    pub pairs_manifest: PathBuf,
    pub config_hash: String,
    pub alignments: Vec<AlignmentResult>,
    pub pairs: Vec<PairSummary>,
}

fn fail(stage: &'static str, item: impl Into<String>) -> impl FnOnce(anyhow::Error) -> PipelineError {
    let item = item.into();
    move |source| PipelineError { stage, item, source }
}

fn write_marker(out: &Path, text: &str) {
    let _ = fs::write(out.join(PARTIAL_MARKER), text);
}

/// Runs every stage for every pair of the pairs manifest at `input`, writing
/// into `out`:
///
/// - `aligned_NN/`: metric source depth of each distinct source manifest
///   and its `alignment.json`;
/// - `pair_SS_TT/warp/`, `pair_SS_TT/encoded/` and, when the pair lists
///   estimated cameras, `pair_SS_TT/metrics.json`;
/// - `pairs.json`: the pairs with their outputs and the run's provenance.
///
/// On failure the outputs written so far stay in place and `.partial`
/// names the failed stage.
pub fn run_pipeline(config: &PipelineConfig, input: &Path, out: &Path, tel: &mut Telemetry) -> Result<PipelineSummary, PipelineError> {
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display())).map_err(fail("setup", ""))?;
    write_marker(out, "stage=setup status=running\n");
    let result = run_stages(config, input, out, tel);
    match &result {
        Ok(_) => {
            let _ = fs::remove_file(out.join(PARTIAL_MARKER));
        }
        Err(e) => write_marker(out, &format!("stage={}\nitem={}\nerror={:#}\n", e.stage, e.item, e.source)),
    }
    result
}

fn run_stages(config: &PipelineConfig, input: &Path, out: &Path, tel: &mut Telemetry) -> Result<PipelineSummary, PipelineError> {
    let pairs = tel.stage("validate", "", 0, || validate_pairs(input).map_err(anyhow::Error::from)).map_err(fail("validate", ""))?;
    let in_base = base_dir(input);
    let params = config.warp_params();

    // distinct sources in order of first use
    let mut sources: Vec<String> = Vec::new();
    for p in &pairs.pairs {
        if !sources.contains(&p.source_manifest) {
            sources.push(p.source_manifest.clone());
        }
    }
    let mut aligned_manifests = Vec::with_capacity(sources.len());
    let mut alignments = Vec::with_capacity(sources.len());
    for (j, src) in sources.iter().enumerate() {
        let src_path = resolve(&in_base, src);
        let dir = out.join(format!("aligned_{j:02}"));
        let item = format!("source {src}");
        let (alignment, path) = tel
            .stage("align", &item, 0, || -> anyhow::Result<_> {
                fs::create_dir_all(&dir)?;
                let stream_in = DepthInput::open(&src_path, DepthStream::Depth)?;
                let (alignment, stream) = match config.align_mode {
                    AlignMode::Fit => {
                        if stream_in.manifest.streams.relative_depth.is_empty() {
                            bail!("align mode `fit` needs a relative_depth stream in {}", src_path.display());
                        }
                        (align_sequences(&src_path, &src_path)?, DepthStream::RelativeOrDepth)
                    }
                    AlignMode::None => (AlignmentResult::IDENTITY, DepthStream::Depth),
                };
                write_json(&dir.join("alignment.json"), &alignment)?;
                let mut prov = Provenance::new("align").with_config(config);
                prov.extra.insert("align_mode".into(), serde_json::to_value(config.align_mode)?);
                let path = write_aligned(&src_path, stream, &alignment, &dir, prov)?;
                Ok((alignment, path))
            })
            .map_err(fail("align", item))?;
        alignments.push(alignment);
        aligned_manifests.push(path);
    }

    let mut entries = Vec::with_capacity(pairs.pairs.len());
    let mut summaries = Vec::with_capacity(pairs.pairs.len());
    for (index, p) in pairs.pairs.iter().enumerate() {
        let item = format!("pair {}->{}", p.source, p.target);
        let j = sources.iter().position(|s| s == &p.source_manifest).expect("source collected above");
        let aligned = &aligned_manifests[j];
        let pair_dir = out.join(format!("pair_{:02}_{:02}", p.source, p.target));
        let target_manifest = resolve(&in_base, &p.target_manifest);

        let warp_dir = pair_dir.join("warp");
        let warp = tel
            .stage("warp", &item, 0, || -> anyhow::Result<_> {
                let aligned_in = DepthInput::open(aligned, DepthStream::Depth)?;
                let cams_src = aligned_in.cameras().ok_or_else(|| anyhow!("{} lists no cameras", aligned.display()))?;
                let target = DepthInput::open(&target_manifest, DepthStream::Depth)?;
                let cams_tgt = target.cameras().ok_or_else(|| anyhow!("{} lists no cameras", target_manifest.display()))?;
                fs::create_dir_all(&warp_dir)?;
                let mut prov = Provenance::new("warp").with_config(config);
                prov.inputs.push(input_ref("target", &target_manifest, &warp_dir)?);
                warp_stage(aligned, &cams_src, &cams_tgt, &warp_dir, &params, None, prov)
            })
            .map_err(fail("warp", item.clone()))?;

        let enc_dir = pair_dir.join("encoded");
        let augment = config.augment.then(|| (derive_seed(config.seed, index as u64), config.augment_ranges));
        let enc = tel
            .stage("encode", &item, warp.frames, || -> anyhow::Result<_> {
                fs::create_dir_all(&enc_dir)?;
                let mut prov = Provenance::new("encode").with_config(config);
                prov.seed = augment.map(|a| a.0);
                encode_stage(&warp.manifest, &warp.manifest, &enc_dir, config.near, config.far, augment, false, prov)
            })
            .map_err(fail("encode", item.clone()))?;

        let mut metrics = None;
        let mut metrics_report = None;
        if let Some(est) = &p.estimated_cameras {
            let est_path = resolve(&in_base, est);
            let report_path = pair_dir.join("metrics.json");
            let report = tel
                .stage("metrics", &item, warp.frames, || -> anyhow::Result<_> {
                    let target = DepthInput::open(&target_manifest, DepthStream::Depth)?;
                    let gt = target.cameras().ok_or_else(|| anyhow!("{} lists no cameras", target_manifest.display()))?;
                    metrics_stage(&gt, &est_path, config.metrics_alignment, Some(&report_path))
                })
                .map_err(fail("metrics", item.clone()))?;
            metrics_report = Some(relative_path(&report_path, out));
            metrics = Some(report);
        }

        entries.push(PairEntry {
            source: p.source,
            target: p.target,
            source_manifest: relative_path(&resolve(&in_base, &p.source_manifest), out),
            target_manifest: relative_path(&target_manifest, out),
            estimated_cameras: p.estimated_cameras.as_ref().map(|e| relative_path(&resolve(&in_base, e), out)),
            warp_manifest: Some(relative_path(&warp.manifest, out)),
            encoded_manifest: Some(relative_path(&enc.manifest, out)),
            metrics_report,
        });
        summaries.push(PairSummary {
            source: p.source,
            target: p.target,
            covered: warp.covered,
            observed: warp.observed,
            norm_min: enc.sidecar.norm_min,
            norm_max: enc.sidecar.norm_max,
            rot_err: metrics.as_ref().map(|m| m.rot_err),
            trans_err: metrics.as_ref().map(|m| m.trans_err),
            cam_mc: metrics.as_ref().map(|m| m.cam_mc),
        });
    }

    let path = out.join("pairs.json");
    tel.stage("write", "", 0, || -> anyhow::Result<()> {
        let mut prov = Provenance::new("pipeline").with_config(config);
        prov.seed = Some(config.seed);
        prov.inputs.push(input_ref("pairs", input, out)?);
        for (j, a) in aligned_manifests.iter().enumerate() {
            prov.inputs.push(input_ref(&format!("aligned_{j:02}"), a, out)?);
        }
        save_pairs(&PairsManifest::new(entries, prov), &path)?;
        Ok(())
    })
    .map_err(fail("write", ""))?;
    Ok(PipelineSummary { pairs_manifest: path, config_hash: config.hash(), alignments, pairs: summaries })
}
