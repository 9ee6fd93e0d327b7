//! The pipeline stages as file-to-file operations driven by manifests.
//!
//! Each stage processes frames in parallel on the current rayon pool and
//! writes every frame file from the worker that produced it. Frame files are
//! pure functions of their inputs, so outputs do not depend on the number of
//! workers or their scheduling.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, ensure, Context, Result};
use depthwarp_core::align::{apply_alignment, fit_scale_shift, AlignmentResult};
use depthwarp_core::encode::{colorize, depth_range, AugmentParams, AugmentRanges, ColormapLut, LogNormalizer, UNCOVERED_VALUE};
use depthwarp_core::mesh::MeshError;
use depthwarp_core::metrics::{evaluate, AlignmentMode, CameraAccuracyReport};
use depthwarp_core::raster::WarpParams;
use depthwarp_core::synth::SceneSpec;
use depthwarp_core::trajectory::{derive_seed, sample_trajectory_set, TrajectoryRanges, TrajectorySpec};
use depthwarp_core::{build_mesh, render, rng, DepthFrame, Intrinsics, RgbFrame, WarpMesh};
use nalgebra::Vector3;
use rayon::prelude::*;
use serde::Serialize;

use crate::cameras::{read_cameras, write_cameras, CameraTrack};
use crate::config::Resolution;
use crate::manifest::{
    base_dir, input_ref, manifest_path, relative_path, resolve, save_manifest, save_pairs, validate_manifest, write_json, Manifest, ManifestKind, PairEntry,
    PairsManifest, Provenance, MANIFEST_FILE,
};
use crate::{obj, pfm, png_io};

/// File name of frame `i`.
pub fn frame_name(i: usize, ext: &str) -> String {
    format!("{i:05}.{ext}")
}

fn create_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).with_context(|| format!("creating {}", path.display()))
}

/// Which depth stream of a manifest to read.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DepthStream {
    Depth,
    /// The relative depth stream when present, the depth stream otherwise.
    RelativeOrDepth,
}

/// Validated manifest plus the resolved paths of one of its depth streams.
pub struct DepthInput {
    pub path: PathBuf,
    pub manifest: Manifest,
    pub files: Vec<PathBuf>,
}

impl DepthInput {
    pub fn open(arg: &Path, stream: DepthStream) -> Result<Self> {
        let path = manifest_path(arg);
        let manifest = validate_manifest(&path)?;
        let base = base_dir(&path);
        let rel = match stream {
            DepthStream::RelativeOrDepth if !manifest.streams.relative_depth.is_empty() => &manifest.streams.relative_depth,
            _ => &manifest.streams.depth,
        };
        if rel.is_empty() {
            bail!("{}: manifest has no depth stream", path.display());
        }
        let files = rel.iter().map(|f| resolve(&base, f)).collect();
        Ok(Self { path, manifest, files })
    }

    pub fn read_all(&self) -> Result<Vec<DepthFrame>> {
        self.files.par_iter().map(|f| Ok(pfm::read_depth_pfm(f)?)).collect()
    }

    /// Camera file listed by the manifest.
    pub fn cameras(&self) -> Option<PathBuf> {
        self.manifest.cameras.as_ref().map(|c| resolve(&base_dir(&self.path), c))
    }
}

/// Fits `1/X ≈ s/D + b` between a relative and a metric depth manifest.
pub fn align_sequences(relative: &Path, metric: &Path) -> Result<AlignmentResult> {
    let rel = DepthInput::open(relative, DepthStream::RelativeOrDepth)?;
    let met = DepthInput::open(metric, DepthStream::Depth)?;
    let (r, m) = (rel.read_all()?, met.read_all()?);
    Ok(fit_scale_shift(&r, &m)?)
}

/// Applies `alignment` to a depth stream of `relative` and writes the result
/// as an aligned depth sequence with its own manifest.
pub fn write_aligned(relative: &Path, stream: DepthStream, alignment: &AlignmentResult, out_dir: &Path, mut provenance: Provenance) -> Result<PathBuf> {
    let rel = DepthInput::open(relative, stream)?;
    create_dir(&out_dir.join("depth"))?;
    rel.files.par_iter().enumerate().try_for_each(|(i, f)| -> Result<()> {
        let aligned = apply_alignment(&pfm::read_depth_pfm(f)?, alignment);
        pfm::write_depth_pfm(&aligned, &out_dir.join("depth").join(frame_name(i, "pfm")))?;
        Ok(())
    })?;
    let m = &rel.manifest;
    let mut out = Manifest::new(ManifestKind::Aligned, m.frame_count, m.width, m.height, Provenance::default());
    out.streams.depth = (0..m.frame_count).map(|i| format!("depth/{}", frame_name(i, "pfm"))).collect();
    if let Some(cams) = rel.cameras() {
        write_cameras(&read_cameras(&cams)?, &out_dir.join("cams.json"))?;
        out.cameras = Some("cams.json".into());
    }
    provenance.alignment = Some(*alignment);
    provenance.inputs.push(input_ref("relative", &rel.path, out_dir)?);
    out.provenance = provenance;
    let path = out_dir.join(MANIFEST_FILE);
    save_manifest(&out, &path)?;
    Ok(path)
}

/// Per-sequence numbers reported by the warp stage.
#[derive(Debug, Clone, Serialize)]
pub struct WarpSummary {
    pub frames: usize,
    /// Mean fraction of pixels with warped depth.
    pub covered: f64,
    /// Mean fraction of pixels with mask = 1.
    pub observed: f64,
    pub manifest: PathBuf,
}

fn check_tracks(src: &CameraTrack, tgt: &CameraTrack, m: &Manifest) -> Result<Intrinsics> {
    ensure!(src.intrinsics == tgt.intrinsics, "source and target cameras have different intrinsics");
    let k = src.intrinsics;
    ensure!((k.width, k.height) == (m.width, m.height), "camera resolution {}x{} differs from depth resolution {}x{}", k.width, k.height, m.width, m.height);
    ensure!(
        src.len() == m.frame_count && tgt.len() == m.frame_count,
        "frame counts differ: {} depth frames, {} source cameras, {} target cameras",
        m.frame_count,
        src.len(),
        tgt.len()
    );
    Ok(k)
}

/// Warps every depth frame of `depth` from the source to the target
/// trajectory. Writes `depth/`, `mask/`, `cams.json` (the target trajectory)
/// and the manifest; with `obj_dir`, also one OBJ mesh per frame.
pub fn warp_stage(
    depth: &Path,
    cams_src: &Path,
    cams_tgt: &Path,
    out_dir: &Path,
    params: &WarpParams,
    obj_dir: Option<&Path>,
    mut provenance: Provenance,
) -> Result<WarpSummary> {
    let input = DepthInput::open(depth, DepthStream::Depth)?;
    let src = read_cameras(cams_src)?;
    let tgt = read_cameras(cams_tgt)?;
    let k = check_tracks(&src, &tgt, &input.manifest)?;
    create_dir(&out_dir.join("depth"))?;
    create_dir(&out_dir.join("mask"))?;
    if let Some(d) = obj_dir {
        create_dir(d)?;
    }
    let counts: Vec<(usize, usize)> = input
        .files
        .par_iter()
        .enumerate()
        .map(|(i, f)| -> Result<(usize, usize)> {
            let d = pfm::read_depth_pfm(f)?;
            let mesh = match build_mesh(&d, &k, &src.poses[i], params.stretch_threshold, i) {
                Ok(m) => m,
                Err(MeshError::EmptyMesh) => WarpMesh::empty(i),
                Err(e) => return Err(e).with_context(|| format!("frame {i}")),
            };
            if let Some(dir) = obj_dir {
                obj::write_obj(&mesh, &dir.join(frame_name(i, "obj")))?;
            }
            let out = render(&mesh, &k, &tgt.poses[i], params.near, params.far).with_context(|| format!("frame {i}"))?;
            pfm::write_depth_pfm(&out.depth, &out_dir.join("depth").join(frame_name(i, "pfm")))?;
            png_io::write_mask_png(&out.mask, &out_dir.join("mask").join(frame_name(i, "png")))?;
            Ok((out.depth.valid_count(), out.mask.count_set()))
        })
        .collect::<Result<_>>()?;
    write_cameras(&tgt, &out_dir.join("cams.json"))?;
    let m = &input.manifest;
    let n = m.frame_count;
    let mut out = Manifest::new(ManifestKind::Warp, n, m.width, m.height, Provenance::default());
    out.streams.depth = (0..n).map(|i| format!("depth/{}", frame_name(i, "pfm"))).collect();
    out.streams.mask = (0..n).map(|i| format!("mask/{}", frame_name(i, "png"))).collect();
    out.cameras = Some("cams.json".into());
    provenance.inputs.push(input_ref("depth", &input.path, out_dir)?);
    provenance.inputs.push(input_ref("cams_src", cams_src, out_dir)?);
    provenance.inputs.push(input_ref("cams_tgt", cams_tgt, out_dir)?);
    out.provenance = provenance;
    let path = out_dir.join(MANIFEST_FILE);
    save_manifest(&out, &path)?;
    let px = (n * m.width * m.height).max(1) as f64;
    Ok(WarpSummary {
        frames: n,
        covered: counts.iter().map(|c| c.0).sum::<usize>() as f64 / px,
        observed: counts.iter().map(|c| c.1).sum::<usize>() as f64 / px,
        manifest: path,
    })
}

/// JSON sidecar of an encoded sequence.
#[derive(Debug, Clone, PartialEq, Serialize, serde::Deserialize)]
pub struct EncodeSidecar {
    pub colormap: String,
    pub near: f64,
    pub far: f64,
    pub norm_min: f64,
    pub norm_max: f64,
    /// Normalized value given to pixels without warped depth.
    pub uncovered_value: f64,
    pub augment: Option<AugmentParams>,
    /// Out-of-range values clamped by the colormap, per frame.
    pub clamped: Vec<usize>,
}

/// Frames in the optional contact sheet.
pub const CONTACT_SHEET_FRAMES: usize = 8;

/// Horizontal strip of evenly spaced frames, each downscaled by `step`
/// (nearest sample).
pub fn contact_sheet(frames: &[RgbFrame], step: usize) -> Result<RgbFrame> {
    ensure!(!frames.is_empty(), "no frames for the contact sheet");
    let step = step.max(1);
    let (w, h) = (frames[0].width().div_ceil(step), frames[0].height().div_ceil(step));
    let mut data = vec![0u8; w * frames.len() * h * 3];
    for (j, f) in frames.iter().enumerate() {
        for y in 0..h {
            for x in 0..w {
                let px = f.pixel((y * step) * f.width() + x * step);
                let o = (y * w * frames.len() + j * w + x) * 3;
                data[o..o + 3].copy_from_slice(&px);
            }
        }
    }
    Ok(RgbFrame::new(w * frames.len(), h, data)?)
}

#[derive(Debug, Clone, Serialize)]
pub struct EncodeSummary {
    pub frames: usize,
    pub sidecar: EncodeSidecar,
    pub manifest: PathBuf,
}

/// Augments (optionally), log-normalizes and colorizes a warped depth
/// sequence. The mask manifest is checked against the depth and referenced
/// from the output manifest next to the encoded frames.
#[allow(clippy::too_many_arguments)]
pub fn encode_stage(
    depth: &Path,
    mask: &Path,
    out_dir: &Path,
    near: f64,
    far: f64,
    augment: Option<(u64, AugmentRanges)>,
    with_contact_sheet: bool,
    mut provenance: Provenance,
) -> Result<EncodeSummary> {
    let input = DepthInput::open(depth, DepthStream::Depth)?;
    let mask_path = manifest_path(mask);
    let mask_manifest = validate_manifest(&mask_path)?;
    let m = &input.manifest;
    ensure!(!mask_manifest.streams.mask.is_empty(), "{}: manifest has no mask stream", mask_path.display());
    ensure!(
        (mask_manifest.frame_count, mask_manifest.width, mask_manifest.height) == (m.frame_count, m.width, m.height),
        "mask sequence {}x{}x{} does not match depth sequence {}x{}x{}",
        mask_manifest.frame_count,
        mask_manifest.width,
        mask_manifest.height,
        m.frame_count,
        m.width,
        m.height
    );
    ensure!(m.frame_count > 0, "empty depth sequence");

    // pass 1: raw depth range. The augmentation is increasing, so the range of
    // the augmented sequence is the augmented range.
    let ranges: Vec<(f64, f64)> = input.files.par_iter().map(|f| Ok(depth_range(&pfm::read_depth_pfm(f)?))).collect::<Result<_>>()?;
    let (lo, hi) = ranges.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &(c, d)| (a.min(c), b.max(d)));
    let params = match augment {
        Some((seed, r)) => Some(AugmentParams::draw(seed, lo, &r)?),
        None => None,
    };
    let (lo, hi) = match (&params, lo <= hi) {
        (Some(p), true) => (p.apply_depth(lo), p.apply_depth(hi)),
        _ => (lo, hi),
    };
    let normalizer = LogNormalizer::from_raw_range(lo, hi, near, far)?;
    let lut = ColormapLut::spectral_r();

    // pass 2: colorize
    create_dir(&out_dir.join("encoded"))?;
    let sheet_every = m.frame_count.div_ceil(CONTACT_SHEET_FRAMES).max(1);
    let results: Vec<(usize, Option<RgbFrame>)> = input
        .files
        .par_iter()
        .enumerate()
        .map(|(i, f)| -> Result<(usize, Option<RgbFrame>)> {
            let mut d = pfm::read_depth_pfm(f)?;
            if let Some(p) = &params {
                d = p.apply(&d);
            }
            let (rgb, clamped) = colorize(&normalizer.normalize_frame(&d), &lut)?;
            png_io::write_rgb_png(&rgb, &out_dir.join("encoded").join(frame_name(i, "png")))?;
            let keep = (with_contact_sheet && i % sheet_every == 0).then_some(rgb);
            Ok((clamped, keep))
        })
        .collect::<Result<_>>()?;

    let n = m.frame_count;
    let sidecar = EncodeSidecar {
        colormap: "spectral_r".into(),
        near,
        far,
        norm_min: normalizer.norm_min,
        norm_max: normalizer.norm_max,
        uncovered_value: UNCOVERED_VALUE,
        augment: params,
        clamped: results.iter().map(|r| r.0).collect(),
    };
    write_json(&out_dir.join("encode.json"), &sidecar)?;
    if with_contact_sheet {
        let picked: Vec<RgbFrame> = results.into_iter().filter_map(|r| r.1).collect();
        let step = (m.width / 256).max(1);
        png_io::write_rgb_png(&contact_sheet(&picked, step)?, &out_dir.join("contact_sheet.png"))?;
        provenance.extra.insert("contact_sheet".into(), serde_json::json!("contact_sheet.png"));
    }

    let mut out = Manifest::new(ManifestKind::Encoded, n, m.width, m.height, Provenance::default());
    out.streams.encoded = (0..n).map(|i| format!("encoded/{}", frame_name(i, "png"))).collect();
    let mask_base = base_dir(&mask_path);
    out.streams.mask = mask_manifest.streams.mask.iter().map(|f| relative_path(&resolve(&mask_base, f), out_dir)).collect();
    out.cameras = input.cameras().map(|c| relative_path(&c, out_dir));
    provenance.augment = params;
    provenance.normalizer = Some(normalizer);
    provenance.inputs.push(input_ref("depth", &input.path, out_dir)?);
    provenance.inputs.push(input_ref("mask", &mask_path, out_dir)?);
    provenance.extra.insert("sidecar".into(), serde_json::json!("encode.json"));
    out.provenance = provenance;
    let path = out_dir.join(MANIFEST_FILE);
    save_manifest(&out, &path)?;
    Ok(EncodeSummary { frames: n, sidecar, manifest: path })
}

/// One sampled trajectory in a `sample-traj` index.
#[derive(Debug, Clone, Serialize, serde::Deserialize)]
pub struct TrajectoryEntry {
    pub file: String,
    pub spec: TrajectorySpec,
}

/// Samples `count` trajectories around `lookat` sharing one start. One
/// trajectory goes to `out`; several go to `<stem>_NN.json`. Either way the
/// generation records go to `<stem>_index.json`.
pub fn sample_traj_stage(
    lookat: [f64; 3],
    frames: usize,
    seed: u64,
    count: usize,
    k: &Intrinsics,
    ranges: &TrajectoryRanges,
    out: &Path,
) -> Result<Vec<PathBuf>> {
    ensure!(count >= 1, "count must be at least 1");
    let set = sample_trajectory_set(&Vector3::from(lookat), frames, seed, count, false, ranges)?;
    let dir = base_dir(out);
    if !dir.as_os_str().is_empty() {
        create_dir(&dir)?;
    }
    let stem = out.file_stem().and_then(|s| s.to_str()).context("output path needs a file name")?.to_string();
    let mut paths = Vec::with_capacity(count);
    let mut index = Vec::with_capacity(count);
    for (j, (spec, poses)) in set.into_iter().enumerate() {
        let path = if count == 1 { out.to_path_buf() } else { dir.join(format!("{stem}_{j:02}.json")) };
        write_cameras(&CameraTrack { intrinsics: *k, poses }, &path)?;
        index.push(TrajectoryEntry { file: relative_path(&path, &dir), spec });
        paths.push(path);
    }
    write_json(&dir.join(format!("{stem}_index.json")), &index)?;
    Ok(paths)
}

pub fn metrics_stage(gt: &Path, est: &Path, mode: AlignmentMode, out: Option<&Path>) -> Result<CameraAccuracyReport> {
    let g = read_cameras(gt)?;
    let e = read_cameras(est)?;
    let report = evaluate(&g.poses, &e.poses, mode)?;
    if let Some(p) = out {
        write_json(p, &report)?;
    }
    Ok(report)
}

/// Synthetic dataset settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SynthOptions {
    pub scenes: usize,
    pub cams: usize,
    pub frames: usize,
    pub resolution: Resolution,
    pub hfov_deg: f64,
    pub seed: u64,
}

/// Known inverse-depth affine map used to derive the source camera's
/// relative depth from its exact depth: `1/D = (1/X − b) / s`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, serde::Deserialize)]
pub struct RelativeDepthTruth {
    pub s: f64,
    pub b: f64,
}

impl RelativeDepthTruth {
    pub fn draw(scene_seed: u64) -> Self {
        let mut r = rng::stream(scene_seed, 0x4E1);
        Self { s: rng::uniform(&mut r, 0.5, 2.0), b: rng::uniform(&mut r, -0.02, 0.01) }
    }

    pub fn relative(&self, metric: &DepthFrame) -> DepthFrame {
        let v = (0..metric.len())
            .map(|i| match metric.depth(i) {
                Some(x) => {
                    let inv = (1.0 / x - self.b) / self.s;
                    if inv > 0.0 {
                        1.0 / inv
                    } else {
                        0.0
                    }
                }
                None => 0.0,
            })
            .collect();
        DepthFrame::from_values(metric.width(), metric.height(), v).expect("same shape as the metric frame")
    }
}

/// Seed of scene `index`.
pub fn scene_seed(seed: u64, index: usize) -> u64 {
    derive_seed(seed ^ 0x5CE7_E000, index as u64)
}

/// Renders `scenes` random scenes, each seen by `cams` cameras sharing one
/// start; camera 0 holds still and is the source of every pair. Returns the
/// per-scene pairs manifests.
pub fn synth_stage(opts: &SynthOptions, out: &Path, mut on_scene: impl FnMut(usize, &Path)) -> Result<Vec<PathBuf>> {
    ensure!(opts.cams >= 2, "need at least 2 cameras");
    ensure!(opts.frames >= 2, "need at least 2 frames");
    let k = Intrinsics::from_horizontal_fov(opts.resolution.width, opts.resolution.height, opts.hfov_deg)?;
    let ranges = TrajectoryRanges::default();
    let mut pairs_paths = Vec::with_capacity(opts.scenes);
    for s in 0..opts.scenes {
        let seed = scene_seed(opts.seed, s);
        let scene_dir = out.join(format!("scene_{s:04}"));
        create_dir(&scene_dir)?;
        let spec = SceneSpec::random(seed, opts.frames);
        write_json(&scene_dir.join("scene.json"), &spec)?;
        let set = sample_trajectory_set(&spec.lookat(), opts.frames, seed, opts.cams, true, &ranges)?;
        let truth = RelativeDepthTruth::draw(seed);
        let mut manifests = Vec::with_capacity(opts.cams);
        for (c, (traj, poses)) in set.into_iter().enumerate() {
            let cam_dir = scene_dir.join(format!("cam_{c:02}"));
            let source = c == 0;
            for sub in ["rgb", "depth"].into_iter().chain(source.then_some("relative")) {
                create_dir(&cam_dir.join(sub))?;
            }
            poses.par_iter().enumerate().try_for_each(|(t, pose)| -> Result<()> {
                let (rgb, depth) = spec.render_view(t, pose, &k)?;
                png_io::write_rgb_png(&rgb, &cam_dir.join("rgb").join(frame_name(t, "png")))?;
                pfm::write_depth_pfm(&depth, &cam_dir.join("depth").join(frame_name(t, "pfm")))?;
                if source {
                    pfm::write_depth_pfm(&truth.relative(&depth), &cam_dir.join("relative").join(frame_name(t, "pfm")))?;
                }
                Ok(())
            })?;
            write_cameras(&CameraTrack { intrinsics: k, poses }, &cam_dir.join("cams.json"))?;
            write_json(&cam_dir.join("trajectory.json"), &traj)?;
            let n = opts.frames;
            let mut prov = Provenance::new("synth");
            prov.seed = Some(seed);
            prov.extra.insert("camera".into(), serde_json::json!(c));
            prov.extra.insert("scene".into(), serde_json::json!("../scene.json"));
            prov.extra.insert("trajectory".into(), serde_json::json!("trajectory.json"));
            let mut m = Manifest::new(ManifestKind::Capture, n, k.width, k.height, prov);
            m.streams.rgb = (0..n).map(|i| format!("rgb/{}", frame_name(i, "png"))).collect();
            m.streams.depth = (0..n).map(|i| format!("depth/{}", frame_name(i, "pfm"))).collect();
            if source {
                m.streams.relative_depth = (0..n).map(|i| format!("relative/{}", frame_name(i, "pfm"))).collect();
                m.provenance.extra.insert("relative_depth_truth".into(), serde_json::to_value(truth)?);
            }
            m.cameras = Some("cams.json".into());
            save_manifest(&m, &cam_dir.join(MANIFEST_FILE))?;
            manifests.push(format!("cam_{c:02}/{MANIFEST_FILE}"));
        }
        let pairs = (1..opts.cams)
            .map(|t| PairEntry {
                source: 0,
                target: t,
                source_manifest: manifests[0].clone(),
                target_manifest: manifests[t].clone(),
                estimated_cameras: None,
                warp_manifest: None,
                encoded_manifest: None,
                metrics_report: None,
            })
            .collect();
        let mut prov = Provenance::new("synth").with_config(opts);
        prov.seed = Some(seed);
        let path = scene_dir.join("pairs.json");
        save_pairs(&PairsManifest::new(pairs, prov), &path)?;
        on_scene(s, &path);
        pairs_paths.push(path);
    }
    Ok(pairs_paths)
}
