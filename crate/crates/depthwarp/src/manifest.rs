//! JSON manifests: the only way pipeline stages find their inputs.
//!
//! File paths inside a manifest are relative to the manifest's directory and
//! use `/` separators, so a manifest tree can be moved as a whole.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Component, Path, PathBuf};

use depthwarp_core::align::AlignmentResult;
use depthwarp_core::encode::{AugmentParams, LogNormalizer};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::cameras::read_cameras;
use crate::{pfm, png_io, FormatError, ManifestError};

pub const MANIFEST_VERSION: &str = "depthwarp/1";

/// File name stages look for when handed a directory.
pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ManifestKind {
    /// Recorded camera: rgb, depth and optionally relative depth.
    Capture,
    /// Metric depth produced by the alignment stage.
    Aligned,
    /// Warped depth and occlusion masks under a target trajectory.
    Warp,
    /// Colorized depth frames.
    Encoded,
    /// Source/target pair listing.
    Pairs,
}

impl ManifestKind {
    pub fn name(self) -> &'static str {
        match self {
            ManifestKind::Capture => "capture",
            ManifestKind::Aligned => "aligned",
            ManifestKind::Warp => "warp",
            ManifestKind::Encoded => "encoded",
            ManifestKind::Pairs => "pairs",
        }
    }
}

/// Per-stream frame files, one entry per frame.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Streams {
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub rgb: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub depth: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub relative_depth: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub mask: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub encoded: Vec<String>,
}

/// A file this output was derived from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InputRef {
    pub role: String,
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub stage: String,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub config: Option<serde_json::Value>,
    #[serde(default)]
    pub config_hash: Option<String>,
    #[serde(default)]
    pub alignment: Option<AlignmentResult>,
    #[serde(default)]
    pub augment: Option<AugmentParams>,
    #[serde(default)]
    pub normalizer: Option<LogNormalizer>,
    #[serde(default)]
    pub inputs: Vec<InputRef>,
    #[serde(default)]
    pub extra: BTreeMap<String, serde_json::Value>,
}

impl Provenance {
    pub fn new(stage: &str) -> Self {
        Self { stage: stage.to_string(), ..Self::default() }
    }

    /// Records `config` and its hash.
    pub fn with_config<T: Serialize>(mut self, config: &T) -> Self {
        let value = canonical_value(config);
        self.config_hash = Some(hash_value(&value));
        self.config = Some(value);
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub version: String,
    pub kind: ManifestKind,
    pub frame_count: usize,
    pub width: usize,
    pub height: usize,
    pub streams: Streams,
    /// Camera file of the trajectory the frames were seen from.
    #[serde(default)]
    pub cameras: Option<String>,
    pub provenance: Provenance,
}

impl Manifest {
    pub fn new(kind: ManifestKind, frame_count: usize, width: usize, height: usize, provenance: Provenance) -> Self {
        Self { version: MANIFEST_VERSION.to_string(), kind, frame_count, width, height, streams: Streams::default(), cameras: None, provenance }
    }
}

/// Source/target pairs of one scene, or the outputs produced for them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairsManifest {
    pub version: String,
    pub kind: ManifestKind,
    pub pairs: Vec<PairEntry>,
    pub provenance: Provenance,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairEntry {
    pub source: usize,
    pub target: usize,
    /// Capture manifest of the source camera.
    pub source_manifest: String,
    /// Capture manifest of the target camera (its cameras are the target trajectory).
    pub target_manifest: String,
    /// Estimated target cameras to score against the target trajectory.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub estimated_cameras: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub warp_manifest: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub encoded_manifest: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metrics_report: Option<String>,
}

impl PairsManifest {
    pub fn new(pairs: Vec<PairEntry>, provenance: Provenance) -> Self {
        Self { version: MANIFEST_VERSION.to_string(), kind: ManifestKind::Pairs, pairs, provenance }
    }
}

/// Serializes through `serde_json::Value`, whose maps are key-sorted.
pub fn canonical_value<T: Serialize>(value: &T) -> serde_json::Value {
    serde_json::to_value(value).expect("config types serialize to JSON")
}

fn hash_value(value: &serde_json::Value) -> String {
    let bytes = serde_json::to_vec(value).expect("JSON values serialize");
    hex::encode(Sha256::digest(&bytes))
}

/// SHA-256 of the compact, key-sorted JSON form of `config`.
pub fn config_hash<T: Serialize>(config: &T) -> String {
    hash_value(&canonical_value(config))
}

pub fn file_sha256(path: &Path) -> Result<String, FormatError> {
    let bytes = fs::read(path).map_err(|e| FormatError::io(path, e))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

/// Pretty JSON with a trailing newline.
pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<(), FormatError> {
    let mut bytes = serde_json::to_vec_pretty(value).map_err(|e| FormatError::Json { path: path.to_path_buf(), reason: e.to_string() })?;
    bytes.push(b'\n');
    fs::write(path, bytes).map_err(|e| FormatError::io(path, e))
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, FormatError> {
    let text = fs::read_to_string(path).map_err(|e| FormatError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| FormatError::Json { path: path.to_path_buf(), reason: e.to_string() })
}

/// A directory argument stands for the manifest inside it.
pub fn manifest_path(arg: &Path) -> PathBuf {
    if arg.is_dir() {
        arg.join(MANIFEST_FILE)
    } else {
        arg.to_path_buf()
    }
}

/// Directory that relative paths in the manifest at `path` start from.
pub fn base_dir(path: &Path) -> PathBuf {
    path.parent().map(Path::to_path_buf).unwrap_or_default()
}

/// Resolves a manifest-relative path.
pub fn resolve(base: &Path, rel: &str) -> PathBuf {
    base.join(rel)
}

fn absolute(path: &Path) -> PathBuf {
    let abs = if path.is_absolute() { path.to_path_buf() } else { std::env::current_dir().unwrap_or_default().join(path) };
    let mut out = PathBuf::new();
    for c in abs.components() {
        match c {
            Component::ParentDir => {
                out.pop();
            }
            Component::CurDir => {}
            other => out.push(other),
        }
    }
    out
}

/// `target` relative to directory `base`, with `/` separators.
pub fn relative_path(target: &Path, base: &Path) -> String {
    let t = absolute(target);
    let b = absolute(base);
    let tc: Vec<_> = t.components().collect();
    let bc: Vec<_> = b.components().collect();
    let common = tc.iter().zip(&bc).take_while(|(x, y)| x == y).count();
    let mut parts: Vec<String> = vec!["..".to_string(); bc.len() - common];
    parts.extend(tc[common..].iter().map(|c| c.as_os_str().to_string_lossy().into_owned()));
    if parts.is_empty() {
        ".".to_string()
    } else {
        parts.join("/")
    }
}

/// Input reference for `path` as seen from the directory `base`.
pub fn input_ref(role: &str, path: &Path, base: &Path) -> Result<InputRef, FormatError> {
    Ok(InputRef { role: role.to_string(), path: relative_path(path, base), sha256: file_sha256(path)? })
}

fn check_version(path: &Path, version: &str) -> Result<(), ManifestError> {
    if version != MANIFEST_VERSION {
        return Err(ManifestError::UnknownVersion { path: path.to_path_buf(), found: version.to_string() });
    }
    Ok(())
}

pub fn load_manifest(path: &Path) -> Result<Manifest, ManifestError> {
    let value: serde_json::Value = read_json(path)?;
    let version = value.get("version").and_then(|v| v.as_str()).unwrap_or("").to_string();
    check_version(path, &version)?;
    let m: Manifest = serde_json::from_value(value).map_err(|e| FormatError::Json { path: path.to_path_buf(), reason: e.to_string() })?;
    if m.kind == ManifestKind::Pairs {
        return Err(ManifestError::WrongKind { path: path.to_path_buf(), expected: "frame".into(), found: "pairs".into() });
    }
    Ok(m)
}

pub fn save_manifest(manifest: &Manifest, path: &Path) -> Result<(), ManifestError> {
    Ok(write_json(path, manifest)?)
}

pub fn load_pairs(path: &Path) -> Result<PairsManifest, ManifestError> {
    let value: serde_json::Value = read_json(path)?;
    let version = value.get("version").and_then(|v| v.as_str()).unwrap_or("").to_string();
    check_version(path, &version)?;
    let m: PairsManifest = serde_json::from_value(value).map_err(|e| FormatError::Json { path: path.to_path_buf(), reason: e.to_string() })?;
    if m.kind != ManifestKind::Pairs {
        return Err(ManifestError::WrongKind { path: path.to_path_buf(), expected: "pairs".into(), found: m.kind.name().into() });
    }
    Ok(m)
}

pub fn save_pairs(manifest: &PairsManifest, path: &Path) -> Result<(), ManifestError> {
    Ok(write_json(path, manifest)?)
}

#[derive(Clone, Copy)]
enum FileType {
    Pfm,
    Png,
}

fn check_file(path: &Path, kind: FileType, w: usize, h: usize) -> Result<(), ManifestError> {
    if !path.is_file() {
        return Err(ManifestError::MissingFile { path: path.to_path_buf() });
    }
    let (fw, fh) = match kind {
        FileType::Pfm => {
            let hd = pfm::read_header(path)?;
            (hd.width, hd.height)
        }
        FileType::Png => png_io::read_info(path)?,
    };
    if (fw, fh) != (w, h) {
        return Err(ManifestError::ResolutionMismatch { path: path.to_path_buf(), expected_w: w, expected_h: h, found_w: fw, found_h: fh });
    }
    Ok(())
}

fn check_provenance(path: &Path, p: &Provenance) -> Result<(), ManifestError> {
    if let (Some(config), Some(recorded)) = (&p.config, &p.config_hash) {
        let computed = hash_value(config);
        if &computed != recorded {
            return Err(ManifestError::ConfigHash { path: path.to_path_buf(), recorded: recorded.clone(), computed });
        }
    }
    Ok(())
}

/// Loads the manifest at `path` and checks every file it lists: presence,
/// per-stream frame counts, image resolutions and the camera file.
pub fn validate_manifest(path: &Path) -> Result<Manifest, ManifestError> {
    let m = load_manifest(path)?;
    let base = base_dir(path);
    let streams: [(&str, &Vec<String>, FileType); 5] = [
        ("rgb", &m.streams.rgb, FileType::Png),
        ("depth", &m.streams.depth, FileType::Pfm),
        ("relative_depth", &m.streams.relative_depth, FileType::Pfm),
        ("mask", &m.streams.mask, FileType::Png),
        ("encoded", &m.streams.encoded, FileType::Png),
    ];
    if streams.iter().all(|(_, files, _)| files.is_empty()) {
        return Err(ManifestError::Invalid { path: path.to_path_buf(), reason: "no frame streams".into() });
    }
    for (name, files, kind) in streams {
        if files.is_empty() {
            continue;
        }
        if files.len() != m.frame_count {
            return Err(ManifestError::CountMismatch { path: path.to_path_buf(), stream: name.into(), expected: m.frame_count, found: files.len() });
        }
        for f in files {
            check_file(&resolve(&base, f), kind, m.width, m.height)?;
        }
    }
    if let Some(cams) = &m.cameras {
        let cam_path = resolve(&base, cams);
        if !cam_path.is_file() {
            return Err(ManifestError::MissingFile { path: cam_path });
        }
        let track = read_cameras(&cam_path)?;
        if track.len() != m.frame_count {
            return Err(ManifestError::CountMismatch { path: cam_path, stream: "cameras".into(), expected: m.frame_count, found: track.len() });
        }
        let k = track.intrinsics;
        if (k.width, k.height) != (m.width, m.height) {
            return Err(ManifestError::ResolutionMismatch { path: cam_path, expected_w: m.width, expected_h: m.height, found_w: k.width, found_h: k.height });
        }
    }
    check_provenance(path, &m.provenance)?;
    Ok(m)
}

/// Loads a pairs manifest and validates every capture manifest it lists.
pub fn validate_pairs(path: &Path) -> Result<PairsManifest, ManifestError> {
    let m = load_pairs(path)?;
    let base = base_dir(path);
    if m.pairs.is_empty() {
        return Err(ManifestError::Invalid { path: path.to_path_buf(), reason: "no pairs".into() });
    }
    for p in &m.pairs {
        for rel in [&p.source_manifest, &p.target_manifest] {
            let sub = resolve(&base, rel);
            if !sub.is_file() {
                return Err(ManifestError::MissingFile { path: sub });
            }
            validate_manifest(&sub)?;
        }
        if let Some(est) = &p.estimated_cameras {
            let sub = resolve(&base, est);
            if !sub.is_file() {
                return Err(ManifestError::MissingFile { path: sub });
            }
        }
    }
    check_provenance(path, &m.provenance)?;
    Ok(m)
}
