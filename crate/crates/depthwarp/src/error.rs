use std::path::{Path, PathBuf};

use depthwarp_core::FrameError;
use thiserror::Error;

/// Failure reading or writing one file.
#[derive(Debug, Error)]
pub enum FormatError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: malformed file: {reason}")]
    Malformed { path: PathBuf, reason: String },
    #[error("{path}: unsupported format: {what}")]
    Unsupported { path: PathBuf, what: String },
    #[error("{path}: {what} {value} exceeds the supported maximum")]
    DimensionOverflow { path: PathBuf, what: String, value: usize },
    #[error("{path}: expected {expected}-bit samples, found {found}-bit")]
    BitDepth { path: PathBuf, expected: u8, found: u8 },
    #[error("{path}: expected color type {expected}, found {found}")]
    ColorType { path: PathBuf, expected: String, found: String },
    #[error("{path}: mask pixel {index} has value {value}; masks hold only 0 and 255")]
    MaskValue { path: PathBuf, index: usize, value: u8 },
    #[error("{path}: {reason}")]
    Png { path: PathBuf, reason: String },
    #[error("{path}: invalid JSON: {reason}")]
    Json { path: PathBuf, reason: String },
    #[error("{path}: invalid camera file: {reason}")]
    Cameras { path: PathBuf, reason: String },
    #[error(transparent)]
    Frame(#[from] FrameError),
}

impl FormatError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        FormatError::Io { path: path.to_path_buf(), source }
    }
}

/// Manifest that fails to load or does not match the files it lists.
#[derive(Debug, Error)]
pub enum ManifestError {
    #[error("{path}: unknown manifest version `{found}`")]
    UnknownVersion { path: PathBuf, found: String },
    #[error("{path}: expected a `{expected}` manifest, found `{found}`")]
    WrongKind { path: PathBuf, expected: String, found: String },
    #[error("{path}: stream `{stream}` lists {found} files but the manifest declares {expected} frames")]
    CountMismatch { path: PathBuf, stream: String, expected: usize, found: usize },
    #[error("missing file {path}")]
    MissingFile { path: PathBuf },
    #[error("resolution mismatch in {path}: manifest declares {expected_w}x{expected_h}, file is {found_w}x{found_h}")]
    ResolutionMismatch { path: PathBuf, expected_w: usize, expected_h: usize, found_w: usize, found_h: usize },
    #[error("{path}: config hash {recorded} does not match the recorded config ({computed})")]
    ConfigHash { path: PathBuf, recorded: String, computed: String },
    #[error("{path}: {reason}")]
    Invalid { path: PathBuf, reason: String },
    #[error(transparent)]
    Format(#[from] FormatError),
}
