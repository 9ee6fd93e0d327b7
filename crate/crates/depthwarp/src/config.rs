//! Pipeline configuration and the small value types the CLI parses.

use std::fmt;
use std::str::FromStr;

use depthwarp_core::encode::AugmentRanges;
use depthwarp_core::metrics::AlignmentMode;
use depthwarp_core::raster::WarpParams;
use depthwarp_core::{DEFAULT_FAR, DEFAULT_NEAR, DEFAULT_STRETCH_THRESHOLD};
use serde::{Deserialize, Serialize};

/// Frames per clip used for training data.
pub const DEFAULT_FRAMES: usize = 81;
/// Training resolution, height × width.
pub const DEFAULT_RESOLUTION: Resolution = Resolution { height: 576, width: 1024 };
/// Horizontal field of view of generated cameras (artifact default).
pub const DEFAULT_HFOV_DEG: f64 = 60.0;
/// Cameras per synthetic scene.
pub const DEFAULT_CAMERAS: usize = 8;
/// Environment variable holding the default worker count.
pub const THREADS_ENV: &str = "DEPTHWARP_THREADS";

/// Image size written `HEIGHTxWIDTH`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Resolution {
    pub height: usize,
    pub width: usize,
}

impl FromStr for Resolution {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (h, w) = s.split_once(['x', 'X']).ok_or_else(|| format!("expected HEIGHTxWIDTH, got `{s}`"))?;
        let parse = |v: &str| v.trim().parse::<usize>().ok().filter(|&n| n >= 2).ok_or_else(|| format!("bad dimension `{v}` in `{s}`"));
        Ok(Self { height: parse(h)?, width: parse(w)? })
    }
}

impl fmt::Display for Resolution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}", self.height, self.width)
    }
}

/// Comma-separated triple such as `0,0,1.5`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Triple(pub [f64; 3]);

impl FromStr for Triple {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let v: Vec<f64> = s.split(',').map(|p| p.trim().parse::<f64>()).collect::<Result<_, _>>().map_err(|e| format!("`{s}`: {e}"))?;
        match v.as_slice() {
            [x, y, z] if v.iter().all(|c| c.is_finite()) => Ok(Triple([*x, *y, *z])),
            _ => Err(format!("expected three finite numbers x,y,z, got `{s}`")),
        }
    }
}

/// Comma-separated closed interval such as `0.8,1.25`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval(pub [f64; 2]);

impl FromStr for Interval {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (a, b) = s.split_once(',').ok_or_else(|| format!("expected lo,hi, got `{s}`"))?;
        let a: f64 = a.trim().parse().map_err(|e| format!("`{s}`: {e}"))?;
        let b: f64 = b.trim().parse().map_err(|e| format!("`{s}`: {e}"))?;
        if !(a.is_finite() && b.is_finite() && a <= b) {
            return Err(format!("need finite lo <= hi, got `{s}`"));
        }
        Ok(Interval([a, b]))
    }
}

/// How the source's metric depth is obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum AlignMode {
    /// Fit scale and shift of the relative depth against the metric depth and
    /// warp the aligned relative depth.
    Fit,
    /// Warp the metric depth as is.
    None,
}

/// Metric-side camera alignment, mirrored for the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum MetricsAlign {
    None,
    Sim7,
}

impl From<MetricsAlign> for AlignmentMode {
    fn from(m: MetricsAlign) -> Self {
        match m {
            MetricsAlign::None => AlignmentMode::None,
            MetricsAlign::Sim7 => AlignmentMode::Sim7,
        }
    }
}

/// Everything that determines pipeline outputs. The worker count is not part
/// of it: outputs do not depend on it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub near: f64,
    pub far: f64,
    pub stretch_threshold: f64,
    pub frames: usize,
    pub resolution: Resolution,
    pub seed: u64,
    pub augment: bool,
    pub augment_ranges: AugmentRanges,
    pub align_mode: AlignMode,
    pub metrics_alignment: AlignmentMode,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            near: DEFAULT_NEAR,
            far: DEFAULT_FAR,
            stretch_threshold: DEFAULT_STRETCH_THRESHOLD,
            frames: DEFAULT_FRAMES,
            resolution: DEFAULT_RESOLUTION,
            seed: 0,
            augment: false,
            augment_ranges: AugmentRanges::default(),
            align_mode: AlignMode::Fit,
            metrics_alignment: AlignmentMode::None,
        }
    }
}

impl PipelineConfig {
    pub fn warp_params(&self) -> WarpParams {
        WarpParams { stretch_threshold: self.stretch_threshold, near: self.near, far: self.far }
    }

    pub fn hash(&self) -> String {
        crate::manifest::config_hash(self)
    }
}
