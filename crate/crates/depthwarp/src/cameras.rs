//! Per-frame camera files: a JSON array with one object per frame.

use std::fs;
use std::path::Path;

use depthwarp_core::geometry::CONVENTION;
use depthwarp_core::{Intrinsics, Pose};
use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::FormatError;

/// One frame of a camera file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CameraRecord {
    pub frame: usize,
    /// Row-major camera-to-world rotation.
    pub rotation: [f64; 9],
    /// Camera center in world meters.
    pub translation: [f64; 3],
    pub intrinsics: Intrinsics,
    pub convention: String,
}

/// A camera trajectory with fixed intrinsics.
#[derive(Debug, Clone, PartialEq)]
pub struct CameraTrack {
    pub intrinsics: Intrinsics,
    pub poses: Vec<Pose>,
}

impl CameraTrack {
    pub fn len(&self) -> usize {
        self.poses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.poses.is_empty()
    }

    pub fn records(&self) -> Vec<CameraRecord> {
        self.poses
            .iter()
            .enumerate()
            .map(|(frame, p)| {
                let r = p.rotation();
                let t = p.translation();
                CameraRecord {
                    frame,
                    rotation: [r[(0, 0)], r[(0, 1)], r[(0, 2)], r[(1, 0)], r[(1, 1)], r[(1, 2)], r[(2, 0)], r[(2, 1)], r[(2, 2)]],
                    translation: [t.x, t.y, t.z],
                    intrinsics: self.intrinsics,
                    convention: CONVENTION.to_string(),
                }
            })
            .collect()
    }

    /// Checks the records and turns them into a track. Frames must be listed
    /// in order starting at 0 and share one set of intrinsics.
    pub fn from_records(path: &Path, records: &[CameraRecord]) -> Result<Self, FormatError> {
        let bad = |reason: String| FormatError::Cameras { path: path.to_path_buf(), reason };
        let first = records.first().ok_or_else(|| bad("no frames".into()))?;
        first.intrinsics.validate().map_err(|e| bad(format!("frame 0: {e}")))?;
        let mut poses = Vec::with_capacity(records.len());
        for (i, rec) in records.iter().enumerate() {
            if rec.frame != i {
                return Err(bad(format!("entry {i} has frame {}, expected {i}", rec.frame)));
            }
            if rec.convention != CONVENTION {
                return Err(bad(format!("frame {i}: convention `{}` is not `{CONVENTION}`", rec.convention)));
            }
            if rec.intrinsics != first.intrinsics {
                return Err(bad(format!("frame {i}: intrinsics differ from frame 0")));
            }
            let pose =
                Pose::new(Matrix3::from_row_slice(&rec.rotation), Vector3::from_row_slice(&rec.translation)).map_err(|e| bad(format!("frame {i}: {e}")))?;
            poses.push(pose);
        }
        Ok(Self { intrinsics: first.intrinsics, poses })
    }
}

pub fn read_cameras(path: &Path) -> Result<CameraTrack, FormatError> {
    let text = fs::read_to_string(path).map_err(|e| FormatError::io(path, e))?;
    let records: Vec<CameraRecord> = serde_json::from_str(&text).map_err(|e| FormatError::Json { path: path.to_path_buf(), reason: e.to_string() })?;
    CameraTrack::from_records(path, &records)
}

pub fn write_cameras(track: &CameraTrack, path: &Path) -> Result<(), FormatError> {
    crate::write_json(path, &track.records())
}
