//! Depth grid to world-space triangle mesh.
//!
//! Every valid pixel becomes a vertex (pixel center unprojected, then moved to
//! world space). Every 2×2 block of valid pixels emits two triangles split
//! along the top-left → bottom-right diagonal, so a fully valid frame yields a
//! watertight grid. Triangles spanning a depth discontinuity are kept but
//! flagged as stretched.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::Vector3;
use thiserror::Error;

use crate::frame::DepthFrame;
use crate::geometry::{unproject, GeometryError, Intrinsics, Pose};

/// Relative depth jump above which a triangle counts as stretched.
pub const DEFAULT_STRETCH_THRESHOLD: f64 = 0.1;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MeshError {
    #[error("depth frame is {depth_w}x{depth_h} but intrinsics describe {k_w}x{k_h}")]
    SizeMismatch { depth_w: usize, depth_h: usize, k_w: usize, k_h: usize },
    #[error("depth frame has no 2x2 block of valid pixels")]
    EmptyMesh,
    #[error("stretch threshold must be non-negative, got {0}")]
    InvalidThreshold(f64),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct WarpMesh {
    pub vertices: Vec<Vector3<f64>>,
    pub triangles: Vec<[u32; 3]>,
    pub stretched: Vec<bool>,
    pub source_frame: usize,
}

impl WarpMesh {
    pub fn empty(source_frame: usize) -> Self {
        Self { vertices: Vec::new(), triangles: Vec::new(), stretched: Vec::new(), source_frame }
    }

    pub fn triangle_count(&self) -> usize {
        self.triangles.len()
    }

    pub fn stretched_count(&self) -> usize {
        self.stretched.iter().filter(|&&s| s).count()
    }
}

/// Largest pairwise `|d_i − d_j| / min(d_i, d_j)` among three corner depths.
#[inline]
pub fn relative_depth_spread(d: [f64; 3]) -> f64 {
    let lo = d[0].min(d[1]).min(d[2]);
    let hi = d[0].max(d[1]).max(d[2]);
    (hi - lo) / lo
}

/// Builds the warp mesh for one depth frame. `source_frame` is recorded on
/// the mesh.
pub fn build_mesh(depth: &DepthFrame, k: &Intrinsics, pose: &Pose, stretch_threshold: f64, source_frame: usize) -> Result<WarpMesh, MeshError> {
    if depth.width() != k.width || depth.height() != k.height {
        return Err(MeshError::SizeMismatch { depth_w: depth.width(), depth_h: depth.height(), k_w: k.width, k_h: k.height });
    }
    if !(stretch_threshold >= 0.0) {
        return Err(MeshError::InvalidThreshold(stretch_threshold));
    }
    let (w, h) = (depth.width(), depth.height());

    let mut index = vec![u32::MAX; w * h];
    let mut vertices = Vec::with_capacity(depth.valid_count());
    for y in 0..h {
        for x in 0..w {
            let i = y * w + x;
            if let Some(d) = depth.depth(i) {
                let p_cam = unproject(x as f64 + 0.5, y as f64 + 0.5, d, k)?;
                index[i] = vertices.len() as u32;
                vertices.push(pose.to_world(&p_cam));
            }
        }
    }

    let mut triangles = Vec::new();
    let mut stretched = Vec::new();
    let values = depth.values();
    for y in 0..h.saturating_sub(1) {
        for x in 0..w - 1 {
            let tl = y * w + x;
            let (tr, bl, br) = (tl + 1, tl + w, tl + w + 1);
            if index[tl] == u32::MAX || index[tr] == u32::MAX || index[bl] == u32::MAX || index[br] == u32::MAX {
                continue;
            }
            for corners in [[tl, tr, br], [tl, br, bl]] {
                triangles.push(corners.map(|c| index[c]));
                let spread = relative_depth_spread(corners.map(|c| values[c]));
                stretched.push(spread > stretch_threshold);
            }
        }
    }
    if triangles.is_empty() {
        return Err(MeshError::EmptyMesh);
    }
    Ok(WarpMesh { vertices, triangles, stretched, source_frame })
}
