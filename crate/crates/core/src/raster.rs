//! Deterministic z-buffer rasterization of a [`WarpMesh`] into warped depth
//! and an occlusion mask.
//!
//! Coverage uses edge functions evaluated at pixel centers with inclusive
//! edges and no backface culling. Depth is interpolated perspective-correctly
//! (barycentric interpolation of `1/z` in screen space), which is exact for
//! planar triangles. Triangles crossing the near plane are clipped against it.
//!
//! The nearest surface wins; exact depth ties keep the lower triangle index.
//! A pixel gets mask 1 only if a non-stretched triangle attains the winning
//! depth and that depth lies in `[near, far]`. Stretched triangles still
//! occlude.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::Vector3;
use thiserror::Error;

use crate::frame::{DepthFrame, FrameError, MaskFrame};
use crate::geometry::{Intrinsics, Pose};
use crate::mesh::{build_mesh, MeshError, WarpMesh, DEFAULT_STRETCH_THRESHOLD};

pub const DEFAULT_NEAR: f64 = 0.5;
pub const DEFAULT_FAR: f64 = 100.0;

/// Triangles whose doubled screen-space area falls below this are skipped.
const MIN_SCREEN_AREA: f64 = 1e-12;

/// Relative depth gap within which a non-stretched triangle still counts as
/// the visible surface.
pub const OBSERVED_TIE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RasterError {
    #[error("clip range must satisfy 0 < near < far, got near={near} far={far}")]
    InvalidClipRange { near: f64, far: f64 },
    #[error("sequence lengths differ: {depth} depth frames, {sources} source poses, {target} target poses")]
    LengthMismatch { depth: usize, sources: usize, target: usize },
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Frame(#[from] FrameError),
}

/// Warped depth (valid wherever some triangle covers the pixel) and occlusion
/// mask (1 = reliably observed).
#[derive(Debug, Clone, PartialEq)]
pub struct RenderOutput {
    pub depth: DepthFrame,
    pub mask: MaskFrame,
}

/// Mesh-building and clipping parameters of a warp.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WarpParams {
    pub stretch_threshold: f64,
    pub near: f64,
    pub far: f64,
}

impl Default for WarpParams {
    fn default() -> Self {
        Self { stretch_threshold: DEFAULT_STRETCH_THRESHOLD, near: DEFAULT_NEAR, far: DEFAULT_FAR }
    }
}

#[derive(Clone, Copy)]
struct ScreenVertex {
    u: f64,
    v: f64,
    inv_z: f64,
}

struct ZBuffer {
    width: usize,
    height: usize,
    depth: Vec<f64>,
    winner: Vec<u32>,
    /// Nearest depth among non-stretched triangles.
    solid: Vec<f64>,
}

impl ZBuffer {
    fn new(width: usize, height: usize) -> Self {
        let n = width * height;
        Self { width, height, depth: vec![f64::INFINITY; n], winner: vec![u32::MAX; n], solid: vec![f64::INFINITY; n] }
    }

    #[inline]
    fn write(&mut self, i: usize, z: f64, tri: u32, stretched: bool) {
        if z < self.depth[i] {
            self.depth[i] = z;
            self.winner[i] = tri;
        }
        if !stretched && z < self.solid[i] {
            self.solid[i] = z;
        }
    }

    /// A pixel is observed when a non-stretched triangle reaches the front
    /// depth. The tolerance absorbs rounding where several triangles meet at
    /// a shared vertex or edge.
    fn observed(&self, i: usize) -> bool {
        self.solid[i] <= self.depth[i] * (1.0 + OBSERVED_TIE_TOLERANCE)
    }

    fn raster(&mut self, a: ScreenVertex, b: ScreenVertex, c: ScreenVertex, tri: u32, stretched: bool) {
        let area = edge(a.u, a.v, b.u, b.v, c.u, c.v);
        if !(area.abs() > MIN_SCREEN_AREA) {
            return;
        }
        let umin = a.u.min(b.u).min(c.u);
        let umax = a.u.max(b.u).max(c.u);
        let vmin = a.v.min(b.v).min(c.v);
        let vmax = a.v.max(b.v).max(c.v);
        let (w, h) = (self.width as f64, self.height as f64);
        if umax < 0.0 || vmax < 0.0 || umin > w || vmin > h {
            return;
        }
        // pixel px is covered when its center px + 0.5 lies in [umin, umax]
        let x0 = libm::ceil(umin - 0.5).max(0.0) as usize;
        let x1 = libm::floor(umax - 0.5).min(w - 1.0);
        let y0 = libm::ceil(vmin - 0.5).max(0.0) as usize;
        let y1 = libm::floor(vmax - 0.5).min(h - 1.0);
        if x1 < 0.0 || y1 < 0.0 {
            return;
        }
        let (x1, y1) = (x1 as usize, y1 as usize);
        let inv_area = 1.0 / area;
        for py in y0..=y1 {
            let pv = py as f64 + 0.5;
            let row = py * self.width;
            for px in x0..=x1 {
                let pu = px as f64 + 0.5;
                let w0 = edge(b.u, b.v, c.u, c.v, pu, pv) * inv_area;
                let w1 = edge(c.u, c.v, a.u, a.v, pu, pv) * inv_area;
                let w2 = edge(a.u, a.v, b.u, b.v, pu, pv) * inv_area;
                if w0 < 0.0 || w1 < 0.0 || w2 < 0.0 {
                    continue;
                }
                let inv_z = w0 * a.inv_z + w1 * b.inv_z + w2 * c.inv_z;
                if !(inv_z > 0.0) {
                    continue;
                }
                self.write(row + px, 1.0 / inv_z, tri, stretched);
            }
        }
    }
}

/// Twice the signed area of `(a, b, p)`.
#[inline]
fn edge(ax: f64, ay: f64, bx: f64, by: f64, px: f64, py: f64) -> f64 {
    (bx - ax) * (py - ay) - (by - ay) * (px - ax)
}

#[inline]
fn to_screen(p: &Vector3<f64>, k: &Intrinsics) -> ScreenVertex {
    let inv_z = 1.0 / p.z;
    ScreenVertex { u: k.fx * p.x * inv_z + k.cx, v: k.fy * p.y * inv_z + k.cy, inv_z }
}

/// Clips a camera-space triangle to `z >= near`; returns the polygon size.
fn clip_near(tri: [Vector3<f64>; 3], near: f64, out: &mut [Vector3<f64>; 4]) -> usize {
    let mut n = 0;
    for i in 0..3 {
        let cur = tri[i];
        let next = tri[(i + 1) % 3];
        let cur_in = cur.z >= near;
        let next_in = next.z >= near;
        if cur_in {
            out[n] = cur;
            n += 1;
        }
        if cur_in != next_in {
            let t = (near - cur.z) / (next.z - cur.z);
            let mut p = cur + (next - cur) * t;
            p.z = near;
            out[n] = p;
            n += 1;
        }
    }
    n
}

/// Renders `mesh` as seen from `target_pose` through intrinsics `k`.
pub fn render(mesh: &WarpMesh, k: &Intrinsics, target_pose: &Pose, near: f64, far: f64) -> Result<RenderOutput, RasterError> {
    render_detailed(mesh, k, target_pose, near, far).map(|(out, _)| out)
}

/// Like [`render`], also returning the index of the triangle that won each
/// pixel's depth test.
pub fn render_detailed(mesh: &WarpMesh, k: &Intrinsics, target_pose: &Pose, near: f64, far: f64) -> Result<(RenderOutput, Vec<Option<u32>>), RasterError> {
    if !(near > 0.0 && far > near) {
        return Err(RasterError::InvalidClipRange { near, far });
    }
    let mut zb = ZBuffer::new(k.width, k.height);

    let cam: Vec<Vector3<f64>> = mesh.vertices.iter().map(|p| target_pose.to_camera(p)).collect();
    let screen: Vec<ScreenVertex> =
        cam.iter().map(|p| if p.z >= near { to_screen(p, k) } else { ScreenVertex { u: f64::NAN, v: f64::NAN, inv_z: 0.0 } }).collect();

    let mut poly = [Vector3::zeros(); 4];
    for (t, (tri, &stretched)) in mesh.triangles.iter().zip(&mesh.stretched).enumerate() {
        let [i0, i1, i2] = tri.map(|i| i as usize);
        let tri_id = t as u32;
        let (z0, z1, z2) = (cam[i0].z, cam[i1].z, cam[i2].z);
        if z0 >= near && z1 >= near && z2 >= near {
            zb.raster(screen[i0], screen[i1], screen[i2], tri_id, stretched);
            continue;
        }
        if z0 < near && z1 < near && z2 < near {
            continue;
        }
        let n = clip_near([cam[i0], cam[i1], cam[i2]], near, &mut poly);
        let s: Vec<ScreenVertex> = poly[..n].iter().map(|p| to_screen(p, k)).collect();
        for j in 1..n - 1 {
            zb.raster(s[0], s[j], s[j + 1], tri_id, stretched);
        }
    }

    let n = k.width * k.height;
    let mut depth = vec![0.0; n];
    let mut valid = vec![false; n];
    let mut mask = vec![0u8; n];
    for i in 0..n {
        let z = zb.depth[i];
        if zb.winner[i] != u32::MAX && z.is_finite() && z > 0.0 {
            depth[i] = z;
            valid[i] = true;
            if zb.observed(i) && z >= near * (1.0 - 1e-12) && z <= far {
                mask[i] = 1;
            }
        }
    }
    let winner = zb.winner.iter().zip(&valid).map(|(&w, &v)| v.then_some(w)).collect();
    let out = RenderOutput { depth: DepthFrame::with_validity(k.width, k.height, depth, valid)?, mask: MaskFrame::new(k.width, k.height, mask)? };
    Ok((out, winner))
}

/// Warps one depth frame from `source_pose` to `target_pose`.
///
/// A frame with no valid 2×2 block produces an all-invalid, all-zero-mask
/// output rather than an error.
pub fn warp_frame(
    depth: &DepthFrame,
    k: &Intrinsics,
    source_pose: &Pose,
    target_pose: &Pose,
    params: &WarpParams,
    frame_index: usize,
) -> Result<RenderOutput, RasterError> {
    let mesh = match build_mesh(depth, k, source_pose, params.stretch_threshold, frame_index) {
        Ok(m) => m,
        Err(MeshError::EmptyMesh) => WarpMesh::empty(frame_index),
        Err(e) => return Err(e.into()),
    };
    render(&mesh, k, target_pose, params.near, params.far)
}

/// Frame-by-frame warp of a depth video onto a target trajectory.
pub fn warp_depth_sequence(
    depth_video: &[DepthFrame],
    k: &Intrinsics,
    source_poses: &[Pose],
    target_poses: &[Pose],
    params: &WarpParams,
) -> Result<Vec<RenderOutput>, RasterError> {
    check_sequence_lengths(depth_video.len(), source_poses.len(), target_poses.len())?;
    depth_video.iter().zip(source_poses.iter().zip(target_poses)).enumerate().map(|(t, (d, (s, g)))| warp_frame(d, k, s, g, params, t)).collect()
}

pub fn check_sequence_lengths(depth: usize, source: usize, target: usize) -> Result<(), RasterError> {
    if depth != source || depth != target {
        return Err(RasterError::LengthMismatch { depth, sources: source, target });
    }
    Ok(())
}
