//! Geometric camera-conditioning primitives for depth-warped novel view
//! synthesis.
//!
//! The crate turns per-frame depth and camera poses into the signals a video
//! generator is conditioned on:
//!
//! - [`align`]: global scale/shift fit in inverse-depth space between a
//!   detailed relative depth video and a camera-consistent metric one.
//! - [`mesh`] and [`raster`]: depth grid to watertight triangle mesh, then a
//!   deterministic z-buffer render of that mesh under a target camera,
//!   producing warped depth and an occlusion mask.
//! - [`encode`]: log-space normalization and colormap encoding of warped
//!   depth, plus the scale/shift training augmentation.
//! - [`trajectory`]: randomized look-at camera trajectories.
//! - [`metrics`]: accumulated rotation, translation and pose-matrix errors.
//! - [`synth`]: analytic ray-cast scenes with exact ground-truth depth.
//! - [`sched`]: rectified-flow noising, velocity targets and the dual-stream
//!   token layout as pure tensor functions.
//!
//! Everything here is pure computation and builds without `std`; file formats,
//! manifests and the command line live in the `depthwarp` crate.
//!
//! Camera convention: poses are camera-to-world, the camera frame is
//! x-right / y-down / z-forward and the world frame is z-up. Pixel centers sit
//! at integer + 0.5 coordinates.

#![no_std]
// `!(a > b)` is used on purpose so NaN takes the rejecting branch
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod align;
mod colormap_data;
pub mod encode;
pub mod frame;
pub mod geometry;
pub mod mesh;
pub mod metrics;
pub mod raster;
pub mod rng;
pub mod sched;
pub mod synth;
pub mod trajectory;

pub use align::{apply_alignment, fit_scale_shift, AlignError, AlignmentResult};
pub use encode::{ColormapLut, EncodeError, EncodedFrame, NormalizedFrame};
pub use frame::{DepthFrame, FrameError, MaskFrame, RgbFrame};
pub use geometry::{project, transform_point, unproject, GeometryError, Intrinsics, Pose, Projection};
pub use mesh::{build_mesh, MeshError, WarpMesh, DEFAULT_STRETCH_THRESHOLD};
pub use metrics::{cam_mc, rot_err, trans_err, CameraAccuracyReport, MetricsError};
pub use raster::{render, render_detailed, warp_depth_sequence, warp_frame, RenderOutput, DEFAULT_FAR, DEFAULT_NEAR};
