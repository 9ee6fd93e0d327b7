//! Procedural multi-camera scenes rendered by analytic ray casting.
//!
//! A scene is a finite checkered ground plane plus moving spheres and boxes.
//! Every pixel ray is intersected exactly with every primitive, so the depth
//! maps are exact ground truth. Colors are unlit: flat per primitive, two-tone
//! checker on the ground.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use nalgebra::Vector3;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::frame::{DepthFrame, FrameError, RgbFrame};
use crate::geometry::{Intrinsics, Pose};
use crate::raster::{warp_depth_sequence, RasterError, RenderOutput, WarpParams};
use crate::rng;

/// Intersections closer than this along the ray are ignored.
const RAY_EPSILON: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SynthError {
    #[error("scene needs at least one primitive")]
    NoPrimitives,
    #[error("scene duration must be at least one frame")]
    NoFrames,
    #[error("primitive {index} dips below the ground plane")]
    BelowGround { index: usize },
    #[error("need at least 2 cameras, got {0}")]
    TooFewCameras(usize),
    #[error("camera {camera} has {got} poses but the scene lasts {expected} frames")]
    FrameCountMismatch { camera: usize, got: usize, expected: usize },
    #[error("source camera {source_cam} out of range for {cameras} cameras")]
    BadSource { source_cam: usize, cameras: usize },
    #[error(transparent)]
    Frame(#[from] FrameError),
    #[error(transparent)]
    Raster(#[from] RasterError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Shape {
    Sphere { radius: f64 },
    Box { half_extents: [f64; 3] },
}

impl Shape {
    /// Half height along world z.
    fn half_height(&self) -> f64 {
        match self {
            Shape::Sphere { radius } => *radius,
            Shape::Box { half_extents } => half_extents[2],
        }
    }
}

/// Parametric center path; `frame` is the time variable.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Motion {
    Static,
    /// Meters per frame.
    Linear {
        velocity: [f64; 3],
    },
    Sinusoid {
        amplitude: [f64; 3],
        period_frames: f64,
        phase: f64,
    },
}

impl Motion {
    pub fn offset(&self, frame: f64) -> Vector3<f64> {
        match self {
            Motion::Static => Vector3::zeros(),
            Motion::Linear { velocity } => Vector3::from_row_slice(velocity) * frame,
            Motion::Sinusoid { amplitude, period_frames, phase } => Vector3::from_row_slice(amplitude) * libm::sin(2.0 * PI * frame / period_frames + phase),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Primitive {
    pub shape: Shape,
    pub center: [f64; 3],
    pub motion: Motion,
    pub color: [u8; 3],
}

impl Primitive {
    pub fn center_at(&self, frame: usize) -> Vector3<f64> {
        Vector3::from_row_slice(&self.center) + self.motion.offset(frame as f64)
    }

    /// Ray parameter of the nearest hit in front of `origin`.
    fn intersect(&self, frame: usize, origin: &Vector3<f64>, dir: &Vector3<f64>) -> Option<f64> {
        let c = self.center_at(frame);
        match self.shape {
            Shape::Sphere { radius } => {
                let oc = origin - c;
                let a = dir.norm_squared();
                let half_b = dir.dot(&oc);
                let cc = oc.norm_squared() - radius * radius;
                let disc = half_b * half_b - a * cc;
                if disc < 0.0 {
                    return None;
                }
                let sq = libm::sqrt(disc);
                // numerically stable root pair
                let q = -(half_b + if half_b >= 0.0 { sq } else { -sq });
                let (mut t0, mut t1) = (q / a, if q != 0.0 { cc / q } else { q / a });
                if t0 > t1 {
                    core::mem::swap(&mut t0, &mut t1);
                }
                if t0 > RAY_EPSILON {
                    Some(t0)
                } else if t1 > RAY_EPSILON {
                    Some(t1)
                } else {
                    None
                }
            }
            Shape::Box { half_extents } => {
                let (mut t_near, mut t_far) = (f64::NEG_INFINITY, f64::INFINITY);
                for i in 0..3 {
                    let lo = c[i] - half_extents[i];
                    let hi = c[i] + half_extents[i];
                    if dir[i] == 0.0 {
                        if origin[i] < lo || origin[i] > hi {
                            return None;
                        }
                        continue;
                    }
                    let inv = 1.0 / dir[i];
                    let (mut a, mut b) = ((lo - origin[i]) * inv, (hi - origin[i]) * inv);
                    if a > b {
                        core::mem::swap(&mut a, &mut b);
                    }
                    t_near = t_near.max(a);
                    t_far = t_far.min(b);
                }
                if t_near > t_far || t_far <= RAY_EPSILON {
                    None
                } else if t_near > RAY_EPSILON {
                    Some(t_near)
                } else {
                    Some(t_far)
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroundPlane {
    pub height: f64,
    pub checker_period: f64,
    /// Half-size of the square ground patch centered on the origin.
    pub extent: f64,
    pub colors: [[u8; 3]; 2],
}

impl Default for GroundPlane {
    fn default() -> Self {
        Self { height: 0.0, checker_period: 0.5, extent: 40.0, colors: [[200, 200, 200], [90, 90, 90]] }
    }
}

impl GroundPlane {
    fn intersect(&self, origin: &Vector3<f64>, dir: &Vector3<f64>) -> Option<(f64, [u8; 3])> {
        if dir.z == 0.0 {
            return None;
        }
        let t = (self.height - origin.z) / dir.z;
        if !(t > RAY_EPSILON) {
            return None;
        }
        let p = origin + dir * t;
        if p.x.abs() > self.extent || p.y.abs() > self.extent {
            return None;
        }
        let cell = libm::floor(p.x / self.checker_period) as i64 + libm::floor(p.y / self.checker_period) as i64;
        Some((t, self.colors[cell.rem_euclid(2) as usize]))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneSpec {
    pub ground: GroundPlane,
    pub primitives: Vec<Primitive>,
    pub duration: usize,
    pub seed: u64,
    pub background: [u8; 3],
    /// Chest-height point on the main subject that cameras look at.
    pub lookat: [f64; 3],
}

/// Height of the look-at point above the ground.
pub const SUBJECT_CHEST_HEIGHT: f64 = 1.5;

impl SceneSpec {
    pub fn validate(&self) -> Result<(), SynthError> {
        if self.primitives.is_empty() {
            return Err(SynthError::NoPrimitives);
        }
        if self.duration == 0 {
            return Err(SynthError::NoFrames);
        }
        for (index, p) in self.primitives.iter().enumerate() {
            let lowest_offset = match p.motion {
                Motion::Static => 0.0,
                Motion::Linear { velocity } => velocity[2].min(0.0) * (self.duration - 1) as f64,
                Motion::Sinusoid { amplitude, .. } => -amplitude[2].abs(),
            };
            if p.center[2] + lowest_offset - p.shape.half_height() < self.ground.height - 1e-12 {
                return Err(SynthError::BelowGround { index });
            }
        }
        Ok(())
    }

    /// A random scene: a standing box as the main subject at the origin, a few
    /// moving spheres and boxes beside and behind it, and a back wall.
    pub fn random(seed: u64, duration: usize) -> Self {
        let mut r = rng::stream(seed, 0x5CE7E);
        let mut primitives = Vec::new();
        let palette = |r: &mut rand_chacha::ChaCha8Rng| -> [u8; 3] { [r.random_range(40..=230), r.random_range(40..=230), r.random_range(40..=230)] };
        let sway = 0.15;
        primitives.push(Primitive {
            shape: Shape::Box { half_extents: [0.25, 0.15, 0.9] },
            center: [0.0, 0.0, 0.9 + 0.01],
            motion: Motion::Sinusoid {
                amplitude: [rng::uniform(&mut r, -sway, sway), rng::uniform(&mut r, -sway, sway), 0.0],
                period_frames: rng::uniform(&mut r, 20.0, 60.0),
                phase: rng::uniform(&mut r, 0.0, 2.0 * PI),
            },
            color: palette(&mut r),
        });
        let extra = r.random_range(2..=4);
        for i in 0..extra {
            // keep clear of the half-space in front of the subject where cameras fly
            let angle = rng::uniform(&mut r, -0.1 * PI, 1.1 * PI);
            let dist = rng::uniform(&mut r, 1.2, 3.5);
            let (x, y) = (dist * libm::cos(angle), dist * libm::sin(angle));
            let shape = if i % 2 == 0 {
                Shape::Sphere { radius: rng::uniform(&mut r, 0.2, 0.6) }
            } else {
                Shape::Box { half_extents: [rng::uniform(&mut r, 0.15, 0.5), rng::uniform(&mut r, 0.15, 0.5), rng::uniform(&mut r, 0.2, 0.8)] }
            };
            let base = shape.half_height() + 0.02;
            let hop = rng::uniform(&mut r, 0.0, 0.4);
            let motion = if r.random_bool(0.5) {
                Motion::Sinusoid {
                    amplitude: [rng::uniform(&mut r, -0.4, 0.4), rng::uniform(&mut r, -0.4, 0.4), hop],
                    period_frames: rng::uniform(&mut r, 15.0, 80.0),
                    phase: rng::uniform(&mut r, 0.0, 2.0 * PI),
                }
            } else {
                let speed = 0.6 / duration.max(1) as f64;
                Motion::Linear { velocity: [rng::uniform(&mut r, -speed, speed), rng::uniform(&mut r, 0.0, speed), 0.0] }
            };
            let z = base + if let Motion::Sinusoid { .. } = motion { hop } else { 0.0 };
            primitives.push(Primitive { shape, center: [x, y, z], motion, color: palette(&mut r) });
        }
        primitives.push(Primitive {
            shape: Shape::Box { half_extents: [8.0, 0.1, 2.5] },
            center: [0.0, rng::uniform(&mut r, 6.0, 9.0), 2.5],
            motion: Motion::Static,
            color: palette(&mut r),
        });
        Self { ground: GroundPlane::default(), primitives, duration, seed, background: [135, 170, 215], lookat: [0.0, 0.0, SUBJECT_CHEST_HEIGHT] }
    }

    pub fn lookat(&self) -> Vector3<f64> {
        Vector3::from_row_slice(&self.lookat)
    }

    /// Nearest hit along `origin + t · dir`, as `(t, color)`.
    pub fn cast(&self, frame: usize, origin: &Vector3<f64>, dir: &Vector3<f64>) -> Option<(f64, [u8; 3])> {
        let mut best = self.ground.intersect(origin, dir);
        for p in &self.primitives {
            if let Some(t) = p.intersect(frame, origin, dir) {
                if best.is_none_or(|(bt, _)| t < bt) {
                    best = Some((t, p.color));
                }
            }
        }
        best
    }

    /// Exact camera-z depth and color seen through continuous pixel `(u, v)`.
    pub fn cast_pixel(&self, frame: usize, pose: &Pose, k: &Intrinsics, u: f64, v: f64) -> Option<(f64, [u8; 3])> {
        // ray with unit camera-z component: the hit parameter is the depth
        let dir = pose.rotation() * k.ray(u, v);
        self.cast(frame, &pose.center(), &dir)
    }

    /// Renders one view at pixel centers.
    pub fn render_view(&self, frame: usize, pose: &Pose, k: &Intrinsics) -> Result<(RgbFrame, DepthFrame), SynthError> {
        let n = k.width * k.height;
        let mut rgb = Vec::with_capacity(n * 3);
        let mut depth = vec![0.0; n];
        let mut valid = vec![false; n];
        for y in 0..k.height {
            for x in 0..k.width {
                let i = y * k.width + x;
                match self.cast_pixel(frame, pose, k, x as f64 + 0.5, y as f64 + 0.5) {
                    Some((t, color)) => {
                        depth[i] = t;
                        valid[i] = true;
                        rgb.extend_from_slice(&color);
                    }
                    None => rgb.extend_from_slice(&self.background),
                }
            }
        }
        Ok((RgbFrame::new(k.width, k.height, rgb)?, DepthFrame::with_validity(k.width, k.height, depth, valid)?))
    }
}

/// One synchronized camera's recording.
#[derive(Debug, Clone, PartialEq)]
pub struct CameraStream {
    pub poses: Vec<Pose>,
    pub rgb: Vec<RgbFrame>,
    pub depth: Vec<DepthFrame>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MultiCamSample {
    pub intrinsics: Intrinsics,
    pub cameras: Vec<CameraStream>,
    pub source: usize,
    pub targets: Vec<usize>,
}

/// Renders every camera over the scene's duration. Camera `source` becomes
/// the source view and all others are targets.
pub fn render_scene(spec: &SceneSpec, cams: &[Vec<Pose>], k: &Intrinsics, source: usize) -> Result<MultiCamSample, SynthError> {
    spec.validate()?;
    if cams.len() < 2 {
        return Err(SynthError::TooFewCameras(cams.len()));
    }
    if source >= cams.len() {
        return Err(SynthError::BadSource { source_cam: source, cameras: cams.len() });
    }
    let mut cameras = Vec::with_capacity(cams.len());
    for (camera, poses) in cams.iter().enumerate() {
        if poses.len() != spec.duration {
            return Err(SynthError::FrameCountMismatch { camera, got: poses.len(), expected: spec.duration });
        }
        let mut rgb = Vec::with_capacity(poses.len());
        let mut depth = Vec::with_capacity(poses.len());
        for (t, pose) in poses.iter().enumerate() {
            let (c, d) = spec.render_view(t, pose, k)?;
            rgb.push(c);
            depth.push(d);
        }
        cameras.push(CameraStream { poses: poses.clone(), rgb, depth });
    }
    let targets = (0..cams.len()).filter(|&c| c != source).collect();
    Ok(MultiCamSample { intrinsics: *k, cameras, source, targets })
}

/// Source depth warped onto one target trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct PairRecord {
    pub source: usize,
    pub target: usize,
    pub warped: Vec<RenderOutput>,
}

/// Warps the source camera's ground-truth depth onto every target camera.
pub fn build_pairs(sample: &MultiCamSample, params: &WarpParams) -> Result<Vec<PairRecord>, SynthError> {
    let src = &sample.cameras[sample.source];
    sample
        .targets
        .iter()
        .map(|&target| {
            let warped = warp_depth_sequence(&src.depth, &sample.intrinsics, &src.poses, &sample.cameras[target].poses, params)?;
            Ok(PairRecord { source: sample.source, target, warped })
        })
        .collect()
}
