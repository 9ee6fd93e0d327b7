//! Randomized look-at camera trajectories.
//!
//! A start position is drawn in front of the subject at a random distance with
//! small elevation/azimuth offsets. A trajectory then moves from the start
//! through 1–3 random waypoints along a Catmull-Rom spline, reparameterized by
//! arc length with smoothstep ease-in/out timing. Every frame looks at the
//! fixed look-at point with a level horizon. Draws that break the rotation,
//! distance or smoothness limits are rejected and redrawn.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use nalgebra::Vector3;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{GeometryError, Pose};
use crate::rng;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TrajectoryError {
    #[error("need at least 2 frames, got {0}")]
    TooFewFrames(usize),
    #[error("need at least one control point")]
    NoControlPoints,
    #[error("invalid sampling ranges: {0}")]
    InvalidRanges(&'static str),
    #[error(
        "no admissible trajectory after {attempts} draws (last rejection: {last_rejection}; \
         initial distance {initial_distance:.3} m)"
    )]
    Exhausted { attempts: usize, last_rejection: Rejection, initial_distance: f64 },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// Why a trajectory draw was discarded.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Rejection {
    PitchRange,
    YawRange,
    StepRotation,
    TooClose,
    BelowGround,
    DegeneratePath,
}

impl core::fmt::Display for Rejection {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        let s = match self {
            Rejection::PitchRange => "pitch range exceeded",
            Rejection::YawRange => "yaw range exceeded",
            Rejection::StepRotation => "per-frame rotation too large",
            Rejection::TooClose => "camera too close to look-at point",
            Rejection::BelowGround => "camera below minimum height",
            Rejection::DegeneratePath => "degenerate path",
        };
        f.write_str(s)
    }
}

/// Every range and limit the samplers use. Angles in degrees, lengths in meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRanges {
    /// Start distance to the look-at point.
    pub distance: [f64; 2],
    /// Start elevation offset bound, `±` this value.
    pub start_pitch_deg: f64,
    /// Start azimuth offset from the subject's facing direction, `±` this value.
    pub start_yaw_deg: f64,
    /// Cone around the facing direction that counts as "in front".
    pub front_cone_deg: f64,
    /// Azimuth of the subject's facing direction in the world xy plane.
    pub facing_deg: f64,
    /// Total path length as a multiple of the start distance.
    pub path_length_factor: [f64; 2],
    /// Inclusive bounds on the number of waypoints.
    pub waypoints: [usize; 2],
    /// Largest spread of camera pitch over the whole trajectory.
    pub max_pitch_range_deg: f64,
    /// Largest spread of camera yaw over the whole trajectory.
    pub max_yaw_range_deg: f64,
    /// Largest rotation between consecutive frames.
    pub max_step_rotation_deg: f64,
    pub min_lookat_distance: f64,
    pub min_height: f64,
    pub max_attempts: usize,
}

impl Default for TrajectoryRanges {
    fn default() -> Self {
        Self {
            distance: [2.0, 5.0],
            start_pitch_deg: 10.0,
            start_yaw_deg: 10.0,
            front_cone_deg: 60.0,
            facing_deg: -90.0,
            path_length_factor: [0.5, 1.5],
            waypoints: [1, 3],
            max_pitch_range_deg: 40.0,
            max_yaw_range_deg: 20.0,
            max_step_rotation_deg: 5.0,
            min_lookat_distance: 1.0,
            min_height: 0.1,
            max_attempts: 2000,
        }
    }
}

impl TrajectoryRanges {
    pub fn validate(&self) -> Result<(), TrajectoryError> {
        let bad = TrajectoryError::InvalidRanges;
        if !(self.distance[0] > 0.0 && self.distance[1] >= self.distance[0]) {
            return Err(bad("distance range"));
        }
        if !(self.start_pitch_deg >= 0.0 && self.start_pitch_deg < 90.0) {
            return Err(bad("start pitch bound"));
        }
        if !(self.start_yaw_deg >= 0.0 && self.start_yaw_deg <= self.front_cone_deg) {
            return Err(bad("start yaw bound must lie within the front cone"));
        }
        if !(self.path_length_factor[0] > 0.0 && self.path_length_factor[1] >= self.path_length_factor[0]) {
            return Err(bad("path length factor"));
        }
        if !(self.waypoints[0] >= 1 && self.waypoints[1] >= self.waypoints[0]) {
            return Err(bad("waypoint count"));
        }
        if self.max_attempts == 0 {
            return Err(bad("max_attempts must be positive"));
        }
        Ok(())
    }
}

/// Sampled start camera and the offsets that produced it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StartSample {
    pub pose: Pose,
    pub distance: f64,
    /// Elevation of the camera seen from the look-at point; equals the camera's
    /// downward pitch.
    pub pitch_deg: f64,
    /// Azimuth offset from the subject's facing direction.
    pub yaw_deg: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrajectoryMode {
    Static,
    Moving,
}

/// Everything needed to reproduce a trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectorySpec {
    pub mode: TrajectoryMode,
    pub lookat: [f64; 3],
    pub start: [f64; 3],
    /// Empty for static trajectories, 1–3 points otherwise.
    pub waypoints: Vec<[f64; 3]>,
    pub n_frames: usize,
    pub seed: u64,
    pub initial_distance: f64,
    /// Arc length of the camera path.
    pub path_length: f64,
    pub interpolation: String,
    pub attempts: usize,
    pub ranges: TrajectoryRanges,
}

const INTERPOLATION: &str = "catmull_rom_uniform+arc_length+smoothstep";

fn v3(a: [f64; 3]) -> Vector3<f64> {
    Vector3::new(a[0], a[1], a[2])
}

fn arr(v: &Vector3<f64>) -> [f64; 3] {
    [v.x, v.y, v.z]
}

/// Camera pitch (positive = looking up) and yaw of a pose's optical axis, radians.
pub fn pitch_yaw(pose: &Pose) -> (f64, f64) {
    let f = pose.forward();
    (libm::asin(f.z.clamp(-1.0, 1.0)), libm::atan2(f.y, f.x))
}

/// Rotation angle between two poses, radians.
pub fn relative_angle(a: &Pose, b: &Pose) -> f64 {
    let r = a.rotation().transpose() * b.rotation();
    libm::acos(((r.trace() - 1.0) * 0.5).clamp(-1.0, 1.0))
}

fn wrap_angle(a: f64) -> f64 {
    let mut a = libm::fmod(a + PI, 2.0 * PI);
    if a < 0.0 {
        a += 2.0 * PI;
    }
    a - PI
}

/// Draws the start camera: distance, elevation and azimuth offsets uniform in
/// their ranges, oriented at `lookat` with a level horizon.
pub fn sample_start(lookat: &Vector3<f64>, ranges: &TrajectoryRanges, seed: u64) -> Result<StartSample, TrajectoryError> {
    ranges.validate()?;
    let mut r = rng::stream(seed, 0x5747);
    let distance = rng::uniform(&mut r, ranges.distance[0], ranges.distance[1]);
    let pitch_deg = rng::uniform(&mut r, -ranges.start_pitch_deg, ranges.start_pitch_deg);
    let yaw_deg = rng::uniform(&mut r, -ranges.start_yaw_deg, ranges.start_yaw_deg);
    let az = (ranges.facing_deg + yaw_deg).to_radians();
    let el = pitch_deg.to_radians();
    let dir = Vector3::new(libm::cos(el) * libm::cos(az), libm::cos(el) * libm::sin(az), libm::sin(el));
    let eye = lookat + dir * distance;
    let pose = Pose::look_at(&eye, lookat, &Vector3::z())?;
    Ok(StartSample { pose, distance, pitch_deg, yaw_deg })
}

/// Uniform Catmull-Rom spline through a list of points, with reflected
/// phantom end points.
#[derive(Debug, Clone)]
pub struct CatmullRomPath {
    points: Vec<Vector3<f64>>,
    /// Cumulative arc length at each control point.
    cumulative: Vec<f64>,
}

const GL_NODES: [f64; 8] = [
    -0.960_289_856_497_536_2,
    -0.796_666_477_413_626_7,
    -0.525_532_409_916_329,
    -0.183_434_642_495_649_8,
    0.183_434_642_495_649_8,
    0.525_532_409_916_329,
    0.796_666_477_413_626_7,
    0.960_289_856_497_536_2,
];
const GL_WEIGHTS: [f64; 8] = [
    0.101_228_536_290_376_3,
    0.222_381_034_453_374_5,
    0.313_706_645_877_887_3,
    0.362_683_783_378_362,
    0.362_683_783_378_362,
    0.313_706_645_877_887_3,
    0.222_381_034_453_374_5,
    0.101_228_536_290_376_3,
];

impl CatmullRomPath {
    /// Builds the path, dropping consecutive duplicate points. Needs at least
    /// two distinct points.
    pub fn new(control: &[Vector3<f64>]) -> Option<Self> {
        let mut points: Vec<Vector3<f64>> = Vec::with_capacity(control.len());
        for p in control {
            if points.last().is_none_or(|q| (q - p).norm() > 1e-12) {
                points.push(*p);
            }
        }
        if points.len() < 2 {
            return None;
        }
        let mut path = Self { points, cumulative: Vec::new() };
        let mut acc = 0.0;
        path.cumulative.push(0.0);
        for s in 0..path.segments() {
            acc += path.segment_length(s, 1.0);
            path.cumulative.push(acc);
        }
        Some(path)
    }

    pub fn segments(&self) -> usize {
        self.points.len() - 1
    }

    pub fn points(&self) -> &[Vector3<f64>] {
        &self.points
    }

    pub fn length(&self) -> f64 {
        self.cumulative[self.cumulative.len() - 1]
    }

    fn controls(&self, seg: usize) -> [Vector3<f64>; 4] {
        let n = self.points.len();
        let p1 = self.points[seg];
        let p2 = self.points[seg + 1];
        let p0 = if seg == 0 { 2.0 * p1 - p2 } else { self.points[seg - 1] };
        let p3 = if seg + 2 >= n { 2.0 * p2 - p1 } else { self.points[seg + 2] };
        [p0, p1, p2, p3]
    }

    /// Position on segment `seg` at local parameter `u ∈ [0, 1]`.
    pub fn eval(&self, seg: usize, u: f64) -> Vector3<f64> {
        let [p0, p1, p2, p3] = self.controls(seg);
        let (u2, u3) = (u * u, u * u * u);
        0.5 * (2.0 * p1 + (p2 - p0) * u + (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3) * u2 + (3.0 * p1 - p0 - 3.0 * p2 + p3) * u3)
    }

    fn speed(&self, seg: usize, u: f64) -> f64 {
        let [p0, p1, p2, p3] = self.controls(seg);
        let d = 0.5 * ((p2 - p0) + (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3) * (2.0 * u) + (3.0 * p1 - p0 - 3.0 * p2 + p3) * (3.0 * u * u));
        d.norm()
    }

    fn gauss(&self, seg: usize, a: f64, b: f64) -> f64 {
        let (m, h) = (0.5 * (a + b), 0.5 * (b - a));
        GL_NODES.iter().zip(&GL_WEIGHTS).map(|(x, w)| w * self.speed(seg, m + h * x)).sum::<f64>() * h
    }

    fn adaptive(&self, seg: usize, a: f64, b: f64, whole: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let (l, r) = (self.gauss(seg, a, m), self.gauss(seg, m, b));
        if depth == 0 || (l + r - whole).abs() <= 1e-14 * (1.0 + whole.abs()) {
            l + r
        } else {
            self.adaptive(seg, a, m, l, depth - 1) + self.adaptive(seg, m, b, r, depth - 1)
        }
    }

    /// Arc length of segment `seg` from `u = 0` to `u`.
    pub fn segment_length(&self, seg: usize, u: f64) -> f64 {
        if u <= 0.0 {
            return 0.0;
        }
        let whole = self.gauss(seg, 0.0, u);
        self.adaptive(seg, 0.0, u, whole, 24)
    }

    /// Point at arc length `s` from the start (clamped to the path).
    pub fn point_at_length(&self, s: f64) -> Vector3<f64> {
        let total = self.length();
        if s <= 0.0 {
            return self.points[0];
        }
        if s >= total {
            return self.points[self.points.len() - 1];
        }
        let seg = match self.cumulative.binary_search_by(|c| c.partial_cmp(&s).unwrap_or(core::cmp::Ordering::Less)) {
            Ok(i) => return self.points[i],
            Err(i) => i - 1,
        };
        let target = s - self.cumulative[seg];
        let seg_len = self.cumulative[seg + 1] - self.cumulative[seg];
        // safeguarded Newton on u
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        let mut u = (target / seg_len).clamp(0.0, 1.0);
        for _ in 0..100 {
            let f = self.segment_length(seg, u) - target;
            if f.abs() <= 1e-13 * (1.0 + total) {
                break;
            }
            if f > 0.0 {
                hi = u;
            } else {
                lo = u;
            }
            let sp = self.speed(seg, u);
            let newton = u - f / sp;
            u = if sp > 0.0 && newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
            if hi - lo < 1e-15 {
                break;
            }
        }
        self.eval(seg, u)
    }
}

/// `3t² − 2t³`.
#[inline]
pub fn smoothstep(t: f64) -> f64 {
    t * t * (3.0 - 2.0 * t)
}

/// Positions of `n_frames` cameras moving along the Catmull-Rom spline through
/// `control` with eased arc-length timing. The first and last control points
/// are reproduced exactly; a single distinct point yields a static path.
pub fn interpolate(control: &[Vector3<f64>], n_frames: usize) -> Result<Vec<Vector3<f64>>, TrajectoryError> {
    if n_frames < 2 {
        return Err(TrajectoryError::TooFewFrames(n_frames));
    }
    if control.is_empty() {
        return Err(TrajectoryError::NoControlPoints);
    }
    let Some(path) = CatmullRomPath::new(control) else {
        return Ok(vec![control[0]; n_frames]);
    };
    let total = path.length();
    let last = n_frames - 1;
    Ok((0..n_frames)
        .map(|i| match i {
            0 => path.points()[0],
            i if i == last => path.points()[path.points().len() - 1],
            _ => path.point_at_length(total * smoothstep(i as f64 / last as f64)),
        })
        .collect())
}

/// Look-at poses for a list of positions.
pub fn look_at_poses(positions: &[Vector3<f64>], lookat: &Vector3<f64>) -> Result<Vec<Pose>, TrajectoryError> {
    positions.iter().map(|p| Pose::look_at(p, lookat, &Vector3::z()).map_err(Into::into)).collect()
}

fn check_poses(poses: &[Pose], lookat: &Vector3<f64>, ranges: &TrajectoryRanges) -> Result<(), Rejection> {
    let (p0, y0) = pitch_yaw(&poses[0]);
    let (mut pmin, mut pmax, mut ymin, mut ymax) = (p0, p0, 0.0f64, 0.0f64);
    for (i, pose) in poses.iter().enumerate() {
        let c = pose.center();
        if (c - lookat).norm() < ranges.min_lookat_distance {
            return Err(Rejection::TooClose);
        }
        if c.z < ranges.min_height {
            return Err(Rejection::BelowGround);
        }
        let (p, y) = pitch_yaw(pose);
        let dy = wrap_angle(y - y0);
        pmin = pmin.min(p);
        pmax = pmax.max(p);
        ymin = ymin.min(dy);
        ymax = ymax.max(dy);
        if i > 0 && relative_angle(&poses[i - 1], pose) > ranges.max_step_rotation_deg.to_radians() {
            return Err(Rejection::StepRotation);
        }
    }
    if pmax - pmin > ranges.max_pitch_range_deg.to_radians() {
        return Err(Rejection::PitchRange);
    }
    if ymax - ymin > ranges.max_yaw_range_deg.to_radians() {
        return Err(Rejection::YawRange);
    }
    Ok(())
}

/// Static trajectory: every frame equals `start`.
pub fn static_trajectory(
    start: &Pose,
    lookat: &Vector3<f64>,
    n_frames: usize,
    seed: u64,
    ranges: &TrajectoryRanges,
) -> Result<(TrajectorySpec, Vec<Pose>), TrajectoryError> {
    if n_frames < 2 {
        return Err(TrajectoryError::TooFewFrames(n_frames));
    }
    let spec = TrajectorySpec {
        mode: TrajectoryMode::Static,
        lookat: arr(lookat),
        start: arr(&start.center()),
        waypoints: Vec::new(),
        n_frames,
        seed,
        initial_distance: (start.center() - lookat).norm(),
        path_length: 0.0,
        interpolation: INTERPOLATION.into(),
        attempts: 0,
        ranges: *ranges,
    };
    Ok((spec, vec![*start; n_frames]))
}

/// Draws a moving trajectory from `start`: 1–3 waypoints, total arc length
/// uniform in `path_length_factor × |start − lookat|`, every frame looking at
/// `lookat`. Frame 0 is `start` itself.
pub fn sample_trajectory(
    start: &Pose,
    lookat: &Vector3<f64>,
    n_frames: usize,
    seed: u64,
    ranges: &TrajectoryRanges,
) -> Result<(TrajectorySpec, Vec<Pose>), TrajectoryError> {
    ranges.validate()?;
    if n_frames < 2 {
        return Err(TrajectoryError::TooFewFrames(n_frames));
    }
    let eye = start.center();
    let d0 = (eye - lookat).norm();
    if !(d0 > 0.0) {
        return Err(GeometryError::DegenerateLookAt.into());
    }
    // local frame at the start: radial (away from subject), horizontal tangent, vertical tangent
    let radial = (eye - lookat) / d0;
    let mut horizontal = Vector3::z().cross(&radial);
    if horizontal.norm() < 1e-9 {
        horizontal = Vector3::x();
    }
    let horizontal = horizontal.normalize();
    let vertical = radial.cross(&horizontal);

    let mut r = rng::stream(seed, 0x7124);
    let mut last_rejection = Rejection::DegeneratePath;
    for attempt in 1..=ranges.max_attempts {
        let count = r.random_range(ranges.waypoints[0]..=ranges.waypoints[1]);
        let factor = rng::uniform(&mut r, ranges.path_length_factor[0], ranges.path_length_factor[1]);
        let target_length = factor * d0;

        // unscaled offsets from the start; radial motion dominates, lateral
        // and vertical motion are damped to respect the yaw/pitch limits
        let mut offsets = Vec::with_capacity(count);
        let mut acc = Vector3::zeros();
        for _ in 0..count {
            let step = radial * r.random_range(-1.0..=1.0) + horizontal * (0.3 * r.random_range(-1.0..=1.0)) + vertical * (0.5 * r.random_range(-1.0..=1.0));
            acc += step;
            offsets.push(acc);
        }
        let mut raw = vec![eye];
        raw.extend(offsets.iter().map(|o| eye + o));
        let Some(unit_path) = CatmullRomPath::new(&raw) else {
            last_rejection = Rejection::DegeneratePath;
            continue;
        };
        if unit_path.segments() != count || !(unit_path.length() > 1e-9) {
            last_rejection = Rejection::DegeneratePath;
            continue;
        }
        // arc length scales linearly with offsets about the start
        let scale = target_length / unit_path.length();
        let control: Vec<Vector3<f64>> = core::iter::once(eye).chain(offsets.iter().map(|o| eye + o * scale)).collect();
        let positions = interpolate(&control, n_frames)?;
        let mut poses = look_at_poses(&positions, lookat)?;
        poses[0] = *start;
        if let Err(why) = check_poses(&poses, lookat, ranges) {
            last_rejection = why;
            continue;
        }
        let path_length = CatmullRomPath::new(&control).map_or(0.0, |p| p.length());
        let spec = TrajectorySpec {
            mode: TrajectoryMode::Moving,
            lookat: arr(lookat),
            start: arr(&eye),
            waypoints: control[1..].iter().map(arr).collect(),
            n_frames,
            seed,
            initial_distance: d0,
            path_length,
            interpolation: INTERPOLATION.into(),
            attempts: attempt,
            ranges: *ranges,
        };
        return Ok((spec, poses));
    }
    Err(TrajectoryError::Exhausted { attempts: ranges.max_attempts, last_rejection, initial_distance: d0 })
}

/// Rebuilds the per-frame poses of a recorded trajectory.
pub fn replay(spec: &TrajectorySpec, start: &Pose) -> Result<Vec<Pose>, TrajectoryError> {
    let lookat = v3(spec.lookat);
    match spec.mode {
        TrajectoryMode::Static => Ok(vec![*start; spec.n_frames]),
        TrajectoryMode::Moving => {
            let control: Vec<Vector3<f64>> = core::iter::once(v3(spec.start)).chain(spec.waypoints.iter().map(|w| v3(*w))).collect();
            let mut poses = look_at_poses(&interpolate(&control, spec.n_frames)?, &lookat)?;
            poses[0] = *start;
            Ok(poses)
        }
    }
}

/// Seed of trajectory `index` within a set drawn from `seed`.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    // splitmix64 finalizer
    let mut z = seed.wrapping_add((index + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// A camera set sharing one start: trajectory 0 is static when
/// `static_first`, the rest are moving trajectories from the same start.
pub fn sample_trajectory_set(
    lookat: &Vector3<f64>,
    n_frames: usize,
    seed: u64,
    count: usize,
    static_first: bool,
    ranges: &TrajectoryRanges,
) -> Result<Vec<(TrajectorySpec, Vec<Pose>)>, TrajectoryError> {
    let start = sample_start(lookat, ranges, seed)?;
    (0..count)
        .map(|j| {
            let s = derive_seed(seed, j as u64);
            if j == 0 && static_first {
                static_trajectory(&start.pose, lookat, n_frames, s, ranges)
            } else {
                sample_trajectory(&start.pose, lookat, n_frames, s, ranges)
            }
        })
        .collect()
}
