//! Camera accuracy of an estimated trajectory against ground truth.
//!
//! All three metrics are accumulated (summed) over frames:
//!
//! - `rot_err`: `Σ arccos((tr(R̃ Rᵀ) − 1) / 2)` in radians, argument clamped to `[−1, 1]`.
//! - `trans_err`: `Σ ‖T̃ − T‖₂` in meters.
//! - `cam_mc`: `Σ ‖[R̃|T̃] − [R|T]‖_F` over the 3×4 camera-to-world matrices.
//!
//! An optional 7-DoF similarity pre-alignment (Umeyama) maps the estimate onto
//! the ground truth before scoring.

use alloc::string::String;
use alloc::vec::Vec;

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::Pose;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricsError {
    #[error("trajectories differ in length ({gt} ground-truth vs {est} estimated frames)")]
    LengthMismatch { gt: usize, est: usize },
    #[error("similarity alignment needs at least 3 frames, got {0}")]
    TooFewFrames(usize),
    #[error("estimated camera centers are all identical; similarity is undefined")]
    DegenerateTrajectory,
}

fn check_lengths(gt: &[Pose], est: &[Pose]) -> Result<(), MetricsError> {
    if gt.len() != est.len() {
        return Err(MetricsError::LengthMismatch { gt: gt.len(), est: est.len() });
    }
    Ok(())
}

/// Geodesic angle between two rotations, radians.
#[inline]
/// Angle of `est · gtᵀ`. Equal to `acos(clamp((tr − 1) / 2))` for rotations,
/// evaluated as `atan2(|skew|, tr − 1)` so small angles keep full precision.
pub fn rotation_angle(gt: &Matrix3<f64>, est: &Matrix3<f64>) -> f64 {
    if gt == est {
        return 0.0;
    }
    let r = est * gt.transpose();
    let skew = Vector3::new(r[(2, 1)] - r[(1, 2)], r[(0, 2)] - r[(2, 0)], r[(1, 0)] - r[(0, 1)]);
    let sin2 = skew.norm();
    libm::atan2(sin2, r.trace() - 1.0)
}

pub fn rot_err(gt: &[Pose], est: &[Pose]) -> Result<f64, MetricsError> {
    check_lengths(gt, est)?;
    Ok(gt.iter().zip(est).map(|(g, e)| rotation_angle(g.rotation(), e.rotation())).sum())
}

pub fn trans_err(gt: &[Pose], est: &[Pose]) -> Result<f64, MetricsError> {
    check_lengths(gt, est)?;
    Ok(gt.iter().zip(est).map(|(g, e)| (e.translation() - g.translation()).norm()).sum())
}

pub fn cam_mc(gt: &[Pose], est: &[Pose]) -> Result<f64, MetricsError> {
    check_lengths(gt, est)?;
    Ok(gt
        .iter()
        .zip(est)
        .map(|(g, e)| {
            let dr = (e.rotation() - g.rotation()).norm_squared();
            let dt = (e.translation() - g.translation()).norm_squared();
            libm::sqrt(dr + dt)
        })
        .sum())
}

/// `x ↦ scale · R · x + t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Similarity {
    pub scale: f64,
    /// Row-major rotation.
    pub rotation: [f64; 9],
    pub translation: [f64; 3],
    /// True when the estimated camera centers span fewer than two dimensions,
    /// so the rotation is only a best orthogonal fit.
    pub rank_deficient: bool,
}

impl Similarity {
    pub fn rotation_matrix(&self) -> Matrix3<f64> {
        Matrix3::from_row_slice(&self.rotation)
    }

    pub fn apply(&self, pose: &Pose) -> Pose {
        let r = self.rotation_matrix();
        let t = Vector3::from_row_slice(&self.translation);
        Pose::from_rotation(nalgebra::Rotation3::from_matrix_unchecked(r * pose.rotation()), self.scale * (r * pose.translation()) + t)
    }
}

/// Closed-form similarity minimizing `Σ ‖s·R·T̃ᵢ + t − Tᵢ‖²` (Umeyama).
pub fn fit_similarity(gt: &[Pose], est: &[Pose]) -> Result<Similarity, MetricsError> {
    check_lengths(gt, est)?;
    let n = gt.len();
    if n < 3 {
        return Err(MetricsError::TooFewFrames(n));
    }
    let nf = n as f64;
    let mu_x = est.iter().map(|p| p.translation()).sum::<Vector3<f64>>() / nf;
    let mu_y = gt.iter().map(|p| p.translation()).sum::<Vector3<f64>>() / nf;
    let mut var_x = 0.0;
    let mut cov = Matrix3::zeros();
    for (g, e) in gt.iter().zip(est) {
        let dx = e.translation() - mu_x;
        let dy = g.translation() - mu_y;
        var_x += dx.norm_squared();
        cov += dy * dx.transpose();
    }
    var_x /= nf;
    cov /= nf;
    if !(var_x > 0.0) {
        return Err(MetricsError::DegenerateTrajectory);
    }
    let svd = cov.svd(true, true);
    let (u, v_t) = (svd.u.expect("u requested"), svd.v_t.expect("v_t requested"));
    let d = svd.singular_values;
    let mut s = Matrix3::identity();
    if u.determinant() * v_t.determinant() < 0.0 {
        s[(2, 2)] = -1.0;
    }
    let r = u * s * v_t;
    let scale = (d[0] * s[(0, 0)] + d[1] * s[(1, 1)] + d[2] * s[(2, 2)]) / var_x;
    let t = mu_y - scale * (r * mu_x);
    let tol = d.max() * 1e-9;
    let rank = d.iter().filter(|&&x| x > tol).count();
    let mut rotation = [0.0; 9];
    for i in 0..3 {
        for j in 0..3 {
            rotation[i * 3 + j] = r[(i, j)];
        }
    }
    Ok(Similarity { scale, rotation, translation: [t.x, t.y, t.z], rank_deficient: rank < 2 })
}

/// Maps `est` onto `gt` with the best similarity transform.
pub fn similarity_align(gt: &[Pose], est: &[Pose]) -> Result<(Vec<Pose>, Similarity), MetricsError> {
    let sim = fit_similarity(gt, est)?;
    Ok((est.iter().map(|p| sim.apply(p)).collect(), sim))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AlignmentMode {
    None,
    Sim7,
}

/// Metric report. The `rs`, `ifs`, `mat_pix`, `clip_v` and `vbench` slots are
/// reserved for scores produced by external tools and stay `None` here.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CameraAccuracyReport {
    pub rot_err: f64,
    pub trans_err: f64,
    pub cam_mc: f64,
    pub n_frames: usize,
    pub alignment_mode: AlignmentMode,
    pub alignment: Option<Similarity>,
    pub warnings: Vec<String>,
    pub rs: Option<f64>,
    pub ifs: Option<f64>,
    pub mat_pix: Option<f64>,
    pub clip_v: Option<f64>,
    pub vbench: Option<f64>,
}

pub fn evaluate(gt: &[Pose], est: &[Pose], mode: AlignmentMode) -> Result<CameraAccuracyReport, MetricsError> {
    check_lengths(gt, est)?;
    let mut warnings = Vec::new();
    let (aligned, alignment) = match mode {
        AlignmentMode::None => (est.to_vec(), None),
        AlignmentMode::Sim7 => {
            let (a, sim) = similarity_align(gt, est)?;
            if sim.rank_deficient {
                warnings.push("estimated camera centers are collinear; rotation about the line is unconstrained".into());
            }
            (a, Some(sim))
        }
    };
    Ok(CameraAccuracyReport {
        rot_err: rot_err(gt, &aligned)?,
        trans_err: trans_err(gt, &aligned)?,
        cam_mc: cam_mc(gt, &aligned)?,
        n_frames: gt.len(),
        alignment_mode: mode,
        alignment,
        warnings,
        rs: None,
        ifs: None,
        mat_pix: None,
        clip_v: None,
        vbench: None,
    })
}
