//! Pinhole intrinsics, rigid camera poses, projection and unprojection.

use nalgebra::{Matrix3, Rotation3, Vector3};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Tag written next to every serialized pose: camera-to-world, camera axes
/// x-right / y-down / z-forward.
pub const CONVENTION: &str = "c2w_xr_yd_zf";

/// Largest accepted deviation of `RᵀR` from identity (max abs entry) and of
/// `det R` from one when a pose is constructed from raw numbers.
pub const ORTHONORMAL_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("point is at or behind the camera (z = {z})")]
    BehindCamera { z: f64 },
    #[error("depth must be positive, got {depth}")]
    NonPositiveDepth { depth: f64 },
    #[error("invalid intrinsics: {0}")]
    InvalidIntrinsics(&'static str),
    #[error("rotation is not orthonormal (deviation {deviation:e})")]
    NotOrthonormal { deviation: f64 },
    #[error("pose contains non-finite values")]
    NonFinite,
    #[error("look-at target coincides with the eye position")]
    DegenerateLookAt,
}

/// Pinhole intrinsics in pixels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Intrinsics {
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
    pub width: usize,
    pub height: usize,
}

impl Intrinsics {
    pub fn new(fx: f64, fy: f64, cx: f64, cy: f64, width: usize, height: usize) -> Result<Self, GeometryError> {
        let k = Self { fx, fy, cx, cy, width, height };
        k.validate()?;
        Ok(k)
    }

    /// Square pixels, centered principal point and the given horizontal field of view.
    pub fn from_horizontal_fov(width: usize, height: usize, hfov_deg: f64) -> Result<Self, GeometryError> {
        if !(hfov_deg > 0.0 && hfov_deg < 180.0) {
            return Err(GeometryError::InvalidIntrinsics("field of view must lie in (0, 180) degrees"));
        }
        let f = 0.5 * width as f64 / libm::tan(0.5 * hfov_deg.to_radians());
        Self::new(f, f, 0.5 * width as f64, 0.5 * height as f64, width, height)
    }

    pub fn validate(&self) -> Result<(), GeometryError> {
        if self.width == 0 || self.height == 0 {
            return Err(GeometryError::InvalidIntrinsics("image size must be non-zero"));
        }
        if !(self.fx.is_finite() && self.fy.is_finite() && self.fx > 0.0 && self.fy > 0.0) {
            return Err(GeometryError::InvalidIntrinsics("focal lengths must be positive"));
        }
        if !(self.cx >= 0.0 && self.cx < self.width as f64 && self.cy >= 0.0 && self.cy < self.height as f64) {
            return Err(GeometryError::InvalidIntrinsics("principal point must lie inside the image"));
        }
        Ok(())
    }

    /// Camera-frame ray through pixel `(u, v)` with unit z component.
    #[inline]
    pub fn ray(&self, u: f64, v: f64) -> Vector3<f64> {
        Vector3::new((u - self.cx) / self.fx, (v - self.cy) / self.fy, 1.0)
    }
}

/// Pixel coordinates plus camera-frame depth.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Projection {
    pub u: f64,
    pub v: f64,
    pub z: f64,
}

pub fn project(point: &Vector3<f64>, k: &Intrinsics) -> Result<Projection, GeometryError> {
    let z = point.z;
    if !(z > 0.0) {
        return Err(GeometryError::BehindCamera { z });
    }
    Ok(Projection { u: k.fx * point.x / z + k.cx, v: k.fy * point.y / z + k.cy, z })
}

pub fn unproject(u: f64, v: f64, depth: f64, k: &Intrinsics) -> Result<Vector3<f64>, GeometryError> {
    if !(depth > 0.0) {
        return Err(GeometryError::NonPositiveDepth { depth });
    }
    Ok(Vector3::new((u - k.cx) / k.fx * depth, (v - k.cy) / k.fy * depth, depth))
}

/// Rigid camera-to-world transform: `p_world = R · p_cam + t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pose {
    rotation: Matrix3<f64>,
    translation: Vector3<f64>,
}

impl Pose {
    pub fn new(rotation: Matrix3<f64>, translation: Vector3<f64>) -> Result<Self, GeometryError> {
        if rotation.iter().chain(translation.iter()).any(|v| !v.is_finite()) {
            return Err(GeometryError::NonFinite);
        }
        let deviation = orthonormality_error(&rotation);
        if deviation > ORTHONORMAL_TOLERANCE {
            return Err(GeometryError::NotOrthonormal { deviation });
        }
        Ok(Self { rotation, translation })
    }

    pub fn from_rotation(rotation: Rotation3<f64>, translation: Vector3<f64>) -> Self {
        Self { rotation: rotation.into_inner(), translation }
    }

    pub fn identity() -> Self {
        Self { rotation: Matrix3::identity(), translation: Vector3::zeros() }
    }

    /// Camera at `eye` whose optical axis passes through `target`; roll is
    /// fixed so that the camera x axis stays horizontal with respect to `up`.
    pub fn look_at(eye: &Vector3<f64>, target: &Vector3<f64>, up: &Vector3<f64>) -> Result<Self, GeometryError> {
        let d = target - eye;
        let len = d.norm();
        if !(len > 0.0) || !len.is_finite() {
            return Err(GeometryError::DegenerateLookAt);
        }
        let forward = d / len;
        let mut right = forward.cross(up);
        if right.norm() < 1e-9 {
            // looking straight along `up`: pick any horizontal reference
            let alt = if forward.x.abs() < 0.9 { Vector3::x() } else { Vector3::y() };
            right = forward.cross(&alt.cross(&forward));
        }
        let right = right.normalize();
        let down = forward.cross(&right);
        let rotation = Matrix3::from_columns(&[right, down, forward]);
        Ok(Self { rotation, translation: *eye })
    }

    pub fn rotation(&self) -> &Matrix3<f64> {
        &self.rotation
    }

    pub fn translation(&self) -> &Vector3<f64> {
        &self.translation
    }

    /// Camera center in world coordinates.
    pub fn center(&self) -> Vector3<f64> {
        self.translation
    }

    /// Optical axis in world coordinates.
    pub fn forward(&self) -> Vector3<f64> {
        self.rotation.column(2).into_owned()
    }

    pub fn inverse(&self) -> Self {
        let rt = self.rotation.transpose();
        Self { rotation: rt, translation: -(rt * self.translation) }
    }

    /// `self ∘ other`: applies `other` first.
    pub fn compose(&self, other: &Pose) -> Self {
        Self { rotation: self.rotation * other.rotation, translation: self.rotation * other.translation + self.translation }
    }

    #[inline]
    pub fn to_world(&self, p_cam: &Vector3<f64>) -> Vector3<f64> {
        self.rotation * p_cam + self.translation
    }

    #[inline]
    pub fn to_camera(&self, p_world: &Vector3<f64>) -> Vector3<f64> {
        self.rotation.tr_mul(&(p_world - self.translation))
    }

    pub fn orthonormality_error(&self) -> f64 {
        orthonormality_error(&self.rotation)
    }
}

/// `max(|RᵀR − I|_max, |det R − 1|)`.
pub fn orthonormality_error(r: &Matrix3<f64>) -> f64 {
    let gram = r.transpose() * r - Matrix3::identity();
    let off = gram.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    off.max((r.determinant() - 1.0).abs())
}

/// Re-expresses a point given in the `from` camera frame in the `to` camera frame.
pub fn transform_point(point: &Vector3<f64>, from: &Pose, to: &Pose) -> Vector3<f64> {
    to.to_camera(&from.to_world(point))
}
