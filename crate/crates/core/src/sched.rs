//! Rectified-flow noising, velocity targets and the dual-stream token layout.
//!
//! Tensors are dense row-major `[batch, frames, tokens, channels]`. Everything
//! here is elementwise or a copy, so results are exact up to one rounding.

use alloc::vec::Vec;
use core::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SchedError {
    #[error("dimensions must be positive, got {0:?}")]
    ZeroDim([usize; 4]),
    #[error("expected {expected} values for dims {dims:?}, got {got}")]
    LengthMismatch { dims: [usize; 4], expected: usize, got: usize },
    #[error("dimension mismatch: {0:?} vs {1:?}")]
    DimMismatch([usize; 4], [usize; 4]),
    #[error("t = {0} outside [0, 1]")]
    TimeOutOfRange(f64),
    #[error("cannot split {0} frames into two equal streams")]
    OddFrames(usize),
    #[error("logit-normal scale must be positive and finite, got {0}")]
    InvalidScale(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatentTensor {
    dims: [usize; 4],
    values: Vec<f64>,
}

impl LatentTensor {
    pub fn new(dims: [usize; 4], values: Vec<f64>) -> Result<Self, SchedError> {
        if dims.contains(&0) {
            return Err(SchedError::ZeroDim(dims));
        }
        let expected = dims.iter().product();
        if values.len() != expected {
            return Err(SchedError::LengthMismatch { dims, expected, got: values.len() });
        }
        Ok(Self { dims, values })
    }

    pub fn zeros(dims: [usize; 4]) -> Result<Self, SchedError> {
        Self::new(dims, alloc::vec![0.0; dims.iter().product()])
    }

    pub fn scalar(v: f64) -> Self {
        Self { dims: [1; 4], values: alloc::vec![v] }
    }

    pub fn dims(&self) -> [usize; 4] {
        self.dims
    }

    pub fn frames(&self) -> usize {
        self.dims[1]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn get(&self, b: usize, f: usize, s: usize, d: usize) -> f64 {
        let [_, nf, ns, nd] = self.dims;
        self.values[((b * nf + f) * ns + s) * nd + d]
    }

    fn zip(&self, other: &Self, op: impl Fn(f64, f64) -> f64) -> Result<Self, SchedError> {
        if self.dims != other.dims {
            return Err(SchedError::DimMismatch(self.dims, other.dims));
        }
        let values = self.values.iter().zip(&other.values).map(|(&a, &b)| op(a, b)).collect();
        Ok(Self { dims: self.dims, values })
    }

    /// Frames `[start, end)` of every batch entry.
    pub fn slice_frames(&self, start: usize, end: usize) -> Result<Self, SchedError> {
        let [nb, nf, ns, nd] = self.dims;
        let end = end.min(nf);
        let dims = [nb, end.saturating_sub(start), ns, nd];
        if dims[1] == 0 {
            return Err(SchedError::ZeroDim(dims));
        }
        let block = ns * nd;
        let mut values = Vec::with_capacity(dims.iter().product());
        for b in 0..nb {
            let base = b * nf * block;
            values.extend_from_slice(&self.values[base + start * block..base + end * block]);
        }
        Ok(Self { dims, values })
    }
}

fn check_t(t: f64) -> Result<(), SchedError> {
    if (0.0..=1.0).contains(&t) {
        Ok(())
    } else {
        Err(SchedError::TimeOutOfRange(t))
    }
}

/// `x_t = (1 − t)·x + t·z`. The endpoints return `x` and `z` exactly.
pub fn noise_interp(x: &LatentTensor, z: &LatentTensor, t: f64) -> Result<LatentTensor, SchedError> {
    check_t(t)?;
    if t == 0.0 {
        return x.zip(z, |a, _| a);
    }
    if t == 1.0 {
        return x.zip(z, |_, b| b);
    }
    x.zip(z, |a, b| (1.0 - t) * a + t * b)
}

/// Flow-matching velocity `z − x`.
pub fn velocity_target(x: &LatentTensor, z: &LatentTensor) -> Result<LatentTensor, SchedError> {
    x.zip(z, |a, b| b - a)
}

/// Recovers `(x, z)` from a noised sample and its velocity.
pub fn reconstruct(x_t: &LatentTensor, v: &LatentTensor, t: f64) -> Result<(LatentTensor, LatentTensor), SchedError> {
    check_t(t)?;
    Ok((x_t.zip(v, |a, b| a - t * b)?, x_t.zip(v, |a, b| a + (1.0 - t) * b)?))
}

/// Concatenates along frames, source stream first: `(b,f,s,d) × 2 → (b,2f,s,d)`.
pub fn dual_stream_concat(x_s: &LatentTensor, x_t: &LatentTensor) -> Result<LatentTensor, SchedError> {
    if x_s.dims != x_t.dims {
        return Err(SchedError::DimMismatch(x_s.dims, x_t.dims));
    }
    let [nb, nf, ns, nd] = x_s.dims;
    let stride = nf * ns * nd;
    let mut values = Vec::with_capacity(2 * nb * stride);
    for b in 0..nb {
        values.extend_from_slice(&x_s.values[b * stride..(b + 1) * stride]);
        values.extend_from_slice(&x_t.values[b * stride..(b + 1) * stride]);
    }
    Ok(LatentTensor { dims: [nb, 2 * nf, ns, nd], values })
}

/// Inverse of [`dual_stream_concat`]: `(source, target)`.
pub fn dual_stream_split(joint: &LatentTensor) -> Result<(LatentTensor, LatentTensor), SchedError> {
    let f = joint.frames();
    if !f.is_multiple_of(2) {
        return Err(SchedError::OddFrames(f));
    }
    Ok((joint.slice_frames(0, f / 2)?, joint.slice_frames(f / 2, f)?))
}

/// Adds view tokens onto the noised target tokens.
pub fn view_inject(x_t: &LatentTensor, x_v: &LatentTensor) -> Result<LatentTensor, SchedError> {
    x_t.zip(x_v, |a, b| a + b)
}

/// Loss weight ω(t). The default is constant 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TimestepWeighting {
    #[default]
    Constant,
    /// Density of `sigmoid(N(mean, std²))` evaluated at t.
    LogitNormal { mean: f64, std: f64 },
}

impl TimestepWeighting {
    pub fn validate(&self) -> Result<(), SchedError> {
        match *self {
            TimestepWeighting::Constant => Ok(()),
            TimestepWeighting::LogitNormal { std, .. } if std > 0.0 && std.is_finite() => Ok(()),
            TimestepWeighting::LogitNormal { std, .. } => Err(SchedError::InvalidScale(std)),
        }
    }

    pub fn weight(&self, t: f64) -> Result<f64, SchedError> {
        check_t(t)?;
        self.validate()?;
        Ok(match *self {
            TimestepWeighting::Constant => 1.0,
            TimestepWeighting::LogitNormal { mean, std } => {
                if t == 0.0 || t == 1.0 {
                    return Ok(0.0);
                }
                let logit = libm::log(t / (1.0 - t));
                let u = (logit - mean) / std;
                libm::exp(-0.5 * u * u) / (std * libm::sqrt(2.0 * PI) * t * (1.0 - t))
            }
        })
    }
}

/// Weighted flow-matching loss, returned with the weight that was applied.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightedLoss {
    pub weight: f64,
    pub mse: f64,
    pub loss: f64,
}

/// `ω(t) · mean((pred − (z − x))²)`.
pub fn flow_matching_loss(pred: &LatentTensor, x: &LatentTensor, z: &LatentTensor, t: f64, weighting: &TimestepWeighting) -> Result<WeightedLoss, SchedError> {
    let weight = weighting.weight(t)?;
    let target = velocity_target(x, z)?;
    let diff = pred.zip(&target, |a, b| a - b)?;
    let mse = diff.values.iter().map(|d| d * d).sum::<f64>() / diff.values.len() as f64;
    Ok(WeightedLoss { weight, mse, loss: weight * mse })
}
