//! Global scale/shift alignment of a relative depth video to a metric one in
//! inverse-depth space.
//!
//! Minimizes `Σ_t Σ_px (1/X − (s/D + b))²` over all pixels valid in both
//! videos with a closed-form least-squares solve. The sums run in two passes
//! (means, then centered moments) with Neumaier-compensated accumulators, so
//! the result does not depend on pixel or frame order beyond rounding of the
//! final values.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::frame::DepthFrame;

/// Depths outside this open interval (meters) are excluded from the fit.
pub const MIN_FIT_DEPTH: f64 = 1e-4;
pub const MAX_FIT_DEPTH: f64 = 1e6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AlignError {
    #[error("relative and metric sequences differ in length ({relative} vs {metric})")]
    LengthMismatch { relative: usize, metric: usize },
    #[error("frame {frame} dimensions differ between relative and metric depth")]
    ShapeMismatch { frame: usize },
    #[error("no pixel is valid in both sequences")]
    NoData,
    #[error("relative depth has fewer than two distinct inverse-depth values; scale is unidentifiable")]
    DegenerateFit,
}

/// Fitted inverse-depth affine map `1/X ≈ s/D + b`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlignmentResult {
    pub s: f64,
    /// Inverse meters.
    pub b: f64,
    /// RMS of inverse-depth residuals over the fitted pixels.
    pub residual: f64,
    pub n_pixels: u64,
}

impl AlignmentResult {
    pub const IDENTITY: AlignmentResult = AlignmentResult { s: 1.0, b: 0.0, residual: 0.0, n_pixels: 0 };

    /// Aligned depth for one relative depth value, `None` when the mapped
    /// inverse depth is not positive.
    #[inline]
    pub fn map_depth(&self, d: f64) -> Option<f64> {
        // the identity must return the input bit for bit
        if self.s == 1.0 && self.b == 0.0 {
            return (d > 0.0).then_some(d);
        }
        let inv = self.s / d + self.b;
        (inv > 0.0).then(|| 1.0 / inv)
    }
}

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn merge(&mut self, other: &CompensatedSum) {
        self.add(other.sum);
        self.add(other.comp);
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

#[inline]
fn fit_depth_ok(d: f64) -> bool {
    d > MIN_FIT_DEPTH && d < MAX_FIT_DEPTH
}

fn check_inputs(relative: &[DepthFrame], metric: &[DepthFrame]) -> Result<(), AlignError> {
    if relative.len() != metric.len() {
        return Err(AlignError::LengthMismatch { relative: relative.len(), metric: metric.len() });
    }
    for (frame, (r, m)) in relative.iter().zip(metric).enumerate() {
        if !r.same_shape(m) {
            return Err(AlignError::ShapeMismatch { frame });
        }
    }
    Ok(())
}

/// `(1/D, 1/X)` pairs of one frame that enter the fit.
fn inverse_pairs<'a>(r: &'a DepthFrame, m: &'a DepthFrame) -> impl Iterator<Item = (f64, f64)> + 'a {
    (0..r.len()).filter_map(move |i| match (r.depth(i), m.depth(i)) {
        (Some(d), Some(x)) if fit_depth_ok(d) && fit_depth_ok(x) => Some((1.0 / d, 1.0 / x)),
        _ => None,
    })
}

/// Least-squares `(s, b)` over every pixel valid in both sequences.
pub fn fit_scale_shift(relative: &[DepthFrame], metric: &[DepthFrame]) -> Result<AlignmentResult, AlignError> {
    check_inputs(relative, metric)?;

    // pass 1: counts, means and the spread of 1/D
    let mut n: u64 = 0;
    let (mut sx, mut sy) = (CompensatedSum::default(), CompensatedSum::default());
    let (mut xmin, mut xmax) = (f64::INFINITY, f64::NEG_INFINITY);
    for (r, m) in relative.iter().zip(metric) {
        for (x, y) in inverse_pairs(r, m) {
            n += 1;
            sx.add(x);
            sy.add(y);
            xmin = xmin.min(x);
            xmax = xmax.max(x);
        }
    }
    if n == 0 {
        return Err(AlignError::NoData);
    }
    if !(xmax > xmin) {
        return Err(AlignError::DegenerateFit);
    }
    let nf = n as f64;
    let (mx, my) = (sx.value() / nf, sy.value() / nf);

    // pass 2: centered second moments
    let (mut sxx, mut sxy) = (CompensatedSum::default(), CompensatedSum::default());
    for (r, m) in relative.iter().zip(metric) {
        for (x, y) in inverse_pairs(r, m) {
            let dx = x - mx;
            sxx.add(dx * dx);
            sxy.add(dx * (y - my));
        }
    }
    let sxx = sxx.value();
    if !(sxx > 0.0) {
        return Err(AlignError::DegenerateFit);
    }
    let s = sxy.value() / sxx;
    let b = my - s * mx;

    // pass 3: residual
    let mut ss = CompensatedSum::default();
    for (r, m) in relative.iter().zip(metric) {
        for (x, y) in inverse_pairs(r, m) {
            let e = y - (s * x + b);
            ss.add(e * e);
        }
    }
    let residual = libm::sqrt(ss.value().max(0.0) / nf);
    Ok(AlignmentResult { s, b, residual, n_pixels: n })
}

/// Maps relative depth through a fitted alignment: `d' = 1 / (s/d + b)`.
/// Pixels whose mapped inverse depth is not positive become invalid.
pub fn apply_alignment(frame: &DepthFrame, result: &AlignmentResult) -> DepthFrame {
    frame.map_valid(|d| result.map_depth(d).unwrap_or(f64::NAN))
}

/// Applies [`apply_alignment`] to every frame.
pub fn apply_alignment_all(frames: &[DepthFrame], result: &AlignmentResult) -> Vec<DepthFrame> {
    frames.iter().map(|f| apply_alignment(f, result)).collect()
}
