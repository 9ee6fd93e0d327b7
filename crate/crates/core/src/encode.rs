//! Depth to RGB encoding: near/far clipping, sequence-wide log-space
//! normalization, colormap lookup, and the random scale/shift augmentation
//! applied to raw depth before encoding.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::colormap_data::SPECTRAL_R;
use crate::frame::{DepthFrame, FrameError, RgbFrame};
use crate::rng;

/// Bounded number of (scale, shift) draws before augmentation gives up.
pub const MAX_AUGMENT_DRAWS: usize = 64;

/// Normalized value given to pixels that carry no depth at all.
pub const UNCOVERED_VALUE: f64 = 1.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EncodeError {
    #[error("depth sequence is empty")]
    EmptySequence,
    #[error("clip range must satisfy 0 < near < far, got near={near} far={far}")]
    InvalidClipRange { near: f64, far: f64 },
    #[error("colormap needs at least two entries with distinct endpoints")]
    InvalidLut,
    #[error("augmentation range {name} = [{lo}, {hi}] is invalid")]
    InvalidRange { name: &'static str, lo: f64, hi: f64 },
    #[error("no scale/shift draw kept depth positive after {draws} draws (sequence minimum {min_depth})")]
    AugmentExhausted { draws: usize, min_depth: f64 },
    #[error(transparent)]
    Frame(#[from] FrameError),
}

/// Piecewise-linear RGB colormap over `t ∈ [0, 1]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColormapLut {
    entries: Vec<[u8; 3]>,
}

impl ColormapLut {
    pub fn new(entries: Vec<[u8; 3]>) -> Result<Self, EncodeError> {
        if entries.len() < 2 || entries[0] == entries[entries.len() - 1] {
            return Err(EncodeError::InvalidLut);
        }
        Ok(Self { entries })
    }

    /// The embedded 256-entry reversed Spectral table.
    pub fn spectral_r() -> Self {
        Self { entries: SPECTRAL_R.to_vec() }
    }

    pub fn entries(&self) -> &[[u8; 3]] {
        &self.entries
    }

    /// Color at `t`; values outside `[0, 1]` (and NaN) are clamped. The flag
    /// reports whether clamping happened.
    pub fn lookup(&self, t: f64) -> ([u8; 3], bool) {
        let clamped = !(0.0..=1.0).contains(&t);
        let t = if t.is_nan() { 0.0 } else { t.clamp(0.0, 1.0) };
        let last = self.entries.len() - 1;
        let pos = t * last as f64;
        let i = (libm::floor(pos) as usize).min(last - 1);
        let f = pos - i as f64;
        let (a, b) = (self.entries[i], self.entries[i + 1]);
        let mut out = [0u8; 3];
        for c in 0..3 {
            let v = a[c] as f64 + (b[c] as f64 - a[c] as f64) * f;
            out[c] = libm::round(v).clamp(0.0, 255.0) as u8;
        }
        (out, clamped)
    }

    /// Inverse lookup: nearest table entry, refined by projecting onto its two
    /// neighbouring segments.
    /// Inverse of [`lookup`](Self::lookup): the position of the closest point
    /// on the piecewise-linear curve through the entries. Every segment is
    /// searched because the table has near-flat stretches where a rounded
    /// color is equidistant from non-adjacent entries.
    pub fn decode(&self, rgb: [u8; 3]) -> f64 {
        let q = rgb.map(|c| c as f64);
        let last = self.entries.len() - 1;
        let mut pos = 0.0;
        let mut best = f64::INFINITY;
        for seg in 0..last {
            let (a, b) = (self.entries[seg], self.entries[seg + 1]);
            let dir: [f64; 3] = core::array::from_fn(|c| b[c] as f64 - a[c] as f64);
            let len2: f64 = dir.iter().map(|d| d * d).sum();
            let f = if len2 == 0.0 { 0.0 } else { ((0..3).map(|c| (q[c] - a[c] as f64) * dir[c]).sum::<f64>() / len2).clamp(0.0, 1.0) };
            let d: f64 = (0..3)
                .map(|c| {
                    let e = a[c] as f64 + f * dir[c] - q[c];
                    e * e
                })
                .sum();
            if d < best {
                best = d;
                pos = seg as f64 + f;
            }
        }
        pos / last as f64
    }

    pub fn contains(&self, rgb: [u8; 3]) -> bool {
        // gamut = per-channel hull of the table
        (0..3).all(|c| {
            let lo = self.entries.iter().map(|e| e[c]).min().unwrap_or(0);
            let hi = self.entries.iter().map(|e| e[c]).max().unwrap_or(255);
            (lo..=hi).contains(&rgb[c])
        })
    }
}

impl Default for ColormapLut {
    fn default() -> Self {
        Self::spectral_r()
    }
}

/// Scalar frame in `[0, 1]` with the validity of the depth it came from.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedFrame {
    pub width: usize,
    pub height: usize,
    pub values: Vec<f64>,
    pub valid: Vec<bool>,
}

/// Log-space normalization fitted over a whole sequence.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogNormalizer {
    pub near: f64,
    pub far: f64,
    /// Smallest clipped depth over the sequence (meters).
    pub norm_min: f64,
    /// Largest clipped depth over the sequence (meters).
    pub norm_max: f64,
}

impl LogNormalizer {
    fn check_clip(near: f64, far: f64) -> Result<(), EncodeError> {
        if !(near > 0.0 && far > near) {
            return Err(EncodeError::InvalidClipRange { near, far });
        }
        Ok(())
    }

    /// Builds the normalizer from the raw (unclipped) depth range of a
    /// sequence. A sequence with no valid pixel falls back to `[near, far]`.
    pub fn from_raw_range(raw_min: f64, raw_max: f64, near: f64, far: f64) -> Result<Self, EncodeError> {
        Self::check_clip(near, far)?;
        let (norm_min, norm_max) = if raw_min <= raw_max { (raw_min.clamp(near, far), raw_max.clamp(near, far)) } else { (near, far) };
        Ok(Self { near, far, norm_min, norm_max })
    }

    pub fn fit(frames: &[DepthFrame], near: f64, far: f64) -> Result<Self, EncodeError> {
        if frames.is_empty() {
            return Err(EncodeError::EmptySequence);
        }
        let (lo, hi) = frames.iter().map(depth_range).fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), (c, d)| (a.min(c), b.max(d)));
        Self::from_raw_range(lo, hi, near, far)
    }

    /// Normalized value of one raw depth; constant sequences map to 0.5.
    #[inline]
    pub fn normalize(&self, d: f64) -> f64 {
        let lo = libm::log(self.norm_min);
        let hi = libm::log(self.norm_max);
        if !(hi > lo) {
            return 0.5;
        }
        let v = (libm::log(d.clamp(self.near, self.far)) - lo) / (hi - lo);
        v.clamp(0.0, 1.0)
    }

    pub fn normalize_frame(&self, frame: &DepthFrame) -> NormalizedFrame {
        let values = (0..frame.len()).map(|i| frame.depth(i).map_or(UNCOVERED_VALUE, |d| self.normalize(d))).collect();
        NormalizedFrame { width: frame.width(), height: frame.height(), values, valid: frame.validity().to_vec() }
    }
}

/// `(min, max)` over valid pixels; `(+inf, -inf)` when none is valid.
pub fn depth_range(frame: &DepthFrame) -> (f64, f64) {
    frame.iter_valid().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), (_, d)| (lo.min(d), hi.max(d)))
}

/// Clips to `[near, far]` and maps each depth to `[0, 1]` in log space using
/// the minimum and maximum clipped depth of the whole sequence.
pub fn normalize_log(frames: &[DepthFrame], near: f64, far: f64) -> Result<(Vec<NormalizedFrame>, LogNormalizer), EncodeError> {
    let norm = LogNormalizer::fit(frames, near, far)?;
    Ok((frames.iter().map(|f| norm.normalize_frame(f)).collect(), norm))
}

/// Colormap lookup of every pixel. Returns the image and the number of
/// out-of-range values that were clamped.
pub fn colorize(normalized: &NormalizedFrame, lut: &ColormapLut) -> Result<(RgbFrame, usize), EncodeError> {
    let mut data = Vec::with_capacity(normalized.values.len() * 3);
    let mut clamped = 0;
    for &v in &normalized.values {
        let (rgb, c) = lut.lookup(v);
        clamped += c as usize;
        data.extend_from_slice(&rgb);
    }
    Ok((RgbFrame::new(normalized.width, normalized.height, data)?, clamped))
}

/// Sampling ranges of the depth augmentation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AugmentRanges {
    pub scale: [f64; 2],
    /// Meters.
    pub shift: [f64; 2],
}

impl Default for AugmentRanges {
    fn default() -> Self {
        Self { scale: [0.8, 1.25], shift: [-0.2, 0.2] }
    }
}

impl AugmentRanges {
    fn validate(&self) -> Result<(), EncodeError> {
        let [slo, shi] = self.scale;
        if !(slo > 0.0 && shi >= slo && shi.is_finite()) {
            return Err(EncodeError::InvalidRange { name: "scale", lo: slo, hi: shi });
        }
        let [tlo, thi] = self.shift;
        if !(tlo.is_finite() && thi.is_finite() && thi >= tlo) {
            return Err(EncodeError::InvalidRange { name: "shift", lo: tlo, hi: thi });
        }
        Ok(())
    }
}

/// One drawn augmentation: `d' = scale · d + shift`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AugmentParams {
    pub seed: u64,
    pub scale: f64,
    pub shift: f64,
    pub ranges: AugmentRanges,
}

impl AugmentParams {
    /// Draws `(scale, shift)` for a sequence whose smallest valid depth is
    /// `min_depth`, redrawing while the shifted minimum would not be positive.
    pub fn draw(seed: u64, min_depth: f64, ranges: &AugmentRanges) -> Result<Self, EncodeError> {
        ranges.validate()?;
        let mut r = rng::stream(seed, 0xA11);
        for _ in 0..MAX_AUGMENT_DRAWS {
            let scale = rng::uniform(&mut r, ranges.scale[0], ranges.scale[1]);
            let shift = rng::uniform(&mut r, ranges.shift[0], ranges.shift[1]);
            if !min_depth.is_finite() || scale * min_depth + shift > 0.0 {
                return Ok(Self { seed, scale, shift, ranges: *ranges });
            }
        }
        Err(EncodeError::AugmentExhausted { draws: MAX_AUGMENT_DRAWS, min_depth })
    }

    #[inline]
    pub fn apply_depth(&self, d: f64) -> f64 {
        self.scale * d + self.shift
    }

    pub fn apply(&self, frame: &DepthFrame) -> DepthFrame {
        frame.map_valid(|d| self.apply_depth(d))
    }
}

/// Random affine depth augmentation, one `(scale, shift)` per sequence.
pub fn augment_scale_shift(frames: &[DepthFrame], seed: u64, ranges: &AugmentRanges) -> Result<(Vec<DepthFrame>, AugmentParams), EncodeError> {
    let min_depth = frames.iter().map(|f| depth_range(f).0).fold(f64::INFINITY, f64::min);
    let params = AugmentParams::draw(seed, min_depth, ranges)?;
    Ok((frames.iter().map(|f| params.apply(f)).collect(), params))
}

/// Colorized depth video with the normalization that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct EncodedFrame {
    pub rgb: RgbFrame,
    pub clamped: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EncodedDepthVideo {
    pub frames: Vec<EncodedFrame>,
    pub normalizer: LogNormalizer,
    pub augment: Option<AugmentParams>,
}

/// Optional augmentation, then normalization and colorization of a whole
/// depth video.
pub fn encode_depth_video(
    frames: &[DepthFrame],
    near: f64,
    far: f64,
    lut: &ColormapLut,
    augment: Option<(u64, AugmentRanges)>,
) -> Result<EncodedDepthVideo, EncodeError> {
    let (frames, augment) = match augment {
        Some((seed, ranges)) => {
            let (f, p) = augment_scale_shift(frames, seed, &ranges)?;
            (f, Some(p))
        }
        None => (frames.to_vec(), None),
    };
    let (normalized, normalizer) = normalize_log(&frames, near, far)?;
    let frames = normalized.iter().map(|n| colorize(n, lut).map(|(rgb, clamped)| EncodedFrame { rgb, clamped })).collect::<Result<_, _>>()?;
    Ok(EncodedDepthVideo { frames, normalizer, augment })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use rand::{Rng, SeedableRng};

    fn seq(values: &[f64]) -> Vec<DepthFrame> {
        vec![DepthFrame::from_values(values.len(), 1, values.to_vec()).unwrap()]
    }

    #[test]
    fn endpoints_and_log_midpoint() {
        let mid = libm::sqrt(0.5 * 100.0);
        let (n, norm) = normalize_log(&seq(&[0.1, 0.5, mid, 100.0, 250.0]), 0.5, 100.0).unwrap();
        assert_eq!(norm.norm_min, 0.5);
        assert_eq!(norm.norm_max, 100.0);
        let v = &n[0].values;
        assert_eq!(v[0], 0.0);
        assert_eq!(v[1], 0.0);
        assert!((v[2] - 0.5).abs() < 1e-12);
        assert_eq!(v[3], 1.0);
        assert_eq!(v[4], 1.0);
    }

    #[test]
    fn constant_sequence_maps_to_half() {
        let (n, _) = normalize_log(&seq(&[3.0, 3.0, 3.0]), 0.5, 100.0).unwrap();
        assert!(n[0].values.iter().all(|&v| v == 0.5));
    }

    #[test]
    fn min_max_taken_over_whole_sequence() {
        let frames = vec![DepthFrame::from_values(2, 1, vec![1.0, 2.0]).unwrap(), DepthFrame::from_values(2, 1, vec![4.0, 0.0]).unwrap()];
        let (n, norm) = normalize_log(&frames, 0.5, 100.0).unwrap();
        assert_eq!((norm.norm_min, norm.norm_max), (1.0, 4.0));
        assert_eq!(n[0].values[0], 0.0);
        assert!((n[0].values[1] - 0.5).abs() < 1e-15);
        assert_eq!(n[1].values[0], 1.0);
        assert_eq!(n[1].values[1], UNCOVERED_VALUE);
        assert!(!n[1].valid[1]);
    }

    #[test]
    fn normalize_errors() {
        assert_eq!(normalize_log(&[], 0.5, 100.0).unwrap_err(), EncodeError::EmptySequence);
        assert!(matches!(normalize_log(&seq(&[1.0]), 0.0, 100.0), Err(EncodeError::InvalidClipRange { .. })));
    }

    #[test]
    fn lut_endpoints() {
        let lut = ColormapLut::spectral_r();
        assert_eq!(lut.entries().len(), 256);
        assert_eq!(lut.lookup(0.0).0, lut.entries()[0]);
        assert_eq!(lut.lookup(1.0).0, lut.entries()[255]);
        assert_ne!(lut.entries()[0], lut.entries()[255]);
        assert_eq!(lut.lookup(1.5), (lut.entries()[255], true));
        assert_eq!(lut.lookup(-0.1), (lut.entries()[0], true));
        assert!(ColormapLut::new(vec![[1, 2, 3]]).is_err());
        assert!(ColormapLut::new(vec![[1, 2, 3], [1, 2, 3]]).is_err());
    }

    #[test]
    fn colorize_counts_clamps() {
        let n = NormalizedFrame { width: 3, height: 1, values: vec![0.0, 2.0, -1.0], valid: vec![true; 3] };
        let (img, clamped) = colorize(&n, &ColormapLut::spectral_r()).unwrap();
        assert_eq!(clamped, 2);
        assert_eq!(img.pixel(1), ColormapLut::spectral_r().entries()[255]);
    }

    #[test]
    fn decode_round_trip_within_half_step() {
        let lut = ColormapLut::spectral_r();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        let mut worst = 0.0f64;
        for i in 0..=20_000 {
            let v = if i < 10_000 { i as f64 / 10_000.0 } else { rng.random_range(0.0..=1.0) };
            let back = lut.decode(lut.lookup(v).0);
            worst = worst.max((back - v).abs());
        }
        // exact bound is half a step; allow for rounding in the subtraction
        assert!(worst <= 1.0 / 510.0 + 1e-15, "worst decode error {worst}");
    }

    #[test]
    fn augment_examples() {
        let s = seq(&[3.0, 4.0]);
        let (id, p) = augment_scale_shift(&s, 9, &AugmentRanges { scale: [1.0, 1.0], shift: [0.0, 0.0] }).unwrap();
        assert_eq!(id, s);
        assert_eq!((p.scale, p.shift), (1.0, 0.0));
        let (dbl, _) = augment_scale_shift(&s, 9, &AugmentRanges { scale: [2.0, 2.0], shift: [0.0, 0.0] }).unwrap();
        assert_eq!(dbl[0].at(0, 0), Some(6.0));
        let r = AugmentRanges::default();
        let a = augment_scale_shift(&s, 42, &r).unwrap();
        let b = augment_scale_shift(&s, 42, &r).unwrap();
        assert_eq!(a, b);
        assert!(a.1.scale >= 0.8 && a.1.scale <= 1.25 && a.1.shift.abs() <= 0.2);
    }

    #[test]
    fn augment_redraws_or_fails() {
        // shift always pushes the minimum negative
        let s = seq(&[0.1, 5.0]);
        let err = augment_scale_shift(&s, 1, &AugmentRanges { scale: [1.0, 1.0], shift: [-1.0, -0.5] }).unwrap_err();
        assert!(matches!(err, EncodeError::AugmentExhausted { .. }));
        // half the shift range is acceptable: draws succeed and stay positive
        for seed in 0..50 {
            let (out, p) = augment_scale_shift(&s, seed, &AugmentRanges { scale: [1.0, 1.0], shift: [-0.2, 0.2] }).unwrap();
            assert!(p.shift > -0.1);
            assert_eq!(out[0].valid_count(), 2);
        }
        assert!(augment_scale_shift(&s, 1, &AugmentRanges { scale: [0.0, 1.0], shift: [0.0, 0.0] }).is_err());
    }
}
