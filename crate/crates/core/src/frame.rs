//! Row-major image grids: metric depth with validity, binary masks and 8-bit RGB.

use alloc::vec;
use alloc::vec::Vec;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FrameError {
    #[error("frame dimensions must be non-zero, got {width}x{height}")]
    EmptyFrame { width: usize, height: usize },
    #[error("expected {expected} values for the frame, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },
    #[error("pixel {index} is marked valid but holds depth {value}")]
    InvalidDepth { index: usize, value: f64 },
    #[error("mask value {value} at pixel {index} is not 0 or 1")]
    InvalidMaskValue { index: usize, value: u8 },
}

fn check_dims(width: usize, height: usize, len: usize) -> Result<(), FrameError> {
    if width == 0 || height == 0 {
        return Err(FrameError::EmptyFrame { width, height });
    }
    let expected = width * height;
    if len != expected {
        return Err(FrameError::LengthMismatch { expected, actual: len });
    }
    Ok(())
}

/// True when `d` can be used as a depth sample.
#[inline]
pub fn is_usable_depth(d: f64) -> bool {
    d.is_finite() && d > 0.0
}

/// Metric depth in meters along the camera z axis, with a per-pixel validity mask.
///
/// Raw values of invalid pixels are kept as-is (they may be zero, negative or
/// non-finite) so that file round-trips stay bitwise exact; every consumer
/// must check [`DepthFrame::is_valid`] first.
#[derive(Debug, Clone, PartialEq)]
pub struct DepthFrame {
    width: usize,
    height: usize,
    values: Vec<f64>,
    valid: Vec<bool>,
}

impl DepthFrame {
    /// Builds a frame, marking every finite positive value valid.
    pub fn from_values(width: usize, height: usize, values: Vec<f64>) -> Result<Self, FrameError> {
        check_dims(width, height, values.len())?;
        let valid = values.iter().map(|&d| is_usable_depth(d)).collect();
        Ok(Self { width, height, values, valid })
    }

    /// Builds a frame with an explicit validity mask. Valid pixels must hold a
    /// finite positive depth.
    pub fn with_validity(width: usize, height: usize, values: Vec<f64>, valid: Vec<bool>) -> Result<Self, FrameError> {
        check_dims(width, height, values.len())?;
        check_dims(width, height, valid.len())?;
        for (index, (&d, &ok)) in values.iter().zip(&valid).enumerate() {
            if ok && !is_usable_depth(d) {
                return Err(FrameError::InvalidDepth { index, value: d });
            }
        }
        Ok(Self { width, height, values, valid })
    }

    pub fn filled(width: usize, height: usize, depth: f64) -> Result<Self, FrameError> {
        Self::from_values(width, height, vec![depth; width * height])
    }

    /// A frame with no valid pixel.
    pub fn empty(width: usize, height: usize) -> Result<Self, FrameError> {
        Self::from_values(width, height, vec![0.0; width * height])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Raw stored values, including those of invalid pixels.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn validity(&self) -> &[bool] {
        &self.valid
    }

    #[inline]
    pub fn is_valid(&self, index: usize) -> bool {
        self.valid[index]
    }

    /// Depth at a linear index, `None` when invalid.
    #[inline]
    pub fn depth(&self, index: usize) -> Option<f64> {
        if self.valid[index] {
            Some(self.values[index])
        } else {
            None
        }
    }

    #[inline]
    pub fn at(&self, x: usize, y: usize) -> Option<f64> {
        self.depth(y * self.width + x)
    }

    pub fn valid_count(&self) -> usize {
        self.valid.iter().filter(|&&v| v).count()
    }

    /// Iterates `(index, depth)` over valid pixels.
    pub fn iter_valid(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.values.iter().zip(&self.valid).enumerate().filter_map(|(i, (&d, &ok))| ok.then_some((i, d)))
    }

    pub fn same_shape(&self, other: &DepthFrame) -> bool {
        self.width == other.width && self.height == other.height
    }

    /// Applies `f` to every valid depth; results that are not usable depths
    /// invalidate the pixel.
    pub fn map_valid(&self, mut f: impl FnMut(f64) -> f64) -> DepthFrame {
        let mut values = self.values.clone();
        let mut valid = self.valid.clone();
        for i in 0..values.len() {
            if valid[i] {
                let d = f(values[i]);
                values[i] = d;
                valid[i] = is_usable_depth(d);
            }
        }
        DepthFrame { width: self.width, height: self.height, values, valid }
    }

    pub fn into_parts(self) -> (usize, usize, Vec<f64>, Vec<bool>) {
        (self.width, self.height, self.values, self.valid)
    }
}

/// Binary per-pixel mask with values in {0, 1}.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MaskFrame {
    width: usize,
    height: usize,
    values: Vec<u8>,
}

impl MaskFrame {
    pub fn new(width: usize, height: usize, values: Vec<u8>) -> Result<Self, FrameError> {
        check_dims(width, height, values.len())?;
        if let Some((index, &value)) = values.iter().enumerate().find(|(_, &v)| v > 1) {
            return Err(FrameError::InvalidMaskValue { index, value });
        }
        Ok(Self { width, height, values })
    }

    pub fn zeros(width: usize, height: usize) -> Result<Self, FrameError> {
        Self::new(width, height, vec![0; width * height])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn values(&self) -> &[u8] {
        &self.values
    }

    #[inline]
    pub fn is_set(&self, index: usize) -> bool {
        self.values[index] == 1
    }

    pub fn count_set(&self) -> usize {
        self.values.iter().filter(|&&v| v == 1).count()
    }
}

/// Interleaved 8-bit RGB image.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RgbFrame {
    width: usize,
    height: usize,
    data: Vec<u8>,
}

impl RgbFrame {
    pub fn new(width: usize, height: usize, data: Vec<u8>) -> Result<Self, FrameError> {
        if width == 0 || height == 0 {
            return Err(FrameError::EmptyFrame { width, height });
        }
        if data.len() != width * height * 3 {
            return Err(FrameError::LengthMismatch { expected: width * height * 3, actual: data.len() });
        }
        Ok(Self { width, height, data })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    #[inline]
    pub fn pixel(&self, index: usize) -> [u8; 3] {
        let o = index * 3;
        [self.data[o], self.data[o + 1], self.data[o + 2]]
    }

    pub fn into_data(self) -> Vec<u8> {
        self.data
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn from_values_marks_non_positive_and_non_finite_invalid() {
        let f = DepthFrame::from_values(2, 2, vec![1.0, 0.0, -2.0, f64::NAN]).unwrap();
        assert_eq!(f.validity(), &[true, false, false, false]);
        assert_eq!(f.valid_count(), 1);
        assert_eq!(f.at(0, 0), Some(1.0));
        assert_eq!(f.at(1, 1), None);
    }

    #[test]
    fn with_validity_rejects_bad_valid_pixel() {
        let err = DepthFrame::with_validity(1, 2, vec![1.0, f64::INFINITY], vec![true, true]).unwrap_err();
        assert!(matches!(err, FrameError::InvalidDepth { index: 1, .. }));
        // invalid pixels may hold anything
        assert!(DepthFrame::with_validity(1, 2, vec![1.0, f64::INFINITY], vec![true, false]).is_ok());
    }

    #[test]
    fn dimension_errors() {
        assert!(matches!(DepthFrame::from_values(0, 3, vec![]), Err(FrameError::EmptyFrame { .. })));
        assert!(matches!(DepthFrame::from_values(2, 2, vec![1.0; 3]), Err(FrameError::LengthMismatch { expected: 4, actual: 3 })));
        assert!(RgbFrame::new(2, 1, vec![0; 5]).is_err());
    }

    #[test]
    fn mask_rejects_non_binary() {
        assert!(matches!(MaskFrame::new(2, 1, vec![0, 255]), Err(FrameError::InvalidMaskValue { index: 1, value: 255 })));
        assert_eq!(MaskFrame::new(2, 1, vec![1, 1]).unwrap().count_set(), 2);
    }

    #[test]
    fn map_valid_invalidates_bad_results() {
        let f = DepthFrame::from_values(3, 1, vec![1.0, 2.0, 0.0]).unwrap();
        let g = f.map_valid(|d| d - 1.5);
        assert_eq!(g.validity(), &[false, true, false]);
        assert_eq!(g.at(1, 0), Some(0.5));
    }
}
