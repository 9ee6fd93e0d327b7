//! 8-bit PNG frames: RGB images, {0, 255} masks and a 16-bit depth import.
//!
//! Every writer uses the same filter and compression level so identical
//! frames always produce identical bytes.

use std::fs;
use std::io::BufReader;
use std::path::Path;

use depthwarp_core::{DepthFrame, MaskFrame, RgbFrame};
use png::{BitDepth, ColorType, Compression, Filter, Transformations};

use crate::FormatError;

/// Raw decoded image.
struct Decoded {
    width: usize,
    height: usize,
    color: ColorType,
    depth: BitDepth,
    data: Vec<u8>,
}

fn decode_reader<R: std::io::BufRead + std::io::Seek>(path: &Path, r: R) -> Result<Decoded, FormatError> {
    let mut decoder = png::Decoder::new(r);
    decoder.set_transformations(Transformations::IDENTITY);
    let mut reader = decoder.read_info().map_err(|e| FormatError::Png { path: path.to_path_buf(), reason: e.to_string() })?;
    let size =
        reader.output_buffer_size().ok_or_else(|| FormatError::DimensionOverflow { path: path.to_path_buf(), what: "image".into(), value: usize::MAX })?;
    let mut data = vec![0u8; size];
    let info = reader.next_frame(&mut data).map_err(|e| FormatError::Png { path: path.to_path_buf(), reason: e.to_string() })?;
    data.truncate(info.buffer_size());
    Ok(Decoded { width: info.width as usize, height: info.height as usize, color: info.color_type, depth: info.bit_depth, data })
}

fn decode_file(path: &Path) -> Result<Decoded, FormatError> {
    let f = fs::File::open(path).map_err(|e| FormatError::io(path, e))?;
    decode_reader(path, BufReader::new(f))
}

/// Width and height without decoding pixels.
pub fn read_info(path: &Path) -> Result<(usize, usize), FormatError> {
    let f = fs::File::open(path).map_err(|e| FormatError::io(path, e))?;
    let reader = png::Decoder::new(BufReader::new(f)).read_info().map_err(|e| FormatError::Png { path: path.to_path_buf(), reason: e.to_string() })?;
    let info = reader.info();
    Ok((info.width as usize, info.height as usize))
}

fn bit_depth_bits(d: BitDepth) -> u8 {
    d as u8
}

fn expect_format(path: &Path, img: &Decoded, color: ColorType, depth: BitDepth) -> Result<(), FormatError> {
    if img.depth != depth {
        return Err(FormatError::BitDepth { path: path.to_path_buf(), expected: bit_depth_bits(depth), found: bit_depth_bits(img.depth) });
    }
    if img.color != color {
        return Err(FormatError::ColorType { path: path.to_path_buf(), expected: format!("{color:?}"), found: format!("{:?}", img.color) });
    }
    Ok(())
}

/// Encodes an 8- or 16-bit image with the fixed filter and compression.
pub fn encode(width: usize, height: usize, color: ColorType, depth: BitDepth, data: &[u8]) -> Result<Vec<u8>, png::EncodingError> {
    let mut out = Vec::new();
    {
        let mut enc = png::Encoder::new(&mut out, width as u32, height as u32);
        enc.set_color(color);
        enc.set_depth(depth);
        enc.set_filter(Filter::Sub);
        enc.set_compression(Compression::Fast);
        let mut writer = enc.write_header()?;
        writer.write_image_data(data)?;
        writer.finish()?;
    }
    Ok(out)
}

fn write_file(path: &Path, width: usize, height: usize, color: ColorType, depth: BitDepth, data: &[u8]) -> Result<(), FormatError> {
    let bytes = encode(width, height, color, depth, data).map_err(|e| FormatError::Png { path: path.to_path_buf(), reason: e.to_string() })?;
    fs::write(path, bytes).map_err(|e| FormatError::io(path, e))
}

pub fn read_rgb_png(path: &Path) -> Result<RgbFrame, FormatError> {
    let img = decode_file(path)?;
    expect_format(path, &img, ColorType::Rgb, BitDepth::Eight)?;
    Ok(RgbFrame::new(img.width, img.height, img.data)?)
}

pub fn write_rgb_png(frame: &RgbFrame, path: &Path) -> Result<(), FormatError> {
    write_file(path, frame.width(), frame.height(), ColorType::Rgb, BitDepth::Eight, frame.data())
}

/// Reads an 8-bit grayscale mask; only 0 and 255 are accepted.
pub fn read_mask_png(path: &Path) -> Result<MaskFrame, FormatError> {
    let img = decode_file(path)?;
    expect_format(path, &img, ColorType::Grayscale, BitDepth::Eight)?;
    let mut values = Vec::with_capacity(img.data.len());
    for (index, &v) in img.data.iter().enumerate() {
        match v {
            0 => values.push(0),
            255 => values.push(1),
            _ => return Err(FormatError::MaskValue { path: path.to_path_buf(), index, value: v }),
        }
    }
    Ok(MaskFrame::new(img.width, img.height, values)?)
}

pub fn write_mask_png(mask: &MaskFrame, path: &Path) -> Result<(), FormatError> {
    let data: Vec<u8> = mask.values().iter().map(|&v| if v != 0 { 255 } else { 0 }).collect();
    write_file(path, mask.width(), mask.height(), ColorType::Grayscale, BitDepth::Eight, &data)
}

/// Imports a 16-bit grayscale depth PNG as `value · scale` meters; zero
/// marks a missing measurement.
pub fn read_depth_png16(path: &Path, scale: f64) -> Result<DepthFrame, FormatError> {
    let img = decode_file(path)?;
    expect_format(path, &img, ColorType::Grayscale, BitDepth::Sixteen)?;
    let values = img.data.chunks_exact(2).map(|b| f64::from(u16::from_be_bytes([b[0], b[1]])) * scale).collect();
    Ok(DepthFrame::from_values(img.width, img.height, values)?)
}

/// Writes a 16-bit grayscale depth PNG, `round(d / scale)` with invalid or
/// out-of-range pixels stored as 0.
pub fn write_depth_png16(frame: &DepthFrame, scale: f64, path: &Path) -> Result<(), FormatError> {
    let mut data = Vec::with_capacity(frame.len() * 2);
    for i in 0..frame.len() {
        let q = frame.depth(i).map_or(0.0, |d| (d / scale).round());
        let q = if (1.0..=65535.0).contains(&q) { q as u16 } else { 0 };
        data.extend_from_slice(&q.to_be_bytes());
    }
    write_file(path, frame.width(), frame.height(), ColorType::Grayscale, BitDepth::Sixteen, &data)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Cursor;

    #[test]
    fn encoder_is_deterministic() {
        let data: Vec<u8> = (0..48).map(|i| (i * 37 % 256) as u8).collect();
        let a = encode(4, 4, ColorType::Rgb, BitDepth::Eight, &data).unwrap();
        let b = encode(4, 4, ColorType::Rgb, BitDepth::Eight, &data).unwrap();
        assert_eq!(a, b);
        let img = decode_reader(Path::new("mem"), Cursor::new(&a)).unwrap();
        assert_eq!(img.data, data);
    }
}
