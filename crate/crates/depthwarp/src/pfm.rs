//! Grayscale PFM depth files.
//!
//! Only the single-channel `Pf` variant is accepted. Writers always emit
//! little-endian data (scale `-1.0`) with rows stored bottom to top, as the
//! format prescribes. Values are 32-bit; reading widens them to f64 and
//! writing narrows them back, so a read→write cycle is bitwise exact.

use std::fs;
use std::io::Write;
use std::path::Path;

use depthwarp_core::DepthFrame;

use crate::FormatError;

/// Largest accepted width or height.
pub const MAX_DIMENSION: usize = 1 << 16;

/// Parsed PFM header: dimensions, byte order and the payload offset.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PfmHeader {
    pub width: usize,
    pub height: usize,
    pub little_endian: bool,
    pub data_offset: usize,
}

fn malformed(path: &Path, reason: impl Into<String>) -> FormatError {
    FormatError::Malformed { path: path.to_path_buf(), reason: reason.into() }
}

/// Splits the next whitespace-delimited token starting at `pos`; returns the
/// token and the index of the single whitespace byte that ends it.
fn token(bytes: &[u8], mut pos: usize) -> Option<(&[u8], usize)> {
    while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
        pos += 1;
    }
    let start = pos;
    while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
        pos += 1;
    }
    (pos > start && pos < bytes.len()).then(|| (&bytes[start..pos], pos))
}

fn parse_dimension(path: &Path, tok: &[u8], what: &str) -> Result<usize, FormatError> {
    let s = std::str::from_utf8(tok).map_err(|_| malformed(path, format!("{what} is not ASCII")))?;
    let n: usize = s.parse().map_err(|_| malformed(path, format!("{what} `{s}` is not a positive integer")))?;
    if n == 0 {
        return Err(malformed(path, format!("{what} is zero")));
    }
    if n > MAX_DIMENSION {
        return Err(FormatError::DimensionOverflow { path: path.to_path_buf(), what: what.to_string(), value: n });
    }
    Ok(n)
}

/// Parses the header of an in-memory PFM file.
pub fn parse_header(path: &Path, bytes: &[u8]) -> Result<PfmHeader, FormatError> {
    let (magic, end) = token(bytes, 0).ok_or_else(|| malformed(path, "truncated header"))?;
    match magic {
        b"Pf" => {}
        b"PF" => return Err(FormatError::Unsupported { path: path.to_path_buf(), what: "color PFM (PF)".into() }),
        _ => return Err(malformed(path, "missing Pf magic")),
    }
    let (w, end) = token(bytes, end).ok_or_else(|| malformed(path, "truncated header"))?;
    let width = parse_dimension(path, w, "width")?;
    let (h, end) = token(bytes, end).ok_or_else(|| malformed(path, "truncated header"))?;
    let height = parse_dimension(path, h, "height")?;
    let (scale, end) = token(bytes, end).ok_or_else(|| malformed(path, "truncated header"))?;
    let scale: f64 = std::str::from_utf8(scale)
        .ok()
        .and_then(|s| s.parse().ok())
        .filter(|s: &f64| s.is_finite() && *s != 0.0)
        .ok_or_else(|| malformed(path, "scale must be a finite nonzero number"))?;
    Ok(PfmHeader { width, height, little_endian: scale < 0.0, data_offset: end + 1 })
}

/// Reads only the header of a PFM file.
pub fn read_header(path: &Path) -> Result<PfmHeader, FormatError> {
    use std::io::Read;
    let mut buf = vec![0u8; 128];
    let mut f = fs::File::open(path).map_err(|e| FormatError::io(path, e))?;
    let n = f.read(&mut buf).map_err(|e| FormatError::io(path, e))?;
    buf.truncate(n);
    parse_header(path, &buf)
}

/// Decodes an in-memory PFM file; non-positive and non-finite values come
/// back as invalid pixels with their raw value kept.
pub fn decode(path: &Path, bytes: &[u8]) -> Result<DepthFrame, FormatError> {
    let header = parse_header(path, bytes)?;
    let (w, h) = (header.width, header.height);
    let expected = w * h * 4;
    let payload = &bytes[header.data_offset..];
    if payload.len() != expected {
        return Err(malformed(path, format!("payload is {} bytes, expected {expected} for {w}x{h}", payload.len())));
    }
    let mut values = vec![0.0f64; w * h];
    for (row, chunk) in payload.chunks_exact(w * 4).enumerate() {
        let y = h - 1 - row;
        for (x, b) in chunk.chunks_exact(4).enumerate() {
            let b = [b[0], b[1], b[2], b[3]];
            let v = if header.little_endian { f32::from_le_bytes(b) } else { f32::from_be_bytes(b) };
            values[y * w + x] = f64::from(v);
        }
    }
    Ok(DepthFrame::from_values(w, h, values)?)
}

/// Encodes a depth frame as little-endian `Pf`.
pub fn encode(frame: &DepthFrame) -> Vec<u8> {
    let (w, h) = (frame.width(), frame.height());
    let header = format!("Pf\n{w} {h}\n-1.0\n");
    let mut out = Vec::with_capacity(header.len() + w * h * 4);
    out.extend_from_slice(header.as_bytes());
    for y in (0..h).rev() {
        for &v in &frame.values()[y * w..(y + 1) * w] {
            out.extend_from_slice(&(v as f32).to_le_bytes());
        }
    }
    out
}

pub fn read_depth_pfm(path: &Path) -> Result<DepthFrame, FormatError> {
    let bytes = fs::read(path).map_err(|e| FormatError::io(path, e))?;
    decode(path, &bytes)
}

pub fn write_depth_pfm(frame: &DepthFrame, path: &Path) -> Result<(), FormatError> {
    let mut f = fs::File::create(path).map_err(|e| FormatError::io(path, e))?;
    f.write_all(&encode(frame)).map_err(|e| FormatError::io(path, e))
}
