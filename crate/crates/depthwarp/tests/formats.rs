use std::fs;

use depthwarp::pfm::{read_header, MAX_DIMENSION};
use depthwarp::png_io::{encode, write_depth_png16};
use depthwarp::{read_depth_pfm, read_depth_png16, read_mask_png, read_rgb_png, write_depth_pfm, write_mask_png, write_rgb_png, FormatError};
use depthwarp_core::{DepthFrame, MaskFrame, RgbFrame};
use png::{BitDepth, ColorType};

#[test]
fn pfm_file_round_trip_is_bitwise() {
    let dir = tempfile::tempdir().unwrap();
    let (w, h) = (7, 5);
    // f32-representable values plus invalid ones
    let v: Vec<f64> = (0..w * h)
        .map(|i| match i % 9 {
            0 => 0.0,
            1 => f64::NAN,
            2 => -3.5,
            _ => f64::from(0.1f32 * (i as f32 + 1.0)),
        })
        .collect();
    let frame = DepthFrame::from_values(w, h, v).unwrap();
    let a = dir.path().join("a.pfm");
    let b = dir.path().join("b.pfm");
    write_depth_pfm(&frame, &a).unwrap();
    let back = read_depth_pfm(&a).unwrap();
    assert_eq!(back.validity(), frame.validity());
    for (x, y) in back.values().iter().zip(frame.values()) {
        assert_eq!(x.to_bits(), y.to_bits());
    }
    write_depth_pfm(&back, &b).unwrap();
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    let hd = read_header(&a).unwrap();
    assert_eq!((hd.width, hd.height, hd.little_endian), (w, h, true));
}

#[test]
fn hand_written_pfm_header() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("x.pfm");
    let mut bytes = b"Pf\n2 2\n-1.0\n".to_vec();
    for v in [1.0f32, 2.0, 3.0, 4.0] {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    fs::write(&p, &bytes).unwrap();
    let f = read_depth_pfm(&p).unwrap();
    assert_eq!((f.width(), f.height()), (2, 2));
    assert_eq!(f.values(), &[3.0, 4.0, 1.0, 2.0]);
}

#[test]
fn pfm_errors_name_the_problem() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("c.pfm");
    fs::write(&p, b"PF\n1 1\n-1.0\n000000000000").unwrap();
    let e = read_depth_pfm(&p).unwrap_err();
    assert!(matches!(e, FormatError::Unsupported { .. }));
    assert!(e.to_string().contains("c.pfm"));
    fs::write(&p, format!("Pf\n{} 2\n-1.0\n", MAX_DIMENSION + 1)).unwrap();
    assert!(matches!(read_depth_pfm(&p).unwrap_err(), FormatError::DimensionOverflow { .. }));
    assert!(matches!(read_depth_pfm(&dir.path().join("missing.pfm")).unwrap_err(), FormatError::Io { .. }));
}

#[test]
fn mask_of_ones_is_all_255_and_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("m.png");
    let mask = MaskFrame::new(5, 3, vec![1; 15]).unwrap();
    write_mask_png(&mask, &p).unwrap();
    let raw = png::Decoder::new(std::io::BufReader::new(fs::File::open(&p).unwrap()));
    let mut reader = raw.read_info().unwrap();
    let mut buf = vec![0; reader.output_buffer_size().unwrap()];
    reader.next_frame(&mut buf).unwrap();
    assert!(buf.iter().all(|&v| v == 255));
    assert_eq!(read_mask_png(&p).unwrap(), mask);

    let mixed = MaskFrame::new(4, 1, vec![0, 1, 1, 0]).unwrap();
    write_mask_png(&mixed, &p).unwrap();
    assert_eq!(read_mask_png(&p).unwrap(), mixed);
}

#[test]
fn mask_rejects_other_gray_levels() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("g.png");
    fs::write(&p, encode(2, 1, ColorType::Grayscale, BitDepth::Eight, &[0, 128]).unwrap()).unwrap();
    assert!(matches!(read_mask_png(&p).unwrap_err(), FormatError::MaskValue { index: 1, value: 128, .. }));
}

#[test]
fn rgb_round_trip_is_bitwise_and_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let data: Vec<u8> = (0..6 * 4 * 3).map(|i| (i * 53 % 251) as u8).collect();
    let img = RgbFrame::new(6, 4, data).unwrap();
    let (a, b) = (dir.path().join("a.png"), dir.path().join("b.png"));
    write_rgb_png(&img, &a).unwrap();
    write_rgb_png(&img, &b).unwrap();
    assert_eq!(read_rgb_png(&a).unwrap(), img);
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
}

#[test]
fn sixteen_bit_input_is_an_explicit_error() {
    let dir = tempfile::tempdir().unwrap();
    let gray16 = dir.path().join("g16.png");
    fs::write(&gray16, encode(2, 2, ColorType::Grayscale, BitDepth::Sixteen, &[0; 8]).unwrap()).unwrap();
    assert!(matches!(read_mask_png(&gray16).unwrap_err(), FormatError::BitDepth { expected: 8, found: 16, .. }));
    let rgb16 = dir.path().join("rgb16.png");
    fs::write(&rgb16, encode(1, 1, ColorType::Rgb, BitDepth::Sixteen, &[0; 6]).unwrap()).unwrap();
    assert!(matches!(read_rgb_png(&rgb16).unwrap_err(), FormatError::BitDepth { expected: 8, found: 16, .. }));
    // an 8-bit grayscale image is not an RGB frame
    let gray8 = dir.path().join("g8.png");
    fs::write(&gray8, encode(1, 1, ColorType::Grayscale, BitDepth::Eight, &[255]).unwrap()).unwrap();
    assert!(matches!(read_rgb_png(&gray8).unwrap_err(), FormatError::ColorType { .. }));
}

#[test]
fn sixteen_bit_depth_import() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("d16.png");
    let frame = DepthFrame::from_values(3, 1, vec![1.234, f64::NAN, 65.535]).unwrap();
    write_depth_png16(&frame, 1e-3, &p).unwrap();
    let back = read_depth_png16(&p, 1e-3).unwrap();
    assert!((back.values()[0] - 1.234).abs() < 1e-12);
    assert!(!back.is_valid(1));
    assert!((back.values()[2] - 65.535).abs() < 1e-12);
    assert!(matches!(read_depth_png16(&dir.path().join("nope.png"), 1e-3), Err(FormatError::Io { .. })));
}
