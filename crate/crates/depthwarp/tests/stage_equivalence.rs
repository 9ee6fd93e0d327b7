//! File-based stages must reproduce the in-memory core functions exactly.

use std::path::{Path, PathBuf};

use depthwarp::config::Resolution;
use depthwarp::manifest::Provenance;
use depthwarp::stages::{encode_stage, frame_name, synth_stage, warp_stage, SynthOptions};
use depthwarp::{read_cameras, read_depth_pfm, read_mask_png, read_rgb_png};
use depthwarp_core::encode::{encode_depth_video, AugmentRanges, ColormapLut};
use depthwarp_core::raster::{warp_depth_sequence, WarpParams, DEFAULT_FAR, DEFAULT_NEAR};
use depthwarp_core::DepthFrame;

const FRAMES: usize = 4;

fn dataset(dir: &Path) -> PathBuf {
    let opts = SynthOptions { scenes: 1, cams: 2, frames: FRAMES, resolution: Resolution { height: 36, width: 64 }, hfov_deg: 60.0, seed: 11 };
    let pairs = synth_stage(&opts, dir, |_, _| {}).unwrap().remove(0);
    pairs.parent().unwrap().to_path_buf()
}

fn read_seq(dir: &Path) -> Vec<DepthFrame> {
    (0..FRAMES).map(|i| read_depth_pfm(&dir.join(frame_name(i, "pfm"))).unwrap()).collect()
}

fn params() -> WarpParams {
    WarpParams::default()
}

fn run_warp(scene: &Path, out: &Path) {
    warp_stage(&scene.join("cam_00"), &scene.join("cam_00/cams.json"), &scene.join("cam_01/cams.json"), out, &params(), None, Provenance::new("warp")).unwrap();
}

#[test]
fn warp_stage_matches_core_sequence() {
    let dir = tempfile::tempdir().unwrap();
    let scene = dataset(dir.path());
    let out = dir.path().join("warp");
    run_warp(&scene, &out);

    let depth = read_seq(&scene.join("cam_00/depth"));
    let src = read_cameras(&scene.join("cam_00/cams.json")).unwrap();
    let tgt = read_cameras(&scene.join("cam_01/cams.json")).unwrap();
    let expected = warp_depth_sequence(&depth, &src.intrinsics, &src.poses, &tgt.poses, &params()).unwrap();
    for (i, e) in expected.iter().enumerate() {
        let d = read_depth_pfm(&out.join("depth").join(frame_name(i, "pfm"))).unwrap();
        let m = read_mask_png(&out.join("mask").join(frame_name(i, "png"))).unwrap();
        assert_eq!(m, e.mask, "mask of frame {i}");
        assert_eq!(d.validity(), e.depth.validity(), "coverage of frame {i}");
        for (a, b) in d.values().iter().zip(e.depth.values()) {
            // files hold 32-bit samples
            assert_eq!(a.to_bits(), f64::from(*b as f32).to_bits());
        }
    }
    assert_eq!(read_cameras(&out.join("cams.json")).unwrap(), tgt);
}

#[test]
fn encode_stage_matches_core_video_bitwise() {
    let dir = tempfile::tempdir().unwrap();
    let scene = dataset(dir.path());
    let warp = dir.path().join("warp");
    run_warp(&scene, &warp);
    let warped = read_seq(&warp.join("depth"));
    let lut = ColormapLut::spectral_r();

    for augment in [None, Some((77u64, AugmentRanges::default()))] {
        let out = dir.path().join(if augment.is_some() { "enc_aug" } else { "enc" });
        let summary = encode_stage(&warp, &warp, &out, DEFAULT_NEAR, DEFAULT_FAR, augment, false, Provenance::new("encode")).unwrap();
        let expected = encode_depth_video(&warped, DEFAULT_NEAR, DEFAULT_FAR, &lut, augment).unwrap();
        assert_eq!(summary.sidecar.augment, expected.augment);
        assert_eq!(summary.sidecar.norm_min.to_bits(), expected.normalizer.norm_min.to_bits());
        assert_eq!(summary.sidecar.norm_max.to_bits(), expected.normalizer.norm_max.to_bits());
        for (i, e) in expected.frames.iter().enumerate() {
            let rgb = read_rgb_png(&out.join("encoded").join(frame_name(i, "png"))).unwrap();
            assert_eq!(rgb, e.rgb, "frame {i}");
            assert_eq!(summary.sidecar.clamped[i], e.clamped);
        }
    }
}
