//! Random inputs shared by the oracle tests and the acceptance suite.

use depthwarp_core::mesh::WarpMesh;
use depthwarp_core::{build_mesh, DepthFrame, Intrinsics, Pose};
use nalgebra::{Rotation3, Unit, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_rotation(r: &mut ChaCha8Rng) -> Rotation3<f64> {
    let axis = Unit::new_normalize(Vector3::new(r.random_range(-1.0..1.0), r.random_range(-1.0..1.0), r.random_range(-1.0..1.0)));
    Rotation3::from_axis_angle(&axis, r.random_range(-3.1..3.1))
}

pub fn random_pose(r: &mut ChaCha8Rng) -> Pose {
    let t = Vector3::new(r.random_range(-5.0..5.0), r.random_range(-5.0..5.0), r.random_range(-5.0..5.0));
    Pose::from_rotation(random_rotation(r), t)
}

/// Relative and metric depth sequences with `1/X = s/D + b (+ noise)` on the
/// valid pixels; about 10% of pixels are invalid in one input or the other.
pub fn alignment_case(seed: u64, s: f64, b: f64, noise: f64) -> (Vec<DepthFrame>, Vec<DepthFrame>) {
    let mut r = rng(seed);
    let (w, h, frames) = (24, 16, 3);
    let mut rel = Vec::new();
    let mut met = Vec::new();
    // keep 1/X = s·(1/D) + b inside [0.02, 2]
    let lo = ((0.02 - b) / s).max(1e-3);
    let hi = (2.0 - b) / s;
    for _ in 0..frames {
        let mut dv = Vec::with_capacity(w * h);
        let mut xv = Vec::with_capacity(w * h);
        for _ in 0..w * h {
            let inv_d: f64 = r.random_range(lo..hi);
            let eps = if noise > 0.0 { noise * gaussian(&mut r) } else { 0.0 };
            let inv_x = s * inv_d + b + eps;
            let mut d = 1.0 / inv_d;
            let mut x = 1.0 / inv_x;
            match r.random_range(0..20) {
                0 => d = f64::NAN,
                1 => x = 0.0,
                _ => {}
            }
            dv.push(d);
            xv.push(x);
        }
        rel.push(DepthFrame::from_values(w, h, dv).unwrap());
        met.push(DepthFrame::from_values(w, h, xv).unwrap());
    }
    (rel, met)
}

/// Box–Muller standard normal.
pub fn gaussian(r: &mut ChaCha8Rng) -> f64 {
    let u1: f64 = r.random_range(f64::EPSILON..1.0);
    let u2: f64 = r.random_range(0.0..1.0);
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

pub fn oracle_camera() -> Intrinsics {
    Intrinsics::new(60.0, 60.0, 32.0, 32.0, 64, 64).unwrap()
}

/// Triangle soup in front of `pose`: triangle `j` lives in its own depth band,
/// so no two triangles intersect. Some triangles hang off screen.
pub fn soup_mesh(seed: u64, k: &Intrinsics, pose: &Pose) -> WarpMesh {
    let mut r = rng(seed);
    let n = 40;
    let mut vertices = Vec::with_capacity(3 * n);
    let mut triangles = Vec::with_capacity(n);
    let mut stretched = Vec::with_capacity(n);
    for j in 0..n {
        let band = 1.0 + 0.25 * j as f64;
        loop {
            let pts: Vec<(f64, f64, f64)> =
                (0..3).map(|_| (r.random_range(-10.0..74.0), r.random_range(-10.0..74.0), r.random_range(band..band + 0.2))).collect();
            let area = ((pts[1].0 - pts[0].0) * (pts[2].1 - pts[0].1) - (pts[2].0 - pts[0].0) * (pts[1].1 - pts[0].1)).abs();
            if area < 40.0 {
                continue;
            }
            let base = vertices.len() as u32;
            for (u, v, z) in pts {
                let p_cam = Vector3::new((u - k.cx) / k.fx * z, (v - k.cy) / k.fy * z, z);
                vertices.push(pose.to_world(&p_cam));
            }
            triangles.push([base, base + 1, base + 2]);
            stretched.push(r.random_bool(0.3));
            break;
        }
    }
    WarpMesh { vertices, triangles, stretched, source_frame: 0 }
}

/// Depth map with smooth relief, occluding rectangles and holes.
pub fn relief_depth(seed: u64, w: usize, h: usize) -> DepthFrame {
    let mut r = rng(seed);
    let base = r.random_range(3.0..6.0);
    let (a1, a2) = (r.random_range(-0.4..0.4), r.random_range(-0.4..0.4));
    let (f1, f2) = (r.random_range(0.05..0.3), r.random_range(0.05..0.3));
    let boxes: Vec<(usize, usize, usize, usize, f64)> = (0..r.random_range(1..4))
        .map(|_| {
            let x0 = r.random_range(0..w - 4);
            let y0 = r.random_range(0..h - 4);
            (x0, y0, r.random_range(x0 + 3..w), r.random_range(y0 + 3..h), r.random_range(0.4..0.8))
        })
        .collect();
    let mut v = Vec::with_capacity(w * h);
    for y in 0..h {
        for x in 0..w {
            let mut d = base + a1 * (f1 * x as f64).sin() + a2 * (f2 * y as f64).cos();
            for &(x0, y0, x1, y1, f) in &boxes {
                if (x0..x1).contains(&x) && (y0..y1).contains(&y) {
                    d *= f;
                }
            }
            if r.random_range(0..50) == 0 {
                d = f64::NAN;
            }
            v.push(d);
        }
    }
    DepthFrame::from_values(w, h, v).unwrap()
}

/// Grid mesh from a random relief seen by a source camera, plus a nearby
/// target camera looking at roughly the same spot.
pub fn grid_mesh(seed: u64, k: &Intrinsics) -> (WarpMesh, Pose) {
    let mut r = rng(seed ^ 0x9e37);
    let src = Pose::look_at(&Vector3::new(0.0, -4.0, 1.5), &Vector3::new(0.0, 0.0, 1.5), &Vector3::z()).unwrap();
    let depth = relief_depth(seed, k.width, k.height);
    let mesh = build_mesh(&depth, k, &src, 0.1, 0).unwrap();
    let eye = src.center() + Vector3::new(r.random_range(-0.8..0.8), r.random_range(-0.5..0.5), r.random_range(-0.5..0.5));
    let target = Vector3::new(r.random_range(-0.3..0.3), 0.0, 1.5 + r.random_range(-0.3..0.3));
    (mesh, Pose::look_at(&eye, &target, &Vector3::z()).unwrap())
}
