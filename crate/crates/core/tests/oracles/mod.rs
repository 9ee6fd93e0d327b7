//! Independent reference implementations used to cross-check the library.
//! Each one takes a different route to the same quantity.

#![allow(dead_code)]

pub mod fixtures;

use depthwarp_core::mesh::WarpMesh;
use depthwarp_core::{Intrinsics, Pose};
use nalgebra::{Matrix3, Matrix4, SymmetricEigen, Vector3};

/// Least squares `y ≈ s·x + b` through the raw (uncentered) normal equations,
/// solved by Cramer's rule.
pub fn normal_equations(pairs: &[(f64, f64)]) -> (f64, f64) {
    let n = pairs.len() as f64;
    let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
    for &(x, y) in pairs {
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    let det = n * sxx - sx * sx;
    ((n * sxy - sx * sy) / det, (sxx * sy - sx * sxy) / det)
}

/// Möller–Trumbore intersection; returns the ray parameter.
pub fn ray_triangle(orig: &Vector3<f64>, dir: &Vector3<f64>, v0: &Vector3<f64>, v1: &Vector3<f64>, v2: &Vector3<f64>) -> Option<f64> {
    let e1 = v1 - v0;
    let e2 = v2 - v0;
    let p = dir.cross(&e2);
    let det = e1.dot(&p);
    if det.abs() < 1e-14 {
        return None;
    }
    let inv = 1.0 / det;
    let s = orig - v0;
    let u = s.dot(&p) * inv;
    if !(0.0..=1.0).contains(&u) {
        return None;
    }
    let q = s.cross(&e1);
    let v = dir.dot(&q) * inv;
    if v < 0.0 || u + v > 1.0 {
        return None;
    }
    Some(e2.dot(&q) * inv)
}

/// Screen-space polygon of a triangle after clipping at `z >= near`.
fn screen_polygon(tri: &[u32; 3], mesh: &WarpMesh, k: &Intrinsics, pose: &Pose, near: f64) -> Vec<(f64, f64)> {
    let rt = pose.rotation().transpose();
    let cam: Vec<Vector3<f64>> = tri.iter().map(|&i| rt * (mesh.vertices[i as usize] - pose.translation())).collect();
    let mut poly = Vec::new();
    for i in 0..3 {
        let (p, q) = (cam[i], cam[(i + 1) % 3]);
        if p.z >= near {
            poly.push(p);
        }
        if (p.z >= near) != (q.z >= near) {
            let t = (near - p.z) / (q.z - p.z);
            poly.push(p + (q - p) * t);
        }
    }
    if poly.len() < 3 {
        return Vec::new();
    }
    poly.iter().map(|p| (k.fx * p.x / p.z + k.cx, k.fy * p.y / p.z + k.cy)).collect()
}

/// Pixel index range `[x0, x1] × [y0, y1]` around a polygon, padded by one.
fn pixel_box(poly: &[(f64, f64)], k: &Intrinsics) -> Option<(usize, usize, usize, usize)> {
    let (mut umin, mut umax, mut vmin, mut vmax) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(u, v) in poly {
        umin = umin.min(u);
        umax = umax.max(u);
        vmin = vmin.min(v);
        vmax = vmax.max(v);
    }
    let x0 = (umin.floor() - 1.0).max(0.0);
    let y0 = (vmin.floor() - 1.0).max(0.0);
    let x1 = (umax.ceil() + 1.0).min(k.width as f64 - 1.0);
    let y1 = (vmax.ceil() + 1.0).min(k.height as f64 - 1.0);
    if !(x0 <= x1 && y0 <= y1) {
        return None;
    }
    Some((x0 as usize, x1 as usize, y0 as usize, y1 as usize))
}

/// Nearest triangle and camera-z depth hit by each pixel-center ray, ignoring
/// hits closer than `near`. A padded screen box only prunes candidates; the
/// hit test itself is Möller–Trumbore in world space.
pub fn raycast(mesh: &WarpMesh, k: &Intrinsics, pose: &Pose, near: f64) -> Vec<Option<(u32, f64)>> {
    let mut out: Vec<Option<(u32, f64)>> = vec![None; k.width * k.height];
    let origin = *pose.translation();
    for (t, tri) in mesh.triangles.iter().enumerate() {
        let poly = screen_polygon(tri, mesh, k, pose, near);
        let Some((x0, x1, y0, y1)) = pixel_box(&poly, k) else { continue };
        let [a, b, c] = tri.map(|i| mesh.vertices[i as usize]);
        for y in y0..=y1 {
            for x in x0..=x1 {
                // camera ray with unit z so the parameter equals the depth
                let d_cam = Vector3::new((x as f64 + 0.5 - k.cx) / k.fx, (y as f64 + 0.5 - k.cy) / k.fy, 1.0);
                let dir = pose.rotation() * d_cam;
                if let Some(z) = ray_triangle(&origin, &dir, &a, &b, &c) {
                    let slot = &mut out[y * k.width + x];
                    if z >= near && slot.is_none_or(|(_, bz)| z < bz) {
                        *slot = Some((t as u32, z));
                    }
                }
            }
        }
    }
    out
}

fn point_segment_distance(p: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    let (dx, dy) = (b.0 - a.0, b.1 - a.1);
    let len2 = dx * dx + dy * dy;
    let t = if len2 > 0.0 { (((p.0 - a.0) * dx + (p.1 - a.1) * dy) / len2).clamp(0.0, 1.0) } else { 0.0 };
    let (qx, qy) = (a.0 + t * dx - p.0, a.1 + t * dy - p.1);
    (qx * qx + qy * qy).sqrt()
}

/// Per pixel, the screen distance from the pixel center to the closest
/// projected edge of any triangle (after clipping at `near`). Distances above
/// one pixel are reported as infinity.
pub fn edge_distance_map(mesh: &WarpMesh, k: &Intrinsics, pose: &Pose, near: f64) -> Vec<f64> {
    let mut dist = vec![f64::INFINITY; k.width * k.height];
    for tri in &mesh.triangles {
        let scr = screen_polygon(tri, mesh, k, pose, near);
        let Some((x0, x1, y0, y1)) = pixel_box(&scr, k) else { continue };
        for y in y0..=y1 {
            for x in x0..=x1 {
                let pc = (x as f64 + 0.5, y as f64 + 0.5);
                let i = y * k.width + x;
                for e in 0..scr.len() {
                    let d = point_segment_distance(pc, scr[e], scr[(e + 1) % scr.len()]);
                    if d < dist[i] {
                        dist[i] = d;
                    }
                }
            }
        }
    }
    dist
}

/// Unit quaternion `(w, x, y, z)` of a rotation matrix (Shepperd's method).
pub fn quaternion(r: &Matrix3<f64>) -> [f64; 4] {
    let tr = r.trace();
    let q = if tr > 0.0 {
        let s = (tr + 1.0).sqrt() * 2.0;
        [0.25 * s, (r[(2, 1)] - r[(1, 2)]) / s, (r[(0, 2)] - r[(2, 0)]) / s, (r[(1, 0)] - r[(0, 1)]) / s]
    } else if r[(0, 0)] > r[(1, 1)] && r[(0, 0)] > r[(2, 2)] {
        let s = (1.0 + r[(0, 0)] - r[(1, 1)] - r[(2, 2)]).sqrt() * 2.0;
        [(r[(2, 1)] - r[(1, 2)]) / s, 0.25 * s, (r[(0, 1)] + r[(1, 0)]) / s, (r[(0, 2)] + r[(2, 0)]) / s]
    } else if r[(1, 1)] > r[(2, 2)] {
        let s = (1.0 + r[(1, 1)] - r[(0, 0)] - r[(2, 2)]).sqrt() * 2.0;
        [(r[(0, 2)] - r[(2, 0)]) / s, (r[(0, 1)] + r[(1, 0)]) / s, 0.25 * s, (r[(1, 2)] + r[(2, 1)]) / s]
    } else {
        let s = (1.0 + r[(2, 2)] - r[(0, 0)] - r[(1, 1)]).sqrt() * 2.0;
        [(r[(1, 0)] - r[(0, 1)]) / s, (r[(0, 2)] + r[(2, 0)]) / s, (r[(1, 2)] + r[(2, 1)]) / s, 0.25 * s]
    };
    let n = q.iter().map(|v| v * v).sum::<f64>().sqrt();
    q.map(|v| v / n)
}

/// Angle between two rotations from their quaternions.
pub fn quaternion_angle(a: &Matrix3<f64>, b: &Matrix3<f64>) -> f64 {
    let (qa, qb) = (quaternion(a), quaternion(b));
    // conj(qa) * qb
    let w = qa[0] * qb[0] + qa[1] * qb[1] + qa[2] * qb[2] + qa[3] * qb[3];
    let x = qa[0] * qb[1] - qa[1] * qb[0] - qa[2] * qb[3] + qa[3] * qb[2];
    let y = qa[0] * qb[2] + qa[1] * qb[3] - qa[2] * qb[0] - qa[3] * qb[1];
    let z = qa[0] * qb[3] - qa[1] * qb[2] + qa[2] * qb[1] - qa[3] * qb[0];
    2.0 * (x * x + y * y + z * z).sqrt().atan2(w.abs())
}

/// Frobenius norm of the 3×4 difference, entry by entry.
pub fn frobenius_3x4(a: &Pose, b: &Pose) -> f64 {
    let mut acc = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            let d = a.rotation()[(i, j)] - b.rotation()[(i, j)];
            acc += d * d;
        }
        let d = a.translation()[i] - b.translation()[i];
        acc += d * d;
    }
    acc.sqrt()
}

/// Horn's closed-form absolute orientation with scale: the rotation is the
/// dominant eigenvector of the 4×4 quaternion matrix. Returns `(s, R, t)` with
/// `y ≈ s·R·x + t`.
pub fn horn_similarity(x: &[Vector3<f64>], y: &[Vector3<f64>]) -> (f64, Matrix3<f64>, Vector3<f64>) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<Vector3<f64>>() / n;
    let my = y.iter().sum::<Vector3<f64>>() / n;
    let mut s = Matrix3::zeros();
    for (a, b) in x.iter().zip(y) {
        s += (a - mx) * (b - my).transpose();
    }
    let (sxx, sxy, sxz) = (s[(0, 0)], s[(0, 1)], s[(0, 2)]);
    let (syx, syy, syz) = (s[(1, 0)], s[(1, 1)], s[(1, 2)]);
    let (szx, szy, szz) = (s[(2, 0)], s[(2, 1)], s[(2, 2)]);
    #[rustfmt::skip]
    let nmat = Matrix4::new(
        sxx + syy + szz, syz - szy,       szx - sxz,        sxy - syx,
        syz - szy,       sxx - syy - szz, sxy + syx,        szx + sxz,
        szx - sxz,       sxy + syx,       -sxx + syy - szz, syz + szy,
        sxy - syx,       szx + sxz,       syz + szy,        -sxx - syy + szz,
    );
    let eig = SymmetricEigen::new(nmat);
    let imax = eig.eigenvalues.imax();
    let q = eig.eigenvectors.column(imax);
    let (w, qx, qy, qz) = (q[0], q[1], q[2], q[3]);
    #[rustfmt::skip]
    let r = Matrix3::new(
        w * w + qx * qx - qy * qy - qz * qz, 2.0 * (qx * qy - w * qz),             2.0 * (qx * qz + w * qy),
        2.0 * (qy * qx + w * qz),             w * w - qx * qx + qy * qy - qz * qz, 2.0 * (qy * qz - w * qx),
        2.0 * (qz * qx - w * qy),             2.0 * (qz * qy + w * qx),             w * w - qx * qx - qy * qy + qz * qz,
    );
    let (mut num, mut den) = (0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        num += (b - my).dot(&(r * (a - mx)));
        den += (a - mx).norm_squared();
    }
    let scale = num / den;
    (scale, r, my - scale * (r * mx))
}

/// Sum of squared residuals of a similarity fit.
pub fn similarity_residual(x: &[Vector3<f64>], y: &[Vector3<f64>], s: f64, r: &Matrix3<f64>, t: &Vector3<f64>) -> f64 {
    x.iter().zip(y).map(|(a, b)| (s * (r * a) + t - b).norm_squared()).sum()
}

/// Length of the polyline through `points`.
pub fn polyline_length(points: &[Vector3<f64>]) -> f64 {
    points.windows(2).map(|w| (w[1] - w[0]).norm()).sum()
}

/// Two-sided Kolmogorov–Smirnov statistic of samples against U[lo, hi].
pub fn ks_uniform(samples: &mut [f64], lo: f64, hi: f64) -> f64 {
    samples.sort_by(|a, b| a.total_cmp(b));
    let n = samples.len() as f64;
    samples
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let f = ((v - lo) / (hi - lo)).clamp(0.0, 1.0);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

/// KS critical value at significance 0.001.
pub fn ks_critical_001(n: usize) -> f64 {
    1.949 / (n as f64).sqrt()
}

/// Outcome of comparing the z-buffer against the ray-cast oracle.
#[derive(Debug, Default, Clone, Copy)]
pub struct RasterComparison {
    pub checked: usize,
    pub covered: usize,
    pub skipped_near_edge: usize,
    pub coverage_mismatch: usize,
    pub winner_mismatch: usize,
    pub max_depth_error: f64,
}

/// Renders random mesh `seed` (grid meshes for even seeds, triangle soup for
/// odd ones) and compares every pixel farther than 1e-4 px from any edge.
pub fn compare_raster(seed: u64) -> RasterComparison {
    let k = fixtures::oracle_camera();
    let (mesh, pose) = if seed.is_multiple_of(2) {
        fixtures::grid_mesh(seed, &k)
    } else {
        let pose = fixtures::random_pose(&mut fixtures::rng(seed));
        (fixtures::soup_mesh(seed, &k, &pose), pose)
    };
    let near = depthwarp_core::DEFAULT_NEAR;
    let (out, winners) = depthwarp_core::render_detailed(&mesh, &k, &pose, near, depthwarp_core::DEFAULT_FAR).unwrap();
    let oracle = raycast(&mesh, &k, &pose, near);
    let edges = edge_distance_map(&mesh, &k, &pose, near);
    let mut c = RasterComparison::default();
    for i in 0..k.width * k.height {
        if edges[i] <= 1e-4 {
            c.skipped_near_edge += 1;
            continue;
        }
        c.checked += 1;
        match (winners[i], oracle[i]) {
            (None, None) => {}
            (Some(w), Some((ow, oz))) => {
                c.covered += 1;
                if w != ow {
                    c.winner_mismatch += 1;
                }
                let z = out.depth.depth(i).unwrap();
                c.max_depth_error = c.max_depth_error.max((z - oz).abs());
            }
            _ => c.coverage_mismatch += 1,
        }
    }
    c
}

/// Dense polyline along a uniform Catmull-Rom spline with reflected end
/// points, evaluated in matrix form.
pub fn catmull_rom_polyline(control: &[Vector3<f64>], per_segment: usize) -> Vec<Vector3<f64>> {
    let n = control.len();
    let at = |i: isize| -> Vector3<f64> {
        if i < 0 {
            2.0 * control[0] - control[1]
        } else if i as usize >= n {
            2.0 * control[n - 1] - control[n - 2]
        } else {
            control[i as usize]
        }
    };
    let mut out = vec![control[0]];
    for seg in 0..n - 1 {
        let i = seg as isize;
        let (p0, p1, p2, p3) = (at(i - 1), at(i), at(i + 1), at(i + 2));
        for k in 1..=per_segment {
            let u = k as f64 / per_segment as f64;
            let b0 = -0.5 * u * u * u + u * u - 0.5 * u;
            let b1 = 1.5 * u * u * u - 2.5 * u * u + 1.0;
            let b2 = -1.5 * u * u * u + 2.0 * u * u + 0.5 * u;
            let b3 = 0.5 * u * u * u - 0.5 * u * u;
            out.push(p0 * b0 + p1 * b1 + p2 * b2 + p3 * b3);
        }
    }
    out
}

/// Camera pitch and yaw (degrees) from the third column of a c2w rotation.
pub fn pitch_yaw_deg(pose: &Pose) -> (f64, f64) {
    let f = pose.rotation().column(2);
    (f.z.asin().to_degrees(), f.y.atan2(f.x).to_degrees())
}

/// Checks one moving trajectory against the sampling limits; returns the
/// path-length factor and the pitch and yaw spreads in degrees.
pub fn trajectory_stats(spec: &depthwarp_core::trajectory::TrajectorySpec, poses: &[Pose]) -> (f64, f64, f64, f64) {
    let v = |a: [f64; 3]| Vector3::new(a[0], a[1], a[2]);
    let control: Vec<Vector3<f64>> = std::iter::once(v(spec.start)).chain(spec.waypoints.iter().map(|w| v(*w))).collect();
    let length = polyline_length(&catmull_rom_polyline(&control, 4000));
    let d0 = (v(spec.start) - v(spec.lookat)).norm();
    let (p0, y0) = pitch_yaw_deg(&poses[0]);
    let (mut pmin, mut pmax, mut ymin, mut ymax) = (p0, p0, 0.0f64, 0.0f64);
    let mut max_step = 0.0f64;
    for (i, p) in poses.iter().enumerate() {
        let (pitch, yaw) = pitch_yaw_deg(p);
        let mut dy = yaw - y0;
        while dy > 180.0 {
            dy -= 360.0;
        }
        while dy < -180.0 {
            dy += 360.0;
        }
        pmin = pmin.min(pitch);
        pmax = pmax.max(pitch);
        ymin = ymin.min(dy);
        ymax = ymax.max(dy);
        if i > 0 {
            max_step = max_step.max(quaternion_angle(poses[i - 1].rotation(), p.rotation()).to_degrees());
        }
    }
    (length / d0, pmax - pmin, ymax - ymin, max_step)
}

/// A procedural scene with a static camera A and a moving camera B.
pub fn synth_pair(seed: u64, width: usize, height: usize, frames: usize) -> (depthwarp_core::synth::SceneSpec, Intrinsics, Vec<Pose>, Vec<Pose>) {
    use depthwarp_core::trajectory::{sample_trajectory_set, TrajectoryRanges};
    let spec = depthwarp_core::synth::SceneSpec::random(seed, frames);
    let k = Intrinsics::from_horizontal_fov(width, height, 60.0).unwrap();
    let mut set = sample_trajectory_set(&spec.lookat(), frames, seed, 2, true, &TrajectoryRanges::default()).unwrap();
    let b = set.pop().unwrap().1;
    let a = set.pop().unwrap().1;
    (spec, k, a, b)
}

/// Result of warping a depth video onto its own trajectory.
#[derive(Debug, Clone, Copy)]
pub struct IdentityWarp {
    /// Largest relative depth error on mask=1 pixels.
    pub max_rel_error: f64,
    /// Share of interior pixels with mask=1. Interior: the pixel and its eight
    /// neighbours are valid and no neighbour differs in depth by more than the
    /// stretch threshold, i.e. the pixel is off every image, hole and depth
    /// discontinuity boundary.
    pub coverage: f64,
    /// Same share with interior meaning only "eight valid neighbours".
    pub coverage_valid_neighbours: f64,
    pub interior_pixels: usize,
}

pub fn identity_warp_check(seed: u64, width: usize, height: usize, frames: usize) -> IdentityWarp {
    let (spec, k, _, poses) = synth_pair(seed, width, height, frames);
    let depth: Vec<depthwarp_core::DepthFrame> = (0..frames).map(|t| spec.render_view(t, &poses[t], &k).unwrap().1).collect();
    let params = depthwarp_core::raster::WarpParams::default();
    let out = depthwarp_core::warp_depth_sequence(&depth, &k, &poses, &poses, &params).unwrap();
    let (mut worst, mut interior, mut kept, mut loose, mut loose_kept) = (0.0f64, 0usize, 0usize, 0usize, 0usize);
    for (d, o) in depth.iter().zip(&out) {
        for y in 1..height - 1 {
            for x in 1..width - 1 {
                let i = y * width + x;
                let nb: Vec<Option<f64>> = (y - 1..=y + 1).flat_map(|yy| (x - 1..=x + 1).map(move |xx| yy * width + xx)).map(|j| d.depth(j)).collect();
                if nb.iter().any(|v| v.is_none()) {
                    continue;
                }
                loose += 1;
                loose_kept += o.mask.is_set(i) as usize;
                let z = d.depth(i).unwrap();
                if nb.iter().flatten().all(|&n| (n - z).abs() / n.min(z) <= params.stretch_threshold) {
                    interior += 1;
                    kept += o.mask.is_set(i) as usize;
                }
            }
        }
        for i in 0..width * height {
            if o.mask.is_set(i) {
                let (a, b) = (o.depth.depth(i).unwrap(), d.depth(i).unwrap());
                worst = worst.max((a - b).abs() / b);
            }
        }
    }
    IdentityWarp {
        max_rel_error: worst,
        coverage: kept as f64 / interior as f64,
        coverage_valid_neighbours: loose_kept as f64 / loose as f64,
        interior_pixels: interior,
    }
}

/// Warps camera A's depth onto camera B and compares with B's rendered depth.
/// Returns the median relative error on mask=1 pixels and how many there were.
pub fn cross_view_check(seed: u64, width: usize, height: usize, frames: usize) -> (f64, usize) {
    let (spec, k, a, b) = synth_pair(seed, width, height, frames);
    let mut errors = Vec::new();
    for t in 0..frames {
        let src = spec.render_view(t, &a[t], &k).unwrap().1;
        let gt = spec.render_view(t, &b[t], &k).unwrap().1;
        let out = depthwarp_core::warp_frame(&src, &k, &a[t], &b[t], &Default::default(), t).unwrap();
        for i in 0..width * height {
            if out.mask.is_set(i) {
                if let (Some(w), Some(g)) = (out.depth.depth(i), gt.depth(i)) {
                    errors.push((w - g).abs() / g);
                } else {
                    errors.push(f64::INFINITY);
                }
            }
        }
    }
    let n = errors.len();
    errors.sort_by(|x, y| x.total_cmp(y));
    (if n == 0 { f64::INFINITY } else { errors[n / 2] }, n)
}
