mod oracles;

use depthwarp_core::{fit_scale_shift, AlignError, DepthFrame};
use oracles::fixtures::{alignment_case, rng};
use oracles::normal_equations;
use rand::Rng;

fn pairs(rel: &[DepthFrame], met: &[DepthFrame]) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    for (r, m) in rel.iter().zip(met) {
        for i in 0..r.len() {
            if let (Some(d), Some(x)) = (r.depth(i), m.depth(i)) {
                out.push((1.0 / d, 1.0 / x));
            }
        }
    }
    out
}

#[test]
fn exact_recovery_over_random_sequences() {
    let mut r = rng(7);
    for case in 0..100 {
        let s = r.random_range(0.1..10.0);
        let b = r.random_range(-0.5..0.5);
        let (rel, met) = alignment_case(case, s, b, 0.0);
        let fit = fit_scale_shift(&rel, &met).unwrap();
        assert!((fit.s - s).abs() < 1e-9 && (fit.b - b).abs() < 1e-9, "case {case}: ({s}, {b}) vs {fit:?}");
        assert!(fit.residual < 1e-9);
    }
}

#[test]
fn noisy_fit_matches_normal_equations() {
    let mut r = rng(8);
    for case in 0..100 {
        let s = r.random_range(0.1..10.0);
        let b = r.random_range(-0.5..0.5);
        let (rel, met) = alignment_case(1000 + case, s, b, 1e-3);
        let fit = fit_scale_shift(&rel, &met).unwrap();
        let p = pairs(&rel, &met);
        let (os, ob) = normal_equations(&p);
        assert_eq!(fit.n_pixels as usize, p.len());
        assert!((fit.s - os).abs() < 1e-9 && (fit.b - ob).abs() < 1e-9, "case {case}: {fit:?} vs ({os}, {ob})");
    }
}

#[test]
fn fit_beats_random_perturbations() {
    let (rel, met) = alignment_case(5, 2.0, 0.1, 1e-2);
    let fit = fit_scale_shift(&rel, &met).unwrap();
    let p = pairs(&rel, &met);
    let rms = |s: f64, b: f64| (p.iter().map(|(x, y)| (y - s * x - b).powi(2)).sum::<f64>() / p.len() as f64).sqrt();
    assert!((rms(fit.s, fit.b) - fit.residual).abs() < 1e-12);
    let mut r = rng(9);
    for _ in 0..1000 {
        let s = fit.s + r.random_range(-0.05..0.05);
        let b = fit.b + r.random_range(-0.05..0.05);
        assert!(fit.residual <= rms(s, b));
    }
}

#[test]
fn fit_errors() {
    let (rel, met) = alignment_case(1, 1.0, 0.0, 0.0);
    assert!(matches!(fit_scale_shift(&rel[..1], &met), Err(AlignError::LengthMismatch { .. })));
    let flat = vec![DepthFrame::filled(4, 4, 2.0).unwrap()];
    assert!(matches!(fit_scale_shift(&flat, &flat), Err(AlignError::DegenerateFit)));
    let none = vec![DepthFrame::empty(4, 4).unwrap()];
    assert!(matches!(fit_scale_shift(&none, &flat), Err(AlignError::NoData)));
}
