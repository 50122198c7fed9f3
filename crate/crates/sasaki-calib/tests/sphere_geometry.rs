use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sasaki_calib::quadrature::{integrate_mc, Moments};
use sasaki_calib::sphere::{
    ball_volume, overlap_volume_constant, shell_volume_bound, sphere_volume, tube_radius, tube_slice_area,
    tube_slice_constant, SpherePoint,
};

fn gaussian_unit(rng: &mut ChaCha8Rng, len: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..len).map(|_| rng.sample::<f64, _>(rand_distr::StandardNormal)).collect();
        let r = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if r > 1e-12 {
            return v.into_iter().map(|x| x / r).collect();
        }
    }
}

#[test]
fn ball_volume_matches_monte_carlo() {
    for s in [0.4, 1.0, 2.0] {
        let q = integrate_mc(|x| Ok(if x.coords()[5].acos() < s { 1.0 } else { 0.0 }), 5, 200_000, 3).unwrap();
        let exact = ball_volume(5, s);
        assert!((q.estimate - exact).abs() <= 3.0 * q.stderr, "s={s}: {} ± {} vs {exact}", q.estimate, q.stderr);
    }
}

#[test]
fn shell_volume_bound_holds() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..2000 {
        let n = rng.random_range(2..=7);
        let s: f64 = rng.random_range(1e-3..PI / 2.0);
        let h: f64 = rng.random_range(0.0..s);
        let exact = ball_volume(n, s + h) - ball_volume(n, s);
        assert!(exact <= shell_volume_bound(n, s, h) * (1.0 + 1e-12), "n={n} s={s} h={h}");
    }
}

/// Monte Carlo area of `{dist(·, p) = r} ∩ {d_C < δ}` on `S^5`.
fn slice_mc(r: f64, delta: f64, samples: usize, seed: u64) -> (f64, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut mom = Moments::default();
    for _ in 0..samples {
        let theta = gaussian_unit(&mut rng, 5);
        let mut x: Vec<f64> = theta.iter().map(|t| r.sin() * t).collect();
        x.push(r.cos());
        mom.push(if tube_radius(&SpherePoint::new(x).unwrap()) < delta { 1.0 } else { 0.0 });
    }
    let area = sphere_volume(4) * r.sin().powi(4);
    (area * mom.mean(), area * mom.stderr())
}

#[test]
fn tube_slices_are_caps_with_bounded_area() {
    let c = tube_slice_constant(5);
    for (r, delta) in [(0.5, 0.1), (1.2, 0.3), (PI / 2.0, 0.05), (2.5, 0.2)] {
        let (mc, se) = slice_mc(r, delta, 400_000, 7);
        let exact = tube_slice_area(5, r, delta);
        assert!((mc - exact).abs() <= 3.0 * se + 1e-12, "r={r} δ={delta}: {mc} ± {se} vs {exact}");
        assert!(mc <= c * delta.powi(4), "r={r} δ={delta}: {mc} > {}", c * delta.powi(4));
    }
}

#[test]
fn polar_shell_tube_overlap_is_cubic() {
    let d = 4;
    let c = overlap_volume_constant(d);
    for (s, delta) in [(0.3, 0.15), (0.3, 0.05), (0.6, 0.2)] {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let mut mom = Moments::default();
        let n = 400_000;
        for _ in 0..n {
            let r = s + delta * rng.random::<f64>();
            let theta = gaussian_unit(&mut rng, d + 1);
            let mut x: Vec<f64> = theta.iter().map(|t| r.sin() * t).collect();
            x.push(r.cos());
            let rho = x[0].hypot(x[1]).min(1.0).asin();
            mom.push(if rho <= delta { r.sin().powi(d as i32) } else { 0.0 });
        }
        let scale = sphere_volume(d) * delta;
        let vol = scale * mom.mean();
        let bound = c * s.powi(d as i32 - 2) * delta.powi(3);
        assert!(vol + 3.0 * scale * mom.stderr() <= bound, "s={s} δ={delta}: {vol} > {bound}");
    }
}
