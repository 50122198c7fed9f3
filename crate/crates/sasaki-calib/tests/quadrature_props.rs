use std::f64::consts::PI;

use sasaki_calib::quadrature::{
    integrate_mc, integrate_stratified, log_log_slope, tube_annulus_integrals, ExteriorRule, STRATA,
};
use sasaki_calib::recovery::RecoveryParams;
use sasaki_calib::sphere::SpherePoint;

fn smooth(x: &SpherePoint) -> sasaki_calib::Result<f64> {
    let c = x.coords();
    Ok(1.0 + c[5] * c[5] + 0.5 * c[0] * c[1] + (3.0 * c[2]).sin())
}

#[test]
fn stratified_and_plain_monte_carlo_agree() {
    let p = RecoveryParams::new(2, 1e-2).unwrap();
    let plain = integrate_mc(smooth, 5, 400_000, 1).unwrap();
    let strat = integrate_stratified(smooth, &p, 50_000, 2, ExteriorRule::Sampled).unwrap();
    let sigma = plain.stderr.hypot(strat.stderr);
    assert!((plain.estimate - strat.estimate).abs() <= 3.0 * sigma, "{plain:?} vs {strat:?}");
    assert_eq!(strat.strata.len(), STRATA.len());
    let sum: f64 = strat.strata.iter().map(|s| s.estimate).sum();
    assert!((sum - strat.estimate).abs() < 1e-9 * sum);
}

#[test]
fn seeds_reproduce_bitwise() {
    let p = RecoveryParams::new(2, 3e-3).unwrap();
    let a = integrate_stratified(smooth, &p, 9000, 77, ExteriorRule::Sampled).unwrap();
    let b = integrate_stratified(smooth, &p, 9000, 77, ExteriorRule::Sampled).unwrap();
    assert_eq!(a, b);
    let c = integrate_stratified(smooth, &p, 9000, 78, ExteriorRule::Sampled).unwrap();
    assert_ne!(a.estimate, c.estimate);
}

#[test]
fn radial_density_integrates_to_pi_times_equator() {
    let pole = SpherePoint::basis(5, 6);
    let f = sasaki_calib::fields::radial_field(&pole);
    let q = integrate_mc(|x| sasaki_calib::calibration::field_density(&f, x, 1e-5), 5, 20_000, 4).unwrap();
    let exact = 8.0 * PI.powi(3) / 3.0;
    assert!((q.estimate - exact).abs() <= 3.0 * q.stderr, "{} ± {}", q.estimate, q.stderr);
}

#[test]
fn tube_annulus_integrals_scale_linearly_and_quadratically() {
    let rks = [1e-3, 2e-3, 4e-3, 1e-2];
    let (mut a, mut b) = (Vec::new(), Vec::new());
    for (i, &rk) in rks.iter().enumerate() {
        let (cot, inv) = tube_annulus_integrals(4, rk, 40_000, i as u64).unwrap();
        a.push(cot.estimate);
        b.push(inv.estimate);
    }
    let s1 = log_log_slope(&rks, &a).unwrap();
    let s2 = log_log_slope(&rks, &b).unwrap();
    assert!((s1 - 1.0).abs() <= 0.3, "slope {s1}");
    assert!((s2 - 2.0).abs() <= 0.3, "slope {s2}");
}
