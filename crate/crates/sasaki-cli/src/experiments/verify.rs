//! Identity and property checks across every module.

use std::f64::consts::PI;

use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sasaki_calib::calibration::{
    calibration_defect, center_point, field_density, graph_density, graph_density_full, hopf_phi_sum, phi_d,
    random_dplane, random_rotation, riccati_residual, rigidity_residual, tau_coefficients, tau_subset_sum,
    CalibCoefficients,
};
use sasaki_calib::fields::{graph_blocks, hopf_field, radial_field, GraphBlocks};
use sasaki_calib::linalg::{exterior_power_norm, gram_det, minor_square_sum, rank_one_deficit, Matrix};
use sasaki_calib::quadrature::{log_log_slope, radial_reduction, sample_uniform, tube_annulus_integrals};
use sasaki_calib::recovery::{branch_path_check, nonvanishing_scan, recovery_eval, region_classify, RecoveryParams};
use sasaki_calib::sphere::{geodesic_distance, sphere_volume, SpherePoint};
use serde_json::json;

use super::shell_point;
use crate::config::ExperimentConfig;
use crate::fault::{coefficients_with, Fault};
use crate::report::{Check, Report};

/// Published values of `c(m; 1)`.
pub const PINNED_C: [(usize, i64, i64); 2] = [(2, 8, 3), (3, 16, 5)];
/// Tilt strength of the recovery construction.
pub const PINNED_VARTHETA: f64 = 0.5;
/// Tube radius ratio `ε_k / s_k`.
pub const PINNED_EPS_RATIO: f64 = 1.0 / 20.0;
/// Floors of the nonvanishing scan, by quantity.
pub const PINNED_FLOORS: [(&str, f64); 7] = [
    ("|Q_k|", 0.5),
    ("|B~_k|", 0.25),
    ("|W~_k^perp|", 0.1),
    ("<W_k, W_k^perp>", -1.0 / 15.0),
    ("nlerp chord of W_k^sharp", 0.683_130_051_063_973_2),
    ("|R + vartheta psi W_k^sharp|", 0.5),
    ("|V~_k| off caps", 0.0249),
];
/// Radial range of the pointwise checks.
pub const POINTWISE_MARGIN: f64 = 0.3;

pub fn run(cfg: &ExperimentConfig, fault: Option<Fault>, report: &mut Report) -> anyhow::Result<()> {
    let mut coeffs = Vec::new();
    for &m in &cfg.coefficient_ms {
        let c = coefficients_with(m, fault)?;
        coefficient_checks(&c, report)?;
        coeffs.push(c);
    }
    let coeff = coefficients_with(cfg.m, fault)?;
    identity_checks(cfg, report)?;
    radial_checks(cfg, &coeff, report)?;
    for &r_k in &cfg.r_k {
        recovery_checks(cfg, r_k, report)?;
    }
    slope_checks(cfg, report)?;
    report.details = json!({
        "coefficients": coeffs.iter().map(|c| json!({
            "m": c.m,
            "c_m1": c.c_m1.to_string(),
            "c2j": c.c2j.iter().map(|r| r.to_string()).collect::<Vec<_>>(),
        })).collect::<Vec<_>>(),
    });
    Ok(())
}

pub fn coefficient_checks(c: &CalibCoefficients, report: &mut Report) -> anyhow::Result<()> {
    let m = c.m;
    let expected = PINNED_C
        .iter()
        .find(|p| p.0 == m)
        .map_or_else(|| hopf_phi_sum(m), |p| Ratio::new(p.1, p.2));
    report.push(
        Check::flag(format!("c({m};1) exact"), c.c_m1_f64(), *expected.numer() as f64 / *expected.denom() as f64, c.c_m1 == expected)
            .with_detail(format!("c = {}", c.c_m1)),
    );
    let worst = c.beta_integrals()?.iter().map(|(q, s)| (q - s).abs()).fold(0.0, f64::max);
    report.push(Check::at_most(format!("C_2j Beta integrals m={m}"), worst, 1e-12));
    let n = c.d() + 1;
    let x = sample_uniform(n, 1)?.next().expect("infinite sampler");
    let blocks = graph_blocks(&hopf_field(m)?, &x, 1e-5)?;
    let dev = (phi_d(c, blocks.m())? - c.c_m1_f64()).abs();
    report.push(Check::at_most(format!("Phi_d on Hopf block m={m}"), dev, 1e-12));
    Ok(())
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1.0)
}

fn random_matrix<R: Rng>(rng: &mut R, rows: usize, cols: usize, scale: f64) -> Matrix {
    let data = (0..rows * cols).map(|_| scale * rng.random_range(-1.0..1.0)).collect();
    Matrix::new(rows, cols, data).expect("consistent shape")
}

pub fn identity_checks(cfg: &ExperimentConfig, report: &mut Report) -> anyhow::Result<()> {
    let tol = cfg.tolerances.identity_rel;
    let cases = cfg.samples.property_cases;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x1d);
    for d in [4usize, 6] {
        let mut worst: f64 = 0.0;
        for _ in 0..cases {
            let lambda = rng.random_range(-2.0..2.0);
            let u: Vec<f64> = (0..d).map(|_| rng.random_range(-1.5..1.5)).collect();
            let xi = random_rotation(&mut rng, d).column(0);
            let (deficit, predicted) = rank_one_deficit(lambda, &u, &xi, d)?;
            worst = worst.max(rel(deficit, predicted));
        }
        report.push(Check::at_most(format!("rank-one deficit d={d}"), worst, tol));
    }
    let (mut gram, mut schur, mut tau, mut ext): (f64, f64, f64, f64) = (0.0, 0.0, 0.0, 0.0);
    for _ in 0..cases {
        let (rows, cols) = (rng.random_range(1..=5), rng.random_range(1..=6));
        let a = random_matrix(&mut rng, rows, cols, 2.0);
        gram = gram.max(rel(gram_det(&a), minor_square_sum(&a)?));

        let d = 2 * rng.random_range(2..=3);
        let scale = rng.random_range(0.0..3.0);
        let b: Vec<f64> = (0..d).map(|_| scale * rng.random_range(-1.0..1.0)).collect();
        let blocks = GraphBlocks::from_parts(b, random_matrix(&mut rng, d, d, scale))?;
        let full = graph_density_full(&blocks)?;
        schur = schur.max((graph_density(&blocks)? - full).abs() / full);

        let d = 2 * rng.random_range(1..=3);
        let plane = random_dplane(&mut rng, d);
        for (k, t) in tau_coefficients(&plane)?.iter().enumerate() {
            tau = tau.max(rel(*t, tau_subset_sum(&plane, k)?));
        }

        let d = rng.random_range(2..=5);
        let (sa, sb) = (rng.random_range(0.01..3.0), rng.random_range(0.01..3.0));
        let q = random_rotation(&mut rng, d + 1);
        let raw = random_rotation(&mut rng, d + 1);
        let images: Vec<Vec<f64>> = (0..=d)
            .map(|i| raw.column(i).iter().map(|x| if i == 0 { sa * x } else { sb * x }).collect())
            .collect();
        let map = Matrix::from_columns(&images)?.matmul(&q.transpose())?;
        for j in 1..=d + 1 {
            let cj = (binomial(d + 1, j) as f64).sqrt();
            let bound = cj * (sa * sb.powi(j as i32 - 1) + sb.powi(j as i32));
            ext = ext.max(exterior_power_norm(&map, j)? / bound);
        }
    }
    report.push(Check::at_most("Gram determinant = minor-square sum", gram, tol));
    report.push(Check::at_most("Schur density = full Gram density", schur, tol));
    report.push(Check::at_most("tau interpolation = subset sums", tau, tol));
    report.push(Check::at_most("exterior power / anisotropic bound", ext, 1.0 + 1e-12));
    Ok(())
}

fn binomial(n: usize, k: usize) -> u64 {
    (0..k).fold(1u64, |acc, i| acc * (n - i) as u64 / (i as u64 + 1))
}

pub fn radial_checks(cfg: &ExperimentConfig, coeff: &CalibCoefficients, report: &mut Report) -> anyhow::Result<()> {
    let tol = &cfg.tolerances;
    let n = coeff.d() + 1;
    let pole = SpherePoint::basis(n, n + 1);
    let radial = radial_field(&pole);
    let target = coeff.c_m1_f64() * sphere_volume(n);

    let value = radial_reduction(
        |r| field_density(&radial, &shell_point(n, r, 0.0), 1e-5).unwrap_or(f64::NAN),
        n,
    )?;
    report.push(
        Check::at_most("radial volume identity", rel(value, target), tol.radial_volume_rel)
            .with_detail(format!("{value:.15} vs {target:.15}")),
    );

    let fd = radial.without_derivative();
    let step = 1e-5;
    let (mut defect, mut b_norm, mut off, mut ricc, mut center): (f64, f64, f64, f64, f64) = (0.0, 0.0, 0.0, 0.0, 0.0);
    let mut taken = 0;
    for x in sample_uniform(n, cfg.seed ^ 0xca1)? {
        if taken == cfg.samples.pointwise {
            break;
        }
        let r = geodesic_distance(&x, &pole);
        if !(POINTWISE_MARGIN..PI - POINTWISE_MARGIN).contains(&r) {
            continue;
        }
        taken += 1;
        defect = defect.max(calibration_defect(coeff, &fd, &x, step)?.abs());
        let (b, o) = rigidity_residual(&graph_blocks(&fd, &x, step)?);
        b_norm = b_norm.max(b);
        off = off.max(o);
        ricc = ricc.max(riccati_residual(&radial, &x, step, 1e-4)?.abs());
        let c = center_point(&radial, &x, step)?;
        center = center.max(c.iter().zip(pole.coords()).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt());
    }
    report.push(Check::at_most("radial calibration defect", defect, tol.calibration_defect));
    report.push(Check::at_most("radial rigidity |b|", b_norm, tol.rigidity));
    report.push(Check::at_most("radial rigidity off-scalar", off, tol.rigidity));
    report.push(Check::at_most("radial Riccati residual", ricc, tol.riccati));
    report.push(Check::at_most("radial center constant", center, tol.center));
    Ok(())
}

pub fn recovery_checks(cfg: &ExperimentConfig, r_k: f64, report: &mut Report) -> anyhow::Result<()> {
    let params = RecoveryParams::with_constants(cfg.m, r_k, cfg.constants)?;
    let n = params.n();
    let scan = nonvanishing_scan(&params, cfg.samples.nonvanishing, cfg.seed);
    for (name, floor) in PINNED_FLOORS {
        let min = scan.check(name).map_or(f64::NAN, |c| c.min);
        report.push(Check::at_least(format!("nonvanishing {name} r_k={r_k:e}"), min, floor));
    }
    report.push(
        Check::at_most(format!("nonvanishing evaluation errors r_k={r_k:e}"), scan.violations.len() as f64, 0.0)
            .with_detail(scan.violations.first().cloned().unwrap_or_default()),
    );
    let paths = branch_path_check(&params, cfg.samples.branch_paths, 200, cfg.seed);
    report.push(
        Check::at_most(format!("branch flips r_k={r_k:e}"), paths.flips as f64, 0.0)
            .with_detail(format!("{} steps in U0, min alignment {:.6}", paths.steps_in_u0, paths.min_alignment)),
    );

    let x = shell_point(n, params.s_k() + 0.5 * r_k, 2.0 * params.eps_k());
    let (_, dg) = recovery_eval(&params, x.coords(), true)?;
    let den = dg.and_then(|d| d.s_denominator).unwrap_or(f64::NAN);
    let expected = 1.0 + PINNED_VARTHETA * PINNED_VARTHETA;
    report.push(Check::at_most(
        format!("tilted denominator identity r_k={r_k:e}"),
        (den * den - expected).abs(),
        cfg.tolerances.pinned,
    ));

    let band = 2.5 * PINNED_EPS_RATIO * params.s_k();
    let tag = region_classify(&params, &shell_point(n, PI / 2.0, band))?;
    let inside = tag.psi > 0.0 && tag.psi < 1.0 && tag.beta == 1.0;
    report.push(
        Check::flag(format!("tube cutoff band r_k={r_k:e}"), tag.psi, 0.5, inside)
            .with_detail(format!("psi = {}, beta = {}", tag.psi, tag.beta)),
    );
    Ok(())
}

pub fn slope_checks(cfg: &ExperimentConfig, report: &mut Report) -> anyhow::Result<()> {
    let d = 2 * cfg.m;
    let (mut cot, mut inv) = (Vec::new(), Vec::new());
    for (i, &r) in cfg.slope_r_k.iter().enumerate() {
        let (a, b) = tube_annulus_integrals(d, r, cfg.samples.tube_annulus, cfg.seed.wrapping_add(2 * i as u64))?;
        report.row(Some(r), "tube-annulus:cot", a.estimate, a.stderr, a.samples, None, None, None);
        report.row(Some(r), "tube-annulus:inv", b.estimate, b.stderr, b.samples, None, None, None);
        cot.push(a.estimate);
        inv.push(b.estimate);
    }
    let s1 = log_log_slope(&cfg.slope_r_k, &cot)?;
    let s2 = log_log_slope(&cfg.slope_r_k, &inv)?;
    report.push(Check::at_most("tube annulus slope |cot r|^d", (s1 - 1.0).abs(), cfg.tolerances.slope).with_detail(format!("slope {s1:.4}")));
    report.push(
        Check::at_most("tube annulus slope (1+cot^2 r)^(d/2-1)", (s2 - 2.0).abs(), cfg.tolerances.slope)
            .with_detail(format!("slope {s2:.4}")),
    );
    Ok(())
}
