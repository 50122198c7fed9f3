//! Sampled comass of `ω`, the diagonal-plane sweep and fibre-antipodal
//! invariance.

use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sasaki_calib::calibration::{comass_scan, omega_on_diagonal, random_unit_tangent_point, sasaki_frame};
use serde_json::json;

use crate::config::ExperimentConfig;
use crate::fault::{coefficients_with, Fault};
use crate::report::{Check, Report};

pub fn run(cfg: &ExperimentConfig, fault: Option<Fault>, report: &mut Report) -> anyhow::Result<()> {
    let tol = &cfg.tolerances;
    let coeff = coefficients_with(cfg.m, fault)?;
    let n = coeff.d() + 1;
    let scan = comass_scan(&coeff, cfg.samples.comass_frames, cfg.seed)?;
    report.push(Check::at_most("comass max |omega|", scan.max_abs, 1.0 + tol.comass));
    report.push(Check::at_most("fibre-antipodal invariance", scan.max_antipodal_deviation, tol.antipodal));
    report.row(None, "max|omega|", scan.max_abs, 0.0, scan.samples, Some(1.0), Some(1.0 - scan.max_abs), Some(scan.max_abs <= 1.0 + tol.comass));

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x5eed);
    let angles = cfg.samples.diagonal_angles;
    let mut worst: f64 = 0.0;
    let mut first_sweep = Vec::with_capacity(angles);
    for b in 0..cfg.samples.diagonal_bases {
        let frame = sasaki_frame(&random_unit_tangent_point(&mut rng, n))?;
        for k in 0..angles {
            let phi = 2.0 * PI * k as f64 / angles as f64;
            let w = omega_on_diagonal(&coeff, &frame, phi)?;
            worst = worst.max((w - 1.0).abs());
            if b == 0 {
                first_sweep.push(json!({ "phi": phi, "omega": w }));
            }
        }
    }
    let sweep = Check::at_most("diagonal sweep |omega - 1|", worst, tol.diagonal);
    report.row(None, "diagonal-sweep", 1.0 - worst, 0.0, cfg.samples.diagonal_bases * angles, Some(1.0), Some(tol.diagonal - worst), Some(sweep.pass));
    report.push(sweep);
    report.details = json!({
        "max_abs_omega": scan.max_abs,
        "argmax_base": { "x": scan.argmax_base.x(), "v": scan.argmax_base.v() },
        "argmax_frame_coords": scan.argmax_coords,
        "max_antipodal_deviation": scan.max_antipodal_deviation,
        "diagonal_sweep": first_sweep,
        "diagonal_max_deviation": worst,
    });
    Ok(())
}
