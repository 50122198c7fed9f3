//! Monte Carlo integrals of `dens(V)` and `Φ_d(M_V)` for several unit fields,
//! compared with `c(m; 1) vol(S^n)`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sasaki_calib::calibration::random_rotation;
use sasaki_calib::fields::{hopf_field, perturbed_hopf_field, radial_field, rotated_hopf_field, UnitField, DEFAULT_STEP};
use sasaki_calib::recovery::{recovery_field, RecoveryParams};
use sasaki_calib::sphere::{sphere_volume, SpherePoint};
use serde_json::json;

use super::{calibrated_volume, density_and_phi_integrals};
use crate::config::{ExperimentConfig, FieldKind};
use crate::fault::{coefficients_with, Fault};
use crate::report::{Check, Report};

/// Amplitude of the polynomial perturbation of the Hopf field.
pub const PERTURBATION: f64 = 0.3;

fn build_field(kind: FieldKind, cfg: &ExperimentConfig) -> anyhow::Result<(UnitField, f64)> {
    let m = cfg.m;
    Ok(match kind {
        FieldKind::Hopf => (hopf_field(m)?, DEFAULT_STEP),
        FieldKind::Radial => (radial_field(&SpherePoint::basis(2 * m + 1, 2 * m + 2)), DEFAULT_STEP),
        FieldKind::RotatedHopf => {
            let q = random_rotation(&mut ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x0407), 2 * m + 2);
            (rotated_hopf_field(m, &q)?, DEFAULT_STEP)
        }
        FieldKind::PerturbedHopf => (perturbed_hopf_field(m, PERTURBATION)?, DEFAULT_STEP),
        FieldKind::Recovery => {
            let params = RecoveryParams::with_constants(m, cfg.r_k[0], cfg.constants)?;
            let step = params.fd_step();
            (recovery_field(&params), step)
        }
    })
}

pub fn run(cfg: &ExperimentConfig, fault: Option<Fault>, report: &mut Report) -> anyhow::Result<()> {
    let coeff = coefficients_with(cfg.m, fault)?;
    let target = calibrated_volume(&coeff);
    let sig = cfg.tolerances.sigmas;
    let n = cfg.samples.plain;
    let mut details = Vec::new();
    for (i, &kind) in cfg.fields.iter().enumerate() {
        let (field, step) = build_field(kind, cfg)?;
        let r_k = (kind == FieldKind::Recovery).then(|| cfg.r_k[0]);
        let seed = cfg.seed.wrapping_add(i as u64);
        let ((dens, dens_se), (phi, phi_se)) = density_and_phi_integrals(&field, &coeff, n, seed, step)?;
        let name = kind.name();

        let lower = target - sig * dens_se;
        let c = Check::at_least(format!("{name} dens lower bound"), dens, lower)
            .with_detail(format!("{dens:.6} ± {dens_se:.2e} vs c vol = {target:.6}"));
        report.row(r_k, &format!("{name}:dens"), dens, dens_se, n, Some(target), Some(dens - target), Some(c.pass));
        report.push(c);

        let slack = sig * phi_se + 1e-12 * target;
        let dev = (phi - target).abs();
        let c = Check::at_most(format!("{name} phi invariance"), dev, slack)
            .with_detail(format!("{phi:.6} ± {phi_se:.2e} vs c vol = {target:.6}"));
        report.row(r_k, &format!("{name}:phi"), phi, phi_se, n, Some(target), Some(phi - target), Some(c.pass));
        report.push(c);

        if kind == FieldKind::Hopf {
            let exact = 2f64.powi(cfg.m as i32) * sphere_volume(2 * cfg.m + 1);
            report.push(Check::at_most("hopf dens closed form", (dens - exact).abs(), 1e-12 * exact));
        }
        details.push(json!({
            "field": name, "r_k": r_k, "dens": dens, "dens_stderr": dens_se, "phi": phi, "phi_stderr": phi_se,
        }));
    }
    report.details = json!({ "calibrated_volume": target, "fields": details });
    Ok(())
}
