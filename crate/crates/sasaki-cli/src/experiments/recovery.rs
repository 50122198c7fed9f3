//! Stratified Sasaki volume of the recovery fields `V_k` along a list of
//! repair scales.

use anyhow::Context;
use sasaki_calib::calibration::field_density;
use sasaki_calib::quadrature::{integrate_stratified, ExteriorRule};
use sasaki_calib::recovery::{recovery_field, RecoveryParams};
use sasaki_calib::Error;
use serde_json::json;

use super::calibrated_volume;
use crate::config::{ExperimentConfig, ExteriorMode};
use crate::fault::{coefficients_with, Fault};
use crate::report::{Check, Report};

/// One line of the convergence table.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct ScaleResult {
    pub r_k: f64,
    pub s_k: f64,
    pub total: f64,
    pub stderr: f64,
    pub excess: f64,
    pub excess_over_s: f64,
    pub exterior: f64,
}

pub fn run(cfg: &ExperimentConfig, fault: Option<Fault>, report: &mut Report) -> anyhow::Result<()> {
    let coeff = coefficients_with(cfg.m, fault)?;
    let target = calibrated_volume(&coeff);
    let rule = match cfg.exterior {
        ExteriorMode::RadialDensity => ExteriorRule::RadialDensity,
        ExteriorMode::Sampled => ExteriorRule::Sampled,
    };
    let mut table = Vec::new();
    for &r_k in &cfg.r_k {
        let params = RecoveryParams::with_constants(cfg.m, r_k, cfg.constants)?;
        let field = recovery_field(&params);
        let step = params.fd_step();
        let q = match integrate_stratified(|x| field_density(&field, x, step), &params, cfg.samples.per_stratum, cfg.seed, rule) {
            Ok(q) => q,
            Err(e @ Error::NonvanishingViolation { .. }) => {
                let dump = cfg.out.join(format!("recovery-violation-r{r_k:e}.json"));
                std::fs::create_dir_all(&cfg.out)?;
                std::fs::write(&dump, serde_json::to_vec_pretty(&json!({ "r_k": r_k, "error": format!("{e}"), "detail": format!("{e:?}") }))?)?;
                return Err(e).with_context(|| format!("diagnostics dumped to {}", dump.display()));
            }
            Err(e) => return Err(e.into()),
        };
        for s in &q.strata {
            report.row(Some(r_k), &s.name, s.estimate, s.stderr, s.samples, None, None, None);
        }
        let exterior = q.stratum("exterior").map_or(0.0, |s| s.estimate);
        let excess = q.estimate - target;
        let positive = Check::at_least(format!("excess positive r_k={r_k:e}"), excess, 0.0)
            .with_detail(format!("Vol = {:.6} ± {:.2e}", q.estimate, q.stderr));
        report.row(Some(r_k), "total", q.estimate, q.stderr, q.samples, Some(target), Some(excess), Some(positive.pass));
        report.row(Some(r_k), "excess", excess, q.stderr, q.samples, Some(0.0), Some(excess), Some(positive.pass));
        report.row(Some(r_k), "excess/s_k", excess / params.s_k(), q.stderr / params.s_k(), q.samples, None, None, None);
        report.push(positive);
        let ext = Check::at_most(format!("exterior below c vol r_k={r_k:e}"), exterior, target);
        report.row(Some(r_k), "exterior-vs-bound", exterior, 0.0, 0, Some(target), Some(target - exterior), Some(ext.pass));
        report.push(ext);
        table.push(ScaleResult {
            r_k,
            s_k: params.s_k(),
            total: q.estimate,
            stderr: q.stderr,
            excess,
            excess_over_s: excess / params.s_k(),
            exterior,
        });
    }
    if table.len() >= 2 {
        let rise = table.windows(2).map(|w| w[1].excess - w[0].excess).fold(f64::NEG_INFINITY, f64::max);
        report.push(Check::flag("excess decreasing", rise, 0.0, rise < 0.0).with_detail("largest step-to-step change"));
        let ratios: Vec<f64> = table.iter().map(|t| t.excess_over_s).collect();
        let hi = ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lo = ratios.iter().copied().fold(f64::INFINITY, f64::min);
        let spread = if lo > 0.0 { hi / lo } else { f64::INFINITY };
        report.push(Check::at_most("excess/s_k spread", spread, cfg.tolerances.excess_ratio));
    }
    report.details = json!({ "calibrated_volume": target, "scales": table });
    Ok(())
}
