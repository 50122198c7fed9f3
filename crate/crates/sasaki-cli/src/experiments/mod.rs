//! The four experiments. Each returns a [`Report`]; writing files and the
//! exit status are left to the caller.

pub mod comass;
pub mod lowerbound;
pub mod recovery;
pub mod verify;

use sasaki_calib::calibration::{graph_density, phi_d, CalibCoefficients};
use sasaki_calib::fields::{graph_blocks, UnitField};
use sasaki_calib::quadrature::{sample_uniform, Moments};
use sasaki_calib::sphere::{sphere_volume, SpherePoint};

use crate::config::{Experiment, ExperimentConfig};
use crate::fault::Fault;
use crate::report::Report;

/// Runs the experiment named in `cfg`, with `fault` applied first.
pub fn run(cfg: &ExperimentConfig, fault: Option<Fault>) -> anyhow::Result<Report> {
    let mut cfg = cfg.clone();
    if let Some(f) = fault {
        f.apply(&mut cfg);
    }
    cfg.validate()?;
    let mut report = Report::new(&cfg, fault.map(|f| f.name().to_string()));
    match cfg.experiment {
        Experiment::Verify => verify::run(&cfg, fault, &mut report)?,
        Experiment::Lowerbound => lowerbound::run(&cfg, fault, &mut report)?,
        Experiment::Recovery => recovery::run(&cfg, fault, &mut report)?,
        Experiment::Comass => comass::run(&cfg, fault, &mut report)?,
    }
    Ok(report)
}

/// `c(m; 1) · vol(S^{2m+1})`.
pub fn calibrated_volume(coeff: &CalibCoefficients) -> f64 {
    coeff.c_m1_f64() * sphere_volume(coeff.d() + 1)
}

/// Sphere integrals of `dens(V)` and `Φ_d(M_V)` from one set of uniform
/// samples, returned as `(estimate, stderr)` pairs.
pub fn density_and_phi_integrals(
    field: &UnitField,
    coeff: &CalibCoefficients,
    samples: usize,
    seed: u64,
    step: f64,
) -> anyhow::Result<((f64, f64), (f64, f64))> {
    let n = coeff.d() + 1;
    let vol = sphere_volume(n);
    let (mut dens, mut phi) = (Moments::default(), Moments::default());
    for x in sample_uniform(n, seed)?.take(samples) {
        let blocks = graph_blocks(field, &x, step)?;
        dens.push(graph_density(&blocks)?);
        phi.push(phi_d(coeff, blocks.m())?);
    }
    Ok(((vol * dens.mean(), vol * dens.stderr()), (vol * phi.mean(), vol * phi.stderr())))
}

/// Point at distance `r` from the pole `e_{n+1}` with tube radius `d_c`,
/// its tube component along `e_2`.
pub fn shell_point(n: usize, r: f64, d_c: f64) -> SpherePoint {
    let mut x = vec![0.0; n + 1];
    x[0] = (r.sin().powi(2) - d_c * d_c).max(0.0).sqrt();
    x[1] = d_c;
    x[n] = r.cos();
    SpherePoint::normalized(x).expect("nonzero point")
}

#[cfg(test)]
mod tests {
    use super::*;
    use sasaki_calib::calibration::coefficients;
    use sasaki_calib::fields::hopf_field;
    use sasaki_calib::sphere::{geodesic_distance, tube_radius};

    #[test]
    fn shell_point_has_requested_coordinates() {
        let pole = SpherePoint::basis(5, 6);
        let x = shell_point(5, 0.4, 0.05);
        assert!((geodesic_distance(&x, &pole) - 0.4).abs() < 1e-14);
        assert!((tube_radius(&x) - 0.05).abs() < 1e-14);
    }

    #[test]
    fn hopf_integrals_are_exact() {
        let c = coefficients(2).unwrap();
        let ((dens, se), (phi, _)) = density_and_phi_integrals(&hopf_field(2).unwrap(), &c, 200, 1, 1e-5).unwrap();
        let vol = sphere_volume(5);
        assert!((dens - 4.0 * vol).abs() < 1e-12 && se < 1e-12);
        assert!((phi - calibrated_volume(&c)).abs() < 1e-12);
    }
}
