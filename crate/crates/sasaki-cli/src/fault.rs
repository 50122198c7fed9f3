//! Deliberate corruption of a single constant, used to show that the checks
//! can fail.

use std::str::FromStr;

use anyhow::bail;
use num_rational::Ratio;
use sasaki_calib::calibration::{coefficients, CalibCoefficients};

use crate::config::ExperimentConfig;

/// A single corrupted constant.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fault {
    /// `C_2` is raised by `1/1000`.
    C2,
    /// The tilt strength `ϑ` becomes `0.55`.
    Vartheta,
    /// The tube cutoff ratio `ε_k / s_k` becomes `1/10`.
    CutoffEps,
}

impl Fault {
    pub const ALL: [Fault; 3] = [Fault::C2, Fault::Vartheta, Fault::CutoffEps];

    pub fn name(&self) -> &'static str {
        match self {
            Fault::C2 => "c2",
            Fault::Vartheta => "vartheta",
            Fault::CutoffEps => "cutoff-eps",
        }
    }

    /// Applies the fault to the recovery constants of a config.
    pub fn apply(&self, cfg: &mut ExperimentConfig) {
        match self {
            Fault::C2 => {}
            Fault::Vartheta => cfg.constants.vartheta = 0.55,
            Fault::CutoffEps => cfg.constants.eps_ratio = 0.1,
        }
    }
}

impl FromStr for Fault {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> anyhow::Result<Self> {
        match Fault::ALL.iter().find(|f| f.name() == s) {
            Some(f) => Ok(*f),
            None => bail!(
                "unknown fault '{s}', expected one of {:?}",
                Fault::ALL.iter().map(Fault::name).collect::<Vec<_>>()
            ),
        }
    }
}

/// Calibration coefficients for `m`, corrupted when the fault targets them.
pub fn coefficients_with(m: usize, fault: Option<Fault>) -> anyhow::Result<CalibCoefficients> {
    let mut c = coefficients(m)?;
    if fault == Some(Fault::C2) {
        c.c2j[1] += Ratio::new(1, 1000);
    }
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Experiment;

    #[test]
    fn names_round_trip() {
        for f in Fault::ALL {
            assert_eq!(f.name().parse::<Fault>().unwrap(), f);
        }
        assert!("nope".parse::<Fault>().is_err());
    }

    #[test]
    fn faults_touch_one_constant() {
        let base = Experiment::Verify.default_config();
        for f in Fault::ALL {
            let mut cfg = base.clone();
            f.apply(&mut cfg);
            let clean = coefficients(2).unwrap();
            let faulty = coefficients_with(2, Some(f)).unwrap();
            let changed = usize::from(cfg.constants != base.constants) + usize::from(clean != faulty);
            assert_eq!(changed, 1, "{f:?}");
        }
    }
}
