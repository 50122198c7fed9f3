//! Experiment configuration: one JSON document per run, with command-line
//! overrides applied on top.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use sasaki_calib::recovery::{RecoveryConstants, RecoveryParams};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// Which experiment a config drives.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    Verify,
    Lowerbound,
    Recovery,
    Comass,
}

impl Experiment {
    /// Lower-case name used in file names and CSV rows.
    pub fn name(&self) -> &'static str {
        match self {
            Experiment::Verify => "verify",
            Experiment::Lowerbound => "lowerbound",
            Experiment::Recovery => "recovery",
            Experiment::Comass => "comass",
        }
    }

    /// The config shipped in `configs/` for this experiment.
    pub fn default_config(&self) -> ExperimentConfig {
        let text = match self {
            Experiment::Verify => include_str!("../configs/verify.json"),
            Experiment::Lowerbound => include_str!("../configs/lowerbound.json"),
            Experiment::Recovery => include_str!("../configs/recovery.json"),
            Experiment::Comass => include_str!("../configs/comass.json"),
        };
        serde_json::from_str(text).expect("shipped config parses")
    }
}

/// Unit fields available to the lower-bound experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldKind {
    Hopf,
    Radial,
    RotatedHopf,
    PerturbedHopf,
    Recovery,
}

impl FieldKind {
    pub fn name(&self) -> &'static str {
        match self {
            FieldKind::Hopf => "hopf",
            FieldKind::Radial => "radial",
            FieldKind::RotatedHopf => "rotated_hopf",
            FieldKind::PerturbedHopf => "perturbed_hopf",
            FieldKind::Recovery => "recovery",
        }
    }
}

/// How the recovery study treats the exterior stratum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExteriorMode {
    /// Exact radial reduction of `sin^{−d} r`.
    RadialDensity,
    /// Monte Carlo like every other stratum.
    Sampled,
}

/// Sample counts. Each experiment reads the ones it needs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SampleCounts {
    /// Uniform samples for plain Monte Carlo sphere integrals.
    pub plain: usize,
    /// Samples in each stratum of the recovery integral.
    pub per_stratum: usize,
    /// Random instances per exact identity.
    pub property_cases: usize,
    /// Base points for the pointwise calibration checks of the radial field.
    pub pointwise: usize,
    /// Samples per stratum of the nonvanishing scan.
    pub nonvanishing: usize,
    /// Paths walked by the branch diagnostic.
    pub branch_paths: usize,
    /// Samples per tube-annulus integral.
    pub tube_annulus: usize,
    /// Random Sasaki-orthonormal frames for the comass scan.
    pub comass_frames: usize,
    /// Base points of the diagonal sweep.
    pub diagonal_bases: usize,
    /// Angles per base point of the diagonal sweep.
    pub diagonal_angles: usize,
}

impl Default for SampleCounts {
    fn default() -> Self {
        Self {
            plain: 1_000_000,
            per_stratum: 100_000,
            property_cases: 1000,
            pointwise: 10_000,
            nonvanishing: 10_000,
            branch_paths: 200,
            tube_annulus: 40_000,
            comass_frames: 100_000,
            diagonal_bases: 50,
            diagonal_angles: 65,
        }
    }
}

/// Pass/fail tolerances.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Beta-integral quadrature against the stored `C_{2j}`.
    pub beta_integral: f64,
    /// Relative error of the exact matrix identities.
    pub identity_rel: f64,
    /// Relative error of the radial volume identity.
    pub radial_volume_rel: f64,
    /// Number of standard errors allowed in Monte Carlo comparisons.
    pub sigmas: f64,
    /// `|ω| ≤ 1 + comass`.
    pub comass: f64,
    /// `|ω − 1|` on diagonal planes.
    pub diagonal: f64,
    /// `|ω∘ι_* − ω|`.
    pub antipodal: f64,
    /// `dens(R) − Φ_d(M_R)`.
    pub calibration_defect: f64,
    /// `|b|` and `‖M − λI‖_F` for the radial field.
    pub rigidity: f64,
    /// `R(λ) + λ² + 1`.
    pub riccati: f64,
    /// Distance from the computed centre to the pole.
    pub center: f64,
    /// Allowed deviation of the fitted tube-annulus slopes from 1 and 2.
    pub slope: f64,
    /// Largest allowed ratio between any two values of `excess / s_k`.
    pub excess_ratio: f64,
    /// Agreement of pinned recovery identities.
    pub pinned: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            beta_integral: 1e-12,
            identity_rel: 1e-10,
            radial_volume_rel: 1e-10,
            sigmas: 3.0,
            comass: 1e-9,
            diagonal: 1e-12,
            antipodal: 1e-10,
            calibration_defect: 1e-6,
            rigidity: 1e-6,
            riccati: 1e-5,
            center: 1e-9,
            slope: 0.3,
            excess_ratio: 10.0,
            pinned: 1e-12,
        }
    }
}

/// A complete experiment description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    /// Half-dimension of the sphere `S^{2m+1}`.
    #[serde(default = "default_m")]
    pub m: usize,
    /// Half-dimensions whose calibration coefficients are checked.
    #[serde(default = "default_coefficient_ms")]
    pub coefficient_ms: Vec<usize>,
    /// Repair scales, in the order the study walks them.
    #[serde(default = "default_r_k")]
    pub r_k: Vec<f64>,
    /// Scales of the tube-annulus slope fit.
    #[serde(default = "default_slope_r_k")]
    pub slope_r_k: Vec<f64>,
    /// Fields of the lower-bound experiment.
    #[serde(default = "default_fields")]
    pub fields: Vec<FieldKind>,
    #[serde(default)]
    pub samples: SampleCounts,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub constants: RecoveryConstants,
    #[serde(default = "default_exterior")]
    pub exterior: ExteriorMode,
    /// Output directory.
    #[serde(default = "default_out")]
    pub out: PathBuf,
}

fn default_m() -> usize {
    2
}

fn default_coefficient_ms() -> Vec<usize> {
    vec![2, 3]
}

fn default_r_k() -> Vec<f64> {
    vec![1e-2, 3e-3, 1e-3]
}

fn default_slope_r_k() -> Vec<f64> {
    vec![1e-3, 2e-3, 4e-3, 1e-2]
}

fn default_fields() -> Vec<FieldKind> {
    vec![FieldKind::Hopf, FieldKind::Radial, FieldKind::RotatedHopf, FieldKind::PerturbedHopf, FieldKind::Recovery]
}

fn default_exterior() -> ExteriorMode {
    ExteriorMode::RadialDensity
}

fn default_out() -> PathBuf {
    PathBuf::from("results")
}

impl ExperimentConfig {
    /// Reads and validates a config file.
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let cfg: Self = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Sets the headline sample count of the experiment.
    pub fn override_samples(&mut self, n: usize) {
        match self.experiment {
            Experiment::Verify => {
                self.samples.pointwise = n;
                self.samples.nonvanishing = n;
            }
            Experiment::Lowerbound => self.samples.plain = n,
            Experiment::Recovery => self.samples.per_stratum = n,
            Experiment::Comass => self.samples.comass_frames = n,
        }
    }

    /// Checks counts and that every `r_k` gives valid recovery parameters.
    pub fn validate(&self) -> anyhow::Result<()> {
        let s = &self.samples;
        let counts = [
            s.plain,
            s.per_stratum,
            s.property_cases,
            s.pointwise,
            s.nonvanishing,
            s.branch_paths,
            s.tube_annulus,
            s.comass_frames,
            s.diagonal_bases,
            s.diagonal_angles,
        ];
        if counts.contains(&0) {
            bail!("all sample counts must be at least 1: {s:?}");
        }
        if self.m < 2 || self.coefficient_ms.iter().any(|&m| m < 2) {
            bail!("half-dimensions must be at least 2");
        }
        if self.r_k.is_empty() {
            bail!("r_k list is empty");
        }
        for &r in &self.r_k {
            RecoveryParams::with_constants(self.m, r, self.constants)
                .with_context(|| format!("r_k = {r} rejected"))?;
        }
        if self.experiment == Experiment::Recovery && self.r_k.windows(2).any(|w| w[1] >= w[0]) {
            bail!("the recovery study needs r_k in descending order, got {:?}", self.r_k);
        }
        if self.slope_r_k.len() < 2 {
            bail!("the slope fit needs at least two scales");
        }
        Ok(())
    }

    /// Lower-case hex SHA-256 of the canonical JSON form, with the output
    /// directory left out.
    pub fn hash(&self) -> String {
        let mut keyed = self.clone();
        keyed.out = PathBuf::new();
        let bytes = serde_json::to_vec(&keyed).expect("config serializes");
        Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shipped_configs_are_valid() {
        for e in [Experiment::Verify, Experiment::Lowerbound, Experiment::Recovery, Experiment::Comass] {
            let cfg = e.default_config();
            assert_eq!(cfg.experiment, e);
            cfg.validate().unwrap();
        }
    }

    #[test]
    fn hash_tracks_every_field() {
        let a = Experiment::Recovery.default_config();
        let mut b = a.clone();
        assert_eq!(a.hash(), b.hash());
        b.out = PathBuf::from("elsewhere");
        assert_eq!(a.hash(), b.hash());
        b.seed += 1;
        assert_ne!(a.hash(), b.hash());
        assert_eq!(a.hash().len(), 64);
    }

    #[test]
    fn rejects_bad_configs() {
        let mut c = Experiment::Recovery.default_config();
        c.r_k = vec![1e-3, 1e-2];
        assert!(c.validate().is_err());
        c.r_k = vec![0.5];
        assert!(c.validate().is_err());
        let mut c = Experiment::Verify.default_config();
        c.samples.plain = 0;
        assert!(c.validate().is_err());
        assert!(serde_json::from_str::<ExperimentConfig>(r#"{"experiment": "verify", "bogus": 1}"#).is_err());
    }

    #[test]
    fn overrides_touch_the_headline_count() {
        let mut c = Experiment::Comass.default_config();
        c.override_samples(17);
        assert_eq!(c.samples.comass_frames, 17);
    }
}
