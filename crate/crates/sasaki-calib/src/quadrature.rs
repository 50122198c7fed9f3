//! Integration of scalar densities over `S^n`.
//!
//! Three tools are provided: plain Monte Carlo with uniform samples,
//! Monte Carlo stratified along the recovery decomposition (caps, shells,
//! tube, exterior), and deterministic 1-D reductions for radial integrands.
//!
//! Sampling is split into fixed-size chunks. Chunk `i` of a stratum draws
//! from a ChaCha stream derived from `(seed, stratum, i)`, so results are
//! reproducible regardless of the thread count.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::recovery::RecoveryParams;
use crate::sphere::{sin_power_integral, sphere_volume, SpherePoint};
use crate::{Error, Result};

/// Samples per reproducible chunk.
pub const CHUNK: usize = 4096;

/// Estimate contributed by one stratum.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StratumResult {
    /// Stratum label, e.g. `cap+` or `tube-far`.
    pub name: String,
    /// Integral over the stratum.
    pub estimate: f64,
    /// Standard error of the estimate (0 for deterministic strata).
    pub stderr: f64,
    /// Number of density evaluations.
    pub samples: usize,
    /// Free-form remark, e.g. why a stratum was skipped.
    pub note: Option<String>,
}

/// Result of a sphere integral.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuadratureResult {
    /// Total estimate.
    pub estimate: f64,
    /// Standard error of the total.
    pub stderr: f64,
    /// Total number of density evaluations.
    pub samples: usize,
    /// Per-stratum breakdown; empty for unstratified integrals.
    pub strata: Vec<StratumResult>,
}

impl QuadratureResult {
    /// Looks up a stratum by label.
    pub fn stratum(&self, name: &str) -> Option<&StratumResult> {
        self.strata.iter().find(|s| s.name == name)
    }

    fn from_strata(strata: Vec<StratumResult>) -> Self {
        let estimate = strata.iter().map(|s| s.estimate).sum();
        let stderr = strata.iter().map(|s| s.stderr * s.stderr).sum::<f64>().sqrt();
        let samples = strata.iter().map(|s| s.samples).sum();
        Self { estimate, stderr, samples, strata }
    }
}

/// Running mean and centred second moment, mergeable across chunks.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Moments {
    count: usize,
    mean: f64,
    m2: f64,
}

impl Moments {
    /// Adds one observation.
    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    /// Merges another accumulator into this one.
    pub fn merge(&mut self, other: &Moments) {
        if other.count == 0 {
            return;
        }
        if self.count == 0 {
            *self = *other;
            return;
        }
        let n = (self.count + other.count) as f64;
        let delta = other.mean - self.mean;
        self.mean += delta * other.count as f64 / n;
        self.m2 += other.m2 + delta * delta * self.count as f64 * other.count as f64 / n;
        self.count += other.count;
    }

    /// Number of observations.
    pub fn count(&self) -> usize {
        self.count
    }

    /// Sample mean.
    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Standard error of the mean.
    pub fn stderr(&self) -> f64 {
        if self.count < 2 {
            return 0.0;
        }
        (self.m2 / (self.count - 1) as f64 / self.count as f64).sqrt()
    }
}

fn chunk_rng(seed: u64, tag: u64, chunk: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(tag.wrapping_mul(1 << 32).wrapping_add(chunk));
    rng
}

/// Draws `samples` values of `draw` in reproducible parallel chunks.
fn sample_moments<G>(samples: usize, seed: u64, tag: u64, draw: G) -> Result<Moments>
where
    G: Fn(&mut ChaCha8Rng) -> Result<f64> + Sync,
{
    let chunks = samples.div_ceil(CHUNK);
    let parts: Vec<Moments> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = chunk_rng(seed, tag, c as u64);
            let len = CHUNK.min(samples - c * CHUNK);
            let mut acc = Moments::default();
            for _ in 0..len {
                acc.push(draw(&mut rng)?);
            }
            Ok(acc)
        })
        .collect::<Result<_>>()?;
    let mut total = Moments::default();
    for p in &parts {
        total.merge(p);
    }
    Ok(total)
}

/// A standard Gaussian vector of length `len`, normalised.
pub(crate) fn gaussian_unit<R: Rng + ?Sized>(rng: &mut R, len: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..len).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        let r = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if r > 1e-300 {
            return v.into_iter().map(|x| x / r).collect();
        }
    }
}

/// Infinite stream of i.i.d. uniform points on `S^n`.
pub struct UniformSphere {
    rng: ChaCha8Rng,
    n: usize,
}

impl Iterator for UniformSphere {
    type Item = SpherePoint;

    fn next(&mut self) -> Option<SpherePoint> {
        let v = gaussian_unit(&mut self.rng, self.n + 1);
        Some(SpherePoint::normalized(v).expect("normalised Gaussian sample"))
    }
}

/// Uniform points on `S^n` from normalised Gaussian vectors, deterministic per seed.
pub fn sample_uniform(n: usize, seed: u64) -> Result<UniformSphere> {
    if n < 2 {
        return Err(Error::Argument(format!("sphere dimension must be at least 2, got {n}")));
    }
    Ok(UniformSphere { rng: ChaCha8Rng::seed_from_u64(seed), n })
}

fn checked(value: f64, x: &[f64]) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::NonFinite(format!("density {value} at {x:?}")))
    }
}

/// Plain Monte Carlo: `vol(S^n)` times the sample mean of `density`.
pub fn integrate_mc<F>(density: F, n: usize, samples: usize, seed: u64) -> Result<QuadratureResult>
where
    F: Fn(&SpherePoint) -> Result<f64> + Sync,
{
    if n < 2 {
        return Err(Error::Argument(format!("sphere dimension must be at least 2, got {n}")));
    }
    if samples == 0 {
        return Err(Error::Argument("at least one sample is required".into()));
    }
    let moments = sample_moments(samples, seed, 0, |rng| {
        let x = SpherePoint::normalized(gaussian_unit(rng, n + 1))?;
        checked(density(&x)?, x.coords())
    })?;
    let vol = sphere_volume(n);
    Ok(QuadratureResult {
        estimate: vol * moments.mean(),
        stderr: vol * moments.stderr(),
        samples,
        strata: Vec::new(),
    })
}

/// How [`integrate_stratified`] treats the exterior stratum.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExteriorRule {
    /// Sample the exterior by rejection from uniform points.
    Sampled,
    /// Use the exact value of `∫ sin^{−d} r` over the exterior, which is the
    /// density of the recovery field there.
    RadialDensity,
}

/// Stratum labels in output order.
pub const STRATA: [&str; 8] =
    ["cap+", "cap-", "shell+", "shell-", "tube-near+", "tube-near-", "tube-far", "exterior"];

/// Geometry shared by the stratum samplers, with `p = e_{n+1}` and `C` the
/// great circle through `p` and `e_1`.
struct Layout {
    ambient: usize,
    d: usize,
    s: f64,
    r: f64,
    eps3: f64,
}

impl Layout {
    fn new(params: &RecoveryParams) -> Self {
        let d = 2 * params.m();
        Self { ambient: d + 2, d, s: params.s_k(), r: params.r_k(), eps3: 3.0 * params.eps_k() }
    }

    /// `cos r · (±p) + sin r · θ` with `θ` uniform on the equatorial `S^d`.
    fn polar_point<R: Rng>(&self, rng: &mut R, r: f64, minus: bool) -> Vec<f64> {
        let theta = gaussian_unit(rng, self.ambient - 1);
        let (sr, cr) = r.sin_cos();
        let mut x: Vec<f64> = theta.iter().map(|t| sr * t).collect();
        x.push(if minus { -cr } else { cr });
        x
    }

    /// Join point `cos ρ (cos φ p + sin φ e_1) + sin ρ z` around `C`.
    fn join_point<R: Rng>(&self, rng: &mut R, rho: f64, phi: f64) -> Vec<f64> {
        let z = gaussian_unit(rng, self.d);
        let (sr, cr) = rho.sin_cos();
        let mut x = Vec::with_capacity(self.ambient);
        x.push(cr * phi.sin());
        x.extend(z.iter().map(|v| sr * v));
        x.push(cr * phi.cos());
        x
    }

    /// `ρ` with density `∝ cos ρ sin^{d−1} ρ` on `(0, asin 3ε)`.
    fn tube_rho<R: Rng>(&self, rng: &mut R) -> f64 {
        let u: f64 = rng.random();
        (self.eps3 * u.powf(1.0 / self.d as f64)).asin()
    }

    /// `∫_0^{asin 3ε} cos ρ sin^{d−1} ρ dρ`.
    fn tube_rho_mass(&self) -> f64 {
        self.eps3.powi(self.d as i32) / self.d as f64
    }
}

/// Picks `φ` uniformly from `{lo ≤ |φ| ≤ hi}` and returns it with `2(hi − lo)`.
fn symmetric_band<R: Rng>(rng: &mut R, lo: f64, hi: f64) -> (f64, f64) {
    let u: f64 = rng.random();
    let phi = lo + (hi - lo) * u;
    let phi = if rng.random::<bool>() { phi } else { -phi };
    (phi, 2.0 * (hi - lo))
}

/// `∫` over `{s+r ≤ r_± ≤ π−s−r} ∩ {d_C ≥ 3ε}` of `sin^{−d} r`.
///
/// In polar coordinates about `p` the integrand cancels the volume element,
/// and the tube removes two caps of angular radius `asin(3ε / sin r)` from
/// each equatorial sphere `S^d`.
pub fn exterior_radial_density(params: &RecoveryParams) -> Result<f64> {
    let lay = Layout::new(params);
    let d = lay.d;
    let full = sphere_volume(d);
    let cap = 2.0 * sphere_volume(d - 1);
    let f = |r: f64| {
        let a = (lay.eps3 / r.sin()).min(1.0).asin();
        full - cap * sin_power_integral(d - 1, a)
    };
    let lo = lay.s + lay.r;
    adaptive_integrate(f, lo, PI - lo, 1e-12)
}

/// One stratum of the recovery decomposition of `S^{2m+1}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Stratum {
    /// `r_+ < s_k`.
    CapPlus = 1,
    /// `r_− < s_k`.
    CapMinus,
    /// `s_k ≤ r_+ < s_k + r_k`.
    ShellPlus,
    /// `s_k ≤ r_− < s_k + r_k`.
    ShellMinus,
    /// `d_C < 3ε_k`, `s_k + r_k ≤ r_+ < s_k + 2r_k`.
    TubeNearPlus,
    /// `d_C < 3ε_k`, `s_k + r_k ≤ r_− < s_k + 2r_k`.
    TubeNearMinus,
    /// `d_C < 3ε_k`, both `r_± ≥ s_k + 2r_k`.
    TubeFar,
    /// The rest of the sphere.
    Exterior,
}

impl Stratum {
    /// All strata in output order.
    pub fn all() -> [Stratum; 8] {
        use Stratum::*;
        [CapPlus, CapMinus, ShellPlus, ShellMinus, TubeNearPlus, TubeNearMinus, TubeFar, Exterior]
    }

    /// Output label, as listed in [`STRATA`].
    pub fn label(&self) -> &'static str {
        STRATA[*self as usize - 1]
    }

    fn tag(&self) -> u64 {
        *self as u64
    }

    /// Constant factor turning the mean sample weight into the integral.
    fn scale(&self, lay: &Layout) -> f64 {
        let d = lay.d;
        match self {
            Stratum::CapPlus | Stratum::CapMinus => sphere_volume(d) * sin_power_integral(d, lay.s),
            Stratum::ShellPlus | Stratum::ShellMinus => sphere_volume(d) * lay.r,
            Stratum::TubeNearPlus | Stratum::TubeNearMinus | Stratum::TubeFar => {
                sphere_volume(d - 1) * lay.tube_rho_mass()
            }
            Stratum::Exterior => sphere_volume(lay.ambient - 1),
        }
    }

    /// One sample and its weight; `None` marks an exterior rejection.
    fn draw<R: Rng>(&self, lay: &Layout, rng: &mut R) -> Option<(Vec<f64>, f64)> {
        let d = lay.d;
        match self {
            Stratum::CapPlus | Stratum::CapMinus => {
                let r = loop {
                    let u: f64 = rng.random();
                    let r = lay.s * u.powf(1.0 / (d as f64 + 1.0));
                    let accept = (r.sin() / r).powi(d as i32);
                    if rng.random::<f64>() < accept {
                        break r;
                    }
                };
                Some((lay.polar_point(rng, r, *self == Stratum::CapMinus), 1.0))
            }
            Stratum::ShellPlus | Stratum::ShellMinus => {
                let u: f64 = rng.random();
                let r = lay.s + lay.r * u;
                Some((lay.polar_point(rng, r, *self == Stratum::ShellMinus), r.sin().powi(d as i32)))
            }
            Stratum::TubeNearPlus | Stratum::TubeNearMinus => {
                let (c_in, c_out) = ((lay.s + lay.r).cos(), (lay.s + 2.0 * lay.r).cos());
                let rho = lay.tube_rho(rng);
                let cr = rho.cos();
                let lo = (c_in / cr).min(1.0).acos();
                let hi = (c_out / cr).min(1.0).acos();
                let (phi, len) = symmetric_band(rng, lo, hi);
                let phi = if *self == Stratum::TubeNearMinus { PI - phi } else { phi };
                Some((lay.join_point(rng, rho, phi), len))
            }
            Stratum::TubeFar => {
                let c = (lay.s + 2.0 * lay.r).cos();
                let rho = lay.tube_rho(rng);
                let lo = (c / rho.cos()).min(1.0).acos();
                let (phi, len) = symmetric_band(rng, lo, PI - lo);
                Some((lay.join_point(rng, rho, phi), len))
            }
            Stratum::Exterior => {
                let n = lay.ambient - 1;
                let lo = lay.s + lay.r;
                let x = gaussian_unit(rng, n + 1);
                let r = x[n].clamp(-1.0, 1.0).acos();
                let dc = crate::sphere::tube_radius_coords(&x);
                if r < lo || r > PI - lo || dc < lay.eps3 {
                    None
                } else {
                    Some((x, 1.0))
                }
            }
        }
    }

    /// A point of this stratum; exterior points are drawn by rejection.
    pub fn draw_point<R: Rng>(&self, params: &RecoveryParams, rng: &mut R) -> Vec<f64> {
        let lay = Layout::new(params);
        loop {
            if let Some((x, _)) = self.draw(&lay, rng) {
                return x;
            }
        }
    }
}

/// Monte Carlo stratified along the recovery decomposition of `S^{2m+1}`.
///
/// Caps are sampled in polar coordinates with `r ∝ sin^d r`; shells use `r`
/// uniform with weight `sin^d r`; the three tube strata use join coordinates
/// around `C` with exact angular measures. Each stratum receives
/// `per_stratum` samples.
pub fn integrate_stratified<F>(
    density: F,
    params: &RecoveryParams,
    per_stratum: usize,
    seed: u64,
    exterior: ExteriorRule,
) -> Result<QuadratureResult>
where
    F: Fn(&SpherePoint) -> Result<f64> + Sync,
{
    if per_stratum < 2 {
        return Err(Error::Argument("each stratum needs at least 2 samples".into()));
    }
    let lay = Layout::new(params);
    let mut strata = Vec::with_capacity(STRATA.len());
    for stratum in Stratum::all() {
        if stratum == Stratum::Exterior && exterior == ExteriorRule::RadialDensity {
            strata.push(StratumResult {
                name: stratum.label().into(),
                estimate: exterior_radial_density(params)?,
                stderr: 0.0,
                samples: 0,
                note: Some("exact radial reduction".into()),
            });
            continue;
        }
        let mom = sample_moments(per_stratum, seed, stratum.tag(), |rng| match stratum.draw(&lay, rng) {
            None => Ok(0.0),
            Some((x, w)) => {
                let x = SpherePoint::normalized(x)?;
                Ok(w * checked(density(&x)?, x.coords())?)
            }
        })?;
        strata.push(finish(stratum.label(), stratum.scale(&lay), &mom));
    }
    Ok(QuadratureResult::from_strata(strata))
}

fn finish(name: &str, scale: f64, mom: &Moments) -> StratumResult {
    StratumResult {
        name: name.into(),
        estimate: scale * mom.mean(),
        stderr: scale * mom.stderr(),
        samples: mom.count(),
        note: None,
    }
}

/// `vol(S^{n−1}) ∫_0^π f(r) sin^{n−1} r dr` by adaptive quadrature.
pub fn radial_reduction<F: Fn(f64) -> f64>(f: F, n: usize) -> Result<f64> {
    radial_reduction_on(f, n, 0.0, PI)
}

/// [`radial_reduction`] restricted to `r ∈ [a, b]`.
pub fn radial_reduction_on<F: Fn(f64) -> f64>(f: F, n: usize, a: f64, b: f64) -> Result<f64> {
    if n < 1 {
        return Err(Error::Argument("sphere dimension must be at least 1".into()));
    }
    let k = n as i32 - 1;
    let integral = adaptive_integrate(|r| f(r) * r.sin().powi(k), a, b, 1e-10)?;
    Ok(sphere_volume(n - 1) * integral)
}

/// Proposal for the join angle `t` in [`join_annulus_integral`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TProposal {
    /// Uniform on `[lo, hi] ⊂ [0, π]`.
    Uniform(f64, f64),
    /// Density `∝ 1/(t + a)` on `[0, π]`, concentrating samples near `t = 0`.
    NearZero(f64),
}

impl TProposal {
    fn draw<R: Rng>(&self, rng: &mut R) -> (f64, f64) {
        let u: f64 = rng.random();
        match *self {
            TProposal::Uniform(lo, hi) => (lo + (hi - lo) * u, 1.0 / (hi - lo)),
            TProposal::NearZero(a) => {
                let span = ((PI + a) / a).ln();
                let t = a * ((PI + a) / a).powf(u) - a;
                (t, 1.0 / ((t + a) * span))
            }
        }
    }
}

/// `∫` of `f(r)` over `{ρ_lo ≤ ρ ≤ ρ_hi} ⊂ S^{d+1}`, where `ρ` is the distance
/// to `S_⊥ = {x_1 = x_2 = 0}` and `r` the distance to a pole `p ∈ S_⊥`.
///
/// Join coordinates give `cos r = cos ρ cos t` and the volume element
/// `vol(S^1) vol(S^{d−2}) cos^{d−1}ρ sin ρ sin^{d−2} t`. `ρ` is drawn exactly
/// from its marginal and `t` from `proposal`.
pub fn join_annulus_integral<F>(
    f: F,
    d: usize,
    rho_lo: f64,
    rho_hi: f64,
    samples: usize,
    seed: u64,
    proposal: TProposal,
) -> Result<QuadratureResult>
where
    F: Fn(f64) -> f64 + Sync,
{
    if d < 3 {
        return Err(Error::Argument("join integrals need d >= 3".into()));
    }
    if !(0.0 <= rho_lo && rho_lo < rho_hi && rho_hi < PI / 2.0) {
        return Err(Error::Domain(format!("ρ range [{rho_lo}, {rho_hi}]")));
    }
    let df = d as f64;
    let (c_lo, c_hi) = (rho_hi.cos().powf(df), rho_lo.cos().powf(df));
    let rho_mass = (c_hi - c_lo) / df;
    let mom = sample_moments(samples, seed, 101, |rng| {
        let u: f64 = rng.random();
        let rho = (c_lo + (c_hi - c_lo) * u).powf(1.0 / df).acos();
        let (t, q) = proposal.draw(rng);
        let r = (rho.cos() * t.cos()).clamp(-1.0, 1.0).acos();
        Ok(f(r) * t.sin().powi(d as i32 - 2) / q)
    })?;
    let scale = 2.0 * PI * sphere_volume(d - 2) * rho_mass;
    Ok(QuadratureResult {
        estimate: scale * mom.mean(),
        stderr: scale * mom.stderr(),
        samples,
        strata: Vec::new(),
    })
}

/// The two tube-annulus integrals over `B_k = {r_k/2 ≤ ρ ≤ r_k} ⊂ S^{d+1}`:
/// `∫ |cot r|^d` and `∫ (1 + cot² r)^{d/2 − 1}`.
pub fn tube_annulus_integrals(d: usize, r_k: f64, samples: usize, seed: u64) -> Result<(QuadratureResult, QuadratureResult)> {
    let proposal = TProposal::NearZero(r_k / 2.0);
    let cot = |r: f64| (r.cos() / r.sin()).abs().powi(d as i32);
    let inv = |r: f64| r.sin().powi(-(d as i32 - 2));
    Ok((
        join_annulus_integral(cot, d, r_k / 2.0, r_k, samples, seed, proposal)?,
        join_annulus_integral(inv, d, r_k / 2.0, r_k, samples, seed.wrapping_add(1), proposal)?,
    ))
}

/// Least-squares slope of `log y` against `log x`.
pub fn log_log_slope(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::Argument("slope fit needs two or more paired points".into()));
    }
    if x.iter().chain(y).any(|v| !(*v > 0.0)) {
        return Err(Error::Domain("log-log fit needs positive data".into()));
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    Ok(sxy / sxx)
}

// ---------------------------------------------------------------------------
// Adaptive Gauss–Kronrod

const GK_NODES: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const GK_KRONROD: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const GK_GAUSS: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// One 15-point Kronrod panel with the embedded 7-point Gauss estimate.
fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = GK_KRONROD[7] * fc;
    let mut g = GK_GAUSS[3] * fc;
    for i in 0..7 {
        let fx = f(c - h * GK_NODES[i]) + f(c + h * GK_NODES[i]);
        k += GK_KRONROD[i] * fx;
        if i % 2 == 1 {
            g += GK_GAUSS[i / 2] * fx;
        }
    }
    (k * h, ((k - g) * h).abs())
}

/// Globally adaptive Gauss–Kronrod (7/15) quadrature of `f` over `[a, b]`.
///
/// Bisects the panel with the largest error estimate until the summed
/// estimate falls below `rel_tol · |integral|` (or an absolute floor of
/// `1e-300`). Endpoints are never evaluated.
pub fn adaptive_integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, rel_tol: f64) -> Result<f64> {
    const MAX_PANELS: usize = 20_000;
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::Argument("integration limits must be finite".into()));
    }
    if a == b {
        return Ok(0.0);
    }
    let (v, e) = gk15(&f, a, b);
    let mut panels = vec![(a, b, v, e)];
    loop {
        let total: f64 = panels.iter().map(|p| p.2).sum();
        let err: f64 = panels.iter().map(|p| p.3).sum();
        if !total.is_finite() {
            return Err(Error::NonFinite(format!("integrand on [{a}, {b}]")));
        }
        if err <= rel_tol * total.abs() || err < 1e-300 {
            return Ok(total);
        }
        if panels.len() >= MAX_PANELS {
            return Err(Error::Tolerance(format!(
                "adaptive quadrature: error {err:e} after {MAX_PANELS} panels"
            )));
        }
        let (i, _) = panels
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .expect("non-empty");
        let (lo, hi, _, _) = panels.swap_remove(i);
        let mid = 0.5 * (lo + hi);
        let (v1, e1) = gk15(&f, lo, mid);
        let (v2, e2) = gk15(&f, mid, hi);
        panels.push((lo, mid, v1, e1));
        panels.push((mid, hi, v2, e2));
    }
}
