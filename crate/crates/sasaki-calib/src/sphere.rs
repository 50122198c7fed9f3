//! Explicit geometry of the round sphere `S^n ⊂ R^{n+1}`.
//!
//! Points are ambient unit vectors. The module provides geodesic distance,
//! the radial gradient, polar and join charts, the tube radius about the
//! great circle `C = {x_2 = … = x_n = 0}`, flattened cutoffs and sphere
//! volumes.

use std::f64::consts::{FRAC_PI_2, PI};
use std::sync::OnceLock;

use crate::quadrature::adaptive_integrate;
use crate::vecops::{dot, norm};
use crate::{Error, Result};

/// Tolerance on `|x| = 1` for [`SpherePoint`].
pub const UNIT_TOL: f64 = 1e-12;
/// Tolerance on `⟨X, x⟩ = 0` for [`TangentVector`].
pub const TANGENCY_TOL: f64 = 1e-10;
/// Below this value of `sin r` the radial formulas are treated as singular.
pub const POLE_TOL: f64 = 1e-9;

/// A point of `S^n`, stored as an ambient unit vector of length `n + 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpherePoint {
    coords: Vec<f64>,
}

impl SpherePoint {
    /// Wraps ambient coordinates that already have unit norm.
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.len() < 2 {
            return Err(Error::Dimension("a sphere point needs at least 2 coordinates".into()));
        }
        if coords.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("sphere point coordinates".into()));
        }
        let r = norm(&coords);
        if (r - 1.0).abs() > UNIT_TOL {
            return Err(Error::Domain(format!("|x| = {r} is not 1")));
        }
        Ok(Self { coords })
    }

    /// Normalises a nonzero ambient vector onto the sphere.
    pub fn normalized(coords: Vec<f64>) -> Result<Self> {
        let r = norm(&coords);
        if !(r > 0.0) || !r.is_finite() {
            return Err(Error::Degenerate("cannot normalise a zero vector".into()));
        }
        Self::new(coords.into_iter().map(|v| v / r).collect())
    }

    /// The `k`-th ambient basis vector in `R^{n+1}`.
    pub fn basis(k: usize, ambient_dim: usize) -> Self {
        Self { coords: crate::vecops::unit(k, ambient_dim) }
    }

    /// Ambient coordinates.
    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    /// Intrinsic dimension `n`.
    pub fn dim(&self) -> usize {
        self.coords.len() - 1
    }

    /// Consumes the point and returns its coordinates.
    pub fn into_coords(self) -> Vec<f64> {
        self.coords
    }
}

/// A tangent vector `X ∈ T_x S^n` stored in ambient coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentVector {
    base: SpherePoint,
    ambient: Vec<f64>,
}

impl TangentVector {
    /// Wraps an ambient vector orthogonal to the base point.
    pub fn new(base: SpherePoint, ambient: Vec<f64>) -> Result<Self> {
        if ambient.len() != base.coords.len() {
            return Err(Error::Dimension("tangent vector length".into()));
        }
        let ip = dot(&ambient, &base.coords);
        if ip.abs() > TANGENCY_TOL {
            return Err(Error::Domain(format!("⟨X, x⟩ = {ip:e} is not 0")));
        }
        Ok(Self { base, ambient })
    }

    /// Projects an arbitrary ambient vector onto `T_x S^n`.
    pub fn project(base: SpherePoint, v: &[f64]) -> Self {
        let c = dot(v, &base.coords);
        let ambient = v.iter().zip(&base.coords).map(|(a, b)| a - c * b).collect();
        Self { base, ambient }
    }

    /// Base point.
    pub fn base(&self) -> &SpherePoint {
        &self.base
    }

    /// Ambient components.
    pub fn ambient(&self) -> &[f64] {
        &self.ambient
    }

    /// Euclidean norm.
    pub fn norm(&self) -> f64 {
        norm(&self.ambient)
    }
}

/// Parameters of a flattened cutoff `χ_{σ,τ}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CutoffSpec {
    sigma: f64,
    tau: f64,
}

impl CutoffSpec {
    /// A cutoff that is `0` below `sigma` and `1` above `tau`.
    pub fn new(sigma: f64, tau: f64) -> Result<Self> {
        if !(sigma.is_finite() && tau.is_finite() && 0.0 < sigma && sigma < tau) {
            return Err(Error::Argument(format!("cutoff needs 0 < σ < τ, got ({sigma}, {tau})")));
        }
        Ok(Self { sigma, tau })
    }

    /// Lower threshold.
    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// Upper threshold.
    pub fn tau(&self) -> f64 {
        self.tau
    }

    /// Value at `t`.
    pub fn eval(&self, t: f64) -> f64 {
        flattened_cutoff(self, t)
    }
}

/// Geodesic distance `arccos⟨x, p⟩`, with the inner product clamped to `[-1, 1]`.
pub fn geodesic_distance(x: &SpherePoint, p: &SpherePoint) -> f64 {
    distance_coords(&x.coords, &p.coords)
}

pub(crate) fn distance_coords(x: &[f64], p: &[f64]) -> f64 {
    dot(x, p).clamp(-1.0, 1.0).acos()
}

/// Unit gradient `R = (cos r · x − p) / sin r` of the distance to `p`.
pub fn radial_gradient(x: &SpherePoint, p: &SpherePoint) -> Result<TangentVector> {
    let r = radial_gradient_coords(&x.coords, &p.coords)?;
    Ok(TangentVector { base: x.clone(), ambient: r })
}

pub(crate) fn radial_gradient_coords(x: &[f64], p: &[f64]) -> Result<Vec<f64>> {
    let c = dot(x, p).clamp(-1.0, 1.0);
    let w: Vec<f64> = x.iter().zip(p).map(|(a, b)| c * a - b).collect();
    let s = norm(&w);
    if s < POLE_TOL {
        return Err(Error::Singularity(format!("sin r = {s:e} at a pole of the radial field")));
    }
    Ok(w.into_iter().map(|v| v / s).collect())
}

/// Polar chart `F(r, θ) = cos r · p + sin r · θ` with `θ ⊥ p` a unit vector.
pub fn polar_chart(p: &SpherePoint, r: f64, theta: &[f64]) -> Result<SpherePoint> {
    if !(r > 0.0 && r < PI) {
        return Err(Error::Domain(format!("polar radius {r} outside (0, π)")));
    }
    if theta.len() != p.coords.len() {
        return Err(Error::Dimension("polar direction length".into()));
    }
    if (norm(theta) - 1.0).abs() > UNIT_TOL || dot(theta, &p.coords).abs() > TANGENCY_TOL {
        return Err(Error::Domain("polar direction must be a unit vector orthogonal to p".into()));
    }
    let (s, c) = r.sin_cos();
    SpherePoint::normalized(p.coords.iter().zip(theta).map(|(a, b)| c * a + s * b).collect())
}

/// Inverse of [`polar_chart`]: returns `(r, θ)`.
pub fn polar_inverse(p: &SpherePoint, x: &SpherePoint) -> Result<(f64, Vec<f64>)> {
    let r = geodesic_distance(x, p);
    let c = r.cos();
    let w: Vec<f64> = x.coords.iter().zip(&p.coords).map(|(a, b)| a - c * b).collect();
    let s = norm(&w);
    if s < POLE_TOL {
        return Err(Error::Singularity("polar inverse at a pole".into()));
    }
    Ok((r, w.into_iter().map(|v| v / s).collect()))
}

/// Join chart `F(ρ, z, θ) = cos ρ · z + sin ρ · θ`.
///
/// `θ` is a unit vector in `span{e_1, e_2}` and `z` a unit vector in
/// `span{e_3, …, e_{n+1}}`, both given in ambient coordinates.
pub fn join_chart(rho: f64, z: &[f64], theta: &[f64]) -> Result<SpherePoint> {
    if !(rho > 0.0 && rho < FRAC_PI_2) {
        return Err(Error::Domain(format!("join radius {rho} outside (0, π/2)")));
    }
    if z.len() != theta.len() || z.len() < 4 {
        return Err(Error::Dimension("join chart needs n >= 3 and equal lengths".into()));
    }
    if z[0] != 0.0 || z[1] != 0.0 || theta[2..].iter().any(|v| *v != 0.0) {
        return Err(Error::Domain("join factors must lie in complementary coordinate planes".into()));
    }
    if (norm(z) - 1.0).abs() > UNIT_TOL || (norm(theta) - 1.0).abs() > UNIT_TOL {
        return Err(Error::Domain("join factors must be unit vectors".into()));
    }
    let (s, c) = rho.sin_cos();
    SpherePoint::normalized(z.iter().zip(theta).map(|(a, b)| c * a + s * b).collect())
}

/// Join-coordinate distance relation `cos r = cos ρ · cos t`.
pub fn cos_r_identity(rho: f64, t: f64) -> f64 {
    rho.cos() * t.cos()
}

/// Distance from `x` to the circle `C = S^n ∩ span{e_1, e_{n+1}}`, measured as
/// `d_C(x) = √(x_2² + … + x_n²)`.
pub fn tube_radius(x: &SpherePoint) -> f64 {
    tube_radius_coords(&x.coords)
}

pub(crate) fn tube_radius_coords(x: &[f64]) -> f64 {
    let n1 = x.len();
    x[1..n1 - 1].iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Volume of the unit sphere `S^k`, `2π^{(k+1)/2} / Γ((k+1)/2)`.
///
/// Evaluated through the recursion `vol(S^k) = 2π/(k−1) · vol(S^{k−2})`, which
/// is exact at half-integer Gamma arguments.
pub fn sphere_volume(k: usize) -> f64 {
    match k {
        0 => 2.0,
        1 => 2.0 * PI,
        _ => 2.0 * PI / (k as f64 - 1.0) * sphere_volume(k - 2),
    }
}

/// `∫_0^θ sin^k t dt`, by the reduction formula.
pub fn sin_power_integral(k: usize, theta: f64) -> f64 {
    match k {
        0 => theta,
        1 => 1.0 - theta.cos(),
        _ => {
            let kf = k as f64;
            let (s, c) = theta.sin_cos();
            -s.powi(k as i32 - 1) * c / kf + (kf - 1.0) / kf * sin_power_integral(k - 2, theta)
        }
    }
}

/// Volume of the geodesic ball `B_p(s) ⊂ S^n`.
pub fn ball_volume(n: usize, s: f64) -> f64 {
    sphere_volume(n - 1) * sin_power_integral(n - 1, s.clamp(0.0, PI))
}

/// Upper bound `2^{n−1} vol(S^{n−1}) s^{n−1} h` for the shell
/// `B_p(s+h) ∖ B_p(s)`, valid for `0 < h ≤ s < π/2`.
pub fn shell_volume_bound(n: usize, s: f64, h: f64) -> f64 {
    2f64.powi(n as i32 - 1) * sphere_volume(n - 1) * s.powi(n as i32 - 1) * h
}

/// Exact `(n−1)`-area of the slice `{dist(·, e_{n+1}) = r} ∩ {d_C < δ}`.
pub fn tube_slice_area(n: usize, r: f64, delta: f64) -> f64 {
    let s = r.sin();
    let theta = (delta / s).min(1.0).asin();
    if delta >= s {
        return sphere_volume(n - 1) * s.powi(n as i32 - 1);
    }
    2.0 * s.powi(n as i32 - 1) * sphere_volume(n - 2) * sin_power_integral(n - 2, theta)
}

/// Constant `C_n` with `area(S_r ∩ {d_C < δ}) ≤ C_n δ^{n−1}` for all `r` and `δ`.
///
/// Two caps of angular radius `θ ≤ (π/2)(δ / sin r)` contribute at most
/// `2 vol(S^{n−2}) (π/2)^{n−1} / (n−1)`; a full slice contributes at most
/// `vol(S^{n−1})`.
pub fn tube_slice_constant(n: usize) -> f64 {
    let caps = 2.0 * sphere_volume(n - 2) * FRAC_PI_2.powi(n as i32 - 1) / (n as f64 - 1.0);
    caps.max(sphere_volume(n - 1))
}

/// Constant `C_d` in `vol{s ≤ r ≤ s+δ, ρ ≤ δ} ≤ C_d s^{d−2} δ³` for
/// `0 < δ ≤ s/2`, `s < π/4`, where `ρ` is the distance to `S_⊥ = {x_1 = x_2 = 0}`
/// and `r` the distance to a pole in `S_⊥`.
///
/// Assembled from `∫_0^δ sin ρ ≤ δ²/2`, `sin t ≤ 3s/2` and the interval length
/// `|I_ρ| ≤ δ / c_0` with `c_0 = cos(π/8) · √(4/π² − 1/4) / (3/2)`.
pub fn overlap_volume_constant(d: usize) -> f64 {
    let c1 = (4.0 / (PI * PI) - 0.25).sqrt();
    let c0 = (PI / 8.0).cos() * c1 / 1.5;
    2.0 * PI * sphere_volume(d - 2) * 0.5 * 1.5f64.powi(d as i32 - 2) / c0
}

/// Numerical value of `∫_s^{π−s} (1 + |cot r|)^q dr` and the explicit bound
/// `C_q s^{1−q}` with `C_q = 2^q (π/2 + (π/2)^q / (q−1))`.
pub fn cot_integral_bound(q: f64, s: f64) -> Result<(f64, f64)> {
    if !(q > 1.0) {
        return Err(Error::Argument(format!("exponent q = {q} must exceed 1")));
    }
    if !(s > 0.0 && s <= PI / 4.0) {
        return Err(Error::Argument(format!("s = {s} outside (0, π/4]")));
    }
    let f = |r: f64| (1.0 + (r.cos() / r.sin()).abs()).powf(q);
    let half = adaptive_integrate(f, s, FRAC_PI_2, 1e-12)?;
    let cq = 2f64.powf(q) * (FRAC_PI_2 + FRAC_PI_2.powf(q) / (q - 1.0));
    Ok((2.0 * half, cq * s.powf(1.0 - q)))
}

// ---------------------------------------------------------------------------
// Flattened cutoff profile

const PROFILE_LO: f64 = 0.25;
const PROFILE_HI: f64 = 0.75;
const PROFILE_CELLS: usize = 2048;

/// Eight-point Gauss–Legendre nodes and weights on `[-1, 1]`.
const GL8: [(f64, f64); 8] = [
    (-0.960_289_856_497_536_3, 0.101_228_536_290_376_26),
    (-0.796_666_477_413_626_7, 0.222_381_034_453_374_47),
    (-0.525_532_409_916_329, 0.313_706_645_877_887_27),
    (-0.183_434_642_495_649_8, 0.362_683_783_378_361_96),
    (0.183_434_642_495_649_8, 0.362_683_783_378_361_96),
    (0.525_532_409_916_329, 0.313_706_645_877_887_27),
    (0.796_666_477_413_626_7, 0.222_381_034_453_374_47),
    (0.960_289_856_497_536_3, 0.101_228_536_290_376_26),
];

/// The smooth bump `ζ(s) = exp(−1/((s−¼)(¾−s)))` supported in `[¼, ¾]`.
fn bump(s: f64) -> f64 {
    if s <= PROFILE_LO || s >= PROFILE_HI {
        return 0.0;
    }
    (-1.0 / ((s - PROFILE_LO) * (PROFILE_HI - s))).exp()
}

fn gl_bump(a: f64, b: f64) -> f64 {
    let (m, h) = (0.5 * (a + b), 0.5 * (b - a));
    h * GL8.iter().map(|(x, w)| w * bump(m + h * x)).sum::<f64>()
}

struct Profile {
    /// Cumulative unnormalised integral of `ζ` at each cell boundary.
    cumulative: Vec<f64>,
    total: f64,
    /// Measured `sup |η^{(j)}|` for `j = 0..=3`.
    constants: [f64; 4],
}

fn cell_width() -> f64 {
    (PROFILE_HI - PROFILE_LO) / PROFILE_CELLS as f64
}

fn profile() -> &'static Profile {
    static PROFILE: OnceLock<Profile> = OnceLock::new();
    PROFILE.get_or_init(|| {
        let w = cell_width();
        let mut cumulative = Vec::with_capacity(PROFILE_CELLS + 1);
        let mut acc = 0.0;
        cumulative.push(0.0);
        for i in 0..PROFILE_CELLS {
            let a = PROFILE_LO + i as f64 * w;
            acc += gl_bump(a, a + w);
            cumulative.push(acc);
        }
        let mut p = Profile { cumulative, total: acc, constants: [1.0, 0.0, 0.0, 0.0] };
        let samples = 20_000;
        for k in 1..samples {
            let s = PROFILE_LO + (PROFILE_HI - PROFILE_LO) * k as f64 / samples as f64;
            for j in 1..=3 {
                p.constants[j] = p.constants[j].max(profile_derivative(&p, s, j).abs());
            }
        }
        p
    })
}

fn profile_value(p: &Profile, s: f64) -> f64 {
    if s <= PROFILE_LO {
        return 0.0;
    }
    if s >= PROFILE_HI {
        return 1.0;
    }
    let w = cell_width();
    let i = (((s - PROFILE_LO) / w) as usize).min(PROFILE_CELLS - 1);
    let a = PROFILE_LO + i as f64 * w;
    ((p.cumulative[i] + gl_bump(a, s)) / p.total).clamp(0.0, 1.0)
}

/// `η^{(j)}(s)` for `j ∈ {1, 2, 3}`, from closed-form derivatives of `ζ`.
fn profile_derivative(p: &Profile, s: f64, j: usize) -> f64 {
    if s <= PROFILE_LO || s >= PROFILE_HI {
        return 0.0;
    }
    let q = (s - PROFILE_LO) * (PROFILE_HI - s);
    let q1 = 1.0 - 2.0 * s;
    let q2 = -2.0;
    let z = bump(s);
    if z == 0.0 {
        return 0.0;
    }
    // ζ = exp(g) with g = −1/q
    let g1 = q1 / (q * q);
    let g2 = (q2 * q - 2.0 * q1 * q1) / (q * q * q);
    let v = match j {
        1 => z,
        2 => z * g1,
        3 => z * (g1 * g1 + g2),
        _ => unreachable!("checked by caller"),
    };
    v / p.total
}

/// Flattened cutoff `χ_{σ,τ}(t) = η((t − σ)/(τ − σ))`.
///
/// `η` is the normalised primitive of the bump `ζ`, so `χ` vanishes on
/// `(−∞, σ + ¼(τ−σ)]` and equals 1 on `[σ + ¾(τ−σ), ∞)`.
pub fn flattened_cutoff(spec: &CutoffSpec, t: f64) -> f64 {
    if t <= spec.sigma {
        return 0.0;
    }
    if t >= spec.tau {
        return 1.0;
    }
    profile_value(profile(), (t - spec.sigma) / (spec.tau - spec.sigma))
}

/// Derivative of order `j ≤ 3` of the flattened cutoff at `t`.
pub fn cutoff_derivative(spec: &CutoffSpec, t: f64, j: usize) -> Result<f64> {
    if j > 3 {
        return Err(Error::Argument(format!("cutoff derivatives implemented up to order 3, got {j}")));
    }
    if j == 0 {
        return Ok(flattened_cutoff(spec, t));
    }
    let h = spec.tau - spec.sigma;
    Ok(profile_derivative(profile(), (t - spec.sigma) / h, j) / h.powi(j as i32))
}

/// Measured constants `C_j = sup |η^{(j)}|`, `j = 0..=3`, so that
/// `|χ^{(j)}_{σ,τ}| ≤ C_j / (τ − σ)^j`.
pub fn cutoff_derivative_constants() -> [f64; 4] {
    profile().constants
}
