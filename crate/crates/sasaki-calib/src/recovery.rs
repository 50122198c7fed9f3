//! The repaired fields `V_k` on `S^{2m+1}`.
//!
//! Coordinates are zero-based: the pole is `p = e_{n}` (last ambient axis),
//! `Jp = e_0`, the tube direction is `w = e_1`, and the supplement plane is
//! spanned by `e_3, e_4`. The great circle `C = span{e_0, p} ∩ S^n` carries
//! the tube radius `d_C(x) = √(x_1² + … + x_{n−1}²)`.
//!
//! `V_k` equals the Hopf field `H` on the polar caps `B_{±p}(s_k)`, the radial
//! field `R` on the exterior region, and in between it is the normalisation
//! of `(1 − μ_k) H + μ_k S_k`, where `S_k` tilts `R` towards a transverse
//! field inside the tube `{d_C < 3ε_k}`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::fields::{apply_j, nlerp_with_chord, UnitField};
use crate::linalg::principal_direction_2x2;
use crate::quadrature::{gaussian_unit, Stratum};
use crate::sphere::{radial_gradient_coords, tube_radius_coords, CutoffSpec, SpherePoint};
use crate::vecops::{dot, norm};
use crate::{Error, Result};

/// The fixed constants of the construction; every field can be overridden.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RecoveryConstants {
    /// Tilt strength `ϑ`.
    pub vartheta: f64,
    /// Supplement weight `δ`.
    pub delta: f64,
    /// Discriminant threshold `Δ_0`.
    pub disc0: f64,
    /// Antipodal collar `δ_0` of the phase blend.
    pub delta0: f64,
    /// Ratio `ε_k / s_k`.
    pub eps_ratio: f64,
    /// Branch of the angle `Θ_k` used in the phase blend.
    pub phase_lift: PhaseLift,
}

/// Branch of the angle `Θ_k` of `q_k` inside the antipodal collar.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhaseLift {
    /// `Θ_k ∈ (−π, π]`, agreeing with `φ_k` on both collar arcs, so that
    /// `γ_k = u_k^max` wherever `ϑ_k = 1`.
    Matched,
    /// `Θ_k ∈ (0, 2π)` everywhere; on the arc `Im q_k < 0` this leaves
    /// `γ_k ≠ u_k^max` where `0 < η_k < 1`.
    Principal,
}

impl Default for RecoveryConstants {
    fn default() -> Self {
        Self { vartheta: 0.5, delta: 0.2, disc0: 1e-4, delta0: 0.5, eps_ratio: 1.0 / 20.0, phase_lift: PhaseLift::Matched }
    }
}

/// All constants of `V_k` for one value of `r_k`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RecoveryParams {
    m: usize,
    r_k: f64,
    s_k: f64,
    eps_k: f64,
    consts: RecoveryConstants,
    #[serde(skip)]
    cuts: Cutoffs,
}

#[derive(Debug, Clone, PartialEq, Default)]
struct Cutoffs {
    cap: Option<CutoffSpec>,
    nu: Option<CutoffSpec>,
    beta: Option<CutoffSpec>,
    psi: Option<CutoffSpec>,
    zeta: Option<CutoffSpec>,
    disc: Option<CutoffSpec>,
    gap: Option<CutoffSpec>,
}

impl RecoveryParams {
    /// Parameters with the default constants.
    pub fn new(m: usize, r_k: f64) -> Result<Self> {
        Self::with_constants(m, r_k, RecoveryConstants::default())
    }

    /// Parameters with explicit constants.
    ///
    /// Rejects `m < 2`, constants outside their ranges, and `r_k` too large
    /// for `18 ε_k² ≤ ½` and `s_k + 2 r_k < π/4`.
    pub fn with_constants(m: usize, r_k: f64, consts: RecoveryConstants) -> Result<Self> {
        if m < 2 {
            return Err(Error::Argument(format!("recovery needs m >= 2, got {m}")));
        }
        if !(r_k > 0.0 && r_k.is_finite()) {
            return Err(Error::Argument(format!("r_k = {r_k} must be positive")));
        }
        let c = consts;
        let unit_open = |v: f64| v > 0.0 && v < 1.0;
        if !unit_open(c.vartheta) || !unit_open(c.delta) || !unit_open(c.delta0) || !unit_open(c.eps_ratio) {
            return Err(Error::Argument("ϑ, δ, δ_0 and ε/s must lie in (0, 1)".into()));
        }
        if !(c.disc0 > 0.0 && c.disc0 <= 1.0 / 288.0) {
            return Err(Error::Argument(format!("Δ_0 = {} outside (0, 1/288]", c.disc0)));
        }
        let d = 2 * m;
        let s_k = r_k.powf(1.0 / d as f64);
        if (s_k.powi(d as i32) - r_k).abs() > 1e-12 * r_k.max(1e-300) {
            return Err(Error::Tolerance("s_k^d does not reproduce r_k".into()));
        }
        let eps_k = c.eps_ratio * s_k;
        if 18.0 * eps_k * eps_k > 0.5 {
            return Err(Error::Argument(format!("r_k = {r_k} too large: 18ε_k² > 1/2")));
        }
        if s_k + 2.0 * r_k >= PI / 4.0 {
            return Err(Error::Argument(format!("r_k = {r_k} too large: s_k + 2r_k >= π/4")));
        }
        let tau = c.delta / 4.0;
        let cuts = Cutoffs {
            cap: Some(CutoffSpec::new(s_k, s_k + r_k)?),
            nu: Some(CutoffSpec::new(s_k + r_k, s_k + 2.0 * r_k)?),
            beta: Some(CutoffSpec::new(eps_k, 2.0 * eps_k)?),
            psi: Some(CutoffSpec::new(2.0 * eps_k, 3.0 * eps_k)?),
            zeta: Some(CutoffSpec::new(tau, 2.0 * tau)?),
            disc: Some(CutoffSpec::new(c.disc0, 2.0 * c.disc0)?),
            gap: Some(CutoffSpec::new(c.delta0, 2.0 * c.delta0)?),
        };
        Ok(Self { m, r_k, s_k, eps_k, consts, cuts })
    }

    /// Half-dimension `m`.
    pub fn m(&self) -> usize {
        self.m
    }

    /// Sphere dimension `n = 2m + 1`.
    pub fn n(&self) -> usize {
        2 * self.m + 1
    }

    /// Shell width `r_k`.
    pub fn r_k(&self) -> f64 {
        self.r_k
    }

    /// Cap radius `s_k = r_k^{1/(2m)}`.
    pub fn s_k(&self) -> f64 {
        self.s_k
    }

    /// Tube scale `ε_k`.
    pub fn eps_k(&self) -> f64 {
        self.eps_k
    }

    /// The constants in use.
    pub fn constants(&self) -> &RecoveryConstants {
        &self.consts
    }

    /// Threshold `τ = δ/4` of the `ρ_k` cutoff.
    pub fn tau(&self) -> f64 {
        self.consts.delta / 4.0
    }

    /// Finite-difference step `min(1e-5, r_k/200)`.
    pub fn fd_step(&self) -> f64 {
        (self.r_k / 200.0).min(1e-5)
    }

    fn cut(&self, c: &Option<CutoffSpec>, t: f64) -> f64 {
        c.as_ref().expect("cutoffs built at construction").eval(t)
    }
}

/// Region of the recovery decomposition; the same cells as the quadrature strata.
pub type Region = Stratum;

/// Region of a point together with its cutoff values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RegionTag {
    /// The region.
    pub region: Region,
    /// `μ_{k,+}`.
    pub mu_plus: f64,
    /// `μ_{k,−}`.
    pub mu_minus: f64,
    /// `β_k`.
    pub beta: f64,
    /// `ψ_k`.
    pub psi: f64,
    /// `ν_k`.
    pub nu: f64,
}

impl RegionTag {
    /// `μ_k = μ_{k,+} μ_{k,−} β_k`.
    pub fn mu(&self) -> f64 {
        self.mu_plus * self.mu_minus * self.beta
    }

    /// `β̂_k = ν_k β_k`.
    pub fn beta_hat(&self) -> f64 {
        self.nu * self.beta
    }
}

/// Record of the phase choice inside the supplement construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BranchRecord {
    /// `Δ_k = (a−d)² + 4c²`.
    pub disc: f64,
    /// `ϑ_k = χ(Δ_k)`.
    pub vartheta_k: f64,
    /// Selected square root `u_k^max`, when `Δ_k > Δ_0`.
    pub u_max: Option<[f64; 2]>,
    /// `Re(u_max · conj(γ^ref σ))` after the sign choice.
    pub alignment: Option<f64>,
    /// `η_k`, when `Δ_k > Δ_0`.
    pub eta: Option<f64>,
    /// Final phase `γ_k`.
    pub gamma: [f64; 2],
    /// Reference phase `γ^ref`.
    pub gamma_ref: [f64; 2],
}

/// Per-point diagnostics of one evaluation of `V_k`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RecoveryDiagnostics {
    /// Region and cutoffs.
    pub tag: RegionTag,
    /// Tube radius `d_C`.
    pub d_c: f64,
    /// `‖Q_k‖`, inside the tube.
    pub q_norm: Option<f64>,
    /// `ρ_k`, where the supplement chain ran.
    pub rho: Option<f64>,
    /// `ζ_k`, where the supplement chain ran.
    pub zeta: Option<f64>,
    /// `‖B̃_k‖`, where the supplement chain ran.
    pub btilde_norm: Option<f64>,
    /// `‖W̃_k^⊥‖`, where the supplement chain ran.
    pub wperp_tilde_norm: Option<f64>,
    /// `⟨W_k, W_k^⊥⟩`, where the supplement chain ran.
    pub w_dot_wperp: Option<f64>,
    /// Chord norm of the `W_k^♯` blend, when `β̂_k > 0`.
    pub sharp_chord: Option<f64>,
    /// `‖R + ϑ ψ_k W_k^♯‖`, when `ψ_k > 0`.
    pub s_denominator: Option<f64>,
    /// `‖Ṽ_k‖` off the caps.
    pub vtilde_norm: Option<f64>,
    /// Phase selection data, where the supplement chain ran.
    pub branch: Option<BranchRecord>,
}

struct Geometry {
    r_plus: f64,
    r_minus: f64,
    d_c: f64,
}

fn geometry(x: &[f64]) -> Geometry {
    let last = x.len() - 1;
    let r_plus = x[last].clamp(-1.0, 1.0).acos();
    Geometry { r_plus, r_minus: PI - r_plus, d_c: tube_radius_coords(x) }
}

fn tag_from(params: &RecoveryParams, g: &Geometry) -> RegionTag {
    let c = &params.cuts;
    let (s, r, e3) = (params.s_k, params.r_k, 3.0 * params.eps_k);
    let mu_plus = params.cut(&c.cap, g.r_plus);
    let mu_minus = params.cut(&c.cap, g.r_minus);
    let beta = params.cut(&c.beta, g.d_c);
    let psi = 1.0 - params.cut(&c.psi, g.d_c);
    let nu_plus = 1.0 - params.cut(&c.nu, g.r_plus);
    let nu_minus = 1.0 - params.cut(&c.nu, g.r_minus);
    let nu = 1.0 - (1.0 - nu_plus) * (1.0 - nu_minus);
    let region = if g.r_plus < s {
        Region::CapPlus
    } else if g.r_minus < s {
        Region::CapMinus
    } else if g.r_plus < s + r {
        Region::ShellPlus
    } else if g.r_minus < s + r {
        Region::ShellMinus
    } else if g.d_c < e3 {
        if g.r_plus < s + 2.0 * r {
            Region::TubeNearPlus
        } else if g.r_minus < s + 2.0 * r {
            Region::TubeNearMinus
        } else {
            Region::TubeFar
        }
    } else {
        Region::Exterior
    };
    RegionTag { region, mu_plus, mu_minus, beta, psi, nu }
}

/// Region and cutoff values at `x`.
pub fn region_classify(params: &RecoveryParams, x: &SpherePoint) -> Result<RegionTag> {
    check_dim(params, x.coords())?;
    Ok(tag_from(params, &geometry(x.coords())))
}

fn check_dim(params: &RecoveryParams, x: &[f64]) -> Result<()> {
    if x.len() != params.n() + 1 {
        return Err(Error::Dimension(format!("point of length {} on S^{}", x.len(), params.n())));
    }
    Ok(())
}

fn violation(quantity: &str, value: f64, floor: f64, x: &[f64]) -> Error {
    Error::NonvanishingViolation { quantity: quantity.into(), value, floor, location: x.to_vec() }
}

fn unit(v: Vec<f64>) -> (Vec<f64>, f64) {
    let r = norm(&v);
    (v.into_iter().map(|a| a / r).collect(), r)
}

/// `Q_k = w^T − ⟨w^T, H⟩ H` with `w = e_1`, normalised, together with `‖Q_k‖`.
fn tube_field(x: &[f64], h: &[f64]) -> (Vec<f64>, f64) {
    let wx = x[1];
    let wh = h[1];
    let q: Vec<f64> = (0..x.len())
        .map(|i| if i == 1 { 1.0 } else { 0.0 } - wx * x[i] - wh * h[i])
        .collect();
    unit(q)
}

/// `W_k = Q_k / ‖Q_k‖` at a tube point, failing when `‖Q_k‖ < ½`.
pub fn tube_field_wk(params: &RecoveryParams, x: &SpherePoint) -> Result<Vec<f64>> {
    let xc = x.coords();
    check_dim(params, xc)?;
    let d_c = tube_radius_coords(xc);
    if d_c >= 3.0 * params.eps_k {
        return Err(Error::Domain(format!("d_C = {d_c} outside the tube")));
    }
    let (w, qn) = tube_field(xc, &apply_j(xc));
    if qn < 0.5 {
        return Err(violation("|Q_k|", qn, 0.5, xc));
    }
    Ok(w)
}

/// Output of the supplement chain at one point.
struct Supplement {
    b_unit: Vec<f64>,
    btilde_norm: f64,
    wperp: Vec<f64>,
    wperp_tilde_norm: f64,
    w_dot_wperp: f64,
    rho: f64,
    zeta: f64,
    branch: BranchRecord,
}

/// Runs the chain `u → V_{k,u} → b_{k,i} → γ_k → B_k → W_k^⊥` at a tube point
/// with `d_C > 0`.
fn supplement_chain(params: &RecoveryParams, x: &[f64], h: &[f64], r: &[f64], w: &[f64]) -> Result<Supplement> {
    let c = &params.cuts;
    let last = x.len() - 1;
    let kappa = dot(h, r);
    let (u, rperp) = unit(r.iter().zip(h).map(|(a, b)| a - kappa * b).collect());
    if !(rperp > 0.0) {
        return Err(Error::Degenerate(format!("R_⊥ vanishes at {x:?}")));
    }
    let wu = dot(w, &u);
    let vku: Vec<f64> = w.iter().zip(&u).map(|(a, b)| a - wu * b).collect();
    let rho = norm(&vku);
    let zeta = params.cut(&c.zeta, rho);
    let vhat: Option<Vec<f64>> = (rho > 0.0).then(|| vku.iter().map(|a| a / rho).collect());

    let supplement = |i: usize| -> Vec<f64> {
        let mut e: Vec<f64> = x.iter().map(|xi| -x[i] * xi).collect();
        e[i] += 1.0;
        let eh = dot(&e, h);
        let eu = dot(&e, &u);
        let mut b: Vec<f64> = e.iter().zip(h).zip(&u).map(|((a, hh), uu)| a - eh * hh - eu * uu).collect();
        if zeta > 0.0 {
            if let Some(v) = &vhat {
                let ev = dot(&e, v);
                b.iter_mut().zip(v).for_each(|(bb, vv)| *bb -= zeta * ev * vv);
            }
        }
        b
    };
    let b4 = supplement(3);
    let b5 = supplement(4);
    let a = dot(&b4, &b4);
    let dd = dot(&b5, &b5);
    let cc = dot(&b4, &b5);
    let disc = (a - dd) * (a - dd) + 4.0 * cc * cc;
    let vartheta_k = params.cut(&c.disc, disc);

    let ref_norm = x[0].hypot(x[last]);
    let gamma_ref = Complex64::new(x[0] / ref_norm, x[last] / ref_norm);
    let mut branch = BranchRecord {
        disc,
        vartheta_k,
        u_max: None,
        alignment: None,
        eta: None,
        gamma: [gamma_ref.re, gamma_ref.im],
        gamma_ref: [gamma_ref.re, gamma_ref.im],
    };
    let mut gamma = gamma_ref;
    if disc > params.consts.disc0 {
        let (dir, _) = principal_direction_2x2(a, cc, dd)?;
        let mut umax = Complex64::new(dir[0], dir[1]);
        let sig_norm = x[3].hypot(x[4]);
        let sigma = if sig_norm > 0.0 { Complex64::new(x[3] / sig_norm, x[4] / sig_norm) } else { Complex64::new(1.0, 0.0) };
        let mut align = (umax * (gamma_ref * sigma).conj()).re;
        if align < 0.0 {
            umax = -umax;
            align = -align;
        }
        let q = umax * gamma_ref.conj();
        let g = (Complex64::new(1.0, 0.0) + q).norm();
        let eta = 1.0 - params.cut(&c.gap, g);
        let mut big_phi = 0.0;
        if eta > 0.0 {
            let mut theta = q.im.atan2(q.re);
            if params.consts.phase_lift == PhaseLift::Principal && theta <= 0.0 {
                theta += 2.0 * PI;
            }
            big_phi += eta * vartheta_k * theta;
        }
        if eta < 1.0 {
            let chord = Complex64::new(1.0 - vartheta_k, 0.0) + q * vartheta_k;
            let phi = chord.im.atan2(chord.re);
            big_phi += (1.0 - eta) * phi;
        }
        gamma = Complex64::from_polar(1.0, big_phi) * gamma_ref;
        branch.u_max = Some([umax.re, umax.im]);
        branch.alignment = Some(align);
        branch.eta = Some(eta);
        branch.gamma = [gamma.re, gamma.im];
    }

    let btilde: Vec<f64> = b4.iter().zip(&b5).map(|(p, q)| gamma.re * p + gamma.im * q).collect();
    let (b_unit, btilde_norm) = unit(btilde);
    if !(btilde_norm >= 0.25) {
        return Err(violation("|B~_k|", btilde_norm, 0.25, x));
    }
    let delta = params.consts.delta;
    let (wperp, wperp_tilde_norm) = unit(vku.iter().zip(&b_unit).map(|(v, b)| v + delta * b).collect());
    if !(wperp_tilde_norm >= delta / 2.0) {
        return Err(violation("|W~_k^perp|", wperp_tilde_norm, delta / 2.0, x));
    }
    let w_dot_wperp = dot(w, &wperp);
    if !(w_dot_wperp >= -delta / 3.0) {
        return Err(violation("<W_k, W_k^perp>", w_dot_wperp, -delta / 3.0, x));
    }
    Ok(Supplement { b_unit, btilde_norm, wperp, wperp_tilde_norm, w_dot_wperp, rho, zeta, branch })
}

/// Unit supplement `B_k` and its branch record at a point of the punctured tube.
pub fn supplement_bk(params: &RecoveryParams, x: &SpherePoint) -> Result<(Vec<f64>, BranchRecord)> {
    let xc = x.coords();
    let (h, r, w) = tube_inputs(params, xc)?;
    let s = supplement_chain(params, xc, &h, &r, &w)?;
    Ok((s.b_unit, s.branch))
}

/// `W_k^⊥` at a point of the punctured tube.
pub fn transverse_field_wperp(params: &RecoveryParams, x: &SpherePoint) -> Result<Vec<f64>> {
    let xc = x.coords();
    let (h, r, w) = tube_inputs(params, xc)?;
    Ok(supplement_chain(params, xc, &h, &r, &w)?.wperp)
}

fn tube_inputs(params: &RecoveryParams, xc: &[f64]) -> Result<(Vec<f64>, Vec<f64>, Vec<f64>)> {
    check_dim(params, xc)?;
    let d_c = tube_radius_coords(xc);
    if !(d_c > 0.0 && d_c < 3.0 * params.eps_k) {
        return Err(Error::Domain(format!("d_C = {d_c} outside the punctured tube")));
    }
    let h = apply_j(xc);
    let p = crate::vecops::unit(xc.len() - 1, xc.len());
    let r = radial_gradient_coords(xc, &p)?;
    let (w, qn) = tube_field(xc, &h);
    if qn < 0.5 {
        return Err(violation("|Q_k|", qn, 0.5, xc));
    }
    Ok((h, r, w))
}

/// Full evaluation of `V_k` at `x`, optionally with diagnostics.
///
/// With `diagnostics` set, the supplement chain also runs where `β̂_k = 0`
/// so that its floors are monitored on the whole punctured tube.
pub fn recovery_eval(params: &RecoveryParams, x: &[f64], diagnostics: bool) -> Result<(Vec<f64>, Option<RecoveryDiagnostics>)> {
    check_dim(params, x)?;
    let g = geometry(x);
    let tag = tag_from(params, &g);
    let h = apply_j(x);
    let mut diag = diagnostics.then(|| RecoveryDiagnostics {
        tag,
        d_c: g.d_c,
        q_norm: None,
        rho: None,
        zeta: None,
        btilde_norm: None,
        wperp_tilde_norm: None,
        w_dot_wperp: None,
        sharp_chord: None,
        s_denominator: None,
        vtilde_norm: None,
        branch: None,
    });
    if g.r_plus < params.s_k || g.r_minus < params.s_k {
        return Ok((h, diag));
    }
    let p = crate::vecops::unit(x.len() - 1, x.len());
    let r = radial_gradient_coords(x, &p)?;
    let mu = tag.mu();
    if mu == 1.0 && tag.psi == 0.0 {
        if let Some(dg) = diag.as_mut() {
            dg.vtilde_norm = Some(1.0);
        }
        return Ok((r, diag));
    }
    let s = if tag.psi == 0.0 {
        r
    } else {
        let (w, qn) = tube_field(x, &h);
        if let Some(dg) = diag.as_mut() {
            dg.q_norm = Some(qn);
        }
        if qn < 0.5 {
            return Err(violation("|Q_k|", qn, 0.5, x));
        }
        let beta_hat = tag.beta_hat();
        let mut sharp = w.clone();
        if g.d_c > 0.0 && (beta_hat > 0.0 || diagnostics) {
            let sup = supplement_chain(params, x, &h, &r, &w)?;
            if let Some(dg) = diag.as_mut() {
                dg.rho = Some(sup.rho);
                dg.zeta = Some(sup.zeta);
                dg.btilde_norm = Some(sup.btilde_norm);
                dg.wperp_tilde_norm = Some(sup.wperp_tilde_norm);
                dg.w_dot_wperp = Some(sup.w_dot_wperp);
                dg.branch = Some(sup.branch);
            }
            if beta_hat > 0.0 {
                let (v, chord) = nlerp_with_chord(&w, &sup.wperp, beta_hat)?;
                let floor = ((1.0 - params.consts.delta / 3.0) / 2.0).sqrt();
                if let Some(dg) = diag.as_mut() {
                    dg.sharp_chord = Some(chord);
                }
                if chord < floor * (1.0 - 1e-12) {
                    return Err(violation("nlerp chord of W_k^sharp", chord, floor, x));
                }
                sharp = v;
            }
        }
        let tilt = params.consts.vartheta * tag.psi;
        let (sk, den) = unit(r.iter().zip(&sharp).map(|(a, b)| a + tilt * b).collect());
        if let Some(dg) = diag.as_mut() {
            dg.s_denominator = Some(den);
        }
        let floor = 1.0 - params.consts.vartheta;
        if den < floor * (1.0 - 1e-12) {
            return Err(violation("|R + vartheta psi W_k^sharp|", den, floor, x));
        }
        sk
    };
    let (v, vn) = unit(h.iter().zip(&s).map(|(a, b)| (1.0 - mu) * a + mu * b).collect());
    if let Some(dg) = diag.as_mut() {
        dg.vtilde_norm = Some(vn);
    }
    if !(vn >= 1e-3) {
        return Err(violation("|V~_k|", vn, 1e-3, x));
    }
    Ok((v, diag))
}

/// `S_k(x)`; equals `R(x)` wherever `ψ_k = 0`.
pub fn tilted_field_sk(params: &RecoveryParams, x: &SpherePoint) -> Result<Vec<f64>> {
    let xc = x.coords();
    check_dim(params, xc)?;
    let g = geometry(xc);
    let tag = tag_from(params, &g);
    let p = crate::vecops::unit(xc.len() - 1, xc.len());
    let r = radial_gradient_coords(xc, &p)?;
    if tag.psi == 0.0 {
        return Ok(r);
    }
    let h = apply_j(xc);
    let (w, qn) = tube_field(xc, &h);
    if qn < 0.5 {
        return Err(violation("|Q_k|", qn, 0.5, xc));
    }
    let beta_hat = tag.beta_hat();
    let sharp = if g.d_c > 0.0 && beta_hat > 0.0 {
        let sup = supplement_chain(params, xc, &h, &r, &w)?;
        nlerp_with_chord(&w, &sup.wperp, beta_hat)?.0
    } else {
        w
    };
    let tilt = params.consts.vartheta * tag.psi;
    let (sk, den) = unit(r.iter().zip(&sharp).map(|(a, b)| a + tilt * b).collect());
    if den < 1.0 - params.consts.vartheta {
        return Err(violation("|R + vartheta psi W_k^sharp|", den, 1.0 - params.consts.vartheta, xc));
    }
    Ok(sk)
}

/// `V_k` as a [`UnitField`] on `S^{2m+1}` (derivatives by finite differences).
pub fn recovery_field(params: &RecoveryParams) -> UnitField {
    let p = params.clone();
    let n = p.n();
    let name = format!("recovery(r_k={})", p.r_k);
    UnitField::new(n, name, std::sync::Arc::new(move |x: &[f64]| Ok(recovery_eval(&p, x, false)?.0)), None)
}

/// `c_1 = √((1 − γ)/2)` with `γ = 1/√(1 + (ε_k/s_k)²)`.
pub fn shell_floor_c1(consts: &RecoveryConstants) -> f64 {
    let gamma = 1.0 / (1.0 + consts.eps_ratio * consts.eps_ratio).sqrt();
    ((1.0 - gamma) / 2.0).sqrt()
}

/// `c_2(ϑ) = sin(arctan(ϑ − π/20)/2)`.
pub fn tube_floor_c2(consts: &RecoveryConstants) -> f64 {
    ((consts.vartheta - PI / 20.0).atan() / 2.0).sin()
}

/// Minimum of one monitored quantity against its floor.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FloorCheck {
    /// Name of the quantity.
    pub quantity: String,
    /// Smallest sampled value, or `+∞` when never sampled.
    pub min: f64,
    /// Required floor.
    pub floor: f64,
    /// Number of samples where the quantity was defined.
    pub count: usize,
    /// Ambient coordinates of the minimiser.
    pub argmin: Vec<f64>,
}

impl FloorCheck {
    fn new(quantity: &str, floor: f64) -> Self {
        Self { quantity: quantity.into(), min: f64::INFINITY, floor, count: 0, argmin: Vec::new() }
    }

    fn observe(&mut self, v: Option<f64>, x: &[f64]) {
        if let Some(v) = v {
            self.count += 1;
            if v < self.min {
                self.min = v;
                self.argmin = x.to_vec();
            }
        }
    }

    fn merge(&mut self, other: &FloorCheck) {
        self.count += other.count;
        if other.min < self.min {
            self.min = other.min;
            self.argmin = other.argmin.clone();
        }
    }

    /// Whether the sampled minimum respects the floor.
    pub fn pass(&self) -> bool {
        self.min >= self.floor
    }
}

/// Outcome of [`nonvanishing_scan`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NonvanishingReport {
    /// Total number of sampled points.
    pub samples: usize,
    /// One entry per monitored quantity.
    pub checks: Vec<FloorCheck>,
    /// Errors raised during evaluation, as text.
    pub violations: Vec<String>,
    /// Smallest alignment margin `Re(u_max · conj(γ^ref σ))` seen where `ϑ_k > 0`.
    pub min_alignment: f64,
}

impl NonvanishingReport {
    /// Whether every floor holds and no evaluation failed.
    pub fn pass(&self) -> bool {
        self.violations.is_empty() && self.checks.iter().all(FloorCheck::pass)
    }

    /// Looks up a check by quantity name.
    pub fn check(&self, quantity: &str) -> Option<&FloorCheck> {
        self.checks.iter().find(|c| c.quantity == quantity)
    }
}

fn floor_table(params: &RecoveryParams) -> Vec<FloorCheck> {
    let c = params.consts;
    vec![
        FloorCheck::new("|Q_k|", 0.5),
        FloorCheck::new("|B~_k|", 0.25),
        FloorCheck::new("|W~_k^perp|", c.delta / 2.0),
        FloorCheck::new("<W_k, W_k^perp>", -c.delta / 3.0),
        FloorCheck::new("nlerp chord of W_k^sharp", ((1.0 - c.delta / 3.0) / 2.0).sqrt()),
        FloorCheck::new("|R + vartheta psi W_k^sharp|", 1.0 - c.vartheta),
        FloorCheck::new("|V~_k| off caps", shell_floor_c1(&c).min(tube_floor_c2(&c))),
    ]
}

/// Minima of every nonvanishing quantity over `per_stratum` samples in each
/// of the seven non-cap strata and each cap.
pub fn nonvanishing_scan(params: &RecoveryParams, per_stratum: usize, seed: u64) -> NonvanishingReport {
    let chunk = 512;
    let jobs: Vec<(Stratum, usize)> = Stratum::all()
        .into_iter()
        .flat_map(|s| (0..per_stratum.div_ceil(chunk)).map(move |c| (s, c)))
        .collect();
    let parts: Vec<(Vec<FloorCheck>, Vec<String>, f64)> = jobs
        .into_par_iter()
        .map(|(stratum, c)| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(((stratum as u64) << 32) + c as u64);
            let mut checks = floor_table(params);
            let mut errs = Vec::new();
            let mut align = f64::INFINITY;
            for _ in 0..chunk.min(per_stratum - c * chunk) {
                let x = stratum.draw_point(params, &mut rng);
                match recovery_eval(params, &x, true) {
                    Ok((_, Some(dg))) => {
                        let in_cap = matches!(dg.tag.region, Region::CapPlus | Region::CapMinus);
                        checks[0].observe(dg.q_norm, &x);
                        checks[1].observe(dg.btilde_norm, &x);
                        checks[2].observe(dg.wperp_tilde_norm, &x);
                        checks[3].observe(dg.w_dot_wperp, &x);
                        checks[4].observe(dg.sharp_chord, &x);
                        checks[5].observe(dg.s_denominator, &x);
                        checks[6].observe(if in_cap { None } else { dg.vtilde_norm }, &x);
                        if let Some(b) = dg.branch {
                            if b.vartheta_k > 0.0 {
                                align = align.min(b.alignment.unwrap_or(f64::INFINITY));
                            }
                        }
                    }
                    Ok((_, None)) => unreachable!("diagnostics requested"),
                    Err(e) => errs.push(e.to_string()),
                }
            }
            (checks, errs, align)
        })
        .collect();
    let mut checks = floor_table(params);
    let mut violations = Vec::new();
    let mut min_alignment = f64::INFINITY;
    for (cs, es, a) in parts {
        for (acc, c) in checks.iter_mut().zip(&cs) {
            acc.merge(c);
        }
        violations.extend(es);
        min_alignment = min_alignment.min(a);
    }
    NonvanishingReport { samples: per_stratum * Stratum::all().len(), checks, violations, min_alignment }
}

/// Outcome of [`branch_path_check`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BranchPathReport {
    /// Number of walked paths.
    pub paths: usize,
    /// Number of consecutive path steps where both ends had `ϑ_k > 0`.
    pub steps_in_u0: usize,
    /// Steps where `u_max` reversed although `ς_k` moved continuously.
    pub flips: usize,
    /// Smallest alignment margin seen along the paths.
    pub min_alignment: f64,
}

/// Walks short great-circle paths through the punctured tube and counts sign
/// reversals of the selected square root `u_k^max` between neighbouring
/// points where `ϑ_k > 0`.
pub fn branch_path_check(params: &RecoveryParams, paths: usize, steps: usize, seed: u64) -> BranchPathReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let step_len = params.eps_k / steps as f64;
    let mut rep = BranchPathReport { paths, steps_in_u0: 0, flips: 0, min_alignment: f64::INFINITY };
    for _ in 0..paths {
        let region = if rng.random::<bool>() { Stratum::TubeNearPlus } else { Stratum::ShellPlus };
        let x0 = region.draw_point(params, &mut rng);
        let dir = {
            let g = gaussian_unit(&mut rng, x0.len());
            let c = dot(&g, &x0);
            let (t, _) = unit(g.iter().zip(&x0).map(|(a, b)| a - c * b).collect());
            t
        };
        let mut prev: Option<([f64; 2], f64)> = None;
        for k in 0..=steps {
            let t = k as f64 * step_len;
            let x: Vec<f64> = x0.iter().zip(&dir).map(|(a, b)| t.cos() * a + t.sin() * b).collect();
            let d_c = tube_radius_coords(&x);
            let current = if d_c > 0.0 && d_c < 3.0 * params.eps_k {
                tube_inputs(params, &x)
                    .and_then(|(h, r, w)| supplement_chain(params, &x, &h, &r, &w))
                    .ok()
                    .and_then(|s| match (s.branch.u_max, s.branch.alignment) {
                        (Some(u), Some(a)) if s.branch.vartheta_k > 0.0 => Some((u, a)),
                        _ => None,
                    })
            } else {
                None
            };
            if let Some((u, a)) = current {
                rep.min_alignment = rep.min_alignment.min(a);
                if let Some((pu, _)) = prev {
                    rep.steps_in_u0 += 1;
                    let sq = |v: [f64; 2]| [v[0] * v[0] - v[1] * v[1], 2.0 * v[0] * v[1]];
                    let (s0, s1) = (sq(pu), sq(u));
                    let sigma_cont = s0[0] * s1[0] + s0[1] * s1[1] > 0.5;
                    if sigma_cont && pu[0] * u[0] + pu[1] * u[1] < 0.0 {
                        rep.flips += 1;
                    }
                }
            }
            prev = current;
        }
    }
    rep
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::hopf_field;

    fn params() -> RecoveryParams {
        RecoveryParams::new(2, 1e-2).unwrap()
    }

    fn at(r: f64, d_c: f64) -> Vec<f64> {
        let mut x = vec![0.0; 6];
        x[5] = r.cos();
        x[2] = d_c;
        x[0] = (r.sin().powi(2) - d_c * d_c).sqrt();
        x
    }

    #[test]
    fn params_validation() {
        let p = params();
        assert!((p.s_k().powi(4) - 1e-2).abs() < 1e-14);
        assert!((p.eps_k() - p.s_k() / 20.0).abs() < 1e-16);
        assert!(RecoveryParams::new(1, 1e-2).is_err());
        assert!(RecoveryParams::new(2, 0.3).is_err());
        assert!(RecoveryParams::new(2, -1.0).is_err());
    }

    #[test]
    fn classify_examples() {
        let p = params();
        let cap = SpherePoint::normalized(at(0.5 * p.s_k(), 0.0)).unwrap();
        assert_eq!(region_classify(&p, &cap).unwrap().region, Region::CapPlus);
        let ext = SpherePoint::normalized(at(1.0, 0.5)).unwrap();
        assert_eq!(region_classify(&p, &ext).unwrap().region, Region::Exterior);
        let far = SpherePoint::normalized(at(PI / 2.0, 2.5 * p.eps_k())).unwrap();
        assert_eq!(region_classify(&p, &far).unwrap().region, Region::TubeFar);
    }

    #[test]
    fn cap_and_exterior_values() {
        let p = params();
        let h = hopf_field(2).unwrap();
        let cap = at(0.5 * p.s_k(), 0.01);
        assert_eq!(recovery_eval(&p, &cap, false).unwrap().0, h.eval_coords(&cap).unwrap());
        let ext = at(1.0, 0.5);
        let pole = crate::vecops::unit(5, 6);
        assert_eq!(recovery_eval(&p, &ext, false).unwrap().0, radial_gradient_coords(&ext, &pole).unwrap());
    }

    #[test]
    fn wk_at_pole_direction() {
        let p = params();
        let x = SpherePoint::basis(5, 6);
        let w = tube_field_wk(&p, &x).unwrap();
        assert_eq!(w, vec![0.0, 1.0, 0.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn orthogonal_tilt_norm() {
        let p = params();
        let r = p.s_k() + 0.5 * p.r_k();
        let mut x = at(r, 0.0);
        x[0] = 0.0;
        x[3] = 2.0 * p.eps_k();
        x[1] = 0.0;
        x[2] = 0.0;
        x[4] = 0.0;
        let s2 = r.sin().powi(2) - x[3] * x[3];
        x[0] = s2.sqrt();
        let (_, dg) = recovery_eval(&p, &x, true).unwrap();
        let dg = dg.unwrap();
        assert_eq!(dg.tag.psi, 1.0);
        assert_eq!(dg.tag.beta_hat(), 1.0);
        let den = dg.s_denominator.unwrap();
        assert!((den * den - 1.25).abs() < 1e-12, "{den}");
    }

    #[test]
    fn supplement_is_orthogonal_to_h_and_u() {
        let p = params();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let x = Stratum::TubeNearPlus.draw_point(&p, &mut rng);
            let sp = SpherePoint::normalized(x.clone()).unwrap();
            let (b, _) = supplement_bk(&p, &sp).unwrap();
            let h = apply_j(&x);
            let pole = crate::vecops::unit(5, 6);
            let r = radial_gradient_coords(&x, &pole).unwrap();
            let kappa = dot(&h, &r);
            let (u, _) = unit(r.iter().zip(&h).map(|(a, b)| a - kappa * b).collect());
            assert!(dot(&b, &h).abs() < 1e-12 && dot(&b, &u).abs() < 1e-12);
        }
    }

    #[test]
    fn small_scan_passes() {
        let p = params();
        let rep = nonvanishing_scan(&p, 500, 1);
        assert!(rep.pass(), "{rep:#?}");
    }
}
