//! The Sasaki calibration on `E = UT S^n`, `n = 2m + 1`.
//!
//! Tangent vectors of `E ⊂ R^{n+1} × R^{n+1}` at `(x, v)` are pairs `(ξ, η)`.
//! The Sasaki metric is `⟨ξ, ξ'⟩ + ⟨K(ξ,η), K(ξ',η')⟩` with connection map
//! `K(ξ, η) = η + ⟨ξ, v⟩ x`. The frame `A = (v, −x)`, `B_i = (e_i, 0)`,
//! `C_i = (0, e_i)` is orthonormal, and with dual coframe `(a, b_i, c_i)` the
//! calibration is `ω = a ∧ Θ`, `Θ = Σ_j C_{2j} τ_{2j}`, where `τ_k` collects
//! the wedge products with exactly `k` factors `b_i`.

use std::f64::consts::PI;

use num_integer::binomial;
use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::fields::{derivative_or_fd, graph_blocks, GraphBlocks, UnitField};
use crate::linalg::{det, gram_det, sigma_minors, solve, subsets, Matrix};
use crate::quadrature::{adaptive_integrate, gaussian_unit};
use crate::sphere::{SpherePoint, UNIT_TOL};
use crate::vecops::{complete_basis_with_fallback, dot, norm};
use crate::{Error, Result};

/// Tolerance for the tangency relations of [`SasakiTangent`].
pub const SASAKI_TANGENCY_TOL: f64 = 1e-10;

/// The coefficients of `Θ` for `d = 2m`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CalibCoefficients {
    /// Half-dimension `m`.
    pub m: usize,
    /// `C_{2j} = C(m, j) / C(2m, 2j)` for `j = 0..=m`.
    pub c2j: Vec<Ratio<i64>>,
    /// `c(m; 1) = 4^m / C(2m, m)`.
    pub c_m1: Ratio<i64>,
    /// `I_0 = ∫_{−π/2}^{π/2} cos^{2m} φ dφ`.
    pub i0: f64,
}

/// Exact coefficients of `Θ` and the constant `c(m; 1)`.
///
/// Fails for `m < 2` and asserts the binomial convolution
/// `Σ_j C(2j, j) C(2m−2j, m−j) = 4^m`.
pub fn coefficients(m: usize) -> Result<CalibCoefficients> {
    if m < 2 {
        return Err(Error::Domain(format!("calibration coefficients need m >= 2, got {m}")));
    }
    if m > 15 {
        return Err(Error::Argument(format!("m = {m} overflows the exact rationals")));
    }
    let mi = m as i64;
    let c2j = (0..=mi).map(|j| Ratio::new(binomial(mi, j), binomial(2 * mi, 2 * j))).collect();
    let pow4 = 4i64.pow(m as u32);
    let conv: i64 = (0..=mi).map(|j| binomial(2 * j, j) * binomial(2 * mi - 2 * j, mi - j)).sum();
    if conv != pow4 {
        return Err(Error::Tolerance(format!("binomial convolution gave {conv}, expected {pow4}")));
    }
    let c_m1 = Ratio::new(pow4, binomial(2 * mi, mi));
    let i0 = PI * binomial(2 * mi, mi) as f64 / pow4 as f64;
    Ok(CalibCoefficients { m, c2j, c_m1, i0 })
}

impl CalibCoefficients {
    /// Dimension `d = 2m`.
    pub fn d(&self) -> usize {
        2 * self.m
    }

    /// `C_{2j}` as floating-point numbers.
    pub fn c2j_f64(&self) -> Vec<f64> {
        self.c2j.iter().map(|r| *r.numer() as f64 / *r.denom() as f64).collect()
    }

    /// `c(m; 1)` as a floating-point number.
    pub fn c_m1_f64(&self) -> f64 {
        *self.c_m1.numer() as f64 / *self.c_m1.denom() as f64
    }

    /// For each `j`, the quadrature value of
    /// `(1/I_0) ∫_{−π/2}^{π/2} cos^{d−2j} φ sin^{2j} φ dφ` next to the stored `C_{2j}`.
    pub fn beta_integrals(&self) -> Result<Vec<(f64, f64)>> {
        let d = self.d() as i32;
        let stored = self.c2j_f64();
        (0..=self.m)
            .map(|j| {
                let k = 2 * j as i32;
                let q = adaptive_integrate(|p| p.cos().powi(d - k) * p.sin().powi(k), -PI / 2.0, PI / 2.0, 1e-14)?;
                Ok((q / self.i0, stored[j]))
            })
            .collect()
    }
}

/// `S_m = Σ_j C(m, j)² / C(2m, 2j)`, the value of `Φ_d` on the Hopf block.
pub fn hopf_phi_sum(m: usize) -> Ratio<i64> {
    let mi = m as i64;
    (0..=mi).map(|j| Ratio::new(binomial(mi, j).pow(2), binomial(2 * mi, 2 * j))).sum()
}

/// A point `(x, v)` of the unit tangent bundle.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UnitTangentPoint {
    x: Vec<f64>,
    v: Vec<f64>,
}

impl UnitTangentPoint {
    /// Validates `|x| = |v| = 1` and `⟨x, v⟩ = 0` within `1e-12`.
    pub fn new(x: Vec<f64>, v: Vec<f64>) -> Result<Self> {
        if x.len() != v.len() || x.len() < 4 {
            return Err(Error::Dimension("x and v must have equal length >= 4".into()));
        }
        if (norm(&x) - 1.0).abs() > UNIT_TOL || (norm(&v) - 1.0).abs() > UNIT_TOL {
            return Err(Error::Domain("x and v must be unit vectors".into()));
        }
        if dot(&x, &v).abs() > UNIT_TOL {
            return Err(Error::Domain("x and v must be orthogonal".into()));
        }
        Ok(Self { x, v })
    }

    /// Base point `x`.
    pub fn x(&self) -> &[f64] {
        &self.x
    }

    /// Fibre vector `v`.
    pub fn v(&self) -> &[f64] {
        &self.v
    }

    /// `n` with `E = UT S^n`.
    pub fn n(&self) -> usize {
        self.x.len() - 1
    }

    /// The fibre involution `ι(x, v) = (x, −v)`.
    pub fn antipodal(&self) -> Self {
        Self { x: self.x.clone(), v: self.v.iter().map(|a| -a).collect() }
    }

    /// Bundle projection `π(x, v) = x`.
    pub fn project(&self) -> SpherePoint {
        SpherePoint::normalized(self.x.clone()).expect("unit base point")
    }
}

/// A tangent vector `(ξ, η)` of `E` at a given base point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SasakiTangent {
    xi: Vec<f64>,
    eta: Vec<f64>,
    base: UnitTangentPoint,
}

impl SasakiTangent {
    /// Validates `⟨ξ, x⟩ = 0`, `⟨η, v⟩ = 0` and `⟨ξ, v⟩ + ⟨x, η⟩ = 0`.
    pub fn new(base: UnitTangentPoint, xi: Vec<f64>, eta: Vec<f64>) -> Result<Self> {
        if xi.len() != base.x.len() || eta.len() != base.x.len() {
            return Err(Error::Dimension("Sasaki tangent length".into()));
        }
        let r1 = dot(&xi, &base.x);
        let r2 = dot(&eta, &base.v);
        let r3 = dot(&xi, &base.v) + dot(&base.x, &eta);
        let scale = 1.0 + norm(&xi) + norm(&eta);
        if r1.abs().max(r2.abs()).max(r3.abs()) > SASAKI_TANGENCY_TOL * scale {
            return Err(Error::Domain(format!("tangency residuals ({r1:e}, {r2:e}, {r3:e})")));
        }
        Ok(Self { xi, eta, base })
    }

    /// Horizontal component `ξ`.
    pub fn xi(&self) -> &[f64] {
        &self.xi
    }

    /// Vertical component `η`.
    pub fn eta(&self) -> &[f64] {
        &self.eta
    }

    /// Base point.
    pub fn base(&self) -> &UnitTangentPoint {
        &self.base
    }

    /// Connection map `K(ξ, η) = η + ⟨ξ, v⟩ x`.
    pub fn connection_map(&self) -> Vec<f64> {
        let c = dot(&self.xi, &self.base.v);
        self.eta.iter().zip(&self.base.x).map(|(e, x)| e + c * x).collect()
    }

    /// Bundle differential `dπ(ξ, η) = ξ`.
    pub fn d_pi(&self) -> &[f64] {
        &self.xi
    }
}

/// Sasaki inner product of two tangent vectors at the same base point.
pub fn sasaki_inner(a: &SasakiTangent, b: &SasakiTangent) -> Result<f64> {
    if a.base != b.base {
        return Err(Error::Argument("Sasaki inner product across base points".into()));
    }
    Ok(dot(&a.xi, &b.xi) + dot(&a.connection_map(), &b.connection_map()))
}

/// Pushforward `ι_*(ξ, η) = (ξ, −η)` under the fibre involution.
pub fn antipodal_pushforward(w: &SasakiTangent) -> SasakiTangent {
    SasakiTangent {
        xi: w.xi.clone(),
        eta: w.eta.iter().map(|a| -a).collect(),
        base: w.base.antipodal(),
    }
}

/// The orthonormal Sasaki frame `(A, B_1..B_d, C_1..C_d)` at a base point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SasakiFrame {
    base: UnitTangentPoint,
    e: Vec<Vec<f64>>,
}

/// Deterministic oriented Sasaki frame at `y`.
///
/// `(e_i)` comes from Gram–Schmidt on ambient axes after removing `x` and `v`,
/// with `e_d` negated when `det(v, e_1, …, e_d, x) < 0`.
pub fn sasaki_frame(y: &UnitTangentPoint) -> Result<SasakiFrame> {
    let mut e = complete_basis_with_fallback(&[&y.x, &y.v], y.x.len())
        .ok_or_else(|| Error::Degenerate("Sasaki frame construction".into()))?;
    let mut cols = Vec::with_capacity(y.x.len());
    cols.push(y.v.clone());
    cols.extend(e.iter().cloned());
    cols.push(y.x.clone());
    if det(&Matrix::from_columns(&cols)?)? < 0.0 {
        let last = e.last_mut().expect("d >= 1");
        last.iter_mut().for_each(|a| *a = -*a);
    }
    Ok(SasakiFrame { base: y.clone(), e })
}

impl SasakiFrame {
    /// Base point of the frame.
    pub fn base(&self) -> &UnitTangentPoint {
        &self.base
    }

    /// `d = n − 1`.
    pub fn d(&self) -> usize {
        self.e.len()
    }

    /// The oriented basis `(e_1, …, e_d)` of `v^⊥ ⊂ T_x S^n`.
    pub fn e(&self) -> &[Vec<f64>] {
        &self.e
    }

    /// `A = (v, −x)`.
    pub fn a(&self) -> SasakiTangent {
        SasakiTangent {
            xi: self.base.v.clone(),
            eta: self.base.x.iter().map(|a| -a).collect(),
            base: self.base.clone(),
        }
    }

    /// `B_i = (e_i, 0)`, zero-based `i`.
    pub fn b(&self, i: usize) -> SasakiTangent {
        SasakiTangent { xi: self.e[i].clone(), eta: vec![0.0; self.e[i].len()], base: self.base.clone() }
    }

    /// `C_i = (0, e_i)`, zero-based `i`.
    pub fn c(&self, i: usize) -> SasakiTangent {
        SasakiTangent { xi: vec![0.0; self.e[i].len()], eta: self.e[i].clone(), base: self.base.clone() }
    }

    /// All `2d + 1` frame vectors in the order `A, B_1..B_d, C_1..C_d`.
    pub fn vectors(&self) -> Vec<SasakiTangent> {
        let d = self.d();
        let mut out = vec![self.a()];
        out.extend((0..d).map(|i| self.b(i)));
        out.extend((0..d).map(|i| self.c(i)));
        out
    }

    /// Coframe values `(a(w), b_i(w), c_i(w))`.
    pub fn coords(&self, w: &SasakiTangent) -> Result<(f64, Vec<f64>, Vec<f64>)> {
        if w.base != self.base {
            return Err(Error::Argument("tangent vector is based at a different point".into()));
        }
        Ok(self.coords_unchecked(&w.xi, &w.eta))
    }

    fn coords_unchecked(&self, xi: &[f64], eta: &[f64]) -> (f64, Vec<f64>, Vec<f64>) {
        let a = dot(xi, &self.base.v);
        let b = self.e.iter().map(|e| dot(xi, e)).collect();
        let c = self.e.iter().map(|e| dot(eta, e)).collect();
        (a, b, c)
    }

    /// The tangent vector `α A + Σ β_i B_i + Σ γ_i C_i`.
    pub fn combine(&self, alpha: f64, beta: &[f64], gamma: &[f64]) -> SasakiTangent {
        let len = self.base.x.len();
        let mut xi: Vec<f64> = self.base.v.iter().map(|v| alpha * v).collect();
        let mut eta: Vec<f64> = self.base.x.iter().map(|x| -alpha * x).collect();
        for (i, e) in self.e.iter().enumerate() {
            for k in 0..len {
                xi[k] += beta[i] * e[k];
                eta[k] += gamma[i] * e[k];
            }
        }
        SasakiTangent { xi, eta, base: self.base.clone() }
    }
}

/// A `d`-plane in the contact distribution given by frame coefficients
/// `B_{ij} = b_i(u_j)` and `C_{ij} = c_i(u_j)` of a spanning `d`-tuple.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DPlane {
    b: Matrix,
    c: Matrix,
}

impl DPlane {
    /// An orthonormal plane: validates `BᵀB + CᵀC = I` within `1e-10`.
    pub fn new(b: Matrix, c: Matrix) -> Result<Self> {
        let plane = Self::from_tuple(b, c)?;
        let g = plane.b.transpose().matmul(&plane.b)?.add(&plane.c.transpose().matmul(&plane.c)?)?;
        let d = g.rows();
        for i in 0..d {
            for j in 0..d {
                let want = if i == j { 1.0 } else { 0.0 };
                if (g.get(i, j) - want).abs() > 1e-10 {
                    return Err(Error::Domain("plane columns are not orthonormal".into()));
                }
            }
        }
        Ok(plane)
    }

    /// An arbitrary spanning tuple; forms evaluate on the tuple itself.
    pub fn from_tuple(b: Matrix, c: Matrix) -> Result<Self> {
        if !b.is_square() || b.rows() != c.rows() || b.cols() != c.cols() {
            return Err(Error::Dimension("B and C must be equal-size square matrices".into()));
        }
        Ok(Self { b, c })
    }

    /// The diagonal plane `u_i = cos φ B_i + sin φ C_i`.
    pub fn diagonal(d: usize, phi: f64) -> Self {
        Self {
            b: Matrix::identity(d).scaled(phi.cos()),
            c: Matrix::identity(d).scaled(phi.sin()),
        }
    }

    /// Horizontal coefficients.
    pub fn b(&self) -> &Matrix {
        &self.b
    }

    /// Vertical coefficients.
    pub fn c(&self) -> &Matrix {
        &self.c
    }

    /// Dimension `d`.
    pub fn d(&self) -> usize {
        self.b.rows()
    }

    /// The plane after the basis change `e ↦ e·Q`, i.e. `(QᵀB, QᵀC)`.
    pub fn rotated(&self, q: &Matrix) -> Result<Self> {
        let qt = q.transpose();
        Self::from_tuple(qt.matmul(&self.b)?, qt.matmul(&self.c)?)
    }
}

fn pencil(plane: &DPlane, t: f64) -> Matrix {
    plane.c.add(&plane.b.scaled(t)).expect("equal shapes")
}

/// `τ_0, …, τ_d` on a plane, from `p(t) = det(C + tB)` sampled at `d + 1`
/// Chebyshev nodes and interpolated in Newton form.
pub fn tau_coefficients(plane: &DPlane) -> Result<Vec<f64>> {
    let d = plane.d();
    let nodes: Vec<f64> = (0..=d).map(|k| ((2 * k + 1) as f64 * PI / (2 * (d + 1)) as f64).cos()).collect();
    let mut coef: Vec<f64> = nodes.iter().map(|&t| det(&pencil(plane, t))).collect::<Result<_>>()?;
    for level in 1..=d {
        for i in (level..=d).rev() {
            coef[i] = (coef[i] - coef[i - 1]) / (nodes[i] - nodes[i - level]);
        }
    }
    let mut poly = vec![0.0; d + 1];
    for k in (0..=d).rev() {
        for i in (1..=d).rev() {
            poly[i] = poly[i - 1] - nodes[k] * poly[i];
        }
        poly[0] = -nodes[k] * poly[0];
        poly[0] += coef[k];
    }
    Ok(poly)
}

/// `τ_k` by summing `det` over all row selections with `k` rows from `B`.
pub fn tau_subset_sum(plane: &DPlane, k: usize) -> Result<f64> {
    let d = plane.d();
    if k > d {
        return Err(Error::Argument(format!("k = {k} exceeds d = {d}")));
    }
    if d > crate::linalg::MAX_ENUM_DIM {
        return Err(Error::Argument("subset enumeration limited to d <= 8".into()));
    }
    let mut total = 0.0;
    for rows in subsets(d, k) {
        let mut m = plane.c.clone();
        for &i in &rows {
            for j in 0..d {
                m.set(i, j, plane.b.get(i, j));
            }
        }
        total += det(&m)?;
    }
    Ok(total)
}

/// `Θ = Σ_j C_{2j} τ_{2j}` on a plane.
pub fn theta_eval(coeff: &CalibCoefficients, plane: &DPlane) -> Result<f64> {
    if plane.d() != coeff.d() {
        return Err(Error::Dimension(format!("plane dimension {} vs d = {}", plane.d(), coeff.d())));
    }
    let tau = tau_coefficients(plane)?;
    Ok(coeff.c2j_f64().iter().enumerate().map(|(j, c)| c * tau[2 * j]).sum())
}

/// `Θ` through `(1/I_0) ∫_{−π/2}^{π/2} det(cos φ C + sin φ B) dφ`.
pub fn theta_integral(coeff: &CalibCoefficients, plane: &DPlane) -> Result<f64> {
    let f = |p: f64| {
        let m = plane.c.scaled(p.cos()).add(&plane.b.scaled(p.sin())).expect("equal shapes");
        det(&m).unwrap_or(f64::NAN)
    };
    Ok(adaptive_integrate(f, -PI / 2.0, PI / 2.0, 1e-13)? / coeff.i0)
}

/// `ω(u_0, …, u_d) = Σ_j (−1)^j a(u_j) Θ(u_0, …, û_j, …, u_d)`.
pub fn omega_eval(coeff: &CalibCoefficients, frame: &SasakiFrame, vectors: &[SasakiTangent]) -> Result<f64> {
    let d = frame.d();
    if vectors.len() != d + 1 {
        return Err(Error::Argument(format!("ω takes {} vectors, got {}", d + 1, vectors.len())));
    }
    let coords: Vec<_> = vectors.iter().map(|w| frame.coords(w)).collect::<Result<_>>()?;
    omega_from_coords(coeff, &coords)
}

fn omega_from_coords(coeff: &CalibCoefficients, coords: &[(f64, Vec<f64>, Vec<f64>)]) -> Result<f64> {
    let d = coords.len() - 1;
    let mut total = 0.0;
    for j in 0..=d {
        let a = coords[j].0;
        if a == 0.0 {
            continue;
        }
        let others: Vec<usize> = (0..=d).filter(|&k| k != j).collect();
        let bcols: Vec<Vec<f64>> = others.iter().map(|&k| coords[k].1.clone()).collect();
        let ccols: Vec<Vec<f64>> = others.iter().map(|&k| coords[k].2.clone()).collect();
        let plane = DPlane::from_tuple(Matrix::from_columns(&bcols)?, Matrix::from_columns(&ccols)?)?;
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        total += sign * a * theta_eval(coeff, &plane)?;
    }
    Ok(total)
}

/// `Φ_d(M) = Σ_j C_{2j} σ_{2j}(M)` with the given coefficients.
pub fn phi_d(coeff: &CalibCoefficients, m: &Matrix) -> Result<f64> {
    if !m.is_square() {
        return Err(Error::Dimension("Φ_d needs a square matrix".into()));
    }
    if m.rows() % 2 != 0 {
        return Err(Error::Domain(format!("Φ_d needs even d, got {}", m.rows())));
    }
    if m.rows() != coeff.d() {
        return Err(Error::Dimension(format!("matrix size {} vs d = {}", m.rows(), coeff.d())));
    }
    let mut total = 0.0;
    for (j, c) in coeff.c2j_f64().iter().enumerate() {
        total += c * sigma_minors(m, 2 * j)?;
    }
    Ok(total)
}

/// Graph density `√det(I + MᵀM) · √(1 + bᵀ(I + MMᵀ)⁻¹ b)`.
pub fn graph_density(blocks: &GraphBlocks) -> Result<f64> {
    let m = blocks.m();
    let g = gram_det(m);
    let mmt = m.matmul(&m.transpose())?.add(&Matrix::identity(m.rows()))?;
    let y = solve(&mmt, blocks.b())?;
    let t = dot(blocks.b(), &y);
    Ok((g * (1.0 + t)).sqrt())
}

/// Graph density from the full Gram determinant `det(I + LᵀL)` of `L = [b | M]`.
pub fn graph_density_full(blocks: &GraphBlocks) -> Result<f64> {
    let d = blocks.d();
    let mut cols = Vec::with_capacity(d + 1);
    cols.push(blocks.b().to_vec());
    cols.extend((0..d).map(|j| blocks.m().column(j)));
    Ok(gram_det(&Matrix::from_columns(&cols)?).sqrt())
}

/// Graph density of `V` at `x`.
pub fn field_density(f: &UnitField, x: &SpherePoint, step: f64) -> Result<f64> {
    graph_density(&graph_blocks(f, x, step)?)
}

/// `dens(V)(x) − Φ_d(M_V)(x)`.
pub fn calibration_defect(coeff: &CalibCoefficients, f: &UnitField, x: &SpherePoint, step: f64) -> Result<f64> {
    let gb = graph_blocks(f, x, step)?;
    Ok(graph_density(&gb)? - phi_d(coeff, gb.m())?)
}

/// `(|b|, ‖M − (tr M / d) I‖_F)`.
pub fn rigidity_residual(blocks: &GraphBlocks) -> (f64, f64) {
    let m = blocks.m();
    let d = m.rows();
    let lam = m.trace() / d as f64;
    let off = m.add(&Matrix::identity(d).scaled(-lam)).expect("same shape").frobenius();
    (norm(blocks.b()), off)
}

/// `λ = tr M / d` at `x`.
pub fn mean_curvature_scalar(f: &UnitField, x: &[f64], step: f64) -> Result<f64> {
    let v = f.eval_coords(x)?;
    let frame = crate::fields::adapted_frame(x, &v)?;
    let d = frame.len() - 1;
    let mut tr = 0.0;
    for e in &frame[1..] {
        tr += dot(&derivative_or_fd(f, x, e, step)?, e);
    }
    Ok(tr / d as f64)
}

/// Riccati residual `V(λ) + λ² + 1`, with `V(λ)` by central differences of
/// `λ` along the great circle in direction `V(x)`.
pub fn riccati_residual(f: &UnitField, x: &SpherePoint, step: f64, fd_step: f64) -> Result<f64> {
    let xc = x.coords();
    let v = f.eval_coords(xc)?;
    let (s, c) = fd_step.sin_cos();
    let xp: Vec<f64> = xc.iter().zip(&v).map(|(a, b)| c * a + s * b).collect();
    let xm: Vec<f64> = xc.iter().zip(&v).map(|(a, b)| c * a - s * b).collect();
    let dl = (mean_curvature_scalar(f, &xp, step)? - mean_curvature_scalar(f, &xm, step)?) / (2.0 * fd_step);
    let lam = mean_curvature_scalar(f, xc, step)?;
    Ok(dl + lam * lam + 1.0)
}

/// Center `p(x) = cos r · x − sin r · V(x)` with `cot r = λ(x)`.
pub fn center_point(f: &UnitField, x: &SpherePoint, step: f64) -> Result<Vec<f64>> {
    let lam = mean_curvature_scalar(f, x.coords(), step)?;
    let r = (1.0f64).atan2(lam);
    let v = f.eval_coords(x.coords())?;
    let (s, c) = r.sin_cos();
    Ok(x.coords().iter().zip(&v).map(|(a, b)| c * a - s * b).collect())
}

/// Random point `(x, v)` of `UT S^n`.
pub fn random_unit_tangent_point<R: Rng + ?Sized>(rng: &mut R, n: usize) -> UnitTangentPoint {
    let x = gaussian_unit(rng, n + 1);
    loop {
        let g = gaussian_unit(rng, n + 1);
        let c = dot(&g, &x);
        let v: Vec<f64> = g.iter().zip(&x).map(|(a, b)| a - c * b).collect();
        let r = norm(&v);
        if r > 1e-6 {
            let v = v.into_iter().map(|a| a / r).collect();
            return UnitTangentPoint { x, v };
        }
    }
}

/// `k` orthonormal vectors in `R^dim` from Gram–Schmidt on Gaussian samples.
pub fn random_orthonormal<R: Rng + ?Sized>(rng: &mut R, dim: usize, k: usize) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = Vec::with_capacity(k);
    while out.len() < k {
        let mut g = gaussian_unit(rng, dim);
        for _ in 0..2 {
            for o in &out {
                let c = dot(&g, o);
                g.iter_mut().zip(o).for_each(|(a, b)| *a -= c * b);
            }
        }
        let r = norm(&g);
        if r > 1e-6 {
            out.push(g.into_iter().map(|a| a / r).collect());
        }
    }
    out
}

/// Random rotation in `SO(d)`.
pub fn random_rotation<R: Rng + ?Sized>(rng: &mut R, d: usize) -> Matrix {
    let mut cols = random_orthonormal(rng, d, d);
    let q = Matrix::from_columns(&cols).expect("square");
    if det(&q).expect("square") < 0.0 {
        cols[0].iter_mut().for_each(|a| *a = -*a);
    }
    Matrix::from_columns(&cols).expect("square")
}

/// Random orthonormal `d`-plane in the contact distribution.
pub fn random_dplane<R: Rng + ?Sized>(rng: &mut R, d: usize) -> DPlane {
    let cols = random_orthonormal(rng, 2 * d, d);
    let b: Vec<Vec<f64>> = cols.iter().map(|c| c[..d].to_vec()).collect();
    let c: Vec<Vec<f64>> = cols.iter().map(|c| c[d..].to_vec()).collect();
    DPlane::from_tuple(Matrix::from_columns(&b).expect("d×d"), Matrix::from_columns(&c).expect("d×d"))
        .expect("equal shapes")
}

/// Random Sasaki-orthonormal `n`-tuple at the frame's base point.
pub fn random_sasaki_tuple<R: Rng + ?Sized>(rng: &mut R, frame: &SasakiFrame) -> Vec<SasakiTangent> {
    let d = frame.d();
    random_orthonormal(rng, 2 * d + 1, d + 1)
        .into_iter()
        .map(|w| frame.combine(w[0], &w[1..=d], &w[d + 1..]))
        .collect()
}

/// Outcome of [`comass_scan`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComassReport {
    /// Number of sampled frames.
    pub samples: usize,
    /// Largest `|ω|` seen.
    pub max_abs: f64,
    /// Base point of the maximiser.
    pub argmax_base: UnitTangentPoint,
    /// Frame coordinates `(a, b, c)` of the maximising tuple.
    pub argmax_coords: Vec<Vec<f64>>,
    /// Largest `|ω∘ι_* − ω|` over the same tuples.
    pub max_antipodal_deviation: f64,
}

/// Samples `|ω|` on random Sasaki-orthonormal `n`-frames at random base points
/// and compares each value with its fibre-antipodal image.
pub fn comass_scan(coeff: &CalibCoefficients, samples: usize, seed: u64) -> Result<ComassReport> {
    if samples == 0 {
        return Err(Error::Argument("comass scan needs at least one sample".into()));
    }
    let n = coeff.d() + 1;
    let chunk = 1024;
    let parts: Vec<(f64, f64, UnitTangentPoint, Vec<Vec<f64>>)> = (0..samples.div_ceil(chunk))
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c as u64);
            let mut best: Option<(f64, UnitTangentPoint, Vec<Vec<f64>>)> = None;
            let mut dev: f64 = 0.0;
            for _ in 0..chunk.min(samples - c * chunk) {
                let y = random_unit_tangent_point(&mut rng, n);
                let frame = sasaki_frame(&y)?;
                let tuple = random_sasaki_tuple(&mut rng, &frame);
                let w = omega_eval(coeff, &frame, &tuple)?;
                let image: Vec<SasakiTangent> = tuple.iter().map(antipodal_pushforward).collect();
                let frame2 = sasaki_frame(&y.antipodal())?;
                let w2 = omega_eval(coeff, &frame2, &image)?;
                dev = dev.max((w2 - w).abs());
                if best.as_ref().is_none_or(|b| w.abs() > b.0) {
                    let coords = tuple
                        .iter()
                        .map(|t| {
                            let (a, b, c) = frame.coords(t).expect("same base");
                            let mut row = vec![a];
                            row.extend(b);
                            row.extend(c);
                            row
                        })
                        .collect();
                    best = Some((w.abs(), y.clone(), coords));
                }
            }
            let (m, y, co) = best.expect("non-empty chunk");
            Ok((m, dev, y, co))
        })
        .collect::<Result<_>>()?;
    let mut report: Option<ComassReport> = None;
    for (m, dev, y, co) in parts {
        match report.as_mut() {
            None => {
                report = Some(ComassReport {
                    samples,
                    max_abs: m,
                    argmax_base: y,
                    argmax_coords: co,
                    max_antipodal_deviation: dev,
                })
            }
            Some(r) => {
                r.max_antipodal_deviation = r.max_antipodal_deviation.max(dev);
                if m > r.max_abs {
                    r.max_abs = m;
                    r.argmax_base = y;
                    r.argmax_coords = co;
                }
            }
        }
    }
    Ok(report.expect("at least one chunk"))
}

/// `ω` on `A ∧ u_1(φ) ∧ … ∧ u_d(φ)` with `u_i(φ) = cos φ B_i + sin φ C_i`.
pub fn omega_on_diagonal(coeff: &CalibCoefficients, frame: &SasakiFrame, phi: f64) -> Result<f64> {
    let d = frame.d();
    let mut tuple = vec![frame.a()];
    for i in 0..d {
        let mut beta = vec![0.0; d];
        let mut gamma = vec![0.0; d];
        beta[i] = phi.cos();
        gamma[i] = phi.sin();
        tuple.push(frame.combine(0.0, &beta, &gamma));
    }
    omega_eval(coeff, frame, &tuple)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{hopf_field, radial_field, DEFAULT_STEP};
    use crate::linalg::Matrix;

    fn rng() -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(42)
    }

    #[test]
    fn coefficient_examples() {
        let c = coefficients(2).unwrap();
        assert_eq!(c.c2j, vec![Ratio::from_integer(1), Ratio::new(1, 3), Ratio::from_integer(1)]);
        assert_eq!(c.c_m1, Ratio::new(8, 3));
        assert_eq!(coefficients(3).unwrap().c_m1, Ratio::new(16, 5));
        for m in 2..=5 {
            assert_eq!(hopf_phi_sum(m), coefficients(m).unwrap().c_m1);
        }
        assert!(matches!(coefficients(1), Err(Error::Domain(_))));
        for (q, s) in c.beta_integrals().unwrap() {
            assert!((q - s).abs() < 1e-12);
        }
    }

    #[test]
    fn frame_is_sasaki_orthonormal() {
        let mut r = rng();
        let y = random_unit_tangent_point(&mut r, 5);
        let f = sasaki_frame(&y).unwrap();
        let vs = f.vectors();
        for (i, a) in vs.iter().enumerate() {
            for (j, b) in vs.iter().enumerate() {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((sasaki_inner(a, b).unwrap() - want).abs() < 1e-12);
            }
        }
        assert!(norm(&f.a().connection_map()) < 1e-15);
        assert_eq!(f.a().d_pi(), y.v());
        assert!(norm(f.c(0).d_pi()) == 0.0);
    }

    #[test]
    fn theta_on_special_planes() {
        let c = coefficients(2).unwrap();
        for phi in [0.0, PI / 4.0, -PI / 4.0, PI / 2.0, -PI / 2.0] {
            assert!((theta_eval(&c, &DPlane::diagonal(4, phi)).unwrap() - 1.0).abs() < 1e-12);
        }
        let vertical = DPlane::new(Matrix::zeros(4, 4), Matrix::identity(4)).unwrap();
        assert!((theta_eval(&c, &vertical).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn tau_interpolation_matches_subsets() {
        let mut r = rng();
        for d in [4, 6] {
            let p = random_dplane(&mut r, d);
            let tau = tau_coefficients(&p).unwrap();
            for (k, t) in tau.iter().enumerate() {
                let s = tau_subset_sum(&p, k).unwrap();
                assert!((t - s).abs() < 1e-10, "d={d} k={k}: {t} vs {s}");
            }
        }
    }

    #[test]
    fn theta_integral_matches_sum() {
        let c = coefficients(2).unwrap();
        let p = random_dplane(&mut rng(), 4);
        assert!((theta_eval(&c, &p).unwrap() - theta_integral(&c, &p).unwrap()).abs() < 1e-10);
    }

    #[test]
    fn omega_examples() {
        let c = coefficients(2).unwrap();
        let y = random_unit_tangent_point(&mut rng(), 5);
        let f = sasaki_frame(&y).unwrap();
        for phi in [0.0, PI / 4.0] {
            assert!((omega_on_diagonal(&c, &f, phi).unwrap() - 1.0).abs() < 1e-12);
        }
        let tuple: Vec<SasakiTangent> = (0..4).map(|i| f.b(i)).chain([f.c(0)]).collect();
        assert!(omega_eval(&c, &f, &tuple).unwrap().abs() < 1e-14);
    }

    #[test]
    fn phi_examples() {
        let c = coefficients(2).unwrap();
        assert_eq!(phi_d(&c, &Matrix::zeros(4, 4)).unwrap(), 1.0);
        let r = 0.7f64;
        let cot = 1.0 / r.tan();
        let v = phi_d(&c, &Matrix::identity(4).scaled(cot)).unwrap();
        assert!((v - (1.0 + cot * cot).powi(2)).abs() < 1e-12);
        assert!(matches!(phi_d(&c, &Matrix::zeros(3, 3)), Err(Error::Domain(_))));
    }

    #[test]
    fn hopf_and_radial_densities() {
        let c = coefficients(2).unwrap();
        let h = hopf_field(2).unwrap();
        let x = SpherePoint::normalized(vec![0.3, -0.2, 0.5, 0.1, 0.7, -0.4]).unwrap();
        let gb = graph_blocks(&h, &x, DEFAULT_STEP).unwrap();
        assert!((graph_density(&gb).unwrap() - 4.0).abs() < 1e-12);
        assert!((phi_d(&c, gb.m()).unwrap() - 8.0 / 3.0).abs() < 1e-12);
        assert!((calibration_defect(&c, &h, &x, DEFAULT_STEP).unwrap() - 4.0 / 3.0).abs() < 1e-12);
        let (bn, off) = rigidity_residual(&gb);
        assert!(bn < 1e-12 && (off - 2.0).abs() < 1e-12);

        let p = SpherePoint::basis(5, 6);
        let rad = radial_field(&p);
        let rr = 0.9f64;
        let xr = SpherePoint::normalized(vec![rr.sin(), 0.0, 0.0, 0.0, 0.0, rr.cos()]).unwrap();
        let gb = graph_blocks(&rad, &xr, DEFAULT_STEP).unwrap();
        assert!((graph_density(&gb).unwrap() - rr.sin().powi(-4)).abs() < 1e-10);
        assert!(calibration_defect(&c, &rad, &xr, DEFAULT_STEP).unwrap().abs() < 1e-12);
    }

    #[test]
    fn rigidity_trivial() {
        let gb = GraphBlocks::from_parts(vec![0.0; 4], Matrix::identity(4).scaled(3.0)).unwrap();
        assert_eq!(rigidity_residual(&gb), (0.0, 0.0));
    }

    #[test]
    fn antipodal_involution() {
        let y = random_unit_tangent_point(&mut rng(), 5);
        assert_eq!(y.antipodal().antipodal(), y);
        assert_eq!(y.antipodal().x(), y.x());
        let f = sasaki_frame(&y).unwrap();
        let w = f.combine(0.3, &[0.1, 0.2, 0.0, 0.0], &[0.0, 0.5, 0.0, 0.1]);
        assert_eq!(antipodal_pushforward(&antipodal_pushforward(&w)), w);
        let image = antipodal_pushforward(&w);
        assert!(SasakiTangent::new(image.base().clone(), image.xi().to_vec(), image.eta().to_vec()).is_ok());
    }

    #[test]
    fn comass_small_scan() {
        let c = coefficients(2).unwrap();
        let rep = comass_scan(&c, 2000, 1).unwrap();
        assert!(rep.max_abs <= 1.0 + 1e-9);
        assert!(rep.max_antipodal_deviation <= 1e-10);
    }

    #[test]
    fn center_and_riccati_for_radial() {
        let p = SpherePoint::basis(5, 6);
        let rad = radial_field(&p);
        let x = SpherePoint::normalized(vec![0.5, 0.1, -0.3, 0.2, 0.4, 0.6]).unwrap();
        let c = center_point(&rad, &x, DEFAULT_STEP).unwrap();
        for (a, b) in c.iter().zip(p.coords()) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!(riccati_residual(&rad, &x, DEFAULT_STEP, 1e-4).unwrap().abs() < 1e-6);
    }
}
