//! Unit tangent vector fields on `S^n`.
//!
//! A [`UnitField`] wraps an evaluator `x ↦ V(x)` on ambient coordinates and,
//! for the canonical fields, an analytic covariant derivative
//! `(x, X) ↦ ∇_X V`. Fields without one are differentiated by central
//! differences along great circles.

use std::fmt;
use std::sync::Arc;

use crate::linalg::Matrix;
use crate::sphere::{radial_gradient_coords, SpherePoint, TangentVector};
use crate::vecops::{complete_basis_with_fallback, dot, norm};
use crate::{Error, Result};

/// Default finite-difference step for covariant derivatives.
pub const DEFAULT_STEP: f64 = 1e-5;

/// Field evaluator on ambient coordinates.
pub type Evaluator = Arc<dyn Fn(&[f64]) -> Result<Vec<f64>> + Send + Sync>;
/// Analytic covariant derivative `(x, X) ↦ ∇_X V(x)`.
pub type Derivative = Arc<dyn Fn(&[f64], &[f64]) -> Result<Vec<f64>> + Send + Sync>;

/// A unit tangent vector field on `S^n`.
#[derive(Clone)]
pub struct UnitField {
    n: usize,
    name: String,
    eval: Evaluator,
    derivative: Option<Derivative>,
}

impl fmt::Debug for UnitField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("UnitField")
            .field("n", &self.n)
            .field("name", &self.name)
            .field("analytic_derivative", &self.derivative.is_some())
            .finish()
    }
}

impl UnitField {
    /// Wraps an evaluator on `S^n`, optionally with its analytic derivative.
    pub fn new(n: usize, name: impl Into<String>, eval: Evaluator, derivative: Option<Derivative>) -> Self {
        Self { n, name: name.into(), eval, derivative }
    }

    /// Intrinsic dimension `n` of the base sphere.
    pub fn dim(&self) -> usize {
        self.n
    }

    /// Human-readable name.
    pub fn name(&self) -> &str {
        &self.name
    }

    /// Whether an analytic derivative is attached.
    pub fn has_derivative(&self) -> bool {
        self.derivative.is_some()
    }

    /// The same field with the analytic derivative removed, so that every
    /// derivative is computed by finite differences.
    pub fn without_derivative(&self) -> Self {
        Self { derivative: None, ..self.clone() }
    }

    /// `V(x)` as a tangent vector.
    pub fn eval(&self, x: &SpherePoint) -> Result<TangentVector> {
        let v = self.eval_coords(x.coords())?;
        Ok(TangentVector::project(x.clone(), &v))
    }

    /// `V(x)` in ambient coordinates.
    pub fn eval_coords(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.n + 1 {
            return Err(Error::Dimension(format!("field on S^{} evaluated at length {}", self.n, x.len())));
        }
        (self.eval)(x)
    }

    /// Analytic `∇_X V(x)` when available.
    pub fn analytic_derivative(&self, x: &[f64], dir: &[f64]) -> Option<Result<Vec<f64>>> {
        self.derivative.as_ref().map(|d| d(x, dir))
    }
}

/// The complex structure `J` on `R^{2m+2}`: `J e_{n+1} = e_1`, `J e_1 = −e_{n+1}`
/// and `J e_{2j} = e_{2j+1}`, `J e_{2j+1} = −e_{2j}` for `j = 1..m`
/// (basis vectors numbered from 1).
pub fn apply_j(x: &[f64]) -> Vec<f64> {
    let n1 = x.len();
    let mut h = vec![0.0; n1];
    h[0] = x[n1 - 1];
    h[n1 - 1] = -x[0];
    let mut i = 1;
    while i + 1 < n1 - 1 {
        h[i + 1] = x[i];
        h[i] = -x[i + 1];
        i += 2;
    }
    h
}

/// The matrix of [`apply_j`] on `R^{2m+2}`.
pub fn j_matrix(m: usize) -> Matrix {
    let n1 = 2 * m + 2;
    let cols: Vec<Vec<f64>> = (0..n1).map(|k| apply_j(&crate::vecops::unit(k, n1))).collect();
    Matrix::from_columns(&cols).expect("square")
}

/// Hopf field `H(x) = Jx` on `S^{2m+1}`, with `∇_X H = JX + ⟨X, H⟩ x`.
pub fn hopf_field(m: usize) -> Result<UnitField> {
    if m < 1 {
        return Err(Error::Argument("Hopf field needs m >= 1".into()));
    }
    let eval: Evaluator = Arc::new(|x: &[f64]| Ok(apply_j(x)));
    let deriv: Derivative = Arc::new(|x: &[f64], dir: &[f64]| {
        let h = apply_j(x);
        let c = dot(dir, &h);
        Ok(apply_j(dir).iter().zip(x).map(|(a, b)| a + c * b).collect())
    });
    Ok(UnitField::new(2 * m + 1, "hopf", eval, Some(deriv)))
}

/// The Hopf-type field `x ↦ Kx` for an orthogonal skew matrix `K`
/// (`K² = −I`), with `∇_X V = KX + ⟨X, Kx⟩ x`.
pub fn complex_structure_field(k: Matrix, name: &str) -> Result<UnitField> {
    if !k.is_square() || k.rows() % 2 != 0 || k.rows() < 4 {
        return Err(Error::Dimension("complex structure must be square of even size >= 4".into()));
    }
    let kk = k.matmul(&k)?;
    let n1 = k.rows();
    for i in 0..n1 {
        for j in 0..n1 {
            let target = if i == j { -1.0 } else { 0.0 };
            if (kk.get(i, j) - target).abs() > 1e-10 || (k.get(i, j) + k.get(j, i)).abs() > 1e-10 {
                return Err(Error::Argument("matrix is not an orthogonal complex structure".into()));
            }
        }
    }
    let k = Arc::new(k);
    let ke = Arc::clone(&k);
    let eval: Evaluator = Arc::new(move |x: &[f64]| ke.mul_vec(x));
    let deriv: Derivative = Arc::new(move |x: &[f64], dir: &[f64]| {
        let h = k.mul_vec(x)?;
        let c = dot(dir, &h);
        Ok(k.mul_vec(dir)?.iter().zip(x).map(|(a, b)| a + c * b).collect())
    });
    Ok(UnitField::new(n1 - 1, name, eval, Some(deriv)))
}

/// Hopf field conjugated by an orthogonal matrix `Q`: `x ↦ Q J Qᵀ x`.
pub fn rotated_hopf_field(m: usize, q: &Matrix) -> Result<UnitField> {
    let j = j_matrix(m);
    if q.rows() != j.rows() || !q.is_square() {
        return Err(Error::Dimension("rotation size must be 2m+2".into()));
    }
    let k = q.matmul(&j)?.matmul(&q.transpose())?;
    complex_structure_field(k, "rotated-hopf")
}

/// Radial field `R = ∇ dist(·, p)`, with `∇_X R = cot r (X − ⟨X, R⟩ R)`.
pub fn radial_field(p: &SpherePoint) -> UnitField {
    let pe = p.coords().to_vec();
    let pd = pe.clone();
    let eval: Evaluator = Arc::new(move |x: &[f64]| radial_gradient_coords(x, &pe));
    let deriv: Derivative = Arc::new(move |x: &[f64], dir: &[f64]| {
        let r = radial_gradient_coords(x, &pd)?;
        let c = dot(x, &pd).clamp(-1.0, 1.0);
        let cot = c / (1.0 - c * c).sqrt();
        let along = dot(dir, &r);
        Ok(dir.iter().zip(&r).map(|(a, b)| cot * (a - along * b)).collect())
    });
    UnitField::new(p.dim(), "radial", eval, Some(deriv))
}

/// Fixed smooth polynomial ambient field `P(x)_i = x_{i+1} x_{i+2}` (indices
/// mod `n+1`), with `|P(x)| ≤ 1` on the sphere.
pub fn polynomial_perturbation(x: &[f64]) -> Vec<f64> {
    let n1 = x.len();
    (0..n1).map(|i| x[(i + 1) % n1] * x[(i + 2) % n1]).collect()
}

/// Normalised tangent projection of `H + amplitude · P` for the Hopf field
/// `H` and [`polynomial_perturbation`] `P`.
///
/// For `amplitude < 1` the raw field has norm at least `1 − amplitude`.
pub fn perturbed_hopf_field(m: usize, amplitude: f64) -> Result<UnitField> {
    if !(0.0..1.0).contains(&amplitude) {
        return Err(Error::Argument(format!("amplitude {amplitude} outside [0, 1)")));
    }
    let raw = move |x: &[f64]| -> Vec<f64> {
        let h = apply_j(x);
        let p = polynomial_perturbation(x);
        h.iter().zip(&p).map(|(a, b)| a + amplitude * b).collect()
    };
    normalized_field(2 * m + 1, "perturbed-hopf", raw, 0.5 * (1.0 - amplitude))
}

/// Normalised tangent projection of a fixed ambient vector `w`.
pub fn constant_projection_field(w: Vec<f64>, floor: f64) -> Result<UnitField> {
    let n = w.len() - 1;
    normalized_field(n, "constant-projection", move |_: &[f64]| w.clone(), floor)
}

/// Tangent-projected, normalised version of an ambient field.
///
/// Evaluation fails with a nonvanishing violation when the tangent part of
/// `raw(x)` is shorter than `floor`. Derivatives are taken by finite
/// differences.
pub fn normalized_field<F>(n: usize, name: &str, raw: F, floor: f64) -> Result<UnitField>
where
    F: Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
{
    if !(floor > 0.0) {
        return Err(Error::Argument("normalisation floor must be positive".into()));
    }
    let eval: Evaluator = Arc::new(move |x: &[f64]| {
        let w = raw(x);
        if w.len() != x.len() {
            return Err(Error::Dimension("raw field length".into()));
        }
        let c = dot(&w, x);
        let t: Vec<f64> = w.iter().zip(x).map(|(a, b)| a - c * b).collect();
        let r = norm(&t);
        if !(r >= floor) {
            return Err(Error::NonvanishingViolation {
                quantity: "|raw tangent part|".into(),
                value: r,
                floor,
                location: x.to_vec(),
            });
        }
        Ok(t.into_iter().map(|a| a / r).collect())
    });
    Ok(UnitField::new(n, name, eval, None))
}

/// Normalised linear interpolation `((1−t)u + tv) / |(1−t)u + tv|`.
pub fn nlerp(u: &[f64], v: &[f64], t: f64) -> Result<Vec<f64>> {
    nlerp_with_chord(u, v, t).map(|(w, _)| w)
}

/// [`nlerp`] together with the chord norm `|(1−t)u + tv|`.
pub fn nlerp_with_chord(u: &[f64], v: &[f64], t: f64) -> Result<(Vec<f64>, f64)> {
    if u.len() != v.len() {
        return Err(Error::Dimension("nlerp operands".into()));
    }
    if t == 0.0 {
        return Ok((u.to_vec(), 1.0));
    }
    let n: Vec<f64> = u.iter().zip(v).map(|(a, b)| (1.0 - t) * a + t * b).collect();
    let r = norm(&n);
    if !(r > 1e-9) {
        return Err(Error::Antipodal(r));
    }
    Ok((n.into_iter().map(|a| a / r).collect(), r))
}

/// Central-difference `∇_X V(x)` along the great circle `cos t·x + sin t·X̂`.
///
/// The ambient difference quotient is corrected by `⟨X, V⟩ x` and projected
/// onto `T_x S^n`. Non-unit directions are handled by linearity.
pub fn covariant_derivative(f: &UnitField, x: &SpherePoint, dir: &TangentVector, step: f64) -> Result<TangentVector> {
    let v = fd_derivative(f, x.coords(), dir.ambient(), step)?;
    Ok(TangentVector::project(x.clone(), &v))
}

pub(crate) fn fd_derivative(f: &UnitField, x: &[f64], dir: &[f64], step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) {
        return Err(Error::Argument(format!("finite-difference step {step} must be positive")));
    }
    let len = norm(dir);
    if len == 0.0 {
        return Ok(vec![0.0; x.len()]);
    }
    let (s, c) = step.sin_cos();
    let xp: Vec<f64> = x.iter().zip(dir).map(|(a, b)| c * a + s * b / len).collect();
    let xm: Vec<f64> = x.iter().zip(dir).map(|(a, b)| c * a - s * b / len).collect();
    let vp = f.eval_coords(&xp)?;
    let vm = f.eval_coords(&xm)?;
    let v0 = f.eval_coords(x)?;
    let corr = dot(dir, &v0) / len;
    let mut out: Vec<f64> = vp.iter().zip(&vm).zip(x).map(|((a, b), xi)| (a - b) / (2.0 * step) + corr * xi).collect();
    let cx = dot(&out, x);
    for (o, xi) in out.iter_mut().zip(x) {
        *o = (*o - cx * xi) * len;
    }
    Ok(out)
}

/// `∇_X V(x)` from the analytic derivative when present, else by central differences.
pub fn derivative_or_fd(f: &UnitField, x: &[f64], dir: &[f64], step: f64) -> Result<Vec<f64>> {
    match f.analytic_derivative(x, dir) {
        Some(r) => r,
        None => fd_derivative(f, x, dir, step),
    }
}

/// Vertical derivative data `(b, M)` of a unit field in an adapted frame.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphBlocks {
    b: Vec<f64>,
    m: Matrix,
    frame: Vec<Vec<f64>>,
}

impl GraphBlocks {
    /// Blocks given directly, without an associated frame.
    pub fn from_parts(b: Vec<f64>, m: Matrix) -> Result<Self> {
        if !m.is_square() || m.rows() != b.len() {
            return Err(Error::Dimension("b must have length d and M be d×d".into()));
        }
        Ok(Self { b, m, frame: Vec::new() })
    }

    /// `b_β = ⟨∇_V V, e_β⟩`.
    pub fn b(&self) -> &[f64] {
        &self.b
    }

    /// `M_{βα} = ⟨∇_{e_α} V, e_β⟩`.
    pub fn m(&self) -> &Matrix {
        &self.m
    }

    /// Adapted frame `(e_0 = V, e_1, …, e_d)` in ambient coordinates; empty
    /// for blocks built by [`GraphBlocks::from_parts`].
    pub fn frame(&self) -> &[Vec<f64>] {
        &self.frame
    }

    /// Dimension `d`.
    pub fn d(&self) -> usize {
        self.b.len()
    }
}

/// Orthonormal frame `(V, e_1, …, e_d)` of `T_x S^n` from Gram–Schmidt on the
/// ambient axes after removing `x` and `V`.
pub fn adapted_frame(x: &[f64], v: &[f64]) -> Result<Vec<Vec<f64>>> {
    let rest = complete_basis_with_fallback(&[x, v], x.len())
        .ok_or_else(|| Error::Degenerate("adapted frame construction".into()))?;
    let mut frame = Vec::with_capacity(x.len() - 1);
    frame.push(v.to_vec());
    frame.extend(rest);
    Ok(frame)
}

/// Assembles `(b, M)` at `x` in the default adapted frame.
pub fn graph_blocks(f: &UnitField, x: &SpherePoint, step: f64) -> Result<GraphBlocks> {
    let v = f.eval_coords(x.coords())?;
    let frame = adapted_frame(x.coords(), &v)?;
    graph_blocks_in_frame(f, x.coords(), frame, step)
}

/// Assembles `(b, M)` in a caller-supplied adapted frame whose first vector is `V(x)`.
pub fn graph_blocks_in_frame(f: &UnitField, x: &[f64], frame: Vec<Vec<f64>>, step: f64) -> Result<GraphBlocks> {
    let d = frame.len() - 1;
    let derivs: Vec<Vec<f64>> =
        frame.iter().map(|e| derivative_or_fd(f, x, e, step)).collect::<Result<_>>()?;
    let b: Vec<f64> = (1..=d).map(|beta| dot(&derivs[0], &frame[beta])).collect();
    let mut m = Matrix::zeros(d, d);
    for alpha in 1..=d {
        for beta in 1..=d {
            m.set(beta - 1, alpha - 1, dot(&derivs[alpha], &frame[beta]));
        }
    }
    Ok(GraphBlocks { b, m, frame })
}
