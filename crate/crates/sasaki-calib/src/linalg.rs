//! Small dense real linear algebra.
//!
//! Everything here targets matrices of size at most 8 or so: determinants,
//! singular values, principal-minor sums, exterior-power norms and the exact
//! minor identities behind the graph-density estimates.

use num_integer::binomial;

use crate::{Error, Result};

/// Largest dimension accepted by the subset-enumeration routines.
pub const MAX_ENUM_DIM: usize = 8;

/// Dense real matrix stored in row-major order.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    /// Builds a matrix from row-major entries.
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::Dimension(format!("empty shape {rows}x{cols}")));
        }
        if data.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        if let Some(bad) = data.iter().find(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("matrix entry {bad}")));
        }
        Ok(Self { rows, cols, data })
    }

    /// Builds a matrix from a slice of equally long rows.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::Dimension("ragged rows".into()));
        }
        Self::new(r, c, rows.concat())
    }

    /// Builds a matrix whose columns are the given vectors.
    pub fn from_columns(cols: &[Vec<f64>]) -> Result<Self> {
        Ok(Self::from_rows(cols)?.transpose())
    }

    /// The zero matrix.
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![0.0; rows * cols] }
    }

    /// The identity matrix of size `n`.
    pub fn identity(n: usize) -> Self {
        Self::from_diag(&vec![1.0; n])
    }

    /// Square diagonal matrix with the given diagonal.
    pub fn from_diag(diag: &[f64]) -> Self {
        let n = diag.len();
        let mut m = Self::zeros(n, n);
        for (i, v) in diag.iter().enumerate() {
            m.set(i, i, *v);
        }
        m
    }

    /// Outer product `u ⊗ v`, the matrix with entries `u_i v_j`.
    pub fn outer(u: &[f64], v: &[f64]) -> Self {
        let data = u.iter().flat_map(|a| v.iter().map(move |b| a * b)).collect();
        Self { rows: u.len(), cols: v.len(), data }
    }

    /// Number of rows.
    pub fn rows(&self) -> usize {
        self.rows
    }

    /// Number of columns.
    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Row-major entries.
    pub fn data(&self) -> &[f64] {
        &self.data
    }

    /// Entry `(i, j)`.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    /// Overwrites entry `(i, j)`.
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    /// Whether the matrix is square.
    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    /// Column `j` as a vector.
    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    /// Row `i` as a vector.
    pub fn row(&self, i: usize) -> Vec<f64> {
        self.data[i * self.cols..(i + 1) * self.cols].to_vec()
    }

    /// The transpose.
    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j));
            }
        }
        t
    }

    /// Matrix product `self · other`.
    pub fn matmul(&self, other: &Matrix) -> Result<Matrix> {
        if self.cols != other.rows {
            return Err(Error::Dimension(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut p = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    p.data[i * other.cols + j] += a * other.get(k, j);
                }
            }
        }
        Ok(p)
    }

    /// Matrix-vector product.
    pub fn mul_vec(&self, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.cols {
            return Err(Error::Dimension(format!(
                "vector of length {} for {} columns",
                v.len(),
                self.cols
            )));
        }
        Ok((0..self.rows)
            .map(|i| (0..self.cols).map(|j| self.get(i, j) * v[j]).sum())
            .collect())
    }

    /// Entrywise sum.
    pub fn add(&self, other: &Matrix) -> Result<Matrix> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::Dimension("shape mismatch in sum".into()));
        }
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect();
        Ok(Self { rows: self.rows, cols: self.cols, data })
    }

    /// Scalar multiple.
    pub fn scaled(&self, s: f64) -> Matrix {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|v| s * v).collect() }
    }

    /// Submatrix on the given row and column index lists.
    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> Matrix {
        let data = rows.iter().flat_map(|&i| cols.iter().map(move |&j| self.get(i, j))).collect();
        Self { rows: rows.len(), cols: cols.len(), data }
    }

    /// Frobenius norm.
    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Trace of a square matrix.
    pub fn trace(&self) -> f64 {
        (0..self.rows.min(self.cols)).map(|i| self.get(i, i)).sum()
    }

    /// `I + selfᵀ · self`.
    pub fn gram_plus_identity(&self) -> Matrix {
        let mut g = self.transpose().matmul(self).expect("shapes agree");
        for i in 0..self.cols {
            g.data[i * self.cols + i] += 1.0;
        }
        g
    }
}

/// Singular values sorted in nonincreasing order.
#[derive(Debug, Clone, PartialEq)]
pub struct SingularSpectrum {
    values: Vec<f64>,
}

impl SingularSpectrum {
    /// The singular values, largest first.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Product of the `j` largest singular values.
    pub fn leading_product(&self, j: usize) -> f64 {
        self.values.iter().take(j).product()
    }
}

fn require_square(m: &Matrix, what: &str) -> Result<usize> {
    if !m.is_square() {
        return Err(Error::Dimension(format!(
            "{what} needs a square matrix, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    Ok(m.rows())
}

/// Determinant: closed forms up to size 3, LU with partial pivoting above.
pub fn det(m: &Matrix) -> Result<f64> {
    let n = require_square(m, "det")?;
    let a = |i, j| m.get(i, j);
    Ok(match n {
        1 => a(0, 0),
        2 => a(0, 0) * a(1, 1) - a(0, 1) * a(1, 0),
        3 => {
            a(0, 0) * (a(1, 1) * a(2, 2) - a(1, 2) * a(2, 1))
                - a(0, 1) * (a(1, 0) * a(2, 2) - a(1, 2) * a(2, 0))
                + a(0, 2) * (a(1, 0) * a(2, 1) - a(1, 1) * a(2, 0))
        }
        _ => lu_det(m.data.clone(), n),
    })
}

fn lu_det(mut a: Vec<f64>, n: usize) -> f64 {
    let mut sign = 1.0;
    for k in 0..n {
        let p = (k..n)
            .max_by(|&i, &j| a[i * n + k].abs().total_cmp(&a[j * n + k].abs()))
            .unwrap_or(k);
        if a[p * n + k] == 0.0 {
            return 0.0;
        }
        if p != k {
            for j in 0..n {
                a.swap(k * n + j, p * n + j);
            }
            sign = -sign;
        }
        let pivot = a[k * n + k];
        for i in k + 1..n {
            let f = a[i * n + k] / pivot;
            if f != 0.0 {
                for j in k + 1..n {
                    a[i * n + j] -= f * a[k * n + j];
                }
            }
        }
    }
    sign * (0..n).map(|i| a[i * n + i]).product::<f64>()
}

/// Solves `m · x = b` by LU with partial pivoting.
pub fn solve(m: &Matrix, b: &[f64]) -> Result<Vec<f64>> {
    let n = require_square(m, "solve")?;
    if b.len() != n {
        return Err(Error::Dimension("right-hand side length".into()));
    }
    let mut a = m.data.clone();
    let mut x = b.to_vec();
    for k in 0..n {
        let p = (k..n)
            .max_by(|&i, &j| a[i * n + k].abs().total_cmp(&a[j * n + k].abs()))
            .unwrap_or(k);
        if a[p * n + k] == 0.0 {
            return Err(Error::Degenerate("singular matrix in solve".into()));
        }
        if p != k {
            for j in 0..n {
                a.swap(k * n + j, p * n + j);
            }
            x.swap(k, p);
        }
        let pivot = a[k * n + k];
        for i in k + 1..n {
            let f = a[i * n + k] / pivot;
            if f != 0.0 {
                for j in k..n {
                    a[i * n + j] -= f * a[k * n + j];
                }
                x[i] -= f * x[k];
            }
        }
    }
    for k in (0..n).rev() {
        let s: f64 = (k + 1..n).map(|j| a[k * n + j] * x[j]).sum();
        x[k] = (x[k] - s) / a[k * n + k];
    }
    Ok(x)
}

/// Singular values by one-sided (Hestenes) Jacobi rotations.
///
/// The columns of the working copy are rotated pairwise until mutually
/// orthogonal; their norms are then the singular values. Wide inputs are
/// transposed first so the spectrum has `min(rows, cols)` entries.
pub fn singular_values(m: &Matrix) -> Result<SingularSpectrum> {
    let a = if m.cols() > m.rows() { m.transpose() } else { m.clone() };
    let (rows, cols) = (a.rows(), a.cols());
    let mut c: Vec<Vec<f64>> = (0..cols).map(|j| a.column(j)).collect();
    for _sweep in 0..100 {
        let mut rotated = false;
        for p in 0..cols {
            for q in p + 1..cols {
                let alpha: f64 = c[p].iter().map(|v| v * v).sum();
                let beta: f64 = c[q].iter().map(|v| v * v).sum();
                let gamma: f64 = c[p].iter().zip(&c[q]).map(|(x, y)| x * y).sum();
                if gamma.abs() <= 1e-15 * (alpha * beta).sqrt() || gamma == 0.0 {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let t = if zeta == 0.0 { 1.0 } else { t };
                let cs = 1.0 / (1.0 + t * t).sqrt();
                let sn = cs * t;
                for i in 0..rows {
                    let (x, y) = (c[p][i], c[q][i]);
                    c[p][i] = cs * x - sn * y;
                    c[q][i] = sn * x + cs * y;
                }
            }
        }
        if !rotated {
            let mut values: Vec<f64> =
                c.iter().map(|col| col.iter().map(|v| v * v).sum::<f64>().sqrt()).collect();
            values.sort_by(|a, b| b.total_cmp(a));
            return Ok(SingularSpectrum { values });
        }
    }
    Err(Error::Tolerance("Jacobi SVD did not converge in 100 sweeps".into()))
}

/// Operator norm of `Λ^j m`, the product of the `j` largest singular values.
pub fn exterior_power_norm(m: &Matrix, j: usize) -> Result<f64> {
    let max = m.rows().min(m.cols());
    if j == 0 || j > max {
        return Err(Error::Argument(format!("exterior power {j} outside 1..={max}")));
    }
    Ok(singular_values(m)?.leading_product(j))
}

/// Index subsets of `0..n` with exactly `k` elements, as sorted lists.
pub fn subsets(n: usize, k: usize) -> impl Iterator<Item = Vec<usize>> {
    (0u32..(1u32 << n))
        .filter(move |mask| mask.count_ones() as usize == k)
        .map(move |mask| (0..n).filter(|i| mask & (1 << i) != 0).collect())
}

/// Sum of all principal `k×k` minors, `σ_k(m)`, with `σ_0 = 1`.
pub fn sigma_minors(m: &Matrix, k: usize) -> Result<f64> {
    let d = require_square(m, "sigma_minors")?;
    if d > MAX_ENUM_DIM {
        return Err(Error::Argument(format!("principal-minor enumeration limited to d <= {MAX_ENUM_DIM}")));
    }
    if k > d {
        return Err(Error::Argument(format!("minor order {k} exceeds dimension {d}")));
    }
    if k == 0 {
        return Ok(1.0);
    }
    let mut total = 0.0;
    for idx in subsets(d, k) {
        total += det(&m.submatrix(&idx, &idx))?;
    }
    Ok(total)
}

/// `det(I + mᵀ m)` evaluated directly.
pub fn gram_det(m: &Matrix) -> f64 {
    det(&m.gram_plus_identity()).expect("square by construction")
}

/// Sum of squares of all `k×k` minors of `m` over every `k`, including the
/// empty minor. Equals [`gram_det`] by the Cauchy–Binet formula.
pub fn minor_square_sum(m: &Matrix) -> Result<f64> {
    if m.rows() > MAX_ENUM_DIM || m.cols() > MAX_ENUM_DIM {
        return Err(Error::Argument(format!("minor enumeration limited to {MAX_ENUM_DIM}")));
    }
    let mut total = 1.0;
    for k in 1..=m.rows().min(m.cols()) {
        let col_sets: Vec<Vec<usize>> = subsets(m.cols(), k).collect();
        for rows in subsets(m.rows(), k) {
            for cols in &col_sets {
                let v = det(&m.submatrix(&rows, cols))?;
                total += v * v;
            }
        }
    }
    Ok(total)
}

/// The weights `C_{2j} = C(m,j) / C(2m,2j)` as floating-point numbers.
pub(crate) fn phi_weights(m: usize) -> Vec<f64> {
    (0..=m)
        .map(|j| binomial(m as u64, j as u64) as f64 / binomial(2 * m as u64, 2 * j as u64) as f64)
        .collect()
}

/// `Φ_d(M) = Σ_j C_{2j} σ_{2j}(M)` for square `M` of even size.
pub(crate) fn phi_value(m: &Matrix) -> Result<f64> {
    let d = require_square(m, "phi")?;
    if d % 2 != 0 {
        return Err(Error::Domain(format!("Φ_d needs even d, got {d}")));
    }
    let w = phi_weights(d / 2);
    let mut total = 0.0;
    for (j, wj) in w.iter().enumerate() {
        total += wj * sigma_minors(m, 2 * j)?;
    }
    Ok(total)
}

/// Compares `det(I + M₀ᵀM₀) − Φ_d(M₀)²` with `(1+λ²)^{d−2}|u|²` for the
/// rank-one perturbation `M₀ = λ I + u ⊗ ξ` of a scalar matrix.
///
/// Returns `(deficit, predicted)`; the caller decides how closely they must
/// agree.
pub fn rank_one_deficit(lambda: f64, u: &[f64], xi: &[f64], d: usize) -> Result<(f64, f64)> {
    if d < 4 || d % 2 != 0 {
        return Err(Error::Argument(format!("d must be even and at least 4, got {d}")));
    }
    if u.len() != d || xi.len() != d {
        return Err(Error::Dimension("u and ξ must have length d".into()));
    }
    let xi_norm = xi.iter().map(|v| v * v).sum::<f64>().sqrt();
    if (xi_norm - 1.0).abs() > 1e-12 {
        return Err(Error::Argument(format!("|ξ| = {xi_norm} is not 1")));
    }
    let m0 = Matrix::identity(d).scaled(lambda).add(&Matrix::outer(u, xi))?;
    let phi = phi_value(&m0)?;
    let deficit = gram_det(&m0) - phi * phi;
    let u2: f64 = u.iter().map(|v| v * v).sum();
    let predicted = (1.0 + lambda * lambda).powi(d as i32 - 2) * u2;
    Ok((deficit, predicted))
}

/// Unit eigenvector for the larger eigenvalue of `[[a, c], [c, d]]`.
///
/// Uses `θ = atan2(2c, a − d) / 2`, so the returned vector has a nonnegative
/// first component. Fails when the eigenvalues coincide.
pub fn principal_direction_2x2(a: f64, c: f64, d: f64) -> Result<([f64; 2], f64)> {
    let x = a - d;
    let y = 2.0 * c;
    let disc = x * x + y * y;
    if disc == 0.0 {
        return Err(Error::Degenerate("repeated eigenvalue in 2x2 principal direction".into()));
    }
    let theta = y.atan2(x) / 2.0;
    Ok(([theta.cos(), theta.sin()], (a + d + disc.sqrt()) / 2.0))
}

/// Outcome of a rank-one or rank-two minor bound check.
#[derive(Debug, Clone, PartialEq)]
pub struct MinorBoundReport {
    /// `√det(I + MᵀM)` for the perturbed matrix.
    pub density: f64,
    /// Right-hand side of the bound with the concrete constant applied.
    pub bound: f64,
    /// The concrete constant `C_d`.
    pub constant: f64,
}

impl MinorBoundReport {
    /// Whether the density respects the bound.
    pub fn holds(&self) -> bool {
        self.density <= self.bound
    }
}

/// Concrete constant for the Hadamard-based minor bounds of a `rows × cols`
/// matrix `B + u⊗ξ (+ v⊗η)` whose `B` entries are bounded by `K ≥ 1`.
///
/// Each `k×k` minor is at most `A_k (1 + K^d + (|u|+|v|)K^{d−1} + |u||v|K^{d−2})`
/// with `A_k = max((√k)^k, k(√k)^{k−1}, k(k−1)(√k)^{k−2})`, and there are
/// `C(rows,k)·C(cols,k)` minors of order `k`.
pub fn minor_bound_constant(rows: usize, cols: usize, rank_two: bool) -> f64 {
    let mut sum = 0.0;
    for k in 0..=rows.min(cols) {
        let kf = k as f64;
        let sk = kf.sqrt();
        let mut a = if k == 0 { 1.0 } else { sk.powi(k as i32) };
        if k >= 1 {
            a = a.max(kf * sk.powi(k as i32 - 1));
        }
        if rank_two && k >= 2 {
            a = a.max(kf * (kf - 1.0) * sk.powi(k as i32 - 2));
        }
        let count = binomial(rows as u64, k as u64) as f64 * binomial(cols as u64, k as u64) as f64;
        sum += count * a * a;
    }
    sum.sqrt()
}

/// Checks the minor bound for `M = B + u⊗ξ` (and `+ v⊗η` when given).
///
/// `B` is `d × d` or `d × (d+1)` with entries bounded by `bound_k ≥ 1`;
/// `ξ` and `η` are unit vectors of length `cols`, `u` and `v` of length `rows`.
pub fn minor_bound_checks(
    b: &Matrix,
    u: &[f64],
    xi: &[f64],
    second: Option<(&[f64], &[f64])>,
    bound_k: f64,
) -> Result<MinorBoundReport> {
    if bound_k < 1.0 {
        return Err(Error::Argument("entry bound K must be at least 1".into()));
    }
    if b.data().iter().any(|v| v.abs() > bound_k) {
        return Err(Error::Argument("an entry of B exceeds K".into()));
    }
    if u.len() != b.rows() || xi.len() != b.cols() {
        return Err(Error::Dimension("perturbation shapes".into()));
    }
    let mut m = b.add(&Matrix::outer(u, xi))?;
    let nu = u.iter().map(|x| x * x).sum::<f64>().sqrt();
    let mut nv = 0.0;
    if let Some((v, eta)) = second {
        if v.len() != b.rows() || eta.len() != b.cols() {
            return Err(Error::Dimension("second perturbation shapes".into()));
        }
        m = m.add(&Matrix::outer(v, eta))?;
        nv = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    }
    let d = b.rows() as i32;
    let k = bound_k;
    let constant = minor_bound_constant(b.rows(), b.cols(), second.is_some());
    let shape = 1.0 + k.powi(d) + (nu + nv) * k.powi(d - 1) + nu * nv * k.powi(d - 2) + nu + nv + nu * nv;
    Ok(MinorBoundReport { density: gram_det(&m).sqrt(), bound: constant * shape, constant })
}
