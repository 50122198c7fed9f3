//! Ambient vector helpers on plain slices.

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

#[cfg(test)]
pub(crate) fn scale(s: f64, a: &[f64]) -> Vec<f64> {
    a.iter().map(|x| s * x).collect()
}

pub(crate) fn unit(k: usize, dim: usize) -> Vec<f64> {
    let mut e = vec![0.0; dim];
    e[k] = 1.0;
    e
}

/// Orthonormal basis of the complement of the orthonormal set `fixed` in
/// `R^dim`, by Gram–Schmidt on ambient axes in the order given by `order`.
///
/// Axes whose residual falls below `1e-3` are skipped. Returns `None` when
/// fewer than `dim − fixed.len()` axes survive.
pub(crate) fn complete_basis(fixed: &[&[f64]], dim: usize, order: &[usize]) -> Option<Vec<Vec<f64>>> {
    let need = dim - fixed.len();
    let mut out: Vec<Vec<f64>> = Vec::with_capacity(need);
    for &k in order {
        if out.len() == need {
            break;
        }
        let mut v = unit(k, dim);
        for _ in 0..2 {
            for f in fixed.iter().copied().chain(out.iter().map(|o| o.as_slice())) {
                let c = dot(&v, f);
                for (a, b) in v.iter_mut().zip(f) {
                    *a -= c * b;
                }
            }
        }
        let r = norm(&v);
        if r > 1e-3 {
            out.push(v.into_iter().map(|a| a / r).collect());
        }
    }
    (out.len() == need).then_some(out)
}

/// [`complete_basis`] with the natural axis order, falling back to an order
/// that tries axes by decreasing residual against `fixed`.
pub(crate) fn complete_basis_with_fallback(fixed: &[&[f64]], dim: usize) -> Option<Vec<Vec<f64>>> {
    let forward: Vec<usize> = (0..dim).collect();
    complete_basis(fixed, dim, &forward).or_else(|| {
        let residual = |k: usize| 1.0 - fixed.iter().map(|f| f[k] * f[k]).sum::<f64>();
        let mut order = forward.clone();
        order.sort_by(|a, b| residual(*b).total_cmp(&residual(*a)));
        complete_basis(fixed, dim, &order)
    })
}
