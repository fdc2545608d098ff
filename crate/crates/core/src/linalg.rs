//! Dense slice helpers shared by the modules. Everything is ambient `R^{n+1}`.

#[inline]
pub fn dot(x: &[f64], y: &[f64]) -> f64 {
    debug_assert_eq!(x.len(), y.len());
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

#[inline]
pub fn norm(x: &[f64]) -> f64 {
    dot(x, x).sqrt()
}

/// Lorentzian form `x^T J y` with `J = diag(1, ..., 1, -1)`; no length check.
#[inline]
pub fn minkowski(x: &[f64], y: &[f64]) -> f64 {
    debug_assert_eq!(x.len(), y.len());
    let last = x.len() - 1;
    dot(&x[..last], &y[..last]) - x[last] * y[last]
}

/// `J x`: flip the sign of the last coordinate.
pub fn flip_time(x: &[f64]) -> Vec<f64> {
    let mut out = x.to_vec();
    if let Some(t) = out.last_mut() {
        *t = -*t;
    }
    out
}

pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

pub fn scaled(alpha: f64, x: &[f64]) -> Vec<f64> {
    x.iter().map(|v| alpha * v).collect()
}

pub fn sub(x: &[f64], y: &[f64]) -> Vec<f64> {
    x.iter().zip(y).map(|(a, b)| a - b).collect()
}

pub fn dist(x: &[f64], y: &[f64]) -> f64 {
    x.iter()
        .zip(y)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt()
}

/// Euclidean norm of the spatial block `(x_1, ..., x_n)`.
pub fn spatial_norm(x: &[f64]) -> f64 {
    norm(&x[..x.len() - 1])
}

pub fn e_last(dim: usize) -> Vec<f64> {
    let mut e = vec![0.0; dim];
    e[dim - 1] = 1.0;
    e
}
