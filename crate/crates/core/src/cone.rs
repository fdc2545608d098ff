//! Euclidean projections onto the closed convex cones used by the
//! projection formulas: the nonnegative orthant, α-circular cones (α = 1 is
//! the Lorentz cone `L`), simplicial cones, and the half-space cone
//! `{a^T x >= 0} ∩ L`.
//!
//! [`ConeKind::LorentzCut`] is the intersection `K ∩ L` for a cone of the form
//! `K = K' × R_+`. Its projection reduces to two easy ones,
//! `Π_{K∩L}(x) = Π_L(Π_{K'}(x̄), x_{n+1})`, which is what the Lorentz-projection
//! solver needs for the orthant and simplicial caps.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::{axpy, dot, minkowski, norm, scaled, spatial_norm};

/// Face enumeration is exact but exponential; past this many generators the
/// simplicial projection switches to an active-set NNLS.
pub const FACE_ENUMERATION_MAX: usize = 16;

#[derive(Debug, Clone, PartialEq)]
pub struct ConeSpec {
    dim: usize,
    kind: ConeKind,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ConeKind {
    NonnegOrthant,
    /// `{x : x_{n+1} >= α ‖x̄‖}`.
    Circular { alpha: f64 },
    Simplicial(SimplicialCone),
    /// `{x ∈ L : a^T x >= 0}`.
    HalfSpace { a: Vec<f64> },
    /// `inner ∩ L`, where `inner` is a product `K' × R_+`.
    LorentzCut(Box<ConeSpec>),
}

/// Cone generated by linearly independent vectors. Generators are stored
/// normalised to unit length; the cone is unchanged.
#[derive(Debug, Clone, PartialEq)]
pub struct SimplicialCone {
    gens: Vec<Vec<f64>>,
    gram: DMatrix<f64>,
}

impl SimplicialCone {
    pub fn generators(&self) -> &[Vec<f64>] {
        &self.gens
    }

    fn len(&self) -> usize {
        self.gens.len()
    }

    /// Solves the normal equations restricted to the generators in `idx`.
    fn solve_subset(&self, idx: &[usize], rhs: &[f64]) -> Option<Vec<f64>> {
        let k = idx.len();
        let g = DMatrix::from_fn(k, k, |i, j| self.gram[(idx[i], idx[j])]);
        let b = DVector::from_iterator(k, idx.iter().map(|&i| rhs[i]));
        let sol = g.cholesky()?.solve(&b);
        Some(sol.iter().copied().collect())
    }

    fn combine(&self, idx: &[usize], coef: &[f64], dim: usize) -> Vec<f64> {
        let mut y = vec![0.0; dim];
        for (&i, &c) in idx.iter().zip(coef) {
            axpy(c, &self.gens[i], &mut y);
        }
        y
    }

    /// Exact projection by trying every face until the KKT conditions hold.
    fn project_faces(&self, x: &[f64]) -> Option<Vec<f64>> {
        let k = self.len();
        let vtx: Vec<f64> = self.gens.iter().map(|g| dot(g, x)).collect();
        let tol = 1e-12 * norm(x).max(f64::MIN_POSITIVE);
        let mut idx = Vec::with_capacity(k);
        for mask in 0u32..(1u32 << k) {
            idx.clear();
            idx.extend((0..k).filter(|i| mask & (1 << i) != 0));
            let coef = if idx.is_empty() {
                Vec::new()
            } else {
                match self.solve_subset(&idx, &vtx) {
                    Some(c) => c,
                    None => continue,
                }
            };
            if coef.iter().any(|&c| c < -tol) {
                continue;
            }
            let y = self.combine(&idx, &coef, x.len());
            let r: Vec<f64> = x.iter().zip(&y).map(|(a, b)| a - b).collect();
            let dual_ok = (0..k)
                .filter(|i| mask & (1 << i) == 0)
                .all(|i| dot(&self.gens[i], &r) <= tol);
            if dual_ok {
                let clipped: Vec<f64> = coef.iter().map(|c| c.max(0.0)).collect();
                return Some(self.combine(&idx, &clipped, x.len()));
            }
        }
        None
    }

    /// Lawson-Hanson active-set NNLS for `min ‖V λ - x‖, λ >= 0`.
    fn project_nnls(&self, x: &[f64]) -> Vec<f64> {
        let k = self.len();
        let vtx: Vec<f64> = self.gens.iter().map(|g| dot(g, x)).collect();
        let tol = 1e-13 * norm(x).max(f64::MIN_POSITIVE);
        let mut lambda = vec![0.0; k];
        let mut passive = vec![false; k];

        let dual = |lambda: &[f64]| -> Vec<f64> {
            (0..k)
                .map(|j| vtx[j] - (0..k).map(|i| self.gram[(j, i)] * lambda[i]).sum::<f64>())
                .collect()
        };

        for _ in 0..(3 * k + 10) {
            let w = dual(&lambda);
            let cand = (0..k)
                .filter(|&j| !passive[j] && w[j] > tol)
                .max_by(|&a, &b| w[a].total_cmp(&w[b]));
            let Some(j) = cand else { break };
            passive[j] = true;
            loop {
                let idx: Vec<usize> = (0..k).filter(|&i| passive[i]).collect();
                let s = match self.solve_subset(&idx, &vtx) {
                    Some(s) => s,
                    None => break,
                };
                if s.iter().all(|&v| v > 0.0) {
                    for (&i, &v) in idx.iter().zip(&s) {
                        lambda[i] = v;
                    }
                    break;
                }
                let mut step = 1.0_f64;
                for (&i, &v) in idx.iter().zip(&s) {
                    if v <= 0.0 {
                        let denom = lambda[i] - v;
                        if denom > 0.0 {
                            step = step.min(lambda[i] / denom);
                        }
                    }
                }
                for (&i, &v) in idx.iter().zip(&s) {
                    lambda[i] += step * (v - lambda[i]);
                    if lambda[i] <= 1e-15 * norm(x) {
                        lambda[i] = 0.0;
                        passive[i] = false;
                    }
                }
                if idx.iter().all(|&i| !passive[i]) {
                    break;
                }
            }
        }
        let idx: Vec<usize> = (0..k).collect();
        self.combine(&idx, &lambda, x.len())
    }

    fn project(&self, x: &[f64]) -> Vec<f64> {
        if self.len() <= FACE_ENUMERATION_MAX {
            if let Some(y) = self.project_faces(x) {
                return y;
            }
        }
        self.project_nnls(x)
    }
}

impl ConeSpec {
    pub fn nonneg_orthant(dim: usize) -> Result<Self> {
        check_dim(dim)?;
        Ok(Self {
            dim,
            kind: ConeKind::NonnegOrthant,
        })
    }

    pub fn circular(dim: usize, alpha: f64) -> Result<Self> {
        check_dim(dim)?;
        if !(alpha >= 1.0 && alpha.is_finite()) {
            return Err(Error::arg(format!("circular cone needs alpha >= 1, got {alpha}")));
        }
        Ok(Self {
            dim,
            kind: ConeKind::Circular { alpha },
        })
    }

    /// The Lorentz cone `L`.
    pub fn lorentz(dim: usize) -> Result<Self> {
        Self::circular(dim, 1.0)
    }

    pub fn simplicial(generators: Vec<Vec<f64>>) -> Result<Self> {
        let dim = generators.first().map(|g| g.len()).unwrap_or(0);
        check_dim(dim)?;
        if generators.len() > dim {
            return Err(Error::arg("a simplicial cone has at most dim generators"));
        }
        let mut gens = Vec::with_capacity(generators.len());
        for g in generators {
            if g.len() != dim {
                return Err(Error::arg("generators must share one length"));
            }
            let n = norm(&g);
            if !(n > 0.0 && n.is_finite()) {
                return Err(Error::arg("generators must be finite and nonzero"));
            }
            gens.push(scaled(1.0 / n, &g));
        }
        let k = gens.len();
        let gram = DMatrix::from_fn(k, k, |i, j| dot(&gens[i], &gens[j]));
        let sv = gram.clone().symmetric_eigenvalues();
        let min_ev = sv.iter().copied().fold(f64::INFINITY, f64::min);
        if !(min_ev > 1e-12) {
            return Err(Error::arg("simplicial generators are not linearly independent"));
        }
        Ok(Self {
            dim,
            kind: ConeKind::Simplicial(SimplicialCone { gens, gram }),
        })
    }

    /// `{a^T x >= 0} ∩ L`. The normal must be space-like, `<a,a> > 0`, for the
    /// cone to have interior points on both sides of the hyperplane.
    pub fn half_space(a: Vec<f64>) -> Result<Self> {
        check_dim(a.len())?;
        if !a.iter().all(|v| v.is_finite()) {
            return Err(Error::arg("half-space normal must be finite"));
        }
        let q = minkowski(&a, &a);
        if !(q > 1e-12 * dot(&a, &a)) {
            return Err(Error::arg(format!(
                "half-space normal must satisfy <a,a> > 0, got {q:e}"
            )));
        }
        Ok(Self {
            dim: a.len(),
            kind: ConeKind::HalfSpace { a },
        })
    }

    /// `inner ∩ L` for `inner = K' × R_+`: the orthant, or a simplicial cone
    /// whose generators are `e^{n+1}` plus vectors with zero last coordinate.
    pub fn lorentz_cut(inner: ConeSpec) -> Result<Self> {
        let ok = match &inner.kind {
            ConeKind::NonnegOrthant => true,
            ConeKind::Simplicial(s) => has_product_structure(s),
            _ => false,
        };
        if !ok {
            return Err(Error::arg(
                "Lorentz cut needs the orthant or a simplicial cone of the form K' x R_+",
            ));
        }
        Ok(Self {
            dim: inner.dim,
            kind: ConeKind::LorentzCut(Box::new(inner)),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> &ConeKind {
        &self.kind
    }

    /// Membership with a tolerance relative to `‖x‖`.
    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        if x.len() != self.dim {
            return false;
        }
        let scale = norm(x);
        let t = tol * scale.max(f64::MIN_POSITIVE);
        let last = self.dim - 1;
        match &self.kind {
            ConeKind::NonnegOrthant => x.iter().all(|&v| v >= -t),
            ConeKind::Circular { alpha } => x[last] >= alpha * spatial_norm(x) - t,
            ConeKind::Simplicial(s) => crate::linalg::dist(&s.project(x), x) <= t,
            ConeKind::HalfSpace { a } => {
                dot(a, x) >= -t * norm(a) && x[last] >= spatial_norm(x) - t
            }
            ConeKind::LorentzCut(inner) => {
                let mut z = x.to_vec();
                z[last] = 0.0;
                inner.contains_abs(&z, t) && x[last] >= spatial_norm(x) - t
            }
        }
    }

    fn contains_abs(&self, x: &[f64], t: f64) -> bool {
        let n = norm(x);
        if n == 0.0 {
            return true;
        }
        self.contains(x, t / n)
    }

    /// `Π_K(x)`, the nearest point of the closed cone in Euclidean distance.
    pub fn project(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.dim {
            return Err(Error::arg(format!(
                "expected a vector of length {}, got {}",
                self.dim,
                x.len()
            )));
        }
        if !x.iter().all(|v| v.is_finite()) {
            return Err(Error::arg("cannot project a non-finite vector"));
        }
        Ok(self.project_unchecked(x))
    }

    pub(crate) fn project_unchecked(&self, x: &[f64]) -> Vec<f64> {
        match &self.kind {
            ConeKind::NonnegOrthant => x.iter().map(|v| v.max(0.0)).collect(),
            ConeKind::Circular { alpha } => project_circular(*alpha, x),
            ConeKind::Simplicial(s) => s.project(x),
            ConeKind::HalfSpace { a } => project_half_space(a, x),
            ConeKind::LorentzCut(inner) => {
                let last = self.dim - 1;
                let mut z = x.to_vec();
                z[last] = 0.0;
                let mut y = inner.project_unchecked(&z);
                y[last] = x[last];
                project_circular(1.0, &y)
            }
        }
    }

    /// How far `x` sits inside the cone, measured by the tightest defining
    /// inequality: positive in the interior, zero on the boundary, negative
    /// outside. Not a true Euclidean distance for every kind.
    pub fn boundary_gap(&self, x: &[f64]) -> f64 {
        let last = self.dim - 1;
        let lorentz_gap = |x: &[f64]| (x[last] - spatial_norm(x)) / std::f64::consts::SQRT_2;
        match &self.kind {
            ConeKind::NonnegOrthant => x.iter().copied().fold(f64::INFINITY, f64::min),
            ConeKind::Circular { alpha } => (x[last] - alpha * spatial_norm(x)) / (1.0 + alpha * alpha).sqrt(),
            ConeKind::Simplicial(s) => {
                let idx: Vec<usize> = (0..s.len()).collect();
                let rhs: Vec<f64> = s.gens.iter().map(|g| dot(g, x)).collect();
                let coef = s.solve_subset(&idx, &rhs).unwrap_or_default();
                let off_span = crate::linalg::dist(&s.combine(&idx, &coef, x.len()), x);
                coef.iter().copied().fold(f64::INFINITY, f64::min) - off_span
            }
            ConeKind::HalfSpace { a } => (dot(a, x) / norm(a)).min(lorentz_gap(x)),
            ConeKind::LorentzCut(inner) => {
                let mut z = x.to_vec();
                z[last] = 0.0;
                let inner_gap = match inner.kind() {
                    ConeKind::NonnegOrthant => z[..last].iter().copied().fold(f64::INFINITY, f64::min),
                    _ => {
                        // The vertical generator is slack at height zero.
                        z[last] = 1.0;
                        inner.boundary_gap(&z)
                    }
                };
                inner_gap.min(lorentz_gap(x))
            }
        }
    }

    /// A unit vector in the interior of the cone.
    pub fn interior_direction(&self) -> Vec<f64> {
        let last = self.dim - 1;
        let v = match &self.kind {
            ConeKind::NonnegOrthant => vec![1.0; self.dim],
            ConeKind::Circular { .. } => crate::linalg::e_last(self.dim),
            ConeKind::Simplicial(s) => {
                let mut v = vec![0.0; self.dim];
                for g in &s.gens {
                    axpy(1.0, g, &mut v);
                }
                v
            }
            ConeKind::HalfSpace { a } => {
                let mut c = crate::linalg::e_last(self.dim);
                let an = spatial_norm(a);
                if a[last] <= 0.0 {
                    let s = 0.5 * (a[last].abs() / an + 1.0);
                    for i in 0..last {
                        c[i] = s * a[i] / an;
                    }
                }
                c
            }
            ConeKind::LorentzCut(inner) => {
                let mut c = inner.interior_direction();
                c[last] = 0.0;
                let n = norm(&c);
                let mut v = scaled(0.5 / n, &c);
                v[last] = 1.0;
                v
            }
        };
        let n = norm(&v);
        scaled(1.0 / n, &v)
    }

    /// Vectors spanning the extreme rays of the cone, where there are finitely
    /// many corners in low dimension. Used by the brute-force oracle.
    fn corner_rays(&self) -> Vec<Vec<f64>> {
        let last = self.dim - 1;
        match &self.kind {
            ConeKind::NonnegOrthant => (0..self.dim).map(|i| unit_vec(self.dim, i)).collect(),
            ConeKind::Circular { .. } => Vec::new(),
            ConeKind::Simplicial(s) => s.gens.clone(),
            ConeKind::HalfSpace { a } => {
                if self.dim == 3 {
                    let (b1, b2) = orthonormal_complement_3(a);
                    null_directions(&b1, &b2)
                } else {
                    Vec::new()
                }
            }
            ConeKind::LorentzCut(inner) => {
                let mut out = vec![crate::linalg::e_last(self.dim)];
                for r in inner.corner_rays() {
                    let s = spatial_norm(&r);
                    if s > 0.0 {
                        let mut v = scaled(1.0 / s, &r);
                        v[last] = 1.0;
                        out.push(v);
                    }
                }
                out
            }
        }
    }

    /// Draws `count` points of the cone, including its generators or corner
    /// rays and points on its boundary. Used to certify projection
    /// inequalities that quantify over the whole cone.
    pub fn sample(&self, count: usize, seed: u64) -> Vec<Vec<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let dim = self.dim;
        let last = dim - 1;
        let mut out: Vec<Vec<f64>> = Vec::with_capacity(count);
        if dim <= 3 {
            out.extend(self.corner_rays());
        }
        if let ConeKind::Simplicial(s) = &self.kind {
            out.extend(s.gens.iter().cloned());
        }
        let normal = |rng: &mut ChaCha8Rng| -> Vec<f64> { (0..dim).map(|_| rng.sample(StandardNormal)).collect() };
        while out.len() < count {
            let i = out.len();
            let v = match &self.kind {
                ConeKind::NonnegOrthant => {
                    let mut v: Vec<f64> = normal(&mut rng).iter().map(|x| x.abs()).collect();
                    if i.is_multiple_of(2) {
                        let k = rng.random_range(0..dim);
                        v[k] = 0.0;
                    }
                    v
                }
                ConeKind::Circular { alpha } => {
                    let v = normal(&mut rng);
                    let s = spatial_norm(&v).max(f64::MIN_POSITIVE);
                    let mut w = scaled(1.0 / s, &v);
                    w[last] = if i.is_multiple_of(2) { *alpha } else { alpha * (1.0 + v[last].abs()) };
                    w
                }
                ConeKind::Simplicial(s) => {
                    let mut v = vec![0.0; dim];
                    for g in &s.gens {
                        let c: f64 = if rng.random_bool(0.3) { 0.0 } else { rng.random::<f64>() };
                        axpy(c, g, &mut v);
                    }
                    v
                }
                ConeKind::HalfSpace { a } => {
                    let v = sample_lorentz(&mut rng, dim, i.is_multiple_of(3));
                    let aa = minkowski(a, a);
                    let av = dot(a, &v);
                    let ja = crate::linalg::flip_time(a);
                    if i % 3 == 1 {
                        // Slide onto the boundary hyperplane; stays in L.
                        let mut w = v.clone();
                        axpy(-av / aa, &ja, &mut w);
                        w
                    } else if av < 0.0 {
                        // Lorentz reflection swaps the two sides and preserves L.
                        let mut w = v.clone();
                        axpy(-2.0 * av / aa, &ja, &mut w);
                        w
                    } else {
                        v
                    }
                }
                ConeKind::LorentzCut(inner) => {
                    // Skip past the corner rays at the front of the pool.
                    let pool = inner.sample(2 * dim + 4, rng.random());
                    let mut v = pool[pool.len() - 1].clone();
                    v[last] = 0.0;
                    let s = norm(&v);
                    v[last] = if i.is_multiple_of(2) { s } else { s * (1.0 + rng.random::<f64>()) + 1e-3 };
                    v
                }
            };
            if norm(&v) > 0.0 {
                out.push(v);
            }
        }
        out
    }
}

fn check_dim(dim: usize) -> Result<()> {
    if dim < 2 {
        return Err(Error::arg("cones live in R^{n+1} with n >= 1"));
    }
    Ok(())
}

fn unit_vec(dim: usize, i: usize) -> Vec<f64> {
    let mut e = vec![0.0; dim];
    e[i] = 1.0;
    e
}

fn has_product_structure(s: &SimplicialCone) -> bool {
    let last = s.gens.first().map(|g| g.len() - 1).unwrap_or(0);
    let mut vertical = 0;
    for g in &s.gens {
        let sp = spatial_norm(g);
        if sp <= 1e-14 && g[last] > 0.0 {
            vertical += 1;
        } else if g[last].abs() > 1e-14 {
            return false;
        }
    }
    vertical == 1
}

/// Random point of `L`; on its boundary when `boundary` is set.
fn sample_lorentz(rng: &mut ChaCha8Rng, dim: usize, boundary: bool) -> Vec<f64> {
    let mut v: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
    let s = spatial_norm(&v);
    let last = dim - 1;
    v[last] = if boundary { s } else { s * (1.0 + rng.random::<f64>()) + 1e-3 };
    v
}

/// Projection onto `L_α`: identity inside, zero on the polar cone
/// `{x_{n+1} <= -‖x̄‖/α}`, and otherwise the nearest point of the boundary ray
/// through `(x̄/‖x̄‖, α)`.
pub(crate) fn project_circular(alpha: f64, x: &[f64]) -> Vec<f64> {
    let last = x.len() - 1;
    let t = x[last];
    let s = spatial_norm(x);
    if t >= alpha * s {
        return x.to_vec();
    }
    if alpha * t <= -s {
        return vec![0.0; x.len()];
    }
    let c = (s + alpha * t) / (1.0 + alpha * alpha);
    let mut y: Vec<f64> = x[..last].iter().map(|v| c * v / s).collect();
    y.push(c * alpha);
    y
}

/// Projection onto `{a^T y >= 0} ∩ L`. When `Π_L(x)` violates the half-space,
/// the multiplier `λ > 0` with `a^T Π_L(x + λa) = 0` is found by bisection;
/// the map `λ ↦ a^T Π_L(x + λa)` is nondecreasing.
fn project_half_space(a: &[f64], x: &[f64]) -> Vec<f64> {
    let y = project_circular(1.0, x);
    if dot(a, &y) >= 0.0 {
        return y;
    }
    let at = |lam: f64| -> Vec<f64> {
        let mut z = x.to_vec();
        axpy(lam, a, &mut z);
        project_circular(1.0, &z)
    };
    let na = norm(a);
    let mut hi = (norm(x) / na).max(f64::MIN_POSITIVE);
    let mut lo = 0.0;
    for _ in 0..200 {
        if dot(a, &at(hi)) >= 0.0 {
            break;
        }
        lo = hi;
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if dot(a, &at(mid)) >= 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    at(hi)
}

/// An orthonormal basis of `a^⊥` in `R^3`.
pub(crate) fn orthonormal_complement_3(a: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let n = norm(a);
    let u = scaled(1.0 / n, a);
    let mut pick = 0;
    for i in 1..3 {
        if u[i].abs() < u[pick].abs() {
            pick = i;
        }
    }
    let mut b1 = unit_vec(3, pick);
    axpy(-u[pick], &u, &mut b1);
    let n1 = norm(&b1);
    let b1 = scaled(1.0 / n1, &b1);
    let b2 = vec![
        u[1] * b1[2] - u[2] * b1[1],
        u[2] * b1[0] - u[0] * b1[2],
        u[0] * b1[1] - u[1] * b1[0],
    ];
    (b1, b2)
}

/// Future-pointing light-like directions in `span{b1, b2}`, unit length.
pub(crate) fn null_directions(b1: &[f64], b2: &[f64]) -> Vec<Vec<f64>> {
    // <c1 b1 + c2 b2, same> = A c1^2 + 2 B c1 c2 + C c2^2.
    let (a, b, c) = (minkowski(b1, b1), minkowski(b1, b2), minkowski(b2, b2));
    let disc = b * b - a * c;
    if disc < 0.0 {
        return Vec::new();
    }
    let r = disc.sqrt();
    let mut coeffs = Vec::new();
    if c.abs() > 1e-14 {
        coeffs.push((1.0, (-b + r) / c));
        coeffs.push((1.0, (-b - r) / c));
    } else {
        coeffs.push((0.0, 1.0));
        if b.abs() > 1e-14 {
            coeffs.push((1.0, -a / (2.0 * b)));
        }
    }
    coeffs
        .into_iter()
        .map(|(c1, c2)| {
            let mut v = scaled(c1, b1);
            axpy(c2, b2, &mut v);
            let last = v.len() - 1;
            if v[last] < 0.0 {
                v = scaled(-1.0, &v);
            }
            let n = norm(&v);
            scaled(1.0 / n, &v)
        })
        .collect()
}

/// Brute-force projection for `dim <= 3`: the best point on finitely many rays
/// of the cone. Rays are the corners plus boundary directions found by
/// walking great circles out of an interior direction at `resolution` angles.
/// Returns the point and the largest angular gap between neighbouring
/// boundary rays.
pub fn brute_force_cone_argmin(cone: &ConeSpec, x: &[f64], resolution: usize) -> Result<(Vec<f64>, f64)> {
    let dim = cone.dim();
    if dim > 3 {
        return Err(Error::Unsupported(format!(
            "brute-force cone projection supports dim <= 3, got {dim}"
        )));
    }
    if x.len() != dim {
        return Err(Error::arg("vector length does not match the cone"));
    }
    if resolution < 4 {
        return Err(Error::arg("resolution must be at least 4"));
    }
    let rays = boundary_rays(cone, resolution);
    let mut pitch: f64 = 0.0;
    if dim == 3 {
        for i in 0..rays.len() {
            let j = (i + 1) % rays.len();
            pitch = pitch.max(dot(&rays[i], &rays[j]).clamp(-1.0, 1.0).acos());
        }
    }
    if cone.contains(x, 1e-12) {
        return Ok((x.to_vec(), pitch));
    }
    let mut best = vec![0.0; dim];
    let mut best_d = dot(x, x);
    for r in rays.iter().chain(cone.corner_rays().iter()) {
        let n = norm(r);
        let c = (dot(x, r) / (n * n)).max(0.0);
        let y = scaled(c, r);
        let d = crate::linalg::dist(x, &y).powi(2);
        if d < best_d {
            best_d = d;
            best = y;
        }
    }
    Ok((best, pitch))
}

fn boundary_rays(cone: &ConeSpec, resolution: usize) -> Vec<Vec<f64>> {
    let dim = cone.dim();
    let c = cone.interior_direction();
    let dirs: Vec<Vec<f64>> = if dim == 2 {
        let perp = vec![-c[1], c[0]];
        vec![perp.clone(), scaled(-1.0, &perp)]
    } else {
        let (b1, b2) = orthonormal_complement_3(&c);
        (0..resolution)
            .map(|j| {
                let psi = 2.0 * std::f64::consts::PI * j as f64 / resolution as f64;
                let mut u = scaled(psi.cos(), &b1);
                axpy(psi.sin(), &b2, &mut u);
                u
            })
            .collect()
    };
    dirs.iter()
        .map(|u| {
            let at = |th: f64| {
                let mut v = scaled(th.cos(), &c);
                axpy(th.sin(), u, &mut v);
                v
            };
            let steps = 256;
            let mut lo = 0.0;
            let mut hi = std::f64::consts::PI;
            for s in 1..=steps {
                let th = std::f64::consts::PI * s as f64 / steps as f64;
                if cone.contains(&at(th), 1e-14) {
                    lo = th;
                } else {
                    hi = th;
                    break;
                }
            }
            for _ in 0..80 {
                let mid = 0.5 * (lo + hi);
                if cone.contains(&at(mid), 1e-14) {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            at(lo)
        })
        .collect()
}
