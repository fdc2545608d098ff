//! Hyperboloid model of the κ-hyperbolic space form.
//!
//! Points live on the upper sheet
//!
//! ```text
//! H^n_κ = { p ∈ R^{n+1} : <p, p> = -1/κ, p_{n+1} > 0 }
//! ```
//!
//! where `<x, y> = x_1 y_1 + ... + x_n y_n - x_{n+1} y_{n+1}` is the Lorentzian
//! form. The sectional curvature is `-κ`. All vectors are stored densely in
//! ambient coordinates; there is no chart switching.
//!
//! Every evaluation that produces a point (exp, geodesics, renormalisation)
//! re-normalises onto the hyperboloid, so long solver runs do not drift off
//! the manifold.

use crate::error::{Error, Result};
use crate::linalg::{axpy, minkowski, norm, scaled, sub};

/// Relative tolerance for membership in `H^n_κ` and in tangent spaces.
pub const TOL_MANIFOLD: f64 = 1e-9;

/// Tangent norms and distances below this are treated as exactly zero.
pub const TOL_ZERO: f64 = 1e-14;

/// Largest admissible `sqrt(κ)·‖v‖` in the exponential map. `cosh` overflows
/// f64 near 710; squaring must still fit.
pub const MAX_EXP_ARG: f64 = 350.0;

/// `<x, y>` with a length check.
pub fn lorentz_inner(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::arg(format!(
            "length mismatch in Lorentzian inner product: {} vs {}",
            x.len(),
            y.len()
        )));
    }
    if x.len() < 2 {
        return Err(Error::arg("Lorentzian inner product needs length >= 2"));
    }
    Ok(minkowski(x, y))
}

/// Dimension `n` and curvature magnitude `κ` of `H^n_κ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ManifoldParams {
    n: usize,
    kappa: f64,
}

/// A point of `H^n_κ` in ambient coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct HPoint(Vec<f64>);

/// A tangent vector together with its base point.
#[derive(Debug, Clone, PartialEq)]
pub struct HTangent {
    base: HPoint,
    coords: Vec<f64>,
}

impl HPoint {
    #[cfg(test)]
    pub(crate) fn unchecked(coords: Vec<f64>) -> Self {
        HPoint(coords)
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn into_coords(self) -> Vec<f64> {
        self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// Last (time-like) coordinate.
    pub fn height(&self) -> f64 {
        self.0[self.0.len() - 1]
    }
}

impl AsRef<[f64]> for HPoint {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

impl HTangent {
    pub(crate) fn unchecked(base: HPoint, coords: Vec<f64>) -> Self {
        HTangent { base, coords }
    }

    pub fn base(&self) -> &HPoint {
        &self.base
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn into_coords(self) -> Vec<f64> {
        self.coords
    }

    /// Lorentzian inner product of two tangent vectors (positive definite on
    /// a tangent space).
    pub fn inner(&self, other: &HTangent) -> f64 {
        minkowski(&self.coords, &other.coords)
    }

    pub fn norm(&self) -> f64 {
        minkowski(&self.coords, &self.coords).max(0.0).sqrt()
    }

    pub fn scale(&self, t: f64) -> HTangent {
        HTangent {
            base: self.base.clone(),
            coords: scaled(t, &self.coords),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.norm() <= TOL_ZERO
    }
}

impl ManifoldParams {
    pub fn new(n: usize, kappa: f64) -> Result<Self> {
        if n < 1 {
            return Err(Error::arg("manifold dimension n must be >= 1"));
        }
        if !(kappa > 0.0 && kappa.is_finite()) {
            return Err(Error::arg(format!("curvature kappa must be positive, got {kappa}")));
        }
        Ok(Self { n, kappa })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    /// Ambient dimension `n + 1`.
    pub fn dim(&self) -> usize {
        self.n + 1
    }

    fn check_len(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::arg(format!(
                "expected an ambient vector of length {}, got {}",
                self.dim(),
                x.len()
            )));
        }
        Ok(())
    }

    /// Residual `|κ<p,p> + 1|`, scaled so large coordinates are not penalised
    /// for ordinary roundoff.
    fn membership_residual(&self, x: &[f64]) -> f64 {
        let scale = (self.kappa * crate::linalg::dot(x, x)).max(1.0);
        (self.kappa * minkowski(x, x) + 1.0).abs() / scale
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim()
            && x.iter().all(|v| v.is_finite())
            && x[self.n] > 0.0
            && self.membership_residual(x) <= TOL_MANIFOLD
    }

    /// Validates `coords` as a point of `H^n_κ`.
    pub fn point(&self, coords: Vec<f64>) -> Result<HPoint> {
        self.check_len(&coords)?;
        if !self.contains(&coords) {
            return Err(Error::arg(format!(
                "vector is not on H^{}_{}: kappa<p,p>+1 = {:e}, last coordinate {}",
                self.n,
                self.kappa,
                self.kappa * minkowski(&coords, &coords) + 1.0,
                coords[self.n]
            )));
        }
        Ok(HPoint(coords))
    }

    /// Scales a future-pointing time-like vector onto the hyperboloid:
    /// `u / sqrt(-κ<u,u>)`.
    pub fn normalize(&self, u: &[f64]) -> Result<HPoint> {
        self.check_len(u)?;
        let q = minkowski(u, u);
        if !(q < 0.0) || !(u[self.n] > 0.0) {
            return Err(Error::arg(format!(
                "cannot normalise onto the hyperboloid: <u,u> = {q:e}, u_(n+1) = {}",
                u[self.n]
            )));
        }
        let eta = (-self.kappa * q).sqrt();
        Ok(HPoint(scaled(1.0 / eta, u)))
    }

    /// Re-normalisation of a vector already close to the hyperboloid. The
    /// height is recomputed from the spatial block; rescaling by
    /// `sqrt(-κ<u,u>)` instead would cancel terms of size `κ‖u‖²` and push
    /// far-out points off the sheet.
    fn renormalized(&self, mut u: Vec<f64>) -> HPoint {
        let h = (1.0 / self.kappa + crate::linalg::dot(&u[..self.n], &u[..self.n])).sqrt();
        if h.is_finite() {
            u[self.n] = h;
        }
        HPoint(u)
    }

    /// The apex `(0, ..., 0, 1/sqrt(κ))`.
    pub fn origin(&self) -> HPoint {
        let mut x = vec![0.0; self.dim()];
        x[self.n] = 1.0 / self.kappa.sqrt();
        HPoint(x)
    }

    /// The point with the given spatial block and the height that puts it on
    /// the hyperboloid.
    pub fn lift(&self, spatial: &[f64]) -> Result<HPoint> {
        if spatial.len() != self.n {
            return Err(Error::arg(format!(
                "expected {} spatial coordinates, got {}",
                self.n,
                spatial.len()
            )));
        }
        let mut x = spatial.to_vec();
        x.push((1.0 / self.kappa + crate::linalg::dot(spatial, spatial)).sqrt());
        Ok(HPoint(x))
    }

    /// Validates `coords` as tangent at `base`.
    pub fn tangent(&self, base: &HPoint, coords: Vec<f64>) -> Result<HTangent> {
        self.check_len(&coords)?;
        let scale = (norm(base.coords()) * norm(&coords)).max(1.0);
        let r = minkowski(base.coords(), &coords).abs() / scale;
        if r > TOL_MANIFOLD {
            return Err(Error::arg(format!("vector is not tangent: <p,v> residual {r:e}")));
        }
        Ok(HTangent {
            base: base.clone(),
            coords,
        })
    }

    pub fn zero_tangent(&self, base: &HPoint) -> HTangent {
        HTangent {
            base: base.clone(),
            coords: vec![0.0; self.dim()],
        }
    }

    /// Geodesic distance `(1/sqrt κ) arcosh(-κ<p,q>)`.
    ///
    /// Nearby points go through the chord `Δ = p - q`: since
    /// `<Δ,Δ> = (2/κ)(-κ<p,q> - 1)`, the distance equals
    /// `(2/sqrt κ) asinh(sqrt(κ<Δ,Δ>)/2)`, which keeps full relative accuracy
    /// where the `arcosh` argument would round to 1. Far apart, the chord
    /// cancels terms of size `‖Δ‖²` and `arcosh` is the better of the two.
    pub fn distance(&self, p: &HPoint, q: &HPoint) -> f64 {
        let s = self.kappa.sqrt();
        let c = -self.kappa * minkowski(p.coords(), q.coords());
        if c > 2.0 {
            return c.acosh() / s;
        }
        let delta = sub(p.coords(), q.coords());
        let chord2 = minkowski(&delta, &delta).max(0.0);
        2.0 / s * (s * chord2.sqrt() / 2.0).asinh()
    }

    /// `Proj_p x = x + κ<p,x> p`.
    pub fn tangent_project(&self, p: &HPoint, x: &[f64]) -> HTangent {
        let mut v = x.to_vec();
        axpy(self.kappa * minkowski(p.coords(), x), p.coords(), &mut v);
        HTangent {
            base: p.clone(),
            coords: v,
        }
    }

    /// `exp_p(v) = cosh(sqrt κ ‖v‖) p + sinh(sqrt κ ‖v‖) v / (sqrt κ ‖v‖)`.
    pub fn exp(&self, v: &HTangent) -> Result<HPoint> {
        let nv = v.norm();
        if nv <= TOL_ZERO {
            return Ok(v.base.clone());
        }
        let a = self.kappa.sqrt() * nv;
        if a > MAX_EXP_ARG {
            return Err(Error::Range(format!(
                "exp argument sqrt(kappa)*|v| = {a:.3} exceeds {MAX_EXP_ARG}"
            )));
        }
        let mut out = scaled(a.cosh(), v.base.coords());
        axpy(sinhc(a), &v.coords, &mut out);
        Ok(self.renormalized(out))
    }

    /// Inverse of [`exp`](Self::exp): `d(p,q) Proj_p q / ‖Proj_p q‖`.
    pub fn log(&self, p: &HPoint, q: &HPoint) -> HTangent {
        let d = self.distance(p, q);
        if d <= TOL_ZERO {
            return self.zero_tangent(p);
        }
        // Proj_p q = Proj_p (q - p); the difference form avoids cancellation.
        let w = self.tangent_project(p, &sub(q.coords(), p.coords()));
        let nw = w.norm();
        if nw <= 0.0 {
            return self.zero_tangent(p);
        }
        w.scale(d / nw)
    }

    /// Unit-speed geodesic from `p` to `q` evaluated at arc length `t`.
    pub fn geodesic(&self, p: &HPoint, q: &HPoint, t: f64) -> Result<HPoint> {
        let l = self.log(p, q);
        let d = l.norm();
        if d <= TOL_ZERO {
            return Err(Error::arg("geodesic segment needs two distinct points"));
        }
        if !t.is_finite() {
            return Err(Error::arg("geodesic parameter must be finite"));
        }
        self.exp(&l.scale(t / d))
    }

    /// Parallel transport along the geodesic from `p` to `q`:
    /// `v - κ<q,v> / (κ<p,q> - 1) · (p + q)`.
    pub fn parallel_transport(&self, p: &HPoint, q: &HPoint, v: &HTangent) -> HTangent {
        let denom = self.kappa * minkowski(p.coords(), q.coords()) - 1.0;
        let c = self.kappa * minkowski(q.coords(), v.coords()) / denom;
        let mut out = v.coords.clone();
        axpy(-c, p.coords(), &mut out);
        axpy(-c, q.coords(), &mut out);
        HTangent {
            base: q.clone(),
            coords: out,
        }
    }

    /// Riemannian gradient from the ambient partial derivatives `f'(p)`:
    /// `J f'(p) + κ<J f'(p), p> p`.
    pub fn riemannian_gradient(&self, p: &HPoint, euclid_grad: &[f64]) -> HTangent {
        let jg = crate::linalg::flip_time(euclid_grad);
        self.tangent_project(p, &jg)
    }

    /// Stereographic projection to the Poincaré ball of radius `1/sqrt κ`.
    pub fn to_poincare(&self, p: &HPoint) -> Vec<f64> {
        let s = self.kappa.sqrt();
        let denom = 1.0 + s * p.height();
        p.coords()[..self.n].iter().map(|x| x / denom).collect()
    }

    /// Inverse of [`to_poincare`](Self::to_poincare).
    pub fn from_poincare(&self, y: &[f64]) -> Result<HPoint> {
        if y.len() != self.n {
            return Err(Error::arg("Poincaré coordinates have the wrong length"));
        }
        let kr2 = self.kappa * crate::linalg::dot(y, y);
        if kr2 >= 1.0 {
            return Err(Error::arg("point lies outside the Poincaré ball"));
        }
        let denom = 1.0 - kr2;
        let mut x: Vec<f64> = y.iter().map(|v| 2.0 * v / denom).collect();
        x.push((1.0 + kr2) / (denom * self.kappa.sqrt()));
        Ok(self.renormalized(x))
    }
}

/// `sinh(a)/a`, stable at 0.
fn sinhc(a: f64) -> f64 {
    if a.abs() < 1e-8 {
        1.0 + a * a / 6.0
    } else {
        a.sinh() / a
    }
}
