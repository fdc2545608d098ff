//! Weighted Fermat-Weber objective `ζ(p) = Σ μ_i d(p, q_i)^σ`, `σ >= 2`, and
//! the synthetic data sets used by the experiments.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::geometry::{HPoint, HTangent, ManifoldParams};
use crate::intrinsic::{ConvexSetSpec, SetKind};
use crate::linalg::{axpy, flip_time};
use crate::solvers::Objective;

#[derive(Debug, Clone)]
pub struct FermatWeberProblem {
    anchors: Vec<HPoint>,
    weights: Vec<f64>,
    sigma: f64,
    constraint: ConvexSetSpec,
    lipschitz: Option<f64>,
}

impl FermatWeberProblem {
    /// Uniform weights when `weights` is `None`. The Lipschitz estimate is
    /// filled in for ball constraints.
    pub fn new(anchors: Vec<HPoint>, weights: Option<Vec<f64>>, sigma: f64, constraint: ConvexSetSpec) -> Result<Self> {
        let m = *constraint.manifold();
        if anchors.is_empty() {
            return Err(Error::arg("need at least one anchor point"));
        }
        if !(sigma >= 2.0 && sigma.is_finite()) {
            return Err(Error::arg(format!("exponent sigma must be >= 2, got {sigma}")));
        }
        for q in &anchors {
            if !m.contains(q.coords()) {
                return Err(Error::arg("anchor is not on the manifold"));
            }
        }
        let k = anchors.len();
        let weights = weights.unwrap_or_else(|| vec![1.0 / k as f64; k]);
        if weights.len() != k {
            return Err(Error::arg("one weight per anchor"));
        }
        if !weights.iter().all(|&w| w > 0.0 && w.is_finite()) {
            return Err(Error::arg("weights must be positive"));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::arg(format!("weights must sum to 1, got {total}")));
        }
        for i in 0..k {
            for j in 0..i {
                if m.distance(&anchors[i], &anchors[j]) <= 1e-12 {
                    return Err(Error::arg(format!("anchors {j} and {i} coincide")));
                }
            }
        }
        let mut prob = Self {
            anchors,
            weights,
            sigma,
            constraint,
            lipschitz: None,
        };
        prob.lipschitz = prob.lipschitz_estimate();
        Ok(prob)
    }

    pub fn anchors(&self) -> &[HPoint] {
        &self.anchors
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn constraint(&self) -> &ConvexSetSpec {
        &self.constraint
    }

    pub fn manifold(&self) -> &ManifoldParams {
        self.constraint.manifold()
    }

    pub fn with_lipschitz(mut self, l: Option<f64>) -> Self {
        self.lipschitz = l;
        self
    }

    /// Same anchors and weights under a different constraint. The Lipschitz
    /// estimate is recomputed.
    pub fn with_constraint(&self, constraint: ConvexSetSpec) -> Self {
        let mut p = Self {
            constraint,
            ..self.clone()
        };
        p.lipschitz = p.lipschitz_estimate();
        p
    }

    /// A conservative Lipschitz constant for the gradient over a ball
    /// constraint. Along unit-speed geodesics the second derivative of
    /// `d^σ(·, q)` is at most `σ d^{σ-2} (σ - 1 + sqrt κ d)`, and on the ball
    /// `d <= D = r + max_i d(c, q_i)`.
    pub fn lipschitz_estimate(&self) -> Option<f64> {
        let SetKind::Ball { center, radius } = self.constraint.kind() else {
            return None;
        };
        let m = self.manifold();
        let s = self.sigma;
        let sk = m.kappa().sqrt();
        let l = self
            .anchors
            .iter()
            .zip(&self.weights)
            .map(|(q, w)| {
                let d = radius + m.distance(center, q);
                w * s * d.powf(s - 2.0) * (s - 1.0 + sk * d)
            })
            .sum();
        Some(l)
    }

    /// `μ_i σ d^{σ-2}` with `0^0 = 1`.
    fn coef(&self, w: f64, d: f64) -> f64 {
        if self.sigma == 2.0 {
            2.0 * w
        } else {
            w * self.sigma * d.powf(self.sigma - 2.0)
        }
    }

    pub fn cost_at(&self, p: &HPoint) -> f64 {
        let m = self.manifold();
        self.anchors
            .iter()
            .zip(&self.weights)
            .map(|(q, w)| w * m.distance(p, q).powf(self.sigma))
            .sum()
    }

    /// `grad ζ(p) = -Σ μ_i σ d^{σ-2} log_p q_i`.
    pub fn gradient(&self, p: &HPoint) -> HTangent {
        let m = self.manifold();
        let mut g = vec![0.0; m.dim()];
        for (q, &w) in self.anchors.iter().zip(&self.weights) {
            let l = m.log(p, q);
            let d = l.norm();
            axpy(-self.coef(w, d), l.coords(), &mut g);
        }
        m.tangent_project(p, &g)
    }

    /// Ambient partials
    /// `ζ'(p) = -Σ μ_i σ d^{σ-2} · (a_i / sinh a_i) · J q_i`, `a_i = sqrt κ d_i`.
    pub fn euclid_gradient(&self, p: &HPoint) -> Vec<f64> {
        let m = self.manifold();
        let sk = m.kappa().sqrt();
        let mut g = vec![0.0; m.dim()];
        for (q, &w) in self.anchors.iter().zip(&self.weights) {
            let d = m.distance(p, q);
            let a = sk * d;
            let ratio = if a < 1e-8 { 1.0 - a * a / 6.0 } else { a / a.sinh() };
            axpy(-self.coef(w, d) * ratio, &flip_time(q.coords()), &mut g);
        }
        g
    }
}

impl Objective for FermatWeberProblem {
    fn cost(&self, p: &HPoint) -> f64 {
        self.cost_at(p)
    }

    fn euclid_grad(&self, p: &HPoint) -> Vec<f64> {
        self.euclid_gradient(p)
    }

    fn riemannian_grad(&self, _m: &ManifoldParams, p: &HPoint) -> HTangent {
        self.gradient(p)
    }

    fn lipschitz(&self) -> Option<f64> {
        self.lipschitz
    }
}

/// `q_i = exp_{p_0}(offset·1 + noise·x_i, 0)` with standard normal `x_i` and
/// `p_0` the apex of `H^d_1`.
pub fn tangent_cloud(seed: u64, d: usize, count: usize, noise: f64, offset: f64) -> Result<Vec<HPoint>> {
    let m = ManifoldParams::new(d, 1.0)?;
    let p0 = m.origin();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let mut x: Vec<f64> = (0..d)
            .map(|_| offset + noise * rng.sample::<f64, _>(StandardNormal))
            .collect();
        x.push(0.0);
        out.push(m.exp(&m.tangent(&p0, x)?)?);
    }
    Ok(out)
}

/// Planar data set: `count` points around `exp_{p_0}(offset, offset, 0)`.
pub fn generate_experiment_2d(seed: u64, count: usize, noise: f64, offset: f64) -> Result<Vec<HPoint>> {
    if count == 0 {
        return Err(Error::arg("need at least one point"));
    }
    tangent_cloud(seed, 2, count, noise, offset)
}

/// Radius `1/sqrt d` of the constraint ball in dimension `d`.
pub fn nd_radius(d: usize) -> f64 {
    1.0 / (d as f64).sqrt()
}

/// Per-coordinate noise `3 / (2 (d - 1)^{1/4})`.
pub fn nd_noise(d: usize) -> f64 {
    1.5 / ((d - 1) as f64).powf(0.25)
}

/// `count` points in `H^d_1` and the ball `B(p_0, 1/sqrt d)`. The offset is
/// `2/sqrt d` in every coordinate.
pub fn generate_experiment_nd(seed: u64, d: usize, count: usize) -> Result<(Vec<HPoint>, ConvexSetSpec)> {
    if d < 2 {
        return Err(Error::arg("dimension must be at least 2"));
    }
    if count == 0 {
        return Err(Error::arg("need at least one point"));
    }
    let r = nd_radius(d);
    let pts = tangent_cloud(seed, d, count, nd_noise(d), 2.0 * r)?;
    let m = ManifoldParams::new(d, 1.0)?;
    let ball = ConvexSetSpec::ball(m, m.origin(), r)?;
    Ok((pts, ball))
}
