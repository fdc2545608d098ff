//! Intrinsic projections onto closed hyperbolically convex sets.
//!
//! Each cap is `K ∩ H^n_κ` for a convex cone `K ⊆ L`. The nearest point of the
//! cap is the normalised nonzero Lorentz projection of `p` onto `K`; for the
//! caps below that projection has a closed form or reduces to a Euclidean
//! cone projection. Geodesic balls are handled by a geodesic ray from the
//! centre.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::cone::{null_directions, orthonormal_complement_3, ConeSpec};
use crate::error::{Error, Result};
use crate::geometry::{HPoint, HTangent, ManifoldParams, TOL_MANIFOLD};
use crate::linalg::{axpy, dot, e_last, flip_time, minkowski, norm, scaled};
use crate::lorentz::{self, LProjResult};

/// Default tolerance for the variational-inequality certificate.
pub const TOL_CERTIFICATE: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub enum SetKind {
    /// Closed geodesic ball.
    Ball { center: HPoint, radius: f64 },
    /// Points with every coordinate nonnegative.
    OrthantCap,
    /// Cap of the cone spanned by `e^{n+1}` and `n` vectors with zero last
    /// coordinate.
    SimplicialCap { generators: Vec<Vec<f64>> },
    /// `L_α ∩ H^n_κ` with `α > 1`; a ball of radius `R` about the apex, where
    /// `cosh(sqrt κ R) = α / sqrt(α² - 1)`.
    CircularCap { alpha: f64 },
    /// `{a^T x >= 0} ∩ H^n_κ` for a space-like normal `a`.
    HalfSpaceCap { a: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvexSetSpec {
    manifold: ManifoldParams,
    kind: SetKind,
    /// Closure of the spanned cone, for the caps.
    spanned: Option<ConeSpec>,
    /// Euclidean cone used by the direct formula (simplicial cap only).
    simplicial: Option<ConeSpec>,
}

/// Result of [`certify_projection`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Certificate {
    /// `max_q <log_c p, log_c q>` over the samples.
    pub max_violation: f64,
    /// `max_q <p, q> - <p, c>`.
    pub max_support_gap: f64,
    pub samples: usize,
    pub certified: bool,
}

impl ConvexSetSpec {
    pub fn ball(m: ManifoldParams, center: HPoint, radius: f64) -> Result<Self> {
        if !m.contains(center.coords()) {
            return Err(Error::arg("ball centre must lie on the manifold"));
        }
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::arg(format!("ball radius must be positive, got {radius}")));
        }
        Ok(Self {
            manifold: m,
            kind: SetKind::Ball { center, radius },
            spanned: None,
            simplicial: None,
        })
    }

    pub fn orthant_cap(m: ManifoldParams) -> Result<Self> {
        let dim = m.dim();
        Ok(Self {
            manifold: m,
            kind: SetKind::OrthantCap,
            spanned: Some(ConeSpec::lorentz_cut(ConeSpec::nonneg_orthant(dim)?)?),
            simplicial: None,
        })
    }

    /// `spatial` holds the `n` generators with zero last coordinate; they may
    /// be given with or without that trailing zero.
    pub fn simplicial_cap(m: ManifoldParams, spatial: Vec<Vec<f64>>) -> Result<Self> {
        let dim = m.dim();
        if spatial.len() != m.n() {
            return Err(Error::arg(format!("simplicial cap needs {} generators", m.n())));
        }
        let mut gens = Vec::with_capacity(dim);
        for g in spatial {
            let g = match g.len() {
                l if l == m.n() => {
                    let mut g = g;
                    g.push(0.0);
                    g
                }
                l if l == dim => {
                    if g[dim - 1] != 0.0 {
                        return Err(Error::arg("simplicial cap generators need a zero last coordinate"));
                    }
                    g
                }
                _ => return Err(Error::arg("generator has the wrong length")),
            };
            gens.push(g);
        }
        gens.push(e_last(dim));
        let cone = ConeSpec::simplicial(gens.clone())?;
        let spanned = ConeSpec::lorentz_cut(cone.clone())?;
        Ok(Self {
            manifold: m,
            kind: SetKind::SimplicialCap {
                generators: gens[..m.n()].to_vec(),
            },
            spanned: Some(spanned),
            simplicial: Some(cone),
        })
    }

    pub fn circular_cap(m: ManifoldParams, alpha: f64) -> Result<Self> {
        if !(alpha > 1.0 && alpha.is_finite()) {
            return Err(Error::arg(format!("circular cap needs alpha > 1, got {alpha}")));
        }
        Ok(Self {
            manifold: m,
            kind: SetKind::CircularCap { alpha },
            spanned: Some(ConeSpec::circular(m.dim(), alpha)?),
            simplicial: None,
        })
    }

    pub fn half_space_cap(m: ManifoldParams, a: Vec<f64>) -> Result<Self> {
        if a.len() != m.dim() {
            return Err(Error::arg("half-space normal has the wrong length"));
        }
        let cone = ConeSpec::half_space(a.clone())?;
        Ok(Self {
            manifold: m,
            kind: SetKind::HalfSpaceCap { a },
            spanned: Some(cone),
            simplicial: None,
        })
    }

    pub fn manifold(&self) -> &ManifoldParams {
        &self.manifold
    }

    pub fn kind(&self) -> &SetKind {
        &self.kind
    }

    /// Closure of the cone spanned by the set. `None` for balls.
    pub fn spanned_cone(&self) -> Option<&ConeSpec> {
        self.spanned.as_ref()
    }

    /// Radius of the circular cap about the apex.
    pub fn circular_radius(&self) -> Option<f64> {
        match self.kind {
            SetKind::CircularCap { alpha } => Some(circular_radius(self.manifold.kappa(), alpha)),
            _ => None,
        }
    }

    /// Membership, with the tolerance applied relative to the set's scale.
    pub fn contains(&self, p: &HPoint) -> bool {
        let m = &self.manifold;
        if !m.contains(p.coords()) {
            return false;
        }
        match &self.kind {
            SetKind::Ball { center, radius } => m.distance(center, p) <= radius + TOL_MANIFOLD * radius.max(1.0),
            _ => self.spanned.as_ref().is_some_and(|k| k.contains(p.coords(), TOL_MANIFOLD)),
        }
    }

    /// The nearest point of the set in geodesic distance.
    pub fn project(&self, p: &HPoint) -> Result<HPoint> {
        let m = &self.manifold;
        if !m.contains(p.coords()) {
            return Err(Error::arg("point to project is not on the manifold"));
        }
        if self.contains(p) {
            return Ok(p.clone());
        }
        match &self.kind {
            SetKind::Ball { center, radius } => {
                let l = m.log(center, p);
                let d = l.norm();
                m.exp(&l.scale(radius / d))
            }
            SetKind::OrthantCap => {
                let u: Vec<f64> = p.coords().iter().map(|v| v.max(0.0)).collect();
                m.normalize(&u)
            }
            SetKind::SimplicialCap { .. } => {
                let cone = self.simplicial.as_ref().expect("simplicial cap has its cone");
                m.normalize(&cone.project_unchecked(p.coords()))
            }
            SetKind::CircularCap { alpha } => {
                m.normalize(&crate::cone::project_circular(*alpha, p.coords()))
            }
            SetKind::HalfSpaceCap { a } => Ok(half_space_closed_form(m, a, p)),
        }
    }

    /// Draws `count` points of the set, including boundary points.
    pub fn sample(&self, count: usize, seed: u64) -> Vec<HPoint> {
        let m = &self.manifold;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut out = Vec::with_capacity(count);
        let s = m.kappa().sqrt();
        let o = m.origin();
        while out.len() < count {
            let i = out.len();
            let boundary = i % 2 == 0;
            let q = match &self.kind {
                SetKind::Ball { center, radius } => {
                    let dir = unit_tangent(m, center, &mut rng, i);
                    let r = if boundary { *radius } else { radius * frac(i) };
                    m.exp(&dir.scale(r))
                }
                SetKind::CircularCap { alpha } => {
                    let dir = unit_tangent(m, &o, &mut rng, i);
                    let big_r = circular_radius(m.kappa(), *alpha);
                    let r = if boundary { big_r } else { big_r * frac(i) };
                    m.exp(&dir.scale(r))
                }
                SetKind::OrthantCap | SetKind::SimplicialCap { .. } => {
                    let gens: Vec<Vec<f64>> = match &self.kind {
                        SetKind::SimplicialCap { generators } => generators.clone(),
                        _ => (0..m.n()).map(|j| unit(m.dim(), j)).collect(),
                    };
                    let mut v = vec![0.0; m.dim()];
                    for (j, g) in gens.iter().enumerate() {
                        let c = if m.n() == 2 {
                            let th = std::f64::consts::FRAC_PI_2 * frac(i);
                            if j == 0 { th.cos() } else { th.sin() }
                        } else if boundary && rng.random_bool(0.3) {
                            0.0
                        } else {
                            rng.random::<f64>()
                        };
                        axpy(c, g, &mut v);
                    }
                    let nv = norm(&v);
                    if nv == 0.0 {
                        Ok(o.clone())
                    } else {
                        let t = 3.0 / s * frac(i + 7);
                        m.exp(&HTangent::unchecked(o.clone(), scaled(t / nv, &v)))
                    }
                }
                SetKind::HalfSpaceCap { a } => {
                    let x: Vec<f64> = (0..m.n()).map(|_| 1.5 / s * rng.sample::<f64, _>(StandardNormal)).collect();
                    let q = m.lift(&x).expect("length matches");
                    let aa = minkowski(a, a);
                    let ja = flip_time(a);
                    let aq = dot(a, q.coords());
                    if boundary {
                        let mut w = q.coords().to_vec();
                        axpy(-aq / aa, &ja, &mut w);
                        m.normalize(&w)
                    } else if aq < 0.0 {
                        let mut w = q.coords().to_vec();
                        axpy(-2.0 * aq / aa, &ja, &mut w);
                        m.normalize(&w)
                    } else {
                        Ok(q)
                    }
                }
            };
            if let Ok(q) = q {
                out.push(q);
            }
        }
        out
    }
}

/// `cosh(sqrt κ R) = α / sqrt(α² - 1)`.
pub fn circular_radius(kappa: f64, alpha: f64) -> f64 {
    // Same as atanh(1/α)/sqrt κ.
    (1.0 / alpha).atanh() / kappa.sqrt()
}

fn unit(dim: usize, i: usize) -> Vec<f64> {
    let mut e = vec![0.0; dim];
    e[i] = 1.0;
    e
}

/// Fractional part of `i` times the golden ratio.
fn frac(i: usize) -> f64 {
    (i as f64 * 0.618_033_988_749_894_9).fract()
}

/// A unit tangent at `base`: golden-angle directions when `n = 2`, Gaussian
/// directions otherwise.
fn unit_tangent(m: &ManifoldParams, base: &HPoint, rng: &mut ChaCha8Rng, i: usize) -> HTangent {
    let x: Vec<f64> = if m.n() == 2 {
        let th = 2.0 * std::f64::consts::PI * frac(i);
        let e = m.origin();
        // Move the circle of directions at the apex to `base`.
        let v = vec![th.cos(), th.sin(), 0.0];
        let t = HTangent::unchecked(e.clone(), v);
        m.parallel_transport(&e, base, &t).into_coords()
    } else {
        (0..m.dim()).map(|_| rng.sample(StandardNormal)).collect()
    };
    let v = m.tangent_project(base, &x);
    let n = v.norm();
    v.scale(1.0 / n)
}

/// `sqrt<a,a> / sqrt(κ (a^T p)² + <a,a>) · (p - (a^T p / <a,a>) Ja)`.
fn half_space_closed_form(m: &ManifoldParams, a: &[f64], p: &HPoint) -> HPoint {
    let aa = minkowski(a, a);
    let ap = dot(a, p.coords());
    let c = aa.sqrt() / (m.kappa() * ap * ap + aa).sqrt();
    let mut u = p.coords().to_vec();
    axpy(-ap / aa, &flip_time(a), &mut u);
    m.normalize(&scaled(c, &u)).expect("slides stay time-like")
}

/// `u / sqrt(-κ<u,u>)` for a future-pointing time-like `u`.
pub fn normalize_to_hyperboloid(m: &ManifoldParams, u: &[f64]) -> Result<HPoint> {
    m.normalize(u)
}

/// Largest violation of the variational inequality
/// `<log_c p, log_c q> <= 0` over `samples` points `q` of the set.
pub fn certify_projection(set: &ConvexSetSpec, p: &HPoint, candidate: &HPoint, samples: usize) -> Certificate {
    certify_with(set, p, candidate, &set.sample(samples, 0xC3A7), TOL_CERTIFICATE)
}

/// [`certify_projection`] against a caller-supplied sample.
pub fn certify_with(set: &ConvexSetSpec, p: &HPoint, candidate: &HPoint, qs: &[HPoint], tol: f64) -> Certificate {
    let m = set.manifold();
    let lp = m.log(candidate, p);
    let pc = minkowski(p.coords(), candidate.coords());
    let mut worst = f64::NEG_INFINITY;
    let mut support = f64::NEG_INFINITY;
    for q in qs {
        let lq = m.log(candidate, q);
        worst = worst.max(lp.inner(&lq));
        support = support.max(minkowski(p.coords(), q.coords()) - pc);
    }
    Certificate {
        max_violation: worst,
        max_support_gap: support,
        samples: qs.len(),
        certified: worst <= tol,
    }
}

/// Dense boundary search for `n = 2`. Returns the sampled point closest to `p`
/// and the arc-length pitch of the sampling.
///
/// A point outside the set projects onto the boundary, so only `∂C` (plus `p`
/// itself when `p ∈ C`) is sampled: the circle for balls and circular caps,
/// the two geodesic rays from the apex for orthant and simplicial caps, and
/// the boundary geodesic for half-space caps.
pub fn brute_force_intrinsic(set: &ConvexSetSpec, p: &HPoint, resolution: usize) -> Result<(HPoint, f64)> {
    let m = set.manifold();
    if m.n() != 2 {
        return Err(Error::Unsupported(format!(
            "brute-force intrinsic projection needs n = 2, got n = {}",
            m.n()
        )));
    }
    if resolution < 8 {
        return Err(Error::arg("resolution must be at least 8"));
    }
    let s = m.kappa().sqrt();
    let o = m.origin();
    let mut cands: Vec<HPoint> = Vec::with_capacity(resolution + 2);
    let circle = |center: &HPoint, r: f64, cands: &mut Vec<HPoint>| -> Result<f64> {
        for j in 0..resolution {
            let th = 2.0 * std::f64::consts::PI * j as f64 / resolution as f64;
            let v = m.parallel_transport(&o, center, &HTangent::unchecked(o.clone(), vec![th.cos(), th.sin(), 0.0]));
            cands.push(m.exp(&v.scale(r))?);
        }
        Ok(2.0 * std::f64::consts::PI * (s * r).sinh() / s / resolution as f64)
    };
    let pitch = match set.kind() {
        SetKind::Ball { center, radius } => circle(center, *radius, &mut cands)?,
        SetKind::CircularCap { alpha } => circle(&o, circular_radius(m.kappa(), *alpha), &mut cands)?,
        SetKind::OrthantCap | SetKind::SimplicialCap { .. } => {
            let gens: Vec<Vec<f64>> = match set.kind() {
                SetKind::SimplicialCap { generators } => generators.clone(),
                _ => vec![unit(3, 0), unit(3, 1)],
            };
            // The foot of p on a ray from o is no farther from o than p.
            let reach = m.distance(&o, p) + 1.0 / s;
            let h = reach / resolution as f64;
            cands.push(o.clone());
            for g in gens {
                let v = HTangent::unchecked(o.clone(), scaled(1.0 / norm(&g), &g));
                for j in 1..=resolution {
                    cands.push(m.exp(&v.scale(j as f64 * h))?);
                }
            }
            h
        }
        SetKind::HalfSpaceCap { a } => {
            let aa = minkowski(a, a);
            let mut foot = o.coords().to_vec();
            axpy(-dot(a, &foot) / aa, &flip_time(a), &mut foot);
            let b0 = m.normalize(&foot)?;
            let (b1, b2) = orthonormal_complement_3(a);
            let w1 = m.tangent_project(&b0, &b1);
            let w2 = m.tangent_project(&b0, &b2);
            let w = if w1.norm() >= w2.norm() { w1 } else { w2 };
            let w = w.scale(1.0 / w.norm());
            let reach = m.distance(&b0, p) + 1.0 / s;
            let h = 2.0 * reach / resolution as f64;
            for j in 0..=resolution {
                let t = -reach + j as f64 * h;
                cands.push(m.exp(&w.scale(t))?);
            }
            debug_assert!(null_directions(&b1, &b2).len() == 2);
            h
        }
    };
    if set.contains(p) {
        cands.push(p.clone());
    }
    let best = cands
        .into_iter()
        .max_by(|x, y| minkowski(p.coords(), x.coords()).total_cmp(&minkowski(p.coords(), y.coords())))
        .expect("at least one candidate");
    Ok((best, pitch))
}

/// Intrinsic projection through the Lorentz projection onto the spanned cone.
/// Only for caps.
pub fn cross_check_via_lorentz(set: &ConvexSetSpec, p: &HPoint) -> Result<HPoint> {
    let r = lorentz_projection_of(set, p)?;
    set.manifold().normalize(&r.nonzero)
}

/// Nonzero Lorentz projection of `p` onto the cap's spanned cone.
pub fn lorentz_projection_of(set: &ConvexSetSpec, p: &HPoint) -> Result<LProjResult> {
    let cone = set
        .spanned_cone()
        .ok_or_else(|| Error::Unsupported("balls have no spanned-cone formulation".into()))?;
    lorentz::l_project_natural(cone, p.coords(), 1e-15)
}

/// Lorentz-projection residuals of `-κ<p,v> v`, the cone point that a correct
/// intrinsic projection `v` of `p` must produce.
pub fn lorentz_certificate(set: &ConvexSetSpec, p: &HPoint, v: &HPoint) -> Result<(f64, f64)> {
    let cone = set
        .spanned_cone()
        .ok_or_else(|| Error::Unsupported("balls have no spanned-cone formulation".into()))?;
    let k = set.manifold().kappa();
    let u = scaled(-k * minkowski(p.coords(), v.coords()), v.coords());
    Ok(lorentz::lmp_residuals(p.coords(), &u, &lorentz::certificate_samples(cone)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::dist;
    use proptest::prelude::*;
    use rand::Rng;

    fn m2(kappa: f64) -> ManifoldParams {
        ManifoldParams::new(2, kappa).unwrap()
    }

    fn sets(m: ManifoldParams) -> Vec<ConvexSetSpec> {
        let n = m.n();
        let mut a = vec![0.3; m.dim()];
        a[0] = 1.2;
        a[n] = -0.4;
        let center = m.lift(&vec![0.4; n]).unwrap();
        let gens: Vec<Vec<f64>> = (0..n)
            .map(|i| {
                let mut g = vec![0.0; n];
                g[i] = 1.0;
                g[(i + 1) % n] -= 0.3;
                g
            })
            .collect();
        vec![
            ConvexSetSpec::ball(m, center, 0.8).unwrap(),
            ConvexSetSpec::orthant_cap(m).unwrap(),
            ConvexSetSpec::simplicial_cap(m, gens).unwrap(),
            ConvexSetSpec::circular_cap(m, 1.3).unwrap(),
            ConvexSetSpec::half_space_cap(m, a).unwrap(),
        ]
    }

    fn random_point(m: &ManifoldParams, rng: &mut ChaCha8Rng, spread: f64) -> HPoint {
        let x: Vec<f64> = (0..m.n()).map(|_| spread * rng.sample::<f64, _>(StandardNormal)).collect();
        m.lift(&x).unwrap()
    }

    #[test]
    fn orthant_cap_example() {
        let m = m2(1.0);
        let set = ConvexSetSpec::orthant_cap(m).unwrap();
        let p = m.point(vec![-0.3, 0.4, 1.25f64.sqrt()]).unwrap();
        let got = set.project(&p).unwrap();
        let expect = [0.0, 0.4 / 1.09f64.sqrt(), (1.25f64 / 1.09).sqrt()];
        for (a, b) in got.coords().iter().zip(expect) {
            assert!((a - b).abs() < 1e-15);
        }
        let (bf, pitch) = brute_force_intrinsic(&set, &p, 2000).unwrap();
        assert!(m.distance(&bf, &got) <= 2.0 * pitch);
    }

    #[test]
    fn constructors_validate() {
        let m = m2(1.0);
        assert!(ConvexSetSpec::circular_cap(m, 1.0).is_err());
        assert!(ConvexSetSpec::ball(m, m.origin(), 0.0).is_err());
        assert!(ConvexSetSpec::half_space_cap(m, vec![0.0, 0.0, 1.0]).is_err());
        assert!(ConvexSetSpec::simplicial_cap(m, vec![vec![1.0, 0.0, 0.5], vec![0.0, 1.0, 0.0]]).is_err());
        assert!(ConvexSetSpec::simplicial_cap(m, vec![vec![1.0, 0.0]]).is_err());
        let set = ConvexSetSpec::orthant_cap(m).unwrap();
        assert!(set.project(&HPoint::unchecked(vec![0.0, 0.0, 2.0])).is_err());
    }

    #[test]
    fn normalization_examples() {
        let m = ManifoldParams::new(3, 2.0).unwrap();
        let p = m.lift(&[0.1, -0.2, 0.3]).unwrap();
        let a = normalize_to_hyperboloid(&m, p.coords()).unwrap();
        let b = normalize_to_hyperboloid(&m, &scaled(2.0, p.coords())).unwrap();
        assert!(dist(a.coords(), p.coords()) < 1e-15);
        assert!(dist(b.coords(), p.coords()) < 1e-15);
        assert!((minkowski(b.coords(), b.coords()) + 0.5).abs() < 1e-15);
        assert!(normalize_to_hyperboloid(&m, &[1.0, 0.0, 0.0, 0.5]).is_err());
    }

    #[test]
    fn members_are_fixed_and_ball_lands_on_sphere() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for &k in &[0.25, 1.0, 4.0] {
            let m = m2(k);
            for set in sets(m) {
                for q in set.sample(50, 5) {
                    assert!(set.contains(&q), "{:?}", set.kind());
                    assert_eq!(set.project(&q).unwrap(), q);
                }
            }
            let ball = &sets(m)[0];
            let SetKind::Ball { center, radius } = ball.kind() else { unreachable!() };
            for _ in 0..20 {
                let p = random_point(&m, &mut rng, 2.0);
                if ball.contains(&p) {
                    continue;
                }
                let q = ball.project(&p).unwrap();
                assert!((m.distance(center, &q) - radius).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn half_space_lands_on_hyperplane() {
        let m = m2(1.0);
        let set = &sets(m)[4];
        let SetKind::HalfSpaceCap { a } = set.kind() else { unreachable!() };
        let mut rng = ChaCha8Rng::seed_from_u64(32);
        for _ in 0..50 {
            let p = random_point(&m, &mut rng, 1.5);
            let q = set.project(&p).unwrap();
            if dot(a, p.coords()) < 0.0 {
                assert!(dot(a, q.coords()).abs() < 1e-12 * norm(q.coords()));
            }
        }
    }

    #[test]
    fn brute_force_agreement_all_variants() {
        let mut rng = ChaCha8Rng::seed_from_u64(33);
        for &k in &[0.5, 1.0, 3.0] {
            let m = m2(k);
            for set in sets(m) {
                for _ in 0..30 {
                    let p = random_point(&m, &mut rng, 1.5 / k.sqrt());
                    let direct = set.project(&p).unwrap();
                    let (bf, pitch) = brute_force_intrinsic(&set, &p, 2000).unwrap();
                    let gap = m.distance(&bf, &direct);
                    assert!(gap <= 2.0 * pitch, "{:?} gap {gap} pitch {pitch}", set.kind());
                }
            }
        }
    }

    #[test]
    fn refinement_shrinks_gap() {
        let m = m2(1.0);
        let set = ConvexSetSpec::circular_cap(m, 1.5).unwrap();
        let p = m.lift(&[2.0, 0.7]).unwrap();
        let direct = set.project(&p).unwrap();
        let mut last = f64::INFINITY;
        for res in [50, 200, 800, 3200] {
            let (bf, pitch) = brute_force_intrinsic(&set, &p, res).unwrap();
            let gap = m.distance(&bf, &direct);
            assert!(gap <= pitch.max(last) + 1e-15);
            last = pitch;
        }
        let m3 = ManifoldParams::new(3, 1.0).unwrap();
        let s3 = ConvexSetSpec::orthant_cap(m3).unwrap();
        assert!(matches!(
            brute_force_intrinsic(&s3, &m3.origin(), 100),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn certificates() {
        let mut rng = ChaCha8Rng::seed_from_u64(34);
        for n in [2, 5] {
            let m = ManifoldParams::new(n, 1.0).unwrap();
            for set in sets(m) {
                let pool = set.sample(200, 99);
                for _ in 0..10 {
                    let p = random_point(&m, &mut rng, 1.5);
                    let c = set.project(&p).unwrap();
                    let cert = certify_projection(&set, &p, &c, 1000);
                    assert!(cert.certified, "{:?}: {}", set.kind(), cert.max_violation);
                    assert!(cert.max_support_gap <= 1e-8 * minkowski(p.coords(), c.coords()).abs().max(1.0));
                    if let Some(other) = pool.iter().find(|q| m.distance(q, &c) > 0.1) {
                        if !set.contains(&p) {
                            assert!(!certify_projection(&set, &p, other, 1000).certified);
                        }
                    }
                }
                let q = &pool[3];
                assert!(certify_projection(&set, q, q, 1000).max_violation <= 1e-8);
            }
        }
    }

    #[test]
    fn lorentz_path_agrees() {
        let mut rng = ChaCha8Rng::seed_from_u64(35);
        for n in [2, 4] {
            let m = ManifoldParams::new(n, 1.5).unwrap();
            for set in sets(m).into_iter().skip(1) {
                for _ in 0..10 {
                    let p = random_point(&m, &mut rng, 1.2);
                    let direct = set.project(&p).unwrap();
                    let via = cross_check_via_lorentz(&set, &p).unwrap();
                    assert!(dist(direct.coords(), via.coords()) <= 1e-9 * norm(p.coords()), "{:?}", set.kind());
                    let (comp, feas) = lorentz_certificate(&set, &p, &direct).unwrap();
                    assert!(comp.abs() <= 1e-8 * dot(p.coords(), p.coords()));
                    assert!(feas <= 1e-8);
                }
            }
            assert!(cross_check_via_lorentz(&sets(m)[0], &m.origin()).is_err());
        }
    }

    #[test]
    fn paper_family_projection_keeps_height() {
        // Π_K(p) for the simplicial family keeps the last coordinate and lies
        // strictly inside L.
        let m = ManifoldParams::new(3, 1.0).unwrap();
        let set = &sets(m)[2];
        let cone = set.simplicial.as_ref().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(36);
        for _ in 0..50 {
            let p = random_point(&m, &mut rng, 1.0);
            let u = cone.project(p.coords()).unwrap();
            assert!((u[3] - p.height()).abs() < 1e-12 * p.height());
            assert!(minkowski(&u, &u) < 0.0);
        }
    }

    fn point3() -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(-2.0f64..2.0, 2)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn prop_idempotent_and_nonexpansive(x in point3(), y in point3(), which in 0usize..5) {
            let m = m2(1.0);
            let set = &sets(m)[which];
            let p = m.lift(&x).unwrap();
            let q = m.lift(&y).unwrap();
            let pp = set.project(&p).unwrap();
            let ppp = set.project(&pp).unwrap();
            prop_assert!(m.distance(&pp, &ppp) <= 1e-10);
            // Distance reduction toward members of C.
            let c = set.project(&q).unwrap();
            prop_assert!(m.distance(&c, &pp) <= m.distance(&c, &p) + 1e-9);
        }

        #[test]
        fn prop_descent_direction(x in point3(), v in point3(), alpha in 0.01f64..2.0, which in 0usize..5) {
            let m = m2(1.0);
            let set = &sets(m)[which];
            let p = set.project(&m.lift(&x).unwrap()).unwrap();
            let mut w = v.clone();
            w.push(0.0);
            let tv = m.tangent_project(&p, &w);
            prop_assume!(tv.norm() > 1e-6);
            let step = m.exp(&tv.scale(-alpha)).unwrap();
            let z = set.project(&step).unwrap();
            let lhs = tv.inner(&m.log(&p, &z));
            let d = m.distance(&p, &z);
            prop_assert!(lhs <= -d * d / alpha + 1e-8);
        }

        #[test]
        fn prop_continuity(x in point3(), dx in point3(), which in 0usize..5) {
            let m = m2(1.0);
            let set = &sets(m)[which];
            let p = m.lift(&x).unwrap();
            let q = m.lift(&x.iter().zip(&dx).map(|(a, b)| a + 1e-6 * b).collect::<Vec<_>>()).unwrap();
            let d = m.distance(&p, &q);
            let dp = m.distance(&set.project(&p).unwrap(), &set.project(&q).unwrap());
            prop_assert!(dp <= 1e3 * d + 1e-12);
        }
    }
}
