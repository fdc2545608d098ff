//! Lorentz projections onto cones inside `L`.
//!
//! For a closed convex cone `K ⊆ L` and `p ∈ int L`, a point `u ∈ K` is a
//! Lorentz projection of `p` when `<p - u, u> = 0` and `<p - u, z> <= 0` for
//! every `z ∈ K`. Zero always qualifies; there is exactly one nonzero
//! solution, and normalising it onto the hyperboloid gives the intrinsic
//! projection onto `K ∩ H^n_κ`.
//!
//! The general solver works through the scalar equation
//!
//! ```text
//! t = e_{n+1}^T Π_K(Jp + 2t e_{n+1}),   u = Π_K(Jp + 2t e_{n+1}),
//! ```
//!
//! whose nonzero root `t = u_{n+1}` is located by a geometric grid scan and
//! refined by bracketed regula falsi.

use crate::cone::ConeSpec;
use crate::error::{Error, Result};
use crate::linalg::{axpy, dot, e_last, flip_time, minkowski, norm, sub};

/// Tolerance for the Lorentz-projection residuals.
pub const TOL_LPROJ: f64 = 1e-8;

/// Grid points in the default bracket scan.
const SCAN_POINTS: usize = 160;

/// Upper end of the widened bracket, as a multiple of `p_{n+1}`.
const MAX_HEIGHT_FACTOR: f64 = 1e6;

#[derive(Debug, Clone, PartialEq)]
pub struct LProjResult {
    /// The nonzero Lorentz projection.
    pub nonzero: Vec<f64>,
    /// `<p - u, u>`.
    pub complementarity: f64,
    /// `max_z <p - u, z/‖z‖>` over the sampled cone points.
    pub feasibility: f64,
}

/// `(<p-u, u>, max_z <p-u, z/‖z‖>)`.
pub fn lmp_residuals(p: &[f64], u: &[f64], samples: &[Vec<f64>]) -> (f64, f64) {
    let r = sub(p, u);
    let comp = minkowski(&r, u);
    let feas = samples
        .iter()
        .filter_map(|z| {
            let nz = norm(z);
            (nz > 0.0).then(|| minkowski(&r, z) / nz)
        })
        .fold(f64::NEG_INFINITY, f64::max);
    (comp, feas)
}

/// Checks the two Lorentz-projection relations, with `|<p-u,u>|` compared to
/// `tol·max(1, ‖p‖²)` and each `<p-u, z>` (unit `z`) to `tol·max(1, ‖p‖)`.
pub fn is_l_projection(cone: &ConeSpec, p: &[f64], u: &[f64], samples: &[Vec<f64>], tol: f64) -> bool {
    if p.len() != cone.dim() || u.len() != cone.dim() {
        return false;
    }
    if !cone.contains(u, tol) {
        return false;
    }
    let (comp, feas) = lmp_residuals(p, u, samples);
    let np = norm(p).max(1.0);
    comp.abs() <= tol * np * np && feas <= tol * np
}

fn check_normal(a: &[f64]) -> Result<f64> {
    if a.len() < 2 {
        return Err(Error::arg("normal vector needs length >= 2"));
    }
    let aa = minkowski(a, a);
    if !(aa.abs() > 1e-14 * dot(a, a)) || !aa.is_finite() {
        return Err(Error::arg(format!("light-like normal: <a,a> = {aa:e}")));
    }
    Ok(aa)
}

/// Lorentz projection onto the hyperplane `{x : a^T x = 0}`:
/// `y - (<y, Ja>/<a,a>) Ja`.
pub fn l_project_hyperplane(a: &[f64], y: &[f64]) -> Result<Vec<f64>> {
    let aa = check_normal(a)?;
    if y.len() != a.len() {
        return Err(Error::arg("length mismatch between normal and vector"));
    }
    let ja = flip_time(a);
    let mut out = y.to_vec();
    axpy(-minkowski(y, &ja) / aa, &ja, &mut out);
    Ok(out)
}

/// Nonzero Lorentz projection onto `{a^T x >= 0} ∩ int L`. Returns `p` when it
/// already lies in the cone, and otherwise slides it along `Ja` onto the
/// hyperplane.
pub fn l_project_halfspace_cone(a: &[f64], p: &[f64]) -> Result<Vec<f64>> {
    check_normal(a)?;
    check_timelike(p)?;
    if p.len() != a.len() {
        return Err(Error::arg("length mismatch between normal and vector"));
    }
    if dot(a, p) >= 0.0 {
        return Ok(p.to_vec());
    }
    // <a, Jp> = a^T p.
    l_project_hyperplane(a, p)
}

fn check_timelike(p: &[f64]) -> Result<()> {
    if p.len() < 2 || !p.iter().all(|v| v.is_finite()) {
        return Err(Error::arg("expected a finite vector of length >= 2"));
    }
    let last = p.len() - 1;
    if !(minkowski(p, p) < 0.0 && p[last] > 0.0) {
        return Err(Error::arg("point must lie in the interior of the Lorentz cone"));
    }
    Ok(())
}

/// Default sample set for the feasibility residual.
pub fn certificate_samples(cone: &ConeSpec) -> Vec<Vec<f64>> {
    cone.sample(1000, 0x5eed)
}

/// Solves the natural equation with the default bracket
/// `[1e-12, 20]·p_{n+1}`, widening towards `1e6·p_{n+1}` if no sign change
/// is found.
pub fn l_project_natural(cone: &ConeSpec, p: &[f64], solver_tol: f64) -> Result<LProjResult> {
    check_timelike(p)?;
    let h = p[p.len() - 1];
    let mut hi = 20.0 * h;
    loop {
        match l_project_natural_bracket(cone, p, 1e-12 * h, hi, solver_tol) {
            Err(Error::Convergence(msg)) => {
                if hi >= MAX_HEIGHT_FACTOR * h {
                    return Err(Error::Convergence(msg));
                }
                hi = (hi * 50.0).min(MAX_HEIGHT_FACTOR * h);
            }
            other => return other,
        }
    }
}

/// Solves the natural equation, scanning only `[lo, hi]` for the nonzero root.
pub fn l_project_natural_bracket(
    cone: &ConeSpec,
    p: &[f64],
    lo: f64,
    hi: f64,
    solver_tol: f64,
) -> Result<LProjResult> {
    check_timelike(p)?;
    if p.len() != cone.dim() {
        return Err(Error::arg("point length does not match the cone"));
    }
    if !(lo > 0.0 && hi > lo) {
        return Err(Error::arg("bracket must satisfy 0 < lo < hi"));
    }
    let dim = p.len();
    let jp = flip_time(p);
    let e = e_last(dim);
    let point_at = |t: f64| -> Vec<f64> {
        let mut z = jp.clone();
        axpy(2.0 * t, &e, &mut z);
        cone.project_unchecked(&z)
    };
    let h = |t: f64| point_at(t)[dim - 1] - t;

    let ratio = (hi / lo).powf(1.0 / (SCAN_POINTS - 1) as f64);
    let mut brackets = Vec::new();
    let mut t_prev = lo;
    let mut h_prev = h(lo);
    for i in 1..SCAN_POINTS {
        let t = if i == SCAN_POINTS - 1 { hi } else { lo * ratio.powi(i as i32) };
        let ht = h(t);
        if h_prev < 0.0 && ht >= 0.0 {
            brackets.push((t_prev, t, h_prev, ht));
        }
        t_prev = t;
        h_prev = ht;
    }
    if brackets.is_empty() {
        return Err(Error::Convergence(format!(
            "natural equation has no sign change in [{lo:e}, {hi:e}]"
        )));
    }

    let samples = certificate_samples(cone);
    let mut best: Option<(f64, LProjResult)> = None;
    for (a, b, fa, fb) in brackets {
        let t = refine_root(&h, a, b, fa, fb, solver_tol);
        let u = point_at(t);
        if norm(&u) == 0.0 {
            continue;
        }
        let (comp, feas) = lmp_residuals(p, &u, &samples);
        let score = comp.abs().max(feas.max(0.0));
        if best.as_ref().is_none_or(|(s, _)| score < *s) {
            best = Some((
                score,
                LProjResult {
                    nonzero: u,
                    complementarity: comp,
                    feasibility: feas,
                },
            ));
        }
    }
    best.map(|(_, r)| r)
        .ok_or_else(|| Error::Convergence("natural equation only produced the zero root".into()))
}

/// Bracketed regula falsi with the Illinois modification. Every third step
/// is a plain bisection, which keeps the bracket shrinking geometrically.
fn refine_root(h: &dyn Fn(f64) -> f64, mut a: f64, mut b: f64, mut fa: f64, mut fb: f64, tol: f64) -> f64 {
    let mut side = 0i8;
    for it in 0..400 {
        if fb == 0.0 {
            return b;
        }
        let width = b - a;
        if width <= tol.max(4.0 * f64::EPSILON) * b {
            break;
        }
        let mut c = if it % 3 == 2 { 0.5 * (a + b) } else { (a * fb - b * fa) / (fb - fa) };
        if !(c > a && c < b) {
            c = 0.5 * (a + b);
        }
        let fc = h(c);
        if fc >= 0.0 {
            b = c;
            fb = fc;
            if side == 1 {
                fa *= 0.5;
            }
            side = 1;
        } else {
            a = c;
            fa = fc;
            if side == -1 {
                fb *= 0.5;
            }
            side = -1;
        }
    }
    // Both ends give u within O(width) of each other; the upper one is on the
    // nonnegative side of h.
    b
}
