//! Gradient projection on `H^n_κ` with a constant step or with Armijo
//! backtracking along the geodesic to the projected point.
//!
//! One iteration from `p_k ∈ C`:
//!
//! ```text
//! y_k = exp_{p_k}(-α_k grad f(p_k)),   z_k = P_C(y_k)
//! ```
//!
//! The constant-step method moves straight to `z_k`. The backtracking method
//! moves to `exp_{p_k}(τ log_{p_k} z_k)` with `τ = β^ℓ θ_k`, the first trial
//! that passes the Armijo test.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::geometry::{HPoint, HTangent, ManifoldParams};
use crate::intrinsic::ConvexSetSpec;

/// Gradient norms at or below this count as zero.
pub const TOL_GRAD_ZERO: f64 = 1e-14;

/// Relative size of the rounding error assumed in `f`. A trial promising less
/// first-order decrease than this cannot be told apart from noise, whether
/// Armijo accepts or rejects it.
pub const COST_ROUNDOFF: f64 = 16.0 * f64::EPSILON;

pub trait Objective: Sync {
    fn cost(&self, p: &HPoint) -> f64;

    /// Ambient partial derivatives `f'(p)`.
    fn euclid_grad(&self, p: &HPoint) -> Vec<f64>;

    fn riemannian_grad(&self, m: &ManifoldParams, p: &HPoint) -> HTangent {
        m.riemannian_gradient(p, &self.euclid_grad(p))
    }

    /// Lipschitz constant of the gradient on the feasible set, if known.
    fn lipschitz(&self) -> Option<f64> {
        None
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstantStepConfig {
    pub alpha: f64,
    pub max_iters: usize,
    /// Stop once `d(p_k, p_{k+1})` is at most this.
    pub stop_tol: f64,
    /// Run without a Lipschitz constant. The descent guarantees then do not
    /// apply.
    pub waive_lipschitz: bool,
}

impl Default for ConstantStepConfig {
    fn default() -> Self {
        Self {
            alpha: 0.1,
            max_iters: 10_000,
            stop_tol: 1e-7,
            waive_lipschitz: false,
        }
    }
}

pub type StepRule = Arc<dyn Fn(usize) -> f64 + Send + Sync>;

#[derive(Clone)]
pub struct BacktrackConfig {
    pub rho: f64,
    pub beta: f64,
    pub theta0: f64,
    pub alpha_lo: f64,
    pub alpha_hi: f64,
    /// `k ↦ α_k`; constant `alpha_hi` when unset.
    pub alpha_rule: Option<StepRule>,
    pub max_iters: usize,
    /// Stop once `d(p_k, z_k)` is at most this.
    pub stop_tol: f64,
    pub max_backtracks: usize,
    /// Upper bound on `θ_k`. With `Some(1.0)` every trial point stays on the
    /// segment `[p_k, z_k]` and so inside `C`; `None` applies the bare update
    /// `θ_{k+1} = θ_k / β^{1 - ℓ_k}`, which may extrapolate past `z_k`.
    pub theta_cap: Option<f64>,
}

impl Default for BacktrackConfig {
    fn default() -> Self {
        Self {
            rho: 1e-4,
            beta: 0.5,
            theta0: 0.5,
            alpha_lo: 1.0,
            alpha_hi: 1.0,
            alpha_rule: None,
            max_iters: 1000,
            stop_tol: 1e-7,
            max_backtracks: 60,
            theta_cap: Some(1.0),
        }
    }
}

impl fmt::Debug for BacktrackConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BacktrackConfig")
            .field("rho", &self.rho)
            .field("beta", &self.beta)
            .field("theta0", &self.theta0)
            .field("alpha_lo", &self.alpha_lo)
            .field("alpha_hi", &self.alpha_hi)
            .field("alpha_rule", &self.alpha_rule.as_ref().map(|_| "<fn>"))
            .field("max_iters", &self.max_iters)
            .field("stop_tol", &self.stop_tol)
            .field("max_backtracks", &self.max_backtracks)
            .field("theta_cap", &self.theta_cap)
            .finish()
    }
}

impl BacktrackConfig {
    fn validate(&self) -> Result<()> {
        let unit = |x: f64| x > 0.0 && x < 1.0;
        if !(unit(self.rho) && unit(self.beta) && unit(self.theta0)) {
            return Err(Error::arg("rho, beta and theta0 must lie in (0, 1)"));
        }
        if !(self.alpha_lo > 0.0 && self.alpha_lo <= self.alpha_hi && self.alpha_hi.is_finite()) {
            return Err(Error::arg("need 0 < alpha_lo <= alpha_hi"));
        }
        if !(self.stop_tol >= 0.0) {
            return Err(Error::arg("stop_tol must be nonnegative"));
        }
        if let Some(cap) = self.theta_cap {
            if !(cap >= self.theta0) {
                return Err(Error::arg("theta_cap must be at least theta0"));
            }
        }
        Ok(())
    }

    fn alpha(&self, k: usize) -> Result<f64> {
        let a = self.alpha_rule.as_ref().map_or(self.alpha_hi, |r| r(k));
        if !(a >= self.alpha_lo && a <= self.alpha_hi) {
            return Err(Error::arg(format!(
                "step rule gave alpha_{k} = {a}, outside [{}, {}]",
                self.alpha_lo, self.alpha_hi
            )));
        }
        Ok(a)
    }
}

/// One accepted step `p_k → p_{k+1}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterRecord {
    pub k: usize,
    /// `f(p_k)`.
    pub cost: f64,
    /// `f(p_{k+1})`.
    pub next_cost: f64,
    /// Gradient step `α_k`.
    pub alpha: f64,
    /// Accepted geodesic fraction `β^ℓ θ_k`; 1 for the constant-step method.
    pub step: f64,
    /// `d(p_k, z_k)`.
    pub stationarity: f64,
    /// `d(p_k, p_{k+1})`.
    pub moved: f64,
    /// Backtracking trials `ℓ_k`.
    pub trials: usize,
    /// `θ_k` at the start of the iteration (NaN for the constant step).
    pub theta: f64,
    /// `<grad f(p_k), log_{p_k} z_k>`.
    pub slope: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    GradientVanished,
    Stationary,
    /// The line search hit the rounding floor of `f` before `stop_tol`.
    Stalled,
    MaxIters,
    Failed,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverTrace {
    pub records: Vec<IterRecord>,
    pub final_point: HPoint,
    pub final_cost: f64,
    /// Stationarity measure at the final point, when it was evaluated.
    pub final_stationarity: f64,
    pub termination: Termination,
}

impl SolverTrace {
    /// Number of steps taken.
    pub fn iterations(&self) -> usize {
        self.records.len()
    }

    /// `f(p_0), ..., f(p_N)`.
    pub fn costs(&self) -> Vec<f64> {
        let mut c: Vec<f64> = self.records.iter().map(|r| r.cost).collect();
        c.push(self.final_cost);
        c
    }

    /// Smallest stationarity measure observed, including the final check.
    pub fn min_stationarity(&self) -> f64 {
        self.records
            .iter()
            .map(|r| r.stationarity)
            .fold(self.final_stationarity, f64::min)
    }
}

fn failure(records: Vec<IterRecord>, p: HPoint, cost: f64, msg: String) -> Error {
    Error::Numeric {
        message: msg,
        trace: Box::new(SolverTrace {
            records,
            final_point: p,
            final_cost: cost,
            final_stationarity: f64::NAN,
            termination: Termination::Failed,
        }),
    }
}

fn check_start(set: &ConvexSetSpec, p0: &HPoint) -> Result<()> {
    if !set.contains(p0) {
        return Err(Error::arg("starting point is not in the feasible set"));
    }
    Ok(())
}

/// `z = P_C(exp_p(-α grad))`.
fn projected_step(set: &ConvexSetSpec, grad: &HTangent, alpha: f64) -> Result<HPoint> {
    let m = set.manifold();
    let y = m.exp(&grad.scale(-alpha))?;
    set.project(&y)
}

/// `d(p, P_C(exp_p(-α grad f(p))))`.
pub fn stationarity_measure(obj: &dyn Objective, set: &ConvexSetSpec, p: &HPoint, alpha: f64) -> Result<f64> {
    if !(alpha > 0.0) {
        return Err(Error::arg("alpha must be positive"));
    }
    let m = set.manifold();
    let g = obj.riemannian_grad(m, p);
    if g.norm() <= TOL_GRAD_ZERO {
        return Ok(0.0);
    }
    let z = projected_step(set, &g, alpha)?;
    Ok(m.distance(p, &z))
}

/// `Γ = (1 - αL) / (2α)`.
pub fn gamma(alpha: f64, lipschitz: f64) -> f64 {
    (1.0 - alpha * lipschitz) / (2.0 * alpha)
}

/// `θ̄ = min(θ_0, 2(1 - ρ)/(ᾱ L))`.
pub fn theta_bar(cfg: &BacktrackConfig, lipschitz: f64) -> f64 {
    cfg.theta0.min(2.0 * (1.0 - cfg.rho) / (cfg.alpha_hi * lipschitz))
}

/// Bound on `min_{k<=N} d(p_k, p_{k+1})` for the constant step after `N + 1`
/// iterations.
pub fn constant_step_bound(f0: f64, f_best: f64, gamma: f64, n: usize) -> f64 {
    ((f0 - f_best).max(0.0) / (gamma * (n as f64 + 1.0))).sqrt()
}

/// Bound on `min_{k<=N} d(p_k, z_k)` for backtracking after `N + 1`
/// iterations.
pub fn backtracking_bound(cfg: &BacktrackConfig, theta_bar: f64, f0: f64, f_best: f64, n: usize) -> f64 {
    (cfg.alpha_hi * (f0 - f_best).max(0.0) / (cfg.rho * cfg.beta * theta_bar * (n as f64 + 1.0))).sqrt()
}

/// Constant-step gradient projection.
pub fn pga_constant(
    obj: &dyn Objective,
    set: &ConvexSetSpec,
    p0: &HPoint,
    cfg: &ConstantStepConfig,
) -> Result<(HPoint, SolverTrace)> {
    check_start(set, p0)?;
    if !(cfg.alpha > 0.0 && cfg.alpha.is_finite()) {
        return Err(Error::arg("alpha must be positive and finite"));
    }
    match obj.lipschitz() {
        Some(l) if cfg.alpha * l >= 1.0 => {
            return Err(Error::arg(format!("alpha = {} violates alpha < 1/L with L = {l}", cfg.alpha)));
        }
        None if !cfg.waive_lipschitz => {
            return Err(Error::arg(
                "no Lipschitz constant: pass waive_lipschitz to run with an unchecked alpha",
            ));
        }
        _ => {}
    }
    let m = set.manifold();
    let mut p = p0.clone();
    let mut f = obj.cost(&p);
    let mut records = Vec::new();
    for k in 0..cfg.max_iters {
        let g = obj.riemannian_grad(m, &p);
        if !f.is_finite() || !g.coords().iter().all(|v| v.is_finite()) {
            return Err(failure(records, p, f, format!("non-finite cost or gradient at iteration {k}")));
        }
        if g.norm() <= TOL_GRAD_ZERO {
            return Ok(finish(records, p, f, 0.0, Termination::GradientVanished));
        }
        let next = projected_step(set, &g, cfg.alpha)?;
        let moved = m.distance(&p, &next);
        let f_next = obj.cost(&next);
        let slope = g.inner(&m.log(&p, &next));
        records.push(IterRecord {
            k,
            cost: f,
            next_cost: f_next,
            alpha: cfg.alpha,
            step: 1.0,
            stationarity: moved,
            moved,
            trials: 0,
            theta: f64::NAN,
            slope,
        });
        p = next;
        f = f_next;
        if moved <= cfg.stop_tol {
            return Ok(finish(records, p, f, moved, Termination::Stationary));
        }
    }
    let st = stationarity_measure(obj, set, &p, cfg.alpha).unwrap_or(f64::NAN);
    Ok(finish(records, p, f, st, Termination::MaxIters))
}

fn finish(records: Vec<IterRecord>, p: HPoint, f: f64, st: f64, why: Termination) -> (HPoint, SolverTrace) {
    let trace = SolverTrace {
        records,
        final_point: p.clone(),
        final_cost: f,
        final_stationarity: st,
        termination: why,
    };
    (p, trace)
}

/// Gradient projection with Armijo backtracking along `[p_k, z_k]`.
pub fn pga_backtracking(
    obj: &dyn Objective,
    set: &ConvexSetSpec,
    p0: &HPoint,
    cfg: &BacktrackConfig,
) -> Result<(HPoint, SolverTrace)> {
    check_start(set, p0)?;
    cfg.validate()?;
    let m = set.manifold();
    let mut p = p0.clone();
    let mut f = obj.cost(&p);
    let mut theta = cfg.theta0;
    let mut records = Vec::new();
    for k in 0..cfg.max_iters {
        let g = obj.riemannian_grad(m, &p);
        if !f.is_finite() || !g.coords().iter().all(|v| v.is_finite()) {
            return Err(failure(records, p, f, format!("non-finite cost or gradient at iteration {k}")));
        }
        if g.norm() <= TOL_GRAD_ZERO {
            return Ok(finish(records, p, f, 0.0, Termination::GradientVanished));
        }
        let alpha = cfg.alpha(k)?;
        let z = projected_step(set, &g, alpha)?;
        let dz = m.distance(&p, &z);
        if dz <= cfg.stop_tol {
            return Ok(finish(records, p, f, dz, Termination::Stationary));
        }
        let dir = m.log(&p, &z);
        let slope = g.inner(&dir);
        let mut ell = 0;
        let (q, fq, tau) = loop {
            let tau = cfg.beta.powi(ell as i32) * theta;
            if tau * slope.abs() <= COST_ROUNDOFF * f.abs() {
                return Ok(finish(records, p, f, dz, Termination::Stalled));
            }
            let q = m.exp(&dir.scale(tau))?;
            let fq = obj.cost(&q);
            if fq.is_finite() && fq <= f + cfg.rho * tau * slope {
                break (q, fq, tau);
            }
            if ell >= cfg.max_backtracks {
                let trace = SolverTrace {
                    records,
                    final_point: p.clone(),
                    final_cost: f,
                    final_stationarity: dz,
                    termination: Termination::Failed,
                };
                return Err(Error::LineSearch {
                    iteration: k,
                    cap: cfg.max_backtracks,
                    trace: Box::new(trace),
                });
            }
            ell += 1;
        };
        records.push(IterRecord {
            k,
            cost: f,
            next_cost: fq,
            alpha,
            step: tau,
            stationarity: dz,
            moved: m.distance(&p, &q),
            trials: ell,
            theta,
            slope,
        });
        // θ_{k+1} = β^{ℓ_k - 1} θ_k = τ / β.
        theta = tau / cfg.beta;
        if let Some(cap) = cfg.theta_cap {
            theta = theta.min(cap);
        }
        p = q;
        f = fq;
    }
    let st = stationarity_measure(obj, set, &p, cfg.alpha(cfg.max_iters).unwrap_or(cfg.alpha_hi)).unwrap_or(f64::NAN);
    Ok(finish(records, p, f, st, Termination::MaxIters))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::flip_time;

    /// `f(p) = d²(p, q)/2`.
    struct HalfSquaredDistance {
        m: ManifoldParams,
        q: HPoint,
        l: Option<f64>,
    }

    impl Objective for HalfSquaredDistance {
        fn cost(&self, p: &HPoint) -> f64 {
            0.5 * self.m.distance(p, &self.q).powi(2)
        }

        fn euclid_grad(&self, p: &HPoint) -> Vec<f64> {
            // grad = -log_p q, and any ambient preimage works: J(-log_p q).
            flip_time(self.m.log(p, &self.q).scale(-1.0).coords())
        }

        fn lipschitz(&self) -> Option<f64> {
            self.l
        }
    }

    fn setup() -> (ManifoldParams, ConvexSetSpec) {
        let m = ManifoldParams::new(2, 1.0).unwrap();
        let ball = ConvexSetSpec::ball(m, m.origin(), 1.0).unwrap();
        (m, ball)
    }

    #[test]
    fn zero_gradient_returns_start() {
        let (m, ball) = setup();
        let obj = HalfSquaredDistance { m, q: m.origin(), l: Some(3.0) };
        let cfg = ConstantStepConfig { alpha: 0.3, ..Default::default() };
        let (p, tr) = pga_constant(&obj, &ball, &m.origin(), &cfg).unwrap();
        assert_eq!(p, m.origin());
        assert_eq!(tr.iterations(), 0);
        assert_eq!(tr.termination, Termination::GradientVanished);
        let (p, tr) = pga_backtracking(&obj, &ball, &m.origin(), &BacktrackConfig::default()).unwrap();
        assert_eq!(p, m.origin());
        assert_eq!(tr.termination, Termination::GradientVanished);
        assert_eq!(stationarity_measure(&obj, &ball, &m.origin(), 1.0).unwrap(), 0.0);
    }

    #[test]
    fn constant_step_requires_lipschitz_or_waiver() {
        let (m, ball) = setup();
        let q = m.lift(&[0.3, 0.1]).unwrap();
        let obj = HalfSquaredDistance { m, q: q.clone(), l: None };
        let cfg = ConstantStepConfig { alpha: 0.3, ..Default::default() };
        assert!(matches!(pga_constant(&obj, &ball, &m.origin(), &cfg), Err(Error::Argument(_))));
        let waived = ConstantStepConfig { waive_lipschitz: true, ..cfg };
        let (p, _) = pga_constant(&obj, &ball, &m.origin(), &waived).unwrap();
        assert!(m.distance(&p, &q) < 1e-6);
        let obj = HalfSquaredDistance { m, q, l: Some(4.0) };
        assert!(pga_constant(&obj, &ball, &m.origin(), &cfg).is_err());
    }

    #[test]
    fn infeasible_start_rejected() {
        let (m, ball) = setup();
        let obj = HalfSquaredDistance { m, q: m.origin(), l: Some(1.0) };
        let far = m.lift(&[3.0, 0.0]).unwrap();
        let cfg = ConstantStepConfig { alpha: 0.3, ..Default::default() };
        assert!(pga_constant(&obj, &ball, &far, &cfg).is_err());
        assert!(pga_backtracking(&obj, &ball, &far, &BacktrackConfig::default()).is_err());
    }

    #[test]
    fn constrained_target_outside_ball() {
        let (m, ball) = setup();
        // Minimiser of d(., q) over the ball is the ball point toward q.
        let q = m.lift(&[3.0, 0.0]).unwrap();
        let expect = ball.project(&q).unwrap();
        let obj = HalfSquaredDistance { m, q, l: Some(2.0 * (1.0 + 4.0)) };
        let cfg = ConstantStepConfig { alpha: 0.9 / 10.0, stop_tol: 1e-12, ..Default::default() };
        let (p, tr) = pga_constant(&obj, &ball, &m.origin(), &cfg).unwrap();
        assert!(m.distance(&p, &expect) < 1e-9);
        assert_eq!(tr.termination, Termination::Stationary);
        let bcfg = BacktrackConfig { stop_tol: 1e-12, ..Default::default() };
        let (p, tr) = pga_backtracking(&obj, &ball, &m.origin(), &bcfg).unwrap();
        assert!(m.distance(&p, &expect) < 1e-9);
        for r in &tr.records {
            assert!(r.next_cost <= r.cost + 1e-12);
            assert!(r.slope <= -r.stationarity.powi(2) / r.alpha + 1e-12);
            assert!(r.step <= 1.0);
        }
    }

    #[test]
    fn unreachable_tolerance_stalls() {
        let (m, ball) = setup();
        let q = m.lift(&[3.0, 1.0]).unwrap();
        let obj = HalfSquaredDistance { m, q, l: None };
        let cfg = BacktrackConfig { stop_tol: 0.0, ..Default::default() };
        let (p, tr) = pga_backtracking(&obj, &ball, &m.origin(), &cfg).unwrap();
        assert_eq!(tr.termination, Termination::Stalled, "{:?} after {}", tr.final_stationarity, tr.iterations());
        assert!(tr.iterations() < 200);
        assert!(m.distance(&p, &ball.project(&obj.q).unwrap()) < 1e-6);
    }

    #[test]
    fn stationary_point_is_fixed() {
        let (m, ball) = setup();
        let q = m.lift(&[3.0, 0.0]).unwrap();
        let star = ball.project(&q).unwrap();
        let obj = HalfSquaredDistance { m, q, l: None };
        for alpha in [0.1, 1.0, 5.0] {
            assert!(stationarity_measure(&obj, &ball, &star, alpha).unwrap() < 1e-12);
        }
        let cfg = ConstantStepConfig { alpha: 0.3, waive_lipschitz: true, ..Default::default() };
        let (p, tr) = pga_constant(&obj, &ball, &star, &cfg).unwrap();
        assert_eq!(tr.iterations(), 1);
        assert!(m.distance(&p, &star) < 1e-12);
        // Nonstationary: strictly positive and a descent direction.
        let p = m.lift(&[0.0, 0.3]).unwrap();
        let st = stationarity_measure(&obj, &ball, &p, 1.0).unwrap();
        assert!(st > 0.0);
        let g = obj.riemannian_grad(&m, &p);
        let z = ball.project(&m.exp(&g.scale(-1.0)).unwrap()).unwrap();
        assert!(g.inner(&m.log(&p, &z)) < 0.0);
    }

    #[test]
    fn uncapped_theta_grows() {
        let (m, ball) = setup();
        let q = m.lift(&[0.2, 0.1]).unwrap();
        let obj = HalfSquaredDistance { m, q, l: None };
        let cfg = BacktrackConfig {
            theta_cap: None,
            alpha_hi: 0.1,
            alpha_lo: 0.1,
            max_iters: 5,
            stop_tol: 0.0,
            ..Default::default()
        };
        let (_, tr) = pga_backtracking(&obj, &ball, &m.origin(), &cfg).unwrap();
        let thetas: Vec<f64> = tr.records.iter().map(|r| r.theta).collect();
        assert!(thetas.windows(2).any(|w| w[1] > w[0]));
        assert!(thetas.iter().any(|&t| t > 1.0));
    }

    #[test]
    fn line_search_cap_reports_trace() {
        struct Liar(ManifoldParams);
        impl Objective for Liar {
            fn cost(&self, p: &HPoint) -> f64 {
                // Cost rises in every direction away from the apex, but the
                // reported gradient points away from it.
                self.0.distance(p, &self.0.origin())
            }
            fn euclid_grad(&self, _p: &HPoint) -> Vec<f64> {
                vec![-1.0, 0.0, 0.0]
            }
        }
        let (m, ball) = setup();
        let cfg = BacktrackConfig { max_backtracks: 5, ..Default::default() };
        let err = pga_backtracking(&Liar(m), &ball, &m.origin(), &cfg).unwrap_err();
        assert!(matches!(err, Error::LineSearch { cap: 5, .. }));
        assert!(err.trace().is_some());
    }

    #[test]
    fn non_finite_cost_is_numeric_error() {
        struct Nan;
        impl Objective for Nan {
            fn cost(&self, _p: &HPoint) -> f64 {
                f64::NAN
            }
            fn euclid_grad(&self, _p: &HPoint) -> Vec<f64> {
                vec![1.0, 0.0, 0.0]
            }
        }
        let (m, ball) = setup();
        let err = pga_backtracking(&Nan, &ball, &m.origin(), &BacktrackConfig::default()).unwrap_err();
        assert!(matches!(err, Error::Numeric { .. }));
        assert_eq!(err.trace().unwrap().termination, Termination::Failed);
    }

    #[test]
    fn config_validation() {
        let (m, ball) = setup();
        let obj = HalfSquaredDistance { m, q: m.lift(&[0.2, 0.0]).unwrap(), l: None };
        for cfg in [
            BacktrackConfig { rho: 1.0, ..Default::default() },
            BacktrackConfig { beta: 0.0, ..Default::default() },
            BacktrackConfig { alpha_lo: 2.0, ..Default::default() },
            BacktrackConfig { alpha_rule: Some(Arc::new(|_| 5.0)), ..Default::default() },
        ] {
            assert!(pga_backtracking(&obj, &ball, &m.origin(), &cfg).is_err());
        }
    }
}
