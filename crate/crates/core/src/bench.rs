//! Experiment drivers behind the `hyproj` binary: the planar constrained
//! mean, the dimension sweep and the projection self-test.
//!
//! Every driver returns its numbers as well as writing them, so the tests can
//! check the same runs the CLI performs.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fermat_weber::{generate_experiment_2d, generate_experiment_nd, FermatWeberProblem};
use crate::geometry::{HPoint, ManifoldParams};
use crate::intrinsic::{
    brute_force_intrinsic, certify_projection, cross_check_via_lorentz, lorentz_certificate, ConvexSetSpec, SetKind,
    TOL_CERTIFICATE,
};
use crate::lorentz::{l_project_halfspace_cone, l_project_natural};
use crate::solvers::{pga_backtracking, pga_constant, BacktrackConfig, ConstantStepConfig, SolverTrace};

/// Gradient step `α_k` for the experiments. Costs here are `Σ μ_i d²` with
/// `Σ μ_i = 1`, twice the `1/(2N) Σ d²` convention under which a unit step
/// is the usual mean iteration; halving the step puts both on the same scale.
pub const EXPERIMENT_ALPHA: f64 = 0.5;

/// Radius of the ball standing in for the whole manifold when computing the
/// unconstrained mean.
pub const UNCONSTRAINED_RADIUS: f64 = 1e6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Mean2d,
    MeanNd,
    ProjectTest,
    Sweep,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverKind {
    Constant,
    Backtracking,
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub command: Command,
    pub seed: u64,
    pub dims: Vec<usize>,
    pub n: usize,
    pub eps: f64,
    pub out_dir: PathBuf,
    pub solver: SolverKind,
    pub radius: f64,
    pub offset: f64,
    pub noise: f64,
    /// Timing repeats per sweep row; the median is reported.
    pub repeats: usize,
    pub backtrack: BacktrackConfig,
    /// Constant step as a fraction of `1/L`.
    pub step_fraction: f64,
}

impl ExperimentConfig {
    pub fn new(command: Command) -> Self {
        Self {
            command,
            seed: 42,
            dims: vec![2, 10, 50, 100, 200],
            n: match command {
                Command::Mean2d => 200,
                _ => 400,
            },
            eps: 1e-7,
            out_dir: PathBuf::from("."),
            solver: SolverKind::Backtracking,
            radius: 1.0,
            offset: 1.5,
            noise: 1.5,
            repeats: 3,
            backtrack: BacktrackConfig {
                alpha_lo: EXPERIMENT_ALPHA,
                alpha_hi: EXPERIMENT_ALPHA,
                ..BacktrackConfig::default()
            },
            step_fraction: 0.9,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eps > 0.0) {
            return Err(Error::arg("eps must be positive"));
        }
        if self.n == 0 {
            return Err(Error::arg("need at least one point"));
        }
        if self.command == Command::Sweep && self.dims.is_empty() {
            return Err(Error::arg("sweep needs at least one dimension"));
        }
        if let Some(d) = self.dims.iter().find(|&&d| !(2..=200).contains(&d)) {
            return Err(Error::arg(format!("dimension {d} outside 2..=200")));
        }
        if self.repeats == 0 {
            return Err(Error::arg("repeats must be at least 1"));
        }
        if !(self.step_fraction > 0.0 && self.step_fraction < 1.0) {
            return Err(Error::arg("step fraction must lie in (0, 1)"));
        }
        Ok(())
    }

    fn backtrack_config(&self) -> BacktrackConfig {
        BacktrackConfig {
            stop_tol: self.eps,
            ..self.backtrack.clone()
        }
    }
}

/// Runs the configured solver from `start`.
pub fn solve(prob: &FermatWeberProblem, start: &HPoint, cfg: &ExperimentConfig) -> Result<(HPoint, SolverTrace)> {
    match cfg.solver {
        SolverKind::Backtracking => pga_backtracking(prob, prob.constraint(), start, &cfg.backtrack_config()),
        SolverKind::Constant => {
            let l = prob
                .lipschitz_estimate()
                .ok_or_else(|| Error::Unsupported("constant step needs a Lipschitz estimate".into()))?;
            let c = ConstantStepConfig {
                alpha: cfg.step_fraction / l,
                stop_tol: cfg.eps,
                ..ConstantStepConfig::default()
            };
            pga_constant(prob, prob.constraint(), start, &c)
        }
    }
}

/// Fermat-Weber mean (σ = 2) over the whole manifold, by backtracking on a
/// huge ball around the apex down to stationarity `1e-10`.
pub fn unconstrained_mean(points: &[HPoint], m: ManifoldParams) -> Result<HPoint> {
    let ball = ConvexSetSpec::ball(m, m.origin(), UNCONSTRAINED_RADIUS)?;
    let prob = FermatWeberProblem::new(points.to_vec(), None, 2.0, ball)?;
    let cfg = BacktrackConfig {
        stop_tol: 1e-10,
        max_iters: 10_000,
        alpha_lo: EXPERIMENT_ALPHA,
        alpha_hi: EXPERIMENT_ALPHA,
        ..BacktrackConfig::default()
    };
    let (p, _) = pga_backtracking(&prob, prob.constraint(), &m.origin(), &cfg)?;
    Ok(p)
}

#[derive(Debug, Clone)]
pub struct Mean2dReport {
    pub points: Vec<HPoint>,
    pub constraint: ConvexSetSpec,
    pub mean: HPoint,
    pub projected_mean: HPoint,
    pub result: HPoint,
    pub trace: SolverTrace,
}

impl Mean2dReport {
    pub fn mean_inside(&self) -> bool {
        self.constraint.contains(&self.mean)
    }

    /// `d(result, P_C(mean))`.
    pub fn gap_to_projected_mean(&self) -> f64 {
        self.constraint.manifold().distance(&self.result, &self.projected_mean)
    }
}

/// Constrained mean of the planar cloud over `B(p_0, radius)`, started at
/// `p_0`. Writes `C2Dball-mean-{n}-*.csv` into `out_dir` when given.
pub fn run_mean2d(cfg: &ExperimentConfig, out_dir: Option<&Path>) -> Result<Mean2dReport> {
    cfg.validate()?;
    let m = ManifoldParams::new(2, 1.0)?;
    let points = generate_experiment_2d(cfg.seed, cfg.n, cfg.noise, cfg.offset)?;
    let constraint = ConvexSetSpec::ball(m, m.origin(), cfg.radius)?;
    run_mean(cfg, out_dir, &format!("C2Dball-mean-{}", cfg.n), m, points, constraint)
}

/// The same experiment in `H^d_1` for each `d` in `cfg.dims`, with the ball
/// and noise schedule of the sweep.
pub fn run_mean_nd(cfg: &ExperimentConfig, out_dir: Option<&Path>) -> Result<Vec<Mean2dReport>> {
    cfg.validate()?;
    cfg.dims
        .iter()
        .map(|&d| {
            let m = ManifoldParams::new(d, 1.0)?;
            let (points, ball) = generate_experiment_nd(cfg.seed, d, cfg.n)?;
            run_mean(cfg, out_dir, &format!("C{d}Dball-mean-{}", cfg.n), m, points, ball)
        })
        .collect()
}

fn run_mean(
    cfg: &ExperimentConfig,
    out_dir: Option<&Path>,
    stem: &str,
    m: ManifoldParams,
    points: Vec<HPoint>,
    constraint: ConvexSetSpec,
) -> Result<Mean2dReport> {
    let file = |tag: &str| out_dir.map(|d| d.join(format!("{stem}-{tag}.csv")));
    if let Some(dir) = out_dir {
        fs::create_dir_all(dir)?;
    }
    if let Some(f) = file("pts") {
        write_points(&f, &m, &points, false)?;
        write_points(&file("pts-poincare").unwrap(), &m, &points, true)?;
    }
    if m.n() == 2 {
        if let (Some(f), SetKind::Ball { center, radius }) = (file("constraint"), constraint.kind()) {
            write_points(&f, &m, &circle(&m, center, *radius, 256)?, true)?;
        }
    }

    let mean = unconstrained_mean(&points, m)?;
    let projected_mean = constraint.project(&mean)?;
    for (tag, p) in [("mean", &mean), ("proj", &projected_mean)] {
        if let Some(f) = file(tag) {
            write_points(&f, &m, std::slice::from_ref(p), false)?;
            write_points(&file(&format!("{tag}-poincare")).unwrap(), &m, std::slice::from_ref(p), true)?;
        }
    }

    let prob = FermatWeberProblem::new(points.clone(), None, 2.0, constraint.clone())?;
    let outcome = solve(&prob, &m.origin(), cfg);
    let partial = match &outcome {
        Ok((_, t)) => Some(t),
        Err(e) => e.trace(),
    };
    if let (Some(f), Some(t)) = (file("cost-pg"), partial) {
        write_costs(&f, &t.costs())?;
    }
    let (result, trace) = outcome?;
    if let Some(f) = file("pg") {
        write_points(&f, &m, std::slice::from_ref(&result), false)?;
        write_points(&file("pg-poincare").unwrap(), &m, std::slice::from_ref(&result), true)?;
    }
    if trace.final_stationarity > cfg.eps {
        return Err(Error::Convergence(format!(
            "no stationary point after {} iterations (measure {:e})",
            trace.iterations(),
            trace.final_stationarity
        )));
    }
    Ok(Mean2dReport {
        points,
        constraint,
        mean,
        projected_mean,
        result,
        trace,
    })
}

fn circle(m: &ManifoldParams, center: &HPoint, r: f64, count: usize) -> Result<Vec<HPoint>> {
    let o = m.origin();
    (0..count)
        .map(|j| {
            let th = 2.0 * std::f64::consts::PI * j as f64 / count as f64;
            let v = m.tangent(&o, vec![r * th.cos(), r * th.sin(), 0.0])?;
            m.exp(&m.parallel_transport(&o, center, &v))
        })
        .collect()
}

const AXES: [&str; 3] = ["x", "y", "z"];

fn header(len: usize) -> Vec<String> {
    (0..len)
        .map(|i| AXES.get(i).map_or_else(|| format!("x{}", i + 1), |s| s.to_string()))
        .collect()
}

fn fmt(v: f64) -> String {
    format!("{v:.16e}")
}

/// Hyperboloid coordinates, or Poincaré-ball coordinates when `poincare`.
pub fn write_points(path: &Path, m: &ManifoldParams, points: &[HPoint], poincare: bool) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    let width = if poincare { m.n() } else { m.dim() };
    w.write_record(header(width)).map_err(csv_err)?;
    for p in points {
        let c = if poincare { m.to_poincare(p) } else { p.coords().to_vec() };
        w.write_record(c.into_iter().map(fmt)).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_costs(path: &Path, costs: &[f64]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record(["i", "c"]).map_err(csv_err)?;
    for (i, c) in costs.iter().enumerate() {
        w.write_record([i.to_string(), fmt(*c)]).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub d: usize,
    pub iters: usize,
    pub time_ms: f64,
    pub cost: f64,
    pub stat: f64,
    pub feasible: bool,
    pub error: Option<String>,
}

fn sweep_row(cfg: &ExperimentConfig, d: usize) -> SweepRow {
    let failed = |e: Error| SweepRow {
        d,
        iters: 0,
        time_ms: f64::NAN,
        cost: f64::NAN,
        stat: f64::NAN,
        feasible: false,
        error: Some(e.to_string()),
    };
    let (points, ball) = match generate_experiment_nd(cfg.seed, d, cfg.n) {
        Ok(x) => x,
        Err(e) => return failed(e),
    };
    let m = *ball.manifold();
    let prob = match FermatWeberProblem::new(points, None, 2.0, ball) {
        Ok(p) => p,
        Err(e) => return failed(e),
    };
    let mut times = Vec::with_capacity(cfg.repeats);
    let mut last = None;
    for _ in 0..cfg.repeats {
        let t = Instant::now();
        let out = solve(&prob, &m.origin(), cfg);
        times.push(t.elapsed().as_secs_f64() * 1e3);
        match out {
            Ok(r) => last = Some(r),
            Err(e) => return failed(e),
        }
    }
    let (p, trace) = last.expect("at least one repeat");
    times.sort_by(f64::total_cmp);
    SweepRow {
        d,
        iters: trace.iterations(),
        time_ms: times[times.len() / 2],
        cost: trace.final_cost,
        stat: trace.final_stationarity,
        feasible: prob.constraint().contains(&p),
        error: None,
    }
}

/// One row per dimension. Rows are computed in parallel, capped by
/// `HYPROJ_THREADS`. Writes `sweep.csv` into `out_dir` when given.
pub fn run_sweep(cfg: &ExperimentConfig, out_dir: Option<&Path>) -> Result<Vec<SweepRow>> {
    cfg.validate()?;
    let threads = std::env::var("HYPROJ_THREADS")
        .ok()
        .and_then(|s| s.parse::<usize>().ok())
        .unwrap_or(0);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Io(std::io::Error::other(e)))?;
    let rows: Vec<SweepRow> = pool.install(|| cfg.dims.par_iter().map(|&d| sweep_row(cfg, d)).collect());
    if let Some(dir) = out_dir {
        fs::create_dir_all(dir)?;
        let mut w = csv::Writer::from_path(dir.join("sweep.csv")).map_err(csv_err)?;
        w.write_record(["d", "iters", "time_ms", "cost", "stat"]).map_err(csv_err)?;
        for r in &rows {
            let iters = if r.error.is_some() { "NaN".to_string() } else { r.iters.to_string() };
            w.write_record([r.d.to_string(), iters, fmt(r.time_ms), fmt(r.cost), fmt(r.stat)])
                .map_err(csv_err)?;
        }
        w.flush()?;
    }
    Ok(rows)
}

/// A measured residual against its tolerance.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub tol: f64,
}

impl Check {
    pub fn passed(&self) -> bool {
        self.value <= self.tol
    }
}

#[derive(Debug, Clone, Default)]
pub struct ProjectTestReport {
    pub checks: Vec<Check>,
}

impl ProjectTestReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(Check::passed)
    }
}

/// The planar test sets, one per variant.
pub fn planar_sets() -> Result<Vec<(&'static str, ConvexSetSpec)>> {
    let m = ManifoldParams::new(2, 1.0)?;
    let c = m.lift(&[0.4, -0.2])?;
    Ok(vec![
        ("ball", ConvexSetSpec::ball(m, c, 0.8)?),
        ("orthant-cap", ConvexSetSpec::orthant_cap(m)?),
        ("simplicial-cap", ConvexSetSpec::simplicial_cap(m, vec![vec![1.0, 0.3], vec![-0.4, 1.0]])?),
        ("circular-cap", ConvexSetSpec::circular_cap(m, 1.3)?),
        ("half-space-cap", ConvexSetSpec::half_space_cap(m, vec![1.0, 0.5, 0.3])?),
    ])
}

/// `count` points of `H^2_1` with spatial part uniform in `[-2, 2]²`.
pub fn random_planar_points(seed: u64, count: usize) -> Result<Vec<HPoint>> {
    let m = ManifoldParams::new(2, 1.0)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| m.lift(&[rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)]))
        .collect()
}

/// Closed form against brute force and certificates for every planar set,
/// Lorentz-path cross-checks for the caps, and the half-space closed form
/// against the natural-equation solver.
pub fn run_project_test(cfg: &ExperimentConfig, points: usize, resolution: usize) -> Result<ProjectTestReport> {
    let ps = random_planar_points(cfg.seed, points)?;
    let mut report = ProjectTestReport::default();
    for (name, set) in planar_sets()? {
        let m = set.manifold();
        let (mut gap, mut cert, mut cross, mut lmp) = (0.0_f64, f64::NEG_INFINITY, 0.0_f64, 0.0_f64);
        for p in &ps {
            let proj = set.project(p)?;
            let (bf, pitch) = brute_force_intrinsic(&set, p, resolution)?;
            gap = gap.max(m.distance(&proj, &bf) / (2.0 * pitch));
            cert = cert.max(certify_projection(&set, p, &proj, 1000).max_violation);
            if set.spanned_cone().is_some() {
                cross = cross.max(m.distance(&proj, &cross_check_via_lorentz(&set, p)?));
                let (comp, feas) = lorentz_certificate(&set, p, &proj)?;
                lmp = lmp.max(comp.abs()).max(feas);
            }
        }
        report.checks.push(Check {
            name: format!("{name}: oracle gap / (2 pitch)"),
            value: gap,
            tol: 1.0,
        });
        report.checks.push(Check {
            name: format!("{name}: certificate violation"),
            value: cert,
            tol: TOL_CERTIFICATE,
        });
        if set.spanned_cone().is_some() {
            report.checks.push(Check {
                name: format!("{name}: Lorentz path vs direct"),
                value: cross,
                tol: 1e-9,
            });
            report.checks.push(Check {
                name: format!("{name}: Lorentz residuals"),
                value: lmp,
                tol: 1e-8,
            });
        }
        if let SetKind::HalfSpaceCap { a } = set.kind() {
            let cone = set.spanned_cone().expect("caps have a spanned cone");
            let mut worst = 0.0_f64;
            for p in &ps {
                let closed = l_project_halfspace_cone(a, p.coords())?;
                let natural = l_project_natural(cone, p.coords(), 1e-15)?.nonzero;
                let scale = crate::linalg::norm(&closed).max(1.0);
                worst = worst.max(crate::linalg::dist(&closed, &natural) / scale);
            }
            report.checks.push(Check {
                name: format!("{name}: closed form vs natural equation"),
                value: worst,
                tol: 1e-9,
            });
        }
    }
    Ok(report)
}
