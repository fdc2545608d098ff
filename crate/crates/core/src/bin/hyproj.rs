use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use hyproj::bench::{self, Command, ExperimentConfig, SolverKind};

#[derive(Parser)]
#[command(name = "hyproj", about = "Projected gradient experiments on the hyperboloid")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Constrained mean of a planar point cloud.
    Mean2d(MeanArgs),
    /// Constrained mean in each dimension of `--dims`.
    MeanNd(SweepArgs),
    /// Iteration counts and timings across dimensions.
    Sweep(SweepArgs),
    /// Projection oracles and certificates on the plane.
    ProjectTest(ProjectArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Solver {
    Constant,
    Backtracking,
}

#[derive(Args)]
struct Common {
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, default_value_t = 1e-7)]
    eps: f64,
    /// Gradient step for the backtracking solver.
    #[arg(long, default_value_t = bench::EXPERIMENT_ALPHA)]
    alpha: f64,
    #[arg(long, value_enum, default_value_t = Solver::Backtracking)]
    solver: Solver,
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Args)]
struct MeanArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, default_value_t = 200)]
    n: usize,
    #[arg(long, default_value_t = 1.0)]
    radius: f64,
    #[arg(long, default_value_t = 1.5)]
    offset: f64,
    #[arg(long, default_value_t = 1.5)]
    noise: f64,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, default_value_t = 400)]
    n: usize,
    /// Comma-separated list, or `lo:hi` for the standard dimensions in range.
    #[arg(long, default_value = "2:200")]
    dims: String,
    #[arg(long, default_value_t = 3)]
    repeats: usize,
}

#[derive(Args)]
struct ProjectArgs {
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, default_value_t = 100)]
    points: usize,
    #[arg(long, default_value_t = 4096)]
    resolution: usize,
}

const STANDARD_DIMS: [usize; 5] = [2, 10, 50, 100, 200];

fn parse_dims(s: &str) -> Result<Vec<usize>, String> {
    if let Some((lo, hi)) = s.split_once(':') {
        let lo: usize = lo.trim().parse().map_err(|e| format!("bad lower bound: {e}"))?;
        let hi: usize = hi.trim().parse().map_err(|e| format!("bad upper bound: {e}"))?;
        return Ok(STANDARD_DIMS.into_iter().filter(|d| (lo..=hi).contains(d)).collect());
    }
    s.split(',')
        .map(|t| t.trim().parse().map_err(|e| format!("bad dimension {t:?}: {e}")))
        .collect()
}

fn base(cmd: Command, c: &Common) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::new(cmd);
    cfg.seed = c.seed;
    cfg.eps = c.eps;
    cfg.out_dir = c.out.clone();
    cfg.backtrack.alpha_lo = c.alpha;
    cfg.backtrack.alpha_hi = c.alpha;
    cfg.solver = match c.solver {
        Solver::Constant => SolverKind::Constant,
        Solver::Backtracking => SolverKind::Backtracking,
    };
    cfg
}

fn sweep_config(cmd: Command, a: &SweepArgs) -> Result<ExperimentConfig, String> {
    let mut cfg = base(cmd, &a.common);
    cfg.n = a.n;
    cfg.dims = parse_dims(&a.dims)?;
    cfg.repeats = a.repeats;
    Ok(cfg)
}

fn run(cli: Cli) -> Result<bool, String> {
    match cli.cmd {
        Cmd::Mean2d(a) => {
            let mut cfg = base(Command::Mean2d, &a.common);
            cfg.n = a.n;
            cfg.radius = a.radius;
            cfg.offset = a.offset;
            cfg.noise = a.noise;
            let r = bench::run_mean2d(&cfg, Some(&cfg.out_dir)).map_err(|e| e.to_string())?;
            println!("mean inside C: {}", r.mean_inside());
            println!("iterations: {}", r.trace.iterations());
            println!("final cost: {:.12e}", r.trace.final_cost);
            println!("stationarity: {:.3e}", r.trace.final_stationarity);
            println!("d(result, projected mean): {:.6e}", r.gap_to_projected_mean());
            Ok(true)
        }
        Cmd::MeanNd(a) => {
            let cfg = sweep_config(Command::MeanNd, &a)?;
            for (d, r) in cfg.dims.iter().zip(bench::run_mean_nd(&cfg, Some(&cfg.out_dir)).map_err(|e| e.to_string())?) {
                println!(
                    "d={d}: iterations {}, stationarity {:.3e}, gap to projected mean {:.6e}",
                    r.trace.iterations(),
                    r.trace.final_stationarity,
                    r.gap_to_projected_mean()
                );
            }
            Ok(true)
        }
        Cmd::Sweep(a) => {
            let cfg = sweep_config(Command::Sweep, &a)?;
            let rows = bench::run_sweep(&cfg, Some(&cfg.out_dir)).map_err(|e| e.to_string())?;
            println!("{:>5} {:>6} {:>12} {:>22} {:>10}", "d", "iters", "time_ms", "cost", "stat");
            let mut ok = true;
            for r in &rows {
                match &r.error {
                    Some(e) => {
                        ok = false;
                        println!("{:>5} failed: {e}", r.d);
                    }
                    None => println!(
                        "{:>5} {:>6} {:>12.3} {:>22.15e} {:>10.3e}",
                        r.d, r.iters, r.time_ms, r.cost, r.stat
                    ),
                }
            }
            Ok(ok)
        }
        Cmd::ProjectTest(a) => {
            let mut cfg = ExperimentConfig::new(Command::ProjectTest);
            cfg.seed = a.seed;
            let report = bench::run_project_test(&cfg, a.points, a.resolution).map_err(|e| e.to_string())?;
            for c in &report.checks {
                let tag = if c.passed() { "ok  " } else { "FAIL" };
                println!("{tag} {:<48} {:.3e} (tol {:.0e})", c.name, c.value, c.tol);
            }
            Ok(report.passed())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
