use std::num::NonZeroUsize;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use meshgrad::{read_obj, save_gradient, save_matrix_market, save_report, write_obj};
use meshgrad_core::apps::bench::{bench_grid, BENCH_SIZES};
use meshgrad_core::apps::cloth::{cloth_mesh, ClothConfig, ClothSim};
use meshgrad_core::apps::param::{initial_uv, param_problem, rest_triangles, ParamConfig, ParamInit};
use meshgrad_core::apps::smooth::{smooth, smoothing_problem, SmoothMode};
use meshgrad_core::apps::sphere::{current_points, initial_points, rebase, sphere_problem, SphereConfig};
use meshgrad_core::apps::{flatten, unflatten};
use meshgrad_core::{
    gradient_descent_solve, lbfgs_solve, newton_cg_solve, Accumulation, EvalMode, LinearSolver, Problem, ProblemError,
    SolverReport,
};

#[derive(Parser)]
#[command(name = "meshgrad", version, about = "Mesh energies with automatic derivatives")]
struct Cli {
    /// Worker threads for parallel evaluation [default: all cores]
    #[arg(long, global = true)]
    threads: Option<NonZeroUsize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Mass-spring cloth with implicit Euler time stepping
    Cloth(ClothArgs),
    /// Flatten a disk-topology mesh with the symmetric Dirichlet energy
    Param(ParamArgs),
    /// Embed a genus-0 mesh on the unit sphere
    Sphere(SphereArgs),
    /// Laplacian smoothing by gradient descent on squared edge lengths
    Smooth(SmoothArgs),
    /// Time the smoothing gradient on growing grids
    Bench(BenchArgs),
}

#[derive(Args)]
struct Outputs {
    /// Write the result mesh as OBJ
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write the solver report as CSV
    #[arg(long)]
    report: Option<PathBuf>,
    /// Write the Hessian at the final state in MatrixMarket format
    #[arg(long)]
    dump_hessian: Option<PathBuf>,
    /// Write the gradient at the final state in MatrixMarket format
    #[arg(long)]
    dump_gradient: Option<PathBuf>,
}

#[derive(Args)]
struct ClothArgs {
    /// Vertices per side of the square cloth
    #[arg(long, default_value_t = 10)]
    grid: usize,
    #[arg(long, default_value_t = 100)]
    steps: usize,
    /// Time step in seconds
    #[arg(long, default_value_t = 0.01)]
    h: f64,
    /// Spring stiffness
    #[arg(long, default_value_t = 1e4)]
    k: f64,
    /// Mass per unit area
    #[arg(long, default_value_t = 1.0)]
    density: f64,
    /// Side length of the cloth
    #[arg(long, default_value_t = 1.0)]
    width: f64,
    /// Newton iterations per time step
    #[arg(long, default_value_t = 50)]
    newton_iters: usize,
    #[arg(long, value_enum, default_value_t = Linear::Cg)]
    linear: Linear,
    /// Directory for OBJ snapshots
    #[arg(long)]
    snapshot_dir: Option<PathBuf>,
    /// Steps between snapshots
    #[arg(long, default_value_t = 10)]
    snapshot_every: usize,
    #[command(flatten)]
    outputs: Outputs,
}

#[derive(Clone, Copy, ValueEnum)]
enum Linear {
    Cg,
    Dense,
}

#[derive(Clone, Copy, ValueEnum)]
enum Init {
    Tutte,
    Planar,
}

#[derive(Args)]
struct ParamArgs {
    #[arg(long)]
    mesh: PathBuf,
    #[arg(long, value_enum, default_value_t = Init::Tutte)]
    init: Init,
    /// Outer Newton-CG iterations
    #[arg(long, default_value_t = 50)]
    iters: usize,
    /// Relative residual of the inner CG solves
    #[arg(long, default_value_t = 1e-4)]
    cg_tol: f64,
    #[arg(long, default_value_t = 200)]
    cg_iters: usize,
    /// Stop when the gradient max-norm drops below this
    #[arg(long, default_value_t = 1e-6)]
    grad_tol: f64,
    #[command(flatten)]
    outputs: Outputs,
}

#[derive(Args)]
struct SphereArgs {
    #[arg(long)]
    mesh: PathBuf,
    /// L-BFGS iterations
    #[arg(long, default_value_t = 200)]
    iters: usize,
    /// Curvature pairs kept by L-BFGS
    #[arg(long, default_value_t = 8)]
    memory: usize,
    #[arg(long, default_value_t = 1e-6)]
    grad_tol: f64,
    #[command(flatten)]
    outputs: Outputs,
}

#[derive(Args)]
struct SmoothArgs {
    #[arg(long)]
    mesh: PathBuf,
    /// Gradient descent step
    #[arg(long)]
    lambda: f64,
    #[arg(long, default_value_t = 100)]
    iters: usize,
    /// Use the hand-written gradient instead of automatic differentiation
    #[arg(long)]
    manual: bool,
    #[command(flatten)]
    outputs: Outputs,
}

#[derive(Args)]
struct BenchArgs {
    /// Grid sides to time
    #[arg(long, value_delimiter = ',', default_values_t = BENCH_SIZES)]
    sizes: Vec<usize>,
    /// Timed repetitions per size (the median is reported)
    #[arg(long, default_value_t = 10)]
    reps: usize,
    /// Write the timings as CSV
    #[arg(long)]
    report: Option<PathBuf>,
}

/// Evaluation settings shared by all subcommands.
#[derive(Clone, Copy)]
struct Settings {
    threads: Option<NonZeroUsize>,
    accumulation: Accumulation,
}

impl Settings {
    fn apply<const N: usize>(&self, problem: &mut Problem<'_, N>) -> Result<()> {
        if let Some(t) = self.threads {
            problem.set_threads(t.get()).context("building the thread pool")?;
        }
        problem.set_accumulation(self.accumulation);
        Ok(())
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    let deterministic = std::env::var("MESHGRAD_DETERMINISTIC").is_ok_and(|v| v.trim() == "1");
    let settings = Settings {
        threads: cli.threads,
        accumulation: if deterministic { Accumulation::Deterministic } else { Accumulation::Atomic },
    };
    let result = match cli.command {
        Command::Cloth(args) => run_cloth(args, settings),
        Command::Param(args) => run_param(args, settings),
        Command::Sphere(args) => run_sphere(args, settings),
        Command::Smooth(args) => run_smooth(args, settings),
        Command::Bench(args) => run_bench(args, settings),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn print_summary(report: &SolverReport) {
    println!("final energy: {:.12e}", report.final_energy().unwrap_or(f64::NAN));
    println!("iterations: {} ({:?})", report.steps(), report.termination);
    println!("total ms: {:.3}", report.total_ms());
}

/// Writes the report, and the Hessian and gradient of `problem` at its
/// current state, as requested.
fn write_outputs<const N: usize>(
    outputs: &Outputs,
    report: Option<&SolverReport>,
    problem: &mut Problem<'_, N>,
) -> Result<()> {
    if let (Some(path), Some(report)) = (&outputs.report, report) {
        save_report(path, report)?;
    }
    if outputs.dump_hessian.is_some() || outputs.dump_gradient.is_some() {
        problem.set_mode(if outputs.dump_hessian.is_some() {
            EvalMode::GradientAndHessian
        } else {
            EvalMode::GradientOnly
        });
        problem.eval_terms()?;
        if let Some(path) = &outputs.dump_hessian {
            save_matrix_market(path, problem.hessian().ok_or(ProblemError::NoHessian)?)?;
        }
        if let Some(path) = &outputs.dump_gradient {
            save_gradient(path, problem.grad())?;
        }
    }
    Ok(())
}

fn run_cloth(args: ClothArgs, settings: Settings) -> Result<()> {
    let mesh = cloth_mesh(args.grid, args.width)?;
    let mut cfg = ClothConfig {
        grid_n: args.grid,
        width: args.width,
        h: args.h,
        k: args.k,
        mass_density: args.density,
        steps: args.steps,
        linear: match args.linear {
            Linear::Cg => LinearSolver::Cg,
            Linear::Dense => LinearSolver::DirectDense,
        },
        ..ClothConfig::default()
    };
    cfg.solver.max_iters = args.newton_iters;
    if args.snapshot_every == 0 {
        bail!("--snapshot-every must be at least 1");
    }
    if let Some(dir) = &args.snapshot_dir {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }

    let mut sim = ClothSim::new(&mesh, cfg)?;
    settings.apply(sim.problem_mut())?;
    let mut csv = String::from("step,newton_iters,cg_iters,energy_start,energy_end,derivative_ms,total_ms\n");
    let (mut newton, mut derivative_ms, mut total_ms) = (0, 0.0, 0.0);
    let mut last_energy = f64::NAN;
    let mut snapshot_error = None;
    sim.run(|step, s, report| {
        newton += report.steps();
        derivative_ms += report.derivative_ms;
        total_ms += report.total_ms();
        last_energy = report.final_energy().unwrap_or(f64::NAN);
        csv.push_str(&format!(
            "{step},{},{},{},{},{},{}\n",
            report.steps(),
            report.total_inner_iters(),
            report.initial_energy().unwrap_or(f64::NAN),
            last_energy,
            report.derivative_ms,
            report.total_ms()
        ));
        if let Some(dir) = &args.snapshot_dir {
            if (step + 1) % args.snapshot_every == 0 && snapshot_error.is_none() {
                let path = dir.join(format!("frame_{:05}.obj", step + 1));
                snapshot_error = write_obj(&path, &unflatten(s.positions()), mesh.faces()).err();
            }
        }
    })?;
    if let Some(e) = snapshot_error {
        return Err(e.into());
    }

    let steps = sim.steps_taken().max(1) as f64;
    println!("cloth {0}x{0}, {1} steps of h = {2}", args.grid, sim.steps_taken(), args.h);
    println!("final energy: {last_energy:.12e}");
    println!("iterations: {newton} Newton steps");
    println!("total ms: {total_ms:.3}");
    println!("derivative ms per step: {:.3}", derivative_ms / steps);
    if let Some(path) = &args.outputs.out {
        write_obj(path, &unflatten(sim.positions()), mesh.faces())?;
    }
    if let Some(path) = &args.outputs.report {
        write_text(path, &csv)?;
    }
    let outputs = Outputs { report: None, ..args.outputs };
    write_outputs(&outputs, None, sim.problem_mut())
}

fn run_param(args: ParamArgs, settings: Settings) -> Result<()> {
    let mesh = read_obj(&args.mesh)?;
    let init = match args.init {
        Init::Tutte => ParamInit::Tutte,
        Init::Planar => ParamInit::PlanarProject,
    };
    let uv0 = initial_uv(&mesh, init).with_context(|| format!("initializing {}", args.mesh.display()))?;
    let mut problem = param_problem(&mesh, &uv0).with_context(|| format!("setting up {}", args.mesh.display()))?;
    settings.apply(&mut problem)?;
    let mut cfg = ParamConfig::default().solver;
    cfg.max_iters = args.iters;
    cfg.cg_tol = args.cg_tol;
    cfg.cg_max_iters = args.cg_iters;
    cfg.grad_tol = args.grad_tol;
    let report = newton_cg_solve(&mut problem, &cfg)?;

    print_summary(&report);
    let bound = 4.0 * rest_triangles(&mesh)?.iter().map(|t| t.area).sum::<f64>();
    println!("lower bound (isometry): {bound:.12e}");
    if let Some(path) = &args.outputs.out {
        let uv: Vec<[f64; 3]> = unflatten::<2>(problem.x()).iter().map(|p| [p[0], p[1], 0.0]).collect();
        write_obj(path, &uv, mesh.faces())?;
    }
    write_outputs(&args.outputs, Some(&report), &mut problem)
}

fn run_sphere(args: SphereArgs, settings: Settings) -> Result<()> {
    let mesh = read_obj(&args.mesh)?;
    let points = initial_points(&mesh).with_context(|| format!("initializing {}", args.mesh.display()))?;
    let mut problem = sphere_problem(&mesh, &points)?;
    settings.apply(&mut problem)?;
    let mut cfg = SphereConfig::default().solver;
    cfg.max_iters = args.iters;
    cfg.lbfgs_memory = args.memory;
    cfg.grad_tol = args.grad_tol;
    let mut hook = |p: &mut Problem<'_, 2>| rebase(p);
    let report = lbfgs_solve(&mut problem, &cfg, Some(&mut hook))?;

    print_summary(&report);
    if let Some(path) = &args.outputs.out {
        write_obj(path, &current_points(&problem), mesh.faces())?;
    }
    write_outputs(&args.outputs, Some(&report), &mut problem)
}

fn run_smooth(args: SmoothArgs, settings: Settings) -> Result<()> {
    if !(args.lambda > 0.0 && args.lambda.is_finite()) {
        bail!("--lambda must be positive, got {}", args.lambda);
    }
    let mesh = read_obj(&args.mesh)?;
    let (positions, report) = if args.manual {
        let out = smooth(&mesh, args.lambda, args.iters, SmoothMode::Manual)?;
        (out.positions, out.report)
    } else {
        let mut problem = smoothing_problem(&mesh)?;
        settings.apply(&mut problem)?;
        let report = gradient_descent_solve(&mut problem, args.lambda, args.iters)?;
        (unflatten(problem.x()), report)
    };

    print_summary(&report);
    if let Some(path) = &args.outputs.out {
        write_obj(path, &positions, mesh.faces())?;
    }
    let mut problem = smoothing_problem(&mesh)?;
    settings.apply(&mut problem)?;
    problem.set_x(&flatten(&positions))?;
    write_outputs(&args.outputs, Some(&report), &mut problem)
}

fn run_bench(args: BenchArgs, settings: Settings) -> Result<()> {
    if args.sizes.is_empty() || args.sizes.iter().any(|&n| n < 2) {
        bail!("--sizes needs grid sides of at least 2");
    }
    if args.reps == 0 {
        bail!("--reps must be at least 1");
    }
    println!("{:>6} {:>10} {:>10} {:>14}", "grid", "vertices", "edges", "ms/gradient");
    let mut rows = Vec::new();
    for &n in &args.sizes {
        let mut setup = Ok(());
        let row = bench_grid(n, args.reps, settings.accumulation, |p| setup = settings.apply(p))?;
        setup?;
        println!("{:>6} {:>10} {:>10} {:>14.4}", format!("{n}^2"), row.vertices, row.edges, row.ms_per_iter);
        rows.push(row);
    }
    for w in rows.windows(2) {
        let ideal = w[1].vertices as f64 / w[0].vertices as f64;
        println!(
            "scaling {}^2 -> {}^2: {:.2} (vertex ratio {:.2})",
            w[0].n,
            w[1].n,
            w[1].ms_per_iter / w[0].ms_per_iter,
            ideal
        );
    }
    if let Some(path) = &args.report {
        let mut csv = String::from("n,vertices,edges,ms_per_iter,energy\n");
        for r in &rows {
            csv.push_str(&format!("{},{},{},{},{}\n", r.n, r.vertices, r.edges, r.ms_per_iter, r.energy));
        }
        write_text(path, &csv)?;
    }
    Ok(())
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}
