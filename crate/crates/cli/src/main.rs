//! Command line entry point.
//!
//! Exit codes: 0 success, 2 configuration error, 3 numerical failure,
//! 4 failed acceptance check (quad-test), 1 anything else (I/O).

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use hyrbf_cli::drivers::{
    self, execute_converge, execute_pso_tune, execute_quad_test, execute_solve, execute_sweep,
    load_overlay, points_rows, problem_lines, write_converge_csv, write_points_csv,
    write_sweep_csv, ConvergeArgs, PsoTuneArgs, QuadTestArgs, SolveArgs, SweepArgs,
};
use hyrbf_cli::record::write_json;

/// Environment variable that anchors relative output paths.
const OUT_DIR_VAR: &str = "HYRBF_OUT_DIR";

#[derive(Parser)]
#[command(
    name = "hyrbf",
    version,
    about = "Meshless solver experiments for weakly singular Fredholm integral equations"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one benchmark problem and report its error metrics.
    Solve(SolveCmd),
    /// Refine the node count and tabulate errors row by row.
    Converge(ConvergeCmd),
    /// Cross a shape-parameter grid with a list of hybrid weights.
    Sweep(SweepCmd),
    /// Search the kernel parameter plane with the particle swarm.
    PsoTune(PsoTuneCmd),
    /// Check the graded quadrature against oracle integrands.
    QuadTest(QuadTestCmd),
    /// List the registered benchmark problems.
    ListProblems,
}

/// Flags shared by every solver-backed subcommand.
#[derive(Args, Clone, Debug)]
struct CommonOpts {
    /// Problem key (see list-problems).
    #[arg(long)]
    problem: Option<String>,
    /// Kernel specification: GA, MQ, IMQ, TPS, CU, or hybrid forms such
    /// as GA+CU.
    #[arg(long)]
    kernel: Option<String>,
    /// Panels per graded level.
    #[arg(long)]
    m: Option<usize>,
    /// Graded level count.
    #[arg(long = "L")]
    levels: Option<usize>,
    /// Grading strength; defaults to the problem's own hint.
    #[arg(long)]
    sigma: Option<f64>,
    /// Node strategy: equispaced, halton, or grid-filtered.
    #[arg(long)]
    nodes: Option<String>,
    /// Seed of node generation (and of the swarm, for pso-tune).
    #[arg(long)]
    seed: Option<u64>,
    /// Evaluation grid resolution per axis.
    #[arg(long)]
    resolution: Option<usize>,
    /// TOML file whose matching section supplies defaults for unset flags.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SolveCmd {
    #[command(flatten)]
    common: CommonOpts,
    /// Shape parameter of the smooth kernel part.
    #[arg(long)]
    epsilon: Option<f64>,
    /// Hybrid weight of the rough kernel part.
    #[arg(long)]
    rho: Option<f64>,
    /// Node count.
    #[arg(long)]
    n: Option<usize>,
    /// Write the run record as JSON.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write per-point errors on the evaluation grid as CSV.
    #[arg(long)]
    points_csv: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ConvergeCmd {
    #[command(flatten)]
    common: CommonOpts,
    /// Explicit rows n:epsilon:rho (use - for an unset parameter).
    #[arg(long, value_delimiter = ',')]
    rows: Option<Vec<String>>,
    /// Node counts sharing the --epsilon/--rho pair.
    #[arg(long, value_delimiter = ',')]
    n_list: Option<Vec<usize>>,
    /// Shape parameter for --n-list rows.
    #[arg(long)]
    epsilon: Option<f64>,
    /// Hybrid weight for --n-list rows.
    #[arg(long)]
    rho: Option<f64>,
    /// Write the table as CSV.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SweepCmd {
    #[command(flatten)]
    common: CommonOpts,
    /// Node count.
    #[arg(long)]
    n: Option<usize>,
    /// Log-spaced shape-parameter grid min:max:count.
    #[arg(long)]
    eps_grid: Option<String>,
    /// Hybrid weights to cross with the grid; 0 reproduces the pure
    /// smooth kernel.
    #[arg(long, value_delimiter = ',')]
    rho_list: Option<Vec<f64>>,
    /// Write the sweep as CSV.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct PsoTuneCmd {
    #[command(flatten)]
    common: CommonOpts,
    /// Node count.
    #[arg(long)]
    n: Option<usize>,
    /// Particle count.
    #[arg(long)]
    swarm: Option<usize>,
    /// Iteration budget.
    #[arg(long)]
    iters: Option<usize>,
    /// Shape-parameter search box lo:hi.
    #[arg(long)]
    eps_bounds: Option<String>,
    /// Hybrid-weight search box lo:hi; positive bounds search in log
    /// scale.
    #[arg(long)]
    rho_bounds: Option<String>,
    /// Write the tuning record as JSON.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct QuadTestCmd {
    /// Oracle integrand of the rate table: log, inverse-sqrt, power-04,
    /// or constant.
    #[arg(long)]
    oracle: Option<String>,
    /// Panel orders of the rate table.
    #[arg(long, value_delimiter = ',')]
    m_list: Option<Vec<usize>>,
    /// Doubling level counts of the rate table.
    #[arg(long, value_delimiter = ',')]
    levels_list: Option<Vec<usize>>,
    /// Grading strength override; defaults to the oracle's own.
    #[arg(long)]
    sigma: Option<f64>,
}

fn main() {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => std::process::exit(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            std::process::exit(classify(&err));
        }
    }
}

/// Maps failures to the documented exit codes: solver-stage failures are
/// 3, bad configurations 2, everything else (I/O) 1.
fn classify(err: &anyhow::Error) -> i32 {
    match err.downcast_ref::<hyrbf::Error>() {
        Some(e) if e.is_numerical() => 3,
        Some(_) => 2,
        None => 1,
    }
}

/// Anchors a relative output path under `HYRBF_OUT_DIR` when set, then
/// makes sure its parent directory exists.
fn prepare_out(path: &Path) -> anyhow::Result<PathBuf> {
    let resolved = if path.is_absolute() {
        path.to_path_buf()
    } else {
        match std::env::var_os(OUT_DIR_VAR) {
            Some(dir) if !dir.is_empty() => PathBuf::from(dir).join(path),
            _ => path.to_path_buf(),
        }
    };
    if let Some(parent) = resolved.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    Ok(resolved)
}

fn file_section<T: serde::de::DeserializeOwned + Default>(
    config: &Option<PathBuf>,
    section: &str,
) -> anyhow::Result<T> {
    Ok(match config {
        Some(path) => load_overlay(path, section)?,
        None => T::default(),
    })
}

fn run(cli: Cli) -> anyhow::Result<i32> {
    match cli.command {
        Command::Solve(cmd) => run_solve(cmd),
        Command::Converge(cmd) => run_converge(cmd),
        Command::Sweep(cmd) => run_sweep(cmd),
        Command::PsoTune(cmd) => run_pso_tune(cmd),
        Command::QuadTest(cmd) => run_quad_test(cmd),
        Command::ListProblems => run_list_problems(),
    }
}

fn run_solve(cmd: SolveCmd) -> anyhow::Result<i32> {
    let file: SolveArgs = file_section(&cmd.common.config, "solve")?;
    let flags = SolveArgs {
        problem: cmd.common.problem,
        kernel: cmd.common.kernel,
        epsilon: cmd.epsilon,
        rho: cmd.rho,
        n: cmd.n,
        m: cmd.common.m,
        levels: cmd.common.levels,
        sigma: cmd.common.sigma,
        nodes: cmd.common.nodes,
        seed: cmd.common.seed,
        resolution: cmd.common.resolution,
    };
    let config = flags.over(file).resolve()?;
    let output = execute_solve(&config)?;
    let m = &output.record.metrics;
    println!(
        "problem {}  kernel {}  n {}  nodes {}  seed {}",
        config.problem, config.kernel, config.n, config.nodes, config.seed
    );
    println!("mae {:.6e}  rmse {:.6e}  condition_number {:.6e}", m.mae, m.rmse, m.condition_number);
    println!(
        "assembly {:.3} s  solve {:.3} s",
        output.record.metadata.assembly_seconds, output.record.metadata.solve_seconds
    );
    if output.solution.diagnostics.residual_flagged {
        println!("warning: linear-system residual above tolerance");
    }
    if let Some(path) = &cmd.out {
        let path = prepare_out(path)?;
        write_json(&output.record, &path)?;
        println!("wrote {}", path.display());
    }
    if let Some(path) = &cmd.points_csv {
        let path = prepare_out(path)?;
        write_points_csv(&path, &points_rows(&output)?)?;
        println!("wrote {}", path.display());
    }
    Ok(0)
}

fn run_converge(cmd: ConvergeCmd) -> anyhow::Result<i32> {
    let file: ConvergeArgs = file_section(&cmd.common.config, "converge")?;
    let flags = ConvergeArgs {
        problem: cmd.common.problem,
        kernel: cmd.common.kernel,
        rows: cmd.rows,
        n_list: cmd.n_list,
        epsilon: cmd.epsilon,
        rho: cmd.rho,
        m: cmd.common.m,
        levels: cmd.common.levels,
        sigma: cmd.common.sigma,
        nodes: cmd.common.nodes,
        seed: cmd.common.seed,
        resolution: cmd.common.resolution,
    };
    let config = flags.over(file).resolve()?;
    let results = execute_converge(&config)?;
    for (row, _) in &results {
        println!(
            "n {:>5}  h_fill {:.4e}  mae {:.4e}  rmse {:.4e}  condition_number {:.4e}",
            row.n, row.h_fill, row.mae, row.rmse, row.condition_number
        );
    }
    if let Some(path) = &cmd.out {
        let path = prepare_out(path)?;
        let rows: Vec<_> = results.iter().map(|(row, _)| *row).collect();
        write_converge_csv(&path, &rows)?;
        println!("wrote {}", path.display());
    }
    Ok(0)
}

fn run_sweep(cmd: SweepCmd) -> anyhow::Result<i32> {
    let file: SweepArgs = file_section(&cmd.common.config, "sweep")?;
    let flags = SweepArgs {
        problem: cmd.common.problem,
        kernel: cmd.common.kernel,
        n: cmd.n,
        eps_grid: cmd.eps_grid,
        rho_list: cmd.rho_list,
        m: cmd.common.m,
        levels: cmd.common.levels,
        sigma: cmd.common.sigma,
        nodes: cmd.common.nodes,
        seed: cmd.common.seed,
        resolution: cmd.common.resolution,
    };
    let config = flags.over(file).resolve()?;
    let rows = execute_sweep(&config)?;
    let failures = rows.iter().filter(|r| !r.mae.is_finite()).count();
    let best = rows
        .iter()
        .filter(|r| r.mae.is_finite())
        .min_by(|a, b| a.mae.partial_cmp(&b.mae).unwrap());
    println!("{} cells swept, {} numerical failures", rows.len(), failures);
    if let Some(best) = best {
        println!(
            "best cell: epsilon {:.6e}  rho {:.6e}  mae {:.6e}",
            best.epsilon, best.rho, best.mae
        );
    }
    if let Some(path) = &cmd.out {
        let path = prepare_out(path)?;
        write_sweep_csv(&path, &rows)?;
        println!("wrote {}", path.display());
    }
    Ok(0)
}

fn run_pso_tune(cmd: PsoTuneCmd) -> anyhow::Result<i32> {
    let file: PsoTuneArgs = file_section(&cmd.common.config, "pso-tune")?;
    let flags = PsoTuneArgs {
        problem: cmd.common.problem,
        kernel: cmd.common.kernel,
        n: cmd.n,
        swarm: cmd.swarm,
        iters: cmd.iters,
        seed: cmd.common.seed,
        eps_bounds: cmd.eps_bounds,
        rho_bounds: cmd.rho_bounds,
        m: cmd.common.m,
        levels: cmd.common.levels,
        sigma: cmd.common.sigma,
        nodes: cmd.common.nodes,
        resolution: cmd.common.resolution,
    };
    let config = flags.over(file).resolve()?;
    let record = execute_pso_tune(&config)?;
    println!(
        "eps_opt {:.6e}  rho_opt {:.6e}  best_mae {:.6e}  iterations {}",
        record.result.eps_opt,
        record.result.rho_opt,
        record.result.best_mae,
        record.result.iterations_used
    );
    if let Some(path) = &cmd.out {
        let path = prepare_out(path)?;
        write_json(&record, &path)?;
        println!("wrote {}", path.display());
    }
    Ok(0)
}

fn run_quad_test(cmd: QuadTestCmd) -> anyhow::Result<i32> {
    let config = QuadTestArgs {
        oracle: cmd.oracle,
        m_list: cmd.m_list,
        levels_list: cmd.levels_list,
        sigma: cmd.sigma,
    }
    .resolve()?;
    let report = execute_quad_test(&config)?;
    println!("accuracy checks:");
    for row in &report.accuracy {
        println!(
            "  {:<13} m {:>2}  L {:>2}  sigma {:.2}  error {:.3e}  tolerance {:.0e}  {}",
            row.oracle,
            row.m,
            row.levels,
            row.sigma,
            row.error,
            row.tolerance,
            verdict(row.passed)
        );
    }
    println!("rate table ({}):", config.oracle);
    for row in &report.rates {
        println!(
            "  m {:>2}  L {:>3} -> {:>3}  error {:.3e} -> {:.3e}  ratio {:.1}  required {:.1}  {}",
            row.m,
            row.levels_coarse,
            row.levels_fine,
            row.error_coarse,
            row.error_fine,
            row.ratio,
            row.required,
            verdict(row.passed)
        );
    }
    if report.passed {
        println!("quad-test passed");
        Ok(0)
    } else {
        println!("quad-test FAILED");
        Ok(4)
    }
}

fn verdict(passed: bool) -> &'static str {
    if passed {
        "ok"
    } else {
        "FAIL"
    }
}

fn run_list_problems() -> anyhow::Result<i32> {
    for line in problem_lines() {
        println!(
            "{:<18} {}d  {:<7} {}",
            line.key, line.dimension, line.default_kernel, line.description
        );
    }
    println!();
    println!(
        "defaults: m {}, L {}, sigma from the problem, equispaced nodes in 1d and halton otherwise",
        drivers::DEFAULT_M,
        drivers::DEFAULT_LEVELS
    );
    Ok(0)
}
