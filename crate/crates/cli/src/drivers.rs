//! Experiment drivers behind the binary's subcommands.
//!
//! Each driver takes a fully resolved configuration and produces records
//! or table rows; argument merging, file writing, and exit codes stay in
//! the binary. Everything here is deterministic: identical configurations
//! give bit-identical metrics.

use std::path::Path;
use std::str::FromStr;
use std::time::Instant;

use hyrbf::error::{Error, Result};
use hyrbf::geometry::{generate_nodes, NodeStrategy};
use hyrbf::kernels::Kernel;
use hyrbf::problems;
use hyrbf::pso::{optimize, PsoConfig};
use hyrbf::quadrature::{graded_cgl_1d, GradedQuadSpec};
use hyrbf::solver::{assemble, error_report, solve_dense, Problem, Solution};
use serde::{Deserialize, Serialize};

use crate::record::{
    env_stamp, unix_timestamp, Metadata, Metrics, PsoMetadata, PsoOutcome, PsoRecord, PsoTuneConfig,
    RunRecord, SolveConfig, SCHEMA_VERSION,
};

/// Default quadrature panel order.
pub const DEFAULT_M: usize = 10;
/// Default number of graded levels.
pub const DEFAULT_LEVELS: usize = 15;

fn default_nodes(dimension: usize) -> &'static str {
    if dimension == 1 {
        "equispaced"
    } else {
        "halton"
    }
}

fn default_resolution(dimension: usize) -> usize {
    if dimension == 1 {
        200
    } else {
        40
    }
}

fn require<T>(value: Option<T>, flag: &str) -> Result<T> {
    value.ok_or_else(|| Error::Config(format!("missing required option --{flag}")))
}

fn parse_strategy(name: &str) -> Result<NodeStrategy> {
    NodeStrategy::from_str(name)
}

/// Splits `lo:hi` into an ordered pair.
pub fn parse_bounds(text: &str) -> Result<(f64, f64)> {
    let parts: Vec<&str> = text.split(':').collect();
    let bad = || Error::Config(format!("expected bounds of the form lo:hi, got {text:?}"));
    if parts.len() != 2 {
        return Err(bad());
    }
    let lo: f64 = parts[0].trim().parse().map_err(|_| bad())?;
    let hi: f64 = parts[1].trim().parse().map_err(|_| bad())?;
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(Error::Config(format!("bounds need finite lo < hi, got {text:?}")));
    }
    Ok((lo, hi))
}

/// Expands `min:max:count` into a log-spaced grid.
pub fn parse_log_grid(text: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = text.split(':').collect();
    let bad = || Error::Config(format!("expected a grid of the form min:max:count, got {text:?}"));
    if parts.len() != 3 {
        return Err(bad());
    }
    let min: f64 = parts[0].trim().parse().map_err(|_| bad())?;
    let max: f64 = parts[1].trim().parse().map_err(|_| bad())?;
    let count: usize = parts[2].trim().parse().map_err(|_| bad())?;
    if !(min.is_finite() && max.is_finite() && min > 0.0 && min < max) {
        return Err(Error::Config(format!(
            "log grid needs 0 < min < max, got {text:?}"
        )));
    }
    if count < 2 {
        return Err(Error::Config(format!("log grid needs count >= 2, got {count}")));
    }
    let (a, b) = (min.log10(), max.log10());
    Ok((0..count).map(|k| 10f64.powf(a + (b - a) * k as f64 / (count - 1) as f64)).collect())
}

/// Raw solve options as they arrive from flags or a config file; `None`
/// means unset. Flag values override file values field by field.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveArgs {
    pub problem: Option<String>,
    pub kernel: Option<String>,
    pub epsilon: Option<f64>,
    pub rho: Option<f64>,
    pub n: Option<usize>,
    pub m: Option<usize>,
    #[serde(alias = "L")]
    pub levels: Option<usize>,
    pub sigma: Option<f64>,
    pub nodes: Option<String>,
    pub seed: Option<u64>,
    pub resolution: Option<usize>,
}

impl SolveArgs {
    /// Field-wise merge, keeping `self` where set.
    pub fn over(self, fallback: SolveArgs) -> SolveArgs {
        SolveArgs {
            problem: self.problem.or(fallback.problem),
            kernel: self.kernel.or(fallback.kernel),
            epsilon: self.epsilon.or(fallback.epsilon),
            rho: self.rho.or(fallback.rho),
            n: self.n.or(fallback.n),
            m: self.m.or(fallback.m),
            levels: self.levels.or(fallback.levels),
            sigma: self.sigma.or(fallback.sigma),
            nodes: self.nodes.or(fallback.nodes),
            seed: self.seed.or(fallback.seed),
            resolution: self.resolution.or(fallback.resolution),
        }
    }

    /// Fills defaults (which need the problem's dimension and singularity
    /// hint) and validates the kernel specification.
    pub fn resolve(self) -> Result<SolveConfig> {
        let problem_key = require(self.problem, "problem")?;
        let problem = problems::problem(&problem_key)?;
        let dim = problem.domain.dimension();
        let kernel = require(self.kernel, "kernel")?;
        // Surface bad kernel/parameter combinations before any work.
        Kernel::parse(&kernel, self.epsilon, self.rho)?;
        let nodes = self.nodes.unwrap_or_else(|| default_nodes(dim).to_string());
        parse_strategy(&nodes)?;
        let config = SolveConfig {
            problem: problem_key,
            kernel,
            epsilon: self.epsilon,
            rho: self.rho,
            n: require(self.n, "n")?,
            m: self.m.unwrap_or(DEFAULT_M),
            levels: self.levels.unwrap_or(DEFAULT_LEVELS),
            sigma: self.sigma.unwrap_or(problem.sigma_hint),
            nodes,
            seed: self.seed.unwrap_or(0),
            resolution: self.resolution.unwrap_or_else(|| default_resolution(dim)),
        };
        GradedQuadSpec::new(config.m, config.levels, config.sigma)?;
        Ok(config)
    }
}

/// One solve run: the record plus the pieces needed for optional outputs.
pub struct SolveOutput {
    pub record: RunRecord,
    pub solution: Solution,
    pub problem: Problem,
}

/// Runs one collocation solve from a resolved configuration.
pub fn execute_solve(cfg: &SolveConfig) -> Result<SolveOutput> {
    let problem = problems::problem(&cfg.problem)?;
    let kernel = Kernel::parse(&cfg.kernel, cfg.epsilon, cfg.rho)?;
    let strategy = parse_strategy(&cfg.nodes)?;
    let nodes = generate_nodes(&problem.domain, cfg.n, strategy, cfg.seed)?;
    let quad = GradedQuadSpec::new(cfg.m, cfg.levels, cfg.sigma)?;
    let system = assemble(&problem, &nodes, &kernel, &quad)?;
    let solution = solve_dense(&system)?;
    let report = error_report(&solution, &problem, cfg.resolution)?;
    let record = RunRecord {
        schema_version: SCHEMA_VERSION,
        config: cfg.clone(),
        metrics: Metrics {
            mae: report.mae,
            rmse: report.rmse,
            condition_number: solution.diagnostics.condition_number,
        },
        environment: env_stamp(cfg.seed),
        metadata: Metadata {
            timestamp: unix_timestamp(),
            assembly_seconds: solution.diagnostics.assembly_seconds,
            solve_seconds: solution.diagnostics.solve_seconds,
        },
    };
    Ok(SolveOutput { record, solution, problem })
}

/// Pointwise comparison row of a solve.
#[derive(Clone, Debug)]
pub struct PointRow {
    pub point: Vec<f64>,
    pub exact: f64,
    pub approximate: f64,
    pub abs_error: f64,
}

/// Tabulates the solution against the exact answer on the evaluation grid.
pub fn points_rows(output: &SolveOutput) -> Result<Vec<PointRow>> {
    let exact = output
        .problem
        .exact
        .as_ref()
        .ok_or_else(|| Error::Config("problem declares no exact solution".to_string()))?;
    let grid = output.problem.domain.evaluation_grid(output.record.config.resolution)?;
    Ok(grid
        .into_iter()
        .map(|point| {
            let truth = exact(&point);
            let approx = hyrbf::solver::evaluate_solution(&output.solution, &point);
            PointRow { point, exact: truth, approximate: approx, abs_error: (truth - approx).abs() }
        })
        .collect())
}

/// Writes point rows as CSV with one coordinate column per dimension.
pub fn write_points_csv(path: &Path, rows: &[PointRow]) -> anyhow::Result<()> {
    let mut writer = csv::Writer::from_path(path)?;
    let dim = rows.first().map_or(1, |r| r.point.len());
    let mut header: Vec<String> = (0..dim).map(|k| format!("x{k}")).collect();
    header.extend(["exact", "approximate", "abs_error"].map(String::from));
    writer.write_record(&header)?;
    for row in rows {
        let mut fields: Vec<String> = row.point.iter().map(|v| v.to_string()).collect();
        fields.push(row.exact.to_string());
        fields.push(row.approximate.to_string());
        fields.push(row.abs_error.to_string());
        writer.write_record(&fields)?;
    }
    writer.flush()?;
    Ok(())
}

/// Raw convergence-study options. Rows come either as explicit
/// `n:epsilon:rho` triples or as a node-count list sharing one parameter
/// pair; the two forms are mutually exclusive.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConvergeArgs {
    pub problem: Option<String>,
    pub kernel: Option<String>,
    pub rows: Option<Vec<String>>,
    pub n_list: Option<Vec<usize>>,
    pub epsilon: Option<f64>,
    pub rho: Option<f64>,
    pub m: Option<usize>,
    #[serde(alias = "L")]
    pub levels: Option<usize>,
    pub sigma: Option<f64>,
    pub nodes: Option<String>,
    pub seed: Option<u64>,
    pub resolution: Option<usize>,
}

/// Resolved convergence study: one solve configuration per table row.
#[derive(Clone, Debug)]
pub struct ConvergeConfig {
    pub rows: Vec<SolveConfig>,
}

impl ConvergeArgs {
    pub fn over(self, fallback: ConvergeArgs) -> ConvergeArgs {
        ConvergeArgs {
            problem: self.problem.or(fallback.problem),
            kernel: self.kernel.or(fallback.kernel),
            rows: self.rows.or(fallback.rows),
            n_list: self.n_list.or(fallback.n_list),
            epsilon: self.epsilon.or(fallback.epsilon),
            rho: self.rho.or(fallback.rho),
            m: self.m.or(fallback.m),
            levels: self.levels.or(fallback.levels),
            sigma: self.sigma.or(fallback.sigma),
            nodes: self.nodes.or(fallback.nodes),
            seed: self.seed.or(fallback.seed),
            resolution: self.resolution.or(fallback.resolution),
        }
    }

    pub fn resolve(self) -> Result<ConvergeConfig> {
        let triples: Vec<(usize, Option<f64>, Option<f64>)> = match (&self.rows, &self.n_list) {
            (Some(_), Some(_)) => {
                return Err(Error::Config(
                    "--rows and --n-list are mutually exclusive".to_string(),
                ))
            }
            (None, None) => {
                return Err(Error::Config("one of --rows or --n-list is required".to_string()))
            }
            (Some(rows), None) => rows.iter().map(|r| parse_row_triple(r)).collect::<Result<_>>()?,
            (None, Some(ns)) => ns.iter().map(|&n| (n, self.epsilon, self.rho)).collect(),
        };
        if triples.is_empty() {
            return Err(Error::Config("convergence study needs at least one row".to_string()));
        }
        let rows = triples
            .into_iter()
            .map(|(n, epsilon, rho)| {
                SolveArgs {
                    problem: self.problem.clone(),
                    kernel: self.kernel.clone(),
                    epsilon,
                    rho,
                    n: Some(n),
                    m: self.m,
                    levels: self.levels,
                    sigma: self.sigma,
                    nodes: self.nodes.clone(),
                    seed: self.seed,
                    resolution: self.resolution,
                }
                .resolve()
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(ConvergeConfig { rows })
    }
}

/// Parses one `n:epsilon:rho` row; `epsilon` and `rho` may be `-` for
/// parameter-free kernels.
fn parse_row_triple(text: &str) -> Result<(usize, Option<f64>, Option<f64>)> {
    let parts: Vec<&str> = text.split(':').collect();
    let bad = || Error::Config(format!("expected a row of the form n:epsilon:rho, got {text:?}"));
    if parts.len() != 3 {
        return Err(bad());
    }
    let n: usize = parts[0].trim().parse().map_err(|_| bad())?;
    let opt = |s: &str| -> Result<Option<f64>> {
        let s = s.trim();
        if s == "-" || s.is_empty() {
            Ok(None)
        } else {
            s.parse().map(Some).map_err(|_| bad())
        }
    };
    Ok((n, opt(parts[1])?, opt(parts[2])?))
}

/// One convergence-table row.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct ConvergeRow {
    pub n: usize,
    pub h_fill: f64,
    pub mae: f64,
    pub rmse: f64,
    pub condition_number: f64,
}

/// Runs every row of a convergence study.
pub fn execute_converge(cfg: &ConvergeConfig) -> Result<Vec<(ConvergeRow, RunRecord)>> {
    cfg.rows
        .iter()
        .map(|row_cfg| {
            let output = execute_solve(row_cfg)?;
            let row = ConvergeRow {
                n: row_cfg.n,
                h_fill: output.solution.nodes.fill,
                mae: output.record.metrics.mae,
                rmse: output.record.metrics.rmse,
                condition_number: output.record.metrics.condition_number,
            };
            Ok((row, output.record))
        })
        .collect()
}

/// Writes convergence rows as CSV.
pub fn write_converge_csv(path: &Path, rows: &[ConvergeRow]) -> anyhow::Result<()> {
    let mut writer = csv::Writer::from_path(path)?;
    for row in rows {
        writer.serialize(row)?;
    }
    writer.flush()?;
    Ok(())
}

/// Raw parameter-sweep options.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepArgs {
    pub problem: Option<String>,
    pub kernel: Option<String>,
    pub n: Option<usize>,
    /// Log-spaced shape-parameter grid `min:max:count`.
    pub eps_grid: Option<String>,
    /// Hybrid weights to cross with the grid; `0` reproduces the pure
    /// smooth kernel exactly.
    pub rho_list: Option<Vec<f64>>,
    pub m: Option<usize>,
    #[serde(alias = "L")]
    pub levels: Option<usize>,
    pub sigma: Option<f64>,
    pub nodes: Option<String>,
    pub seed: Option<u64>,
    pub resolution: Option<usize>,
}

/// Resolved sweep: the solve template plus the two parameter axes.
#[derive(Clone, Debug)]
pub struct SweepConfig {
    pub base: SolveConfig,
    pub eps_values: Vec<f64>,
    pub rho_values: Vec<f64>,
}

impl SweepArgs {
    pub fn over(self, fallback: SweepArgs) -> SweepArgs {
        SweepArgs {
            problem: self.problem.or(fallback.problem),
            kernel: self.kernel.or(fallback.kernel),
            n: self.n.or(fallback.n),
            eps_grid: self.eps_grid.or(fallback.eps_grid),
            rho_list: self.rho_list.or(fallback.rho_list),
            m: self.m.or(fallback.m),
            levels: self.levels.or(fallback.levels),
            sigma: self.sigma.or(fallback.sigma),
            nodes: self.nodes.or(fallback.nodes),
            seed: self.seed.or(fallback.seed),
            resolution: self.resolution.or(fallback.resolution),
        }
    }

    pub fn resolve(self) -> Result<SweepConfig> {
        let eps_values = parse_log_grid(&require(self.eps_grid.clone(), "eps-grid")?)?;
        let rho_values = require(self.rho_list.clone(), "rho-list")?;
        if rho_values.is_empty() {
            return Err(Error::Config("sweep needs at least one hybrid weight".to_string()));
        }
        if let Some(&bad) = rho_values.iter().find(|r| !(r.is_finite() && **r >= 0.0)) {
            return Err(Error::Config(format!("hybrid weights must be >= 0, got {bad}")));
        }
        let base = SolveArgs {
            problem: self.problem,
            kernel: self.kernel,
            epsilon: Some(eps_values[0]),
            rho: Some(rho_values[0]),
            n: self.n,
            m: self.m,
            levels: self.levels,
            sigma: self.sigma,
            nodes: self.nodes,
            seed: self.seed,
            resolution: self.resolution,
        }
        .resolve()?;
        Ok(SweepConfig { base, eps_values, rho_values })
    }
}

/// One sweep cell; metrics are NaN when the solve failed numerically.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct SweepRow {
    pub epsilon: f64,
    pub rho: f64,
    pub mae: f64,
    pub rmse: f64,
    pub condition_number: f64,
}

/// Crosses the two parameter axes, one solve per cell. Numerical failures
/// produce NaN metrics and the sweep continues; configuration errors still
/// abort.
pub fn execute_sweep(cfg: &SweepConfig) -> Result<Vec<SweepRow>> {
    let mut rows = Vec::with_capacity(cfg.eps_values.len() * cfg.rho_values.len());
    for &epsilon in &cfg.eps_values {
        for &rho in &cfg.rho_values {
            let mut cell = cfg.base.clone();
            cell.epsilon = Some(epsilon);
            cell.rho = Some(rho);
            let row = match execute_solve(&cell) {
                Ok(output) => SweepRow {
                    epsilon,
                    rho,
                    mae: output.record.metrics.mae,
                    rmse: output.record.metrics.rmse,
                    condition_number: output.record.metrics.condition_number,
                },
                Err(err) if err.is_numerical() => SweepRow {
                    epsilon,
                    rho,
                    mae: f64::NAN,
                    rmse: f64::NAN,
                    condition_number: f64::NAN,
                },
                Err(err) => return Err(err),
            };
            rows.push(row);
        }
    }
    Ok(rows)
}

/// Writes sweep rows as CSV.
pub fn write_sweep_csv(path: &Path, rows: &[SweepRow]) -> anyhow::Result<()> {
    let mut writer = csv::Writer::from_path(path)?;
    for row in rows {
        writer.serialize(row)?;
    }
    writer.flush()?;
    Ok(())
}

/// Raw quadrature self-test options.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadTestArgs {
    /// Oracle integrand for the convergence-rate table.
    pub oracle: Option<String>,
    pub m_list: Option<Vec<usize>>,
    pub levels_list: Option<Vec<usize>>,
    pub sigma: Option<f64>,
}

/// Oracle integrand on (0, 1] with a known integral and a grading
/// exponent adequate for its endpoint singularity.
#[derive(Clone, Copy)]
pub struct QuadOracle {
    pub name: &'static str,
    pub integrand: fn(f64) -> f64,
    pub exact: f64,
    pub sigma: f64,
}

/// Built-in oracle integrands.
pub fn quad_oracles() -> Vec<QuadOracle> {
    vec![
        QuadOracle { name: "log", integrand: |y| y.ln(), exact: -1.0, sigma: 0.01 },
        QuadOracle {
            name: "inverse-sqrt",
            integrand: |y| 1.0 / y.sqrt(),
            exact: 2.0,
            sigma: 0.51,
        },
        QuadOracle {
            name: "power-04",
            integrand: |y| y.powf(-0.4),
            exact: 1.0 / 0.6,
            sigma: 0.41,
        },
        QuadOracle { name: "constant", integrand: |_| 1.0, exact: 1.0, sigma: 0.01 },
    ]
}

fn quad_oracle(name: &str) -> Result<QuadOracle> {
    quad_oracles().into_iter().find(|o| o.name == name).ok_or_else(|| {
        let names: Vec<&str> = quad_oracles().iter().map(|o| o.name).collect();
        Error::Config(format!("unknown oracle {name:?}; known oracles: {}", names.join(", ")))
    })
}

/// Resolved quadrature self-test.
#[derive(Clone, Debug)]
pub struct QuadTestConfig {
    pub oracle: String,
    pub m_list: Vec<usize>,
    pub levels_list: Vec<usize>,
    pub sigma: Option<f64>,
}

impl QuadTestArgs {
    pub fn resolve(self) -> Result<QuadTestConfig> {
        let oracle = self.oracle.unwrap_or_else(|| "power-04".to_string());
        quad_oracle(&oracle)?;
        let m_list = self.m_list.unwrap_or_else(|| vec![2, 3]);
        let levels_list = self.levels_list.unwrap_or_else(|| vec![2, 4, 8]);
        if m_list.is_empty() || levels_list.len() < 2 {
            return Err(Error::Config(
                "rate table needs at least one panel order and two level counts".to_string(),
            ));
        }
        if levels_list.windows(2).any(|w| w[1] != 2 * w[0]) {
            return Err(Error::Config(
                "level counts must double between rate-table columns".to_string(),
            ));
        }
        Ok(QuadTestConfig { oracle, m_list, levels_list, sigma: self.sigma })
    }
}

/// One fixed-specification accuracy check.
#[derive(Clone, Debug)]
pub struct AccuracyRow {
    pub oracle: &'static str,
    pub m: usize,
    pub levels: usize,
    pub sigma: f64,
    pub error: f64,
    pub tolerance: f64,
    pub passed: bool,
}

/// One refinement step of the rate table.
#[derive(Clone, Debug)]
pub struct RateRow {
    pub m: usize,
    pub levels_coarse: usize,
    pub levels_fine: usize,
    pub error_coarse: f64,
    pub error_fine: f64,
    pub ratio: f64,
    pub required: f64,
    pub passed: bool,
}

/// Quadrature self-test outcome.
#[derive(Clone, Debug)]
pub struct QuadTestReport {
    pub accuracy: Vec<AccuracyRow>,
    pub rates: Vec<RateRow>,
    pub passed: bool,
}

fn graded_error(oracle: &QuadOracle, m: usize, levels: usize, sigma: f64) -> Result<f64> {
    let spec = GradedQuadSpec::new(m, levels, sigma)?;
    let value = graded_cgl_1d(oracle.integrand, &spec)?;
    Ok((value - oracle.exact).abs())
}

/// Runs the fixed accuracy checks and the requested rate table.
///
/// The rate check is one-sided: each level doubling must shrink the error
/// by at least `2^(2m) / 4`, a factor-4 slack on the graded rule's order.
/// Steps whose fine error is already at round-off (below `1e-13` times the
/// integral's magnitude) pass unconditionally.
pub fn execute_quad_test(cfg: &QuadTestConfig) -> Result<QuadTestReport> {
    let fixed: [(&str, usize, usize, f64); 3] = [
        ("log", DEFAULT_M, DEFAULT_LEVELS, 1e-12),
        ("inverse-sqrt", DEFAULT_M, DEFAULT_LEVELS, 1e-10),
        ("constant", DEFAULT_M, DEFAULT_LEVELS, 1e-13),
    ];
    let mut accuracy = Vec::new();
    for (name, m, levels, tolerance) in fixed {
        let oracle = quad_oracle(name)?;
        let error = graded_error(&oracle, m, levels, oracle.sigma)?;
        accuracy.push(AccuracyRow {
            oracle: oracle.name,
            m,
            levels,
            sigma: oracle.sigma,
            error,
            tolerance,
            passed: error <= tolerance,
        });
    }

    let oracle = quad_oracle(&cfg.oracle)?;
    let sigma = cfg.sigma.unwrap_or(oracle.sigma);
    let floor = 1e-13 * oracle.exact.abs().max(1.0);
    let mut rates = Vec::new();
    for &m in &cfg.m_list {
        let errors: Vec<f64> = cfg
            .levels_list
            .iter()
            .map(|&levels| graded_error(&oracle, m, levels, sigma))
            .collect::<Result<_>>()?;
        let required = 4f64.powi(m as i32) / 4.0;
        for (step, pair) in errors.windows(2).enumerate() {
            let (coarse, fine) = (pair[0], pair[1]);
            let ratio = coarse / fine;
            let passed = fine <= floor || ratio >= required;
            rates.push(RateRow {
                m,
                levels_coarse: cfg.levels_list[step],
                levels_fine: cfg.levels_list[step + 1],
                error_coarse: coarse,
                error_fine: fine,
                ratio,
                required,
                passed,
            });
        }
    }
    let passed = accuracy.iter().all(|r| r.passed) && rates.iter().all(|r| r.passed);
    Ok(QuadTestReport { accuracy, rates, passed })
}

/// Raw parameter-tuning options.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PsoTuneArgs {
    pub problem: Option<String>,
    pub kernel: Option<String>,
    pub n: Option<usize>,
    pub swarm: Option<usize>,
    pub iters: Option<usize>,
    pub seed: Option<u64>,
    /// Shape-parameter search box `lo:hi`.
    pub eps_bounds: Option<String>,
    /// Hybrid-weight search box `lo:hi`; strictly positive bounds switch
    /// the search to log scale.
    pub rho_bounds: Option<String>,
    pub m: Option<usize>,
    #[serde(alias = "L")]
    pub levels: Option<usize>,
    pub sigma: Option<f64>,
    pub nodes: Option<String>,
    pub resolution: Option<usize>,
}

impl PsoTuneArgs {
    pub fn over(self, fallback: PsoTuneArgs) -> PsoTuneArgs {
        PsoTuneArgs {
            problem: self.problem.or(fallback.problem),
            kernel: self.kernel.or(fallback.kernel),
            n: self.n.or(fallback.n),
            swarm: self.swarm.or(fallback.swarm),
            iters: self.iters.or(fallback.iters),
            seed: self.seed.or(fallback.seed),
            eps_bounds: self.eps_bounds.or(fallback.eps_bounds),
            rho_bounds: self.rho_bounds.or(fallback.rho_bounds),
            m: self.m.or(fallback.m),
            levels: self.levels.or(fallback.levels),
            sigma: self.sigma.or(fallback.sigma),
            nodes: self.nodes.or(fallback.nodes),
            resolution: self.resolution.or(fallback.resolution),
        }
    }

    pub fn resolve(self) -> Result<PsoTuneConfig> {
        let problem_key = require(self.problem, "problem")?;
        let problem = problems::problem(&problem_key)?;
        let dim = problem.domain.dimension();
        let kernel = require(self.kernel, "kernel")?;
        let eps_bounds = parse_bounds(self.eps_bounds.as_deref().unwrap_or("0.01:2"))?;
        let rho_bounds = parse_bounds(self.rho_bounds.as_deref().unwrap_or("1e-12:1e-6"))?;
        // The tuner varies both coordinates, so the kernel must accept
        // a shape parameter and a hybrid weight.
        Kernel::parse(&kernel, Some(eps_bounds.1), Some(rho_bounds.1))?;
        let nodes = self.nodes.unwrap_or_else(|| default_nodes(dim).to_string());
        parse_strategy(&nodes)?;
        let config = PsoTuneConfig {
            problem: problem_key,
            kernel,
            n: require(self.n, "n")?,
            m: self.m.unwrap_or(DEFAULT_M),
            levels: self.levels.unwrap_or(DEFAULT_LEVELS),
            sigma: self.sigma.unwrap_or(problem.sigma_hint),
            nodes,
            seed: self.seed.unwrap_or(0),
            resolution: self.resolution.unwrap_or_else(|| default_resolution(dim)),
            swarm: self.swarm.unwrap_or(20),
            iters: self.iters.unwrap_or(60),
            eps_bounds,
            rho_bounds,
        };
        GradedQuadSpec::new(config.m, config.levels, config.sigma)?;
        Ok(config)
    }
}

/// Swarm-searches the kernel parameter plane, scoring each candidate by
/// the solve error it produces on fixed nodes and quadrature. Candidates
/// whose solve fails score infinite and are skipped over by the swarm.
pub fn execute_pso_tune(cfg: &PsoTuneConfig) -> Result<PsoRecord> {
    let problem = problems::problem(&cfg.problem)?;
    let strategy = parse_strategy(&cfg.nodes)?;
    let nodes = generate_nodes(&problem.domain, cfg.n, strategy, cfg.seed)?;
    let quad = GradedQuadSpec::new(cfg.m, cfg.levels, cfg.sigma)?;
    let start = Instant::now();
    let cost = |epsilon: f64, rho: f64| -> f64 {
        let attempt = || -> Result<f64> {
            let kernel = Kernel::parse(&cfg.kernel, Some(epsilon), Some(rho))?;
            let system = assemble(&problem, &nodes, &kernel, &quad)?;
            let solution = solve_dense(&system)?;
            Ok(error_report(&solution, &problem, cfg.resolution)?.mae)
        };
        attempt().unwrap_or(f64::INFINITY)
    };
    let pso_config = PsoConfig {
        swarm_size: cfg.swarm,
        max_iters: cfg.iters,
        bounds: [cfg.eps_bounds, cfg.rho_bounds],
        seed: cfg.seed,
        log_rho: cfg.rho_bounds.0 > 0.0,
        ..PsoConfig::default()
    };
    let result = optimize(cost, &pso_config)?;
    Ok(PsoRecord {
        schema_version: SCHEMA_VERSION,
        config: cfg.clone(),
        result: PsoOutcome {
            eps_opt: result.eps_opt,
            rho_opt: result.rho_opt,
            best_mae: result.best_cost,
            iterations_used: result.iterations_used,
            history: result.history,
        },
        environment: env_stamp(cfg.seed),
        metadata: PsoMetadata { timestamp: unix_timestamp(), tune_seconds: start.elapsed().as_secs_f64() },
    })
}

/// One line of the problem catalog.
#[derive(Clone, Debug)]
pub struct ProblemLine {
    pub key: &'static str,
    pub dimension: usize,
    pub default_kernel: &'static str,
    pub description: &'static str,
}

/// Catalog of registered problems.
pub fn problem_lines() -> Vec<ProblemLine> {
    problems::registry()
        .into_iter()
        .map(|entry| ProblemLine {
            key: entry.key,
            dimension: entry.problem().domain.dimension(),
            default_kernel: entry.default_kernel,
            description: entry.description,
        })
        .collect()
}

/// Loads one command's section of a TOML config file; a missing section
/// yields the all-unset value.
pub fn load_overlay<T: serde::de::DeserializeOwned + Default>(
    path: &Path,
    section: &str,
) -> Result<T> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read config file {}: {e}", path.display())))?;
    let table: toml::Table = text
        .parse()
        .map_err(|e| Error::Config(format!("config file {}: {e}", path.display())))?;
    match table.get(section) {
        None => Ok(T::default()),
        Some(value) => value.clone().try_into().map_err(|e| {
            Error::Config(format!("config file {} section [{section}]: {e}", path.display()))
        }),
    }
}
