//! Collocation assembly, dense solve, solution evaluation, and error
//! reporting for second-kind integral equations with weakly singular
//! kernels.
//!
//! The unknown is expanded over radial basis functions centered at the
//! collocation nodes; enforcing the equation at those same nodes yields a
//! dense linear system whose entries combine a direct kernel evaluation
//! with a singular quadrature of the equation kernel against each basis
//! function.

use std::sync::Arc;
use std::time::Instant;

use nalgebra::linalg::SVD;
use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{dist, Domain, NodeSet};
use crate::kernels::Kernel;
use crate::quadrature::GradedQuadSpec;

/// Scalar field over points.
pub type PointFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;
/// Scalar function of a point pair `(x, t)`.
pub type PairFn = Arc<dyn Fn(&[f64], &[f64]) -> f64 + Send + Sync>;
/// Singular kernel factor called as `(x, t, r)` with `r = |x - t|` supplied
/// by the quadrature in exact form; implementations must evaluate the
/// singularity through `r`, never by re-deriving the distance from `t`.
pub type SingularFn = Arc<dyn Fn(&[f64], &[f64], f64) -> f64 + Send + Sync>;

/// One integral equation `u(x) - lambda * F[u](x) = f(x)` with kernel
/// `K(x, t) = R(x, t) * S(x, t)`, `R` carrying the weak singularity at
/// `t = x` and `S` smooth.
#[derive(Clone)]
pub struct Problem {
    /// Integration and collocation region.
    pub domain: Domain,
    /// Coupling coefficient; nonzero for a genuine integral equation
    /// (tests may force 0 to reduce the solve to pure interpolation).
    pub lambda: f64,
    /// Weakly singular factor `R(x, t)`, evaluated through the exact `r`.
    pub singular_factor: SingularFn,
    /// Smooth factor `S(x, t)`.
    pub smooth_factor: PairFn,
    /// Right-hand side `f`.
    pub rhs: PointFn,
    /// Exact solution when known; enables error reports.
    pub exact: Option<PointFn>,
    /// Suggested grading parameter for this kernel's singularity type.
    pub sigma_hint: f64,
}

impl Problem {
    /// Validates `lambda` and the grading hint.
    pub fn new(
        domain: Domain,
        lambda: f64,
        singular_factor: SingularFn,
        smooth_factor: PairFn,
        rhs: PointFn,
        exact: Option<PointFn>,
        sigma_hint: f64,
    ) -> Result<Problem> {
        if lambda == 0.0 || !lambda.is_finite() {
            return Err(Error::Config(format!("lambda must be nonzero and finite, got {lambda}")));
        }
        if !(sigma_hint > 0.0 && sigma_hint < 1.0) {
            return Err(Error::Config(format!("sigma hint must lie in (0, 1), got {sigma_hint}")));
        }
        Ok(Problem { domain, lambda, singular_factor, smooth_factor, rhs, exact, sigma_hint })
    }
}

/// Assembled dense collocation system.
#[derive(Clone, Debug)]
pub struct CollocationSystem {
    /// Entries `psi_j(x_i) - lambda * Q_i[K(x_i, .) psi_j]`; dense and
    /// generally non-symmetric.
    pub matrix: DMatrix<f64>,
    /// Right-hand side samples `f(x_i)`.
    pub rhs_vector: DVector<f64>,
    /// Collocation nodes, doubling as basis centers.
    pub nodes: NodeSet,
    /// Basis kernel.
    pub kernel: Kernel,
    /// Quadrature profile used for the singular integrals.
    pub quad: GradedQuadSpec,
    /// Wall-clock time spent assembling.
    pub assembly_seconds: f64,
}

/// Numerical health data recorded with every solve.
#[derive(Clone, Copy, Debug)]
pub struct SolveDiagnostics {
    /// Spectral condition number of the collocation matrix.
    pub condition_number: f64,
    /// Max-norm residual of the solved system.
    pub residual_norm: f64,
    /// True when the residual exceeds `1e-8 * max(1, |f|_inf)`; the solve
    /// is reported regardless.
    pub residual_flagged: bool,
    /// Wall-clock time of assembly.
    pub assembly_seconds: f64,
    /// Wall-clock time of factorization and back-substitution.
    pub solve_seconds: f64,
}

/// Solved coefficient vector with everything needed to evaluate it.
#[derive(Clone, Debug)]
pub struct Solution {
    /// Basis coefficients, one per node.
    pub coefficients: DVector<f64>,
    /// Basis centers.
    pub nodes: NodeSet,
    /// Basis kernel.
    pub kernel: Kernel,
    /// Conditioning, residual, and timing data.
    pub diagnostics: SolveDiagnostics,
}

/// Grid-sampled error summary of a solution against the exact answer.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ErrorReport {
    /// Maximum absolute error over the evaluation points.
    pub mae: f64,
    /// Root mean square error; never exceeds `mae`.
    pub rmse: f64,
    /// Number of evaluation points.
    pub points: usize,
    /// Grid resolution the points came from.
    pub eval_resolution: usize,
}

/// Assembles the dense collocation system for `problem` over `nodes`.
///
/// Row `i` shares a single quadrature sweep across all basis columns: each
/// node contributes `w * K(x_i, t)` once and `psi_j(t)` per column. A
/// non-finite kernel value fails the row with the offending quadrature
/// node attached (the column index is reported as the row's own, since the
/// kernel factor is column-independent).
pub fn assemble(
    problem: &Problem,
    nodes: &NodeSet,
    kernel: &Kernel,
    quad: &GradedQuadSpec,
) -> Result<CollocationSystem> {
    let n = nodes.len();
    if n == 0 {
        return Err(Error::Config("assembly needs at least one node".to_string()));
    }
    let d = problem.domain.dimension();
    if let Some(p) = nodes.points.iter().find(|p| p.len() != d) {
        return Err(Error::Config(format!(
            "node dimension {} does not match domain dimension {d}",
            p.len()
        )));
    }
    let start = Instant::now();
    let centers = &nodes.points;
    let rows: Vec<Result<Vec<f64>>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let x = &centers[i];
            let mut integrals = vec![0.0; n];
            let mut bad: Option<Vec<f64>> = None;
            if problem.lambda != 0.0 {
                problem.domain.for_each_singular_node(x, quad, |t, w, r| {
                    if bad.is_some() {
                        return;
                    }
                    let k = (problem.singular_factor)(x, t, r) * (problem.smooth_factor)(x, t);
                    if !k.is_finite() {
                        bad = Some(t.to_vec());
                        return;
                    }
                    let wk = w * k;
                    for (acc, c) in integrals.iter_mut().zip(centers) {
                        *acc += wk * kernel.eval(dist(t, c));
                    }
                });
            }
            if let Some(node) = bad {
                return Err(Error::Assembly {
                    row: i,
                    col: i,
                    source: Box::new(Error::NonFiniteIntegrand { node }),
                });
            }
            let mut row = vec![0.0; n];
            for j in 0..n {
                let entry = kernel.eval(dist(x, &centers[j])) - problem.lambda * integrals[j];
                if !entry.is_finite() {
                    return Err(Error::Assembly {
                        row: i,
                        col: j,
                        source: Box::new(Error::Data(format!("entry evaluates to {entry}"))),
                    });
                }
                row[j] = entry;
            }
            Ok(row)
        })
        .collect();

    let mut matrix = DMatrix::zeros(n, n);
    for (i, row) in rows.into_iter().enumerate() {
        for (j, v) in row?.into_iter().enumerate() {
            matrix[(i, j)] = v;
        }
    }
    // Manufactured right-hand sides integrate per call, so rows are worth
    // spreading too.
    let rhs_values: Vec<f64> =
        (0..n).into_par_iter().map(|i| (problem.rhs)(&centers[i])).collect();
    let mut rhs_vector = DVector::zeros(n);
    for (i, v) in rhs_values.into_iter().enumerate() {
        if !v.is_finite() {
            return Err(Error::Data(format!("right-hand side is {v} at node {i}")));
        }
        rhs_vector[i] = v;
    }
    Ok(CollocationSystem {
        matrix,
        rhs_vector,
        nodes: nodes.clone(),
        kernel: *kernel,
        quad: quad.clone(),
        assembly_seconds: start.elapsed().as_secs_f64(),
    })
}

/// Solves the system by LU with row pivoting, recording the condition
/// number, the residual, and whether the residual exceeds the acceptance
/// tolerance (flagged, never rejected).
pub fn solve_dense(system: &CollocationSystem) -> Result<Solution> {
    let kappa = matrix_condition_number(&system.matrix)?;
    let start = Instant::now();
    let lu = system.matrix.clone().lu();
    let coefficients = match lu.solve(&system.rhs_vector) {
        Some(c) if c.iter().all(|v| v.is_finite()) => c,
        _ => return Err(Error::SingularSystem { kappa }),
    };
    let residual_norm = (&system.matrix * &coefficients - &system.rhs_vector).amax();
    let solve_seconds = start.elapsed().as_secs_f64();
    let tol = 1e-8 * system.rhs_vector.amax().max(1.0);
    Ok(Solution {
        coefficients,
        nodes: system.nodes.clone(),
        kernel: system.kernel,
        diagnostics: SolveDiagnostics {
            condition_number: kappa,
            residual_norm,
            residual_flagged: residual_norm > tol,
            assembly_seconds: system.assembly_seconds,
            solve_seconds,
        },
    })
}

/// Spectral condition number of the collocation matrix from its full SVD;
/// infinite when the smallest singular value underflows to zero.
pub fn condition_number(system: &CollocationSystem) -> Result<f64> {
    matrix_condition_number(&system.matrix)
}

fn matrix_condition_number(matrix: &DMatrix<f64>) -> Result<f64> {
    let svd = SVD::try_new(matrix.clone(), false, false, f64::EPSILON, 100_000)
        .ok_or(Error::SvdFailure)?;
    let mut smax = 0.0f64;
    let mut smin = f64::INFINITY;
    for &s in svd.singular_values.iter() {
        smax = smax.max(s);
        smin = smin.min(s);
    }
    if smin == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(smax / smin)
}

/// Evaluates the expansion `sum_j c_j psi(|x - x_j|)` at `x`.
pub fn evaluate_solution(sol: &Solution, x: &[f64]) -> f64 {
    sol.coefficients
        .iter()
        .zip(&sol.nodes.points)
        .map(|(c, center)| c * sol.kernel.eval(dist(x, center)))
        .sum()
}

/// Maximum and root-mean-square error of the solution against the exact
/// answer over the domain's evaluation grid at `resolution`.
pub fn error_report(sol: &Solution, problem: &Problem, resolution: usize) -> Result<ErrorReport> {
    let exact = problem
        .exact
        .as_ref()
        .ok_or_else(|| Error::Config("error report needs an exact solution".to_string()))?;
    let grid = problem.domain.evaluation_grid(resolution)?;
    if grid.is_empty() {
        return Err(Error::Domain("evaluation grid contains no points".to_string()));
    }
    let mut mae = 0.0f64;
    let mut sum_sq = 0.0;
    for p in &grid {
        let e = (exact(p) - evaluate_solution(sol, p)).abs();
        mae = mae.max(e);
        sum_sq += e * e;
    }
    // The true mean square never exceeds the squared maximum; min() only
    // absorbs summation round-off.
    let rmse = (sum_sq / grid.len() as f64).sqrt().min(mae);
    Ok(ErrorReport { mae, rmse, points: grid.len(), eval_resolution: resolution })
}
