use std::time::Instant;

use hyrbf::geometry::{generate_nodes, NodeStrategy};
use hyrbf::kernels::Kernel;
use hyrbf::problems;
use hyrbf::quadrature::GradedQuadSpec;
use hyrbf::solver;

fn run(key: &str, n: usize, spec: &str, eps: Option<f64>, rho: Option<f64>, quad: &GradedQuadSpec, res: usize) {
    let problem = problems::problem(key).unwrap();
    let strategy = if problem.domain.dimension() == 1 {
        NodeStrategy::Equispaced
    } else {
        NodeStrategy::Halton
    };
    let t0 = Instant::now();
    let nodes = generate_nodes(&problem.domain, n, strategy, 0).unwrap();
    let kernel = Kernel::parse(spec, eps, rho).unwrap();
    let system = solver::assemble(&problem, &nodes, &kernel, quad).unwrap();
    let sol = solver::solve_dense(&system).unwrap();
    let report = solver::error_report(&sol, &problem, res).unwrap();
    println!(
        "{key} n={n} {spec} eps={eps:?} rho={rho:?} m={} L={} -> mae={:.3e} rmse={:.3e} kappa={:.3e} asm={:.2}s total={:.2}s",
        quad.m(), quad.levels(), report.mae, report.rmse, sol.diagnostics.condition_number,
        sol.diagnostics.assembly_seconds, t0.elapsed().as_secs_f64()
    );
}

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let which = args.get(1).map(String::as_str).unwrap_or("ex1");
    let default = GradedQuadSpec::default();
    let fast = GradedQuadSpec::new(6, 8, 0.01).unwrap();
    match which {
        "ex1" => {
            for (n, eps, rho) in [
                (4usize, 0.05, 5.70e-8),
                (6, 0.24, 2.28e-8),
                (8, 0.33, 3.67e-9),
                (10, 0.43, 3.96e-10),
            ] {
                run("ex1-log-interval", n, "GA+CU", Some(eps), Some(rho), &default, 200);
            }
            run("ex1-log-interval", 10, "GA", Some(0.47), None, &default, 200);
        }
        "ex2" => {
            run("ex2-cos-log", 10, "MQ+CU", Some(0.84), Some(4.78e-10), &default, 200);
            run("ex2-cos-log-pi", 10, "MQ+CU", Some(0.84), Some(4.78e-10), &default, 200);
        }
        "kappa" => {
            run("ex1-log-interval", 10, "CU", None, None, &default, 200);
            run("ex1-log-interval", 10, "GA+CU", Some(0.2), Some(1e-8), &default, 200);
            run("ex1-log-interval", 10, "GA", Some(0.2), None, &default, 200);
            run("ex1-log-interval", 10, "GA+CU", Some(0.05), Some(1e-8), &default, 200);
            run("ex1-log-interval", 10, "GA", Some(0.05), None, &default, 200);
        }
        "ex3" => {
            run("ex3-blade-2d", 21, "GA+CU", Some(0.21), Some(7.28e-8), &default, 40);
            run("ex3-blade-2d", 21, "GA+CU", Some(0.21), Some(7.28e-8), &fast, 40);
        }
        "probe" => {
            use hyrbf::geometry::NodeSet;
            let problem = problems::problem("ex1-log-interval").unwrap();
            let kernel = Kernel::parse("GA+CU", Some(0.43), Some(3.96e-10)).unwrap();
            let layouts: Vec<(&str, Vec<f64>)> = vec![
                ("endpoints", (0..10).map(|i| i as f64 / 9.0).collect()),
                ("midpoints", (0..10).map(|i| (2 * i + 1) as f64 / 20.0).collect()),
                ("interior", (0..10).map(|i| (i + 1) as f64 / 11.0).collect()),
            ];
            for (label, xs) in layouts {
                let points: Vec<Vec<f64>> = xs.iter().map(|&x| vec![x]).collect();
                let nodes = NodeSet { points, fill: 0.1, separation: 0.05 };
                for quad in [&default, &GradedQuadSpec::new(14, 25, 0.01).unwrap()] {
                    let system = solver::assemble(&problem, &nodes, &kernel, quad).unwrap();
                    let sol = solver::solve_dense(&system).unwrap();
                    let report = solver::error_report(&sol, &problem, 200).unwrap();
                    println!(
                        "{label} m={} L={} -> mae={:.3e} kappa={:.3e} resid={:.1e}",
                        quad.m(), quad.levels(), report.mae,
                        sol.diagnostics.condition_number, sol.diagnostics.residual_norm
                    );
                }
            }
        }
        "probe2" => {
            let problem = problems::problem("ex1-log-interval").unwrap();
            let nodes = generate_nodes(&problem.domain, 10, NodeStrategy::Equispaced, 0).unwrap();
            for (label, spec, eps, rho) in [
                ("GA eps=0.43 pure", "GA", Some(0.43), None),
                ("GA eps=0.47 pure", "GA", Some(0.47), None),
                ("GA+CU rho=0", "GA+CU", Some(0.43), Some(0.0)),
                ("GA+CU rho=1e-12", "GA+CU", Some(0.43), Some(1e-12)),
                ("GA+CU rho=3.96e-10", "GA+CU", Some(0.43), Some(3.96e-10)),
                ("GA+CU rho=1e-8", "GA+CU", Some(0.43), Some(1e-8)),
                ("GA+CU rho=1e-6", "GA+CU", Some(0.43), Some(1e-6)),
            ] {
                let kernel = Kernel::parse(spec, eps, rho).unwrap();
                let system = solver::assemble(&problem, &nodes, &kernel, &default).unwrap();
                let sol = solver::solve_dense(&system).unwrap();
                let report = solver::error_report(&sol, &problem, 200).unwrap();

                // Same system solved through a full SVD pseudo-inverse for comparison.
                let svd = system.matrix.clone().svd(true, true);
                let coeffs = svd.solve(&system.rhs_vector, 0.0).unwrap();
                let mut svd_sol = sol.clone();
                svd_sol.coefficients = coeffs;
                let svd_report = solver::error_report(&svd_sol, &problem, 200).unwrap();

                println!(
                    "{label:24} lu_mae={:.3e} svd_mae={:.3e} kappa={:.3e}",
                    report.mae, svd_report.mae, sol.diagnostics.condition_number
                );
            }
        }
        "probe3" => {
            let problem = problems::problem("ex1-log-interval").unwrap();
            let nodes = generate_nodes(&problem.domain, 10, NodeStrategy::Equispaced, 0).unwrap();
            let kernel = Kernel::parse("GA+CU", Some(0.43), Some(3.96e-10)).unwrap();
            let system = solver::assemble(&problem, &nodes, &kernel, &default).unwrap();
            let sol = solver::solve_dense(&system).unwrap();
            let exact = problem.exact.clone().unwrap();
            let grid = problem.domain.evaluation_grid(200).unwrap();
            let mut errs: Vec<(f64, f64)> = grid
                .iter()
                .map(|p| (p[0], (solver::evaluate_solution(&sol, p) - exact(p)).abs()))
                .collect();
            errs.sort_by(|a, b| b.1.total_cmp(&a.1));
            println!("worst 8 of 200:");
            for (x, e) in errs.iter().take(8) {
                println!("  x={x:.4} err={e:.3e}");
            }
            let interior_max = errs
                .iter()
                .filter(|(x, _)| *x > 1e-9 && *x < 1.0 - 1e-9)
                .map(|(_, e)| *e)
                .fold(0.0f64, f64::max);
            println!("interior max {interior_max:.3e}");
            println!("coef norm {:.3e}", sol.coefficients.amax());
        }
        "probe4" => {
            use rand::{Rng, SeedableRng};
            for (key, spec, eps, rho) in [
                ("ex1-log-interval", "GA+CU", 0.43, 3.96e-10),
                ("ex2-cos-log", "MQ+CU", 0.84, 4.78e-10),
            ] {
                let problem = problems::problem(key).unwrap();
                let nodes = generate_nodes(&problem.domain, 10, NodeStrategy::Equispaced, 0).unwrap();
                let kernel = Kernel::parse(spec, Some(eps), Some(rho)).unwrap();
                let system = solver::assemble(&problem, &nodes, &kernel, &default).unwrap();
                let sol = solver::solve_dense(&system).unwrap();
                let exact = problem.exact.clone().unwrap();
                let err_at = |x: f64| (solver::evaluate_solution(&sol, &[x]) - exact(&[x])).abs();

                let grid_mae = (0..200).map(|i| err_at(i as f64 / 199.0)).fold(0.0f64, f64::max);
                let mid_mae = (0..200).map(|i| err_at((i as f64 + 0.5) / 200.0)).fold(0.0f64, f64::max);
                let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
                let rand_mae = (0..200).map(|_| err_at(rng.gen::<f64>())).fold(0.0f64, f64::max);
                let mut worst = (0.0, 0.0f64);
                for i in 0..=2000 {
                    let x = i as f64 / 2000.0;
                    let e = err_at(x);
                    if e > worst.1 {
                        worst = (x, e);
                    }
                }
                println!(
                    "{key}: grid={grid_mae:.3e} midpoints={mid_mae:.3e} random={rand_mae:.3e} sup at x={:.4}: {:.3e}",
                    worst.0, worst.1
                );
            }
        }
        "probe5" => {
            for (key, spec, eps, rho) in [
                ("ex1-log-interval", "GA+CU", 0.43, 3.96e-10),
                ("ex2-cos-log", "MQ+CU", 0.84, 4.78e-10),
            ] {
                let problem = problems::problem(key).unwrap();
                let kernel = Kernel::parse(spec, Some(eps), Some(rho)).unwrap();
                for (label, strategy) in [("halton", NodeStrategy::Halton), ("equispaced", NodeStrategy::Equispaced)] {
                    let nodes = generate_nodes(&problem.domain, 10, strategy, 0).unwrap();
                    let system = solver::assemble(&problem, &nodes, &kernel, &default).unwrap();
                    let sol = solver::solve_dense(&system).unwrap();
                    let report = solver::error_report(&sol, &problem, 200).unwrap();
                    let exact = problem.exact.clone().unwrap();
                    let grid = problem.domain.evaluation_grid(200).unwrap();
                    let mean: f64 = grid
                        .iter()
                        .map(|p| (solver::evaluate_solution(&sol, p) - exact(p)).abs())
                        .sum::<f64>()
                        / grid.len() as f64;
                    println!(
                        "{key} {label}: max={:.3e} mean={:.3e} rmse={:.3e} kappa={:.3e}",
                        report.mae, mean, report.rmse, sol.diagnostics.condition_number
                    );
                }
            }
        }
        "probe6" => {
            let problem = problems::problem("ex1-log-interval").unwrap();
            let nodes = generate_nodes(&problem.domain, 10, NodeStrategy::Equispaced, 0).unwrap();
            for (m, levels) in [(8usize, 11usize), (10, 15), (11, 18), (12, 22), (14, 25)] {
                let quad = GradedQuadSpec::new(m, levels, 0.01).unwrap();
                let mut line = format!("m={m:2} L={levels:2}:");
                for (label, rho) in [("hybrid", Some(1e-8)), ("pure", None)] {
                    let spec = if rho.is_some() { "GA+CU" } else { "GA" };
                    let kernel = Kernel::parse(spec, Some(0.05), rho).unwrap();
                    let system = solver::assemble(&problem, &nodes, &kernel, &quad).unwrap();
                    let sol = solver::solve_dense(&system).unwrap();
                    let report = solver::error_report(&sol, &problem, 200).unwrap();
                    line += &format!(
                        "  {label} rmse={:.3e} |c|={:.1e}",
                        report.rmse,
                        sol.coefficients.amax()
                    );
                }
                println!("{line}");
            }
        }
        "probe7" => {
            let problem = problems::problem("ex3-blade-2d").unwrap();
            let kernel = Kernel::parse("GA+CU", Some(0.21), Some(7.28e-8)).unwrap();
            let exact = problem.exact.clone().unwrap();
            let grid = problem.domain.evaluation_grid(40).unwrap();
            let mut cases: Vec<(String, NodeStrategy, u64)> = (0..6u64)
                .map(|s| (format!("halton seed {s}"), NodeStrategy::Halton, s))
                .collect();
            cases.push(("grid-filtered".into(), NodeStrategy::GridFiltered, 0));
            for (label, strategy, seed) in cases {
                let nodes = generate_nodes(&problem.domain, 21, strategy, seed).unwrap();
                let system = solver::assemble(&problem, &nodes, &kernel, &default).unwrap();
                let sol = solver::solve_dense(&system).unwrap();
                let report = solver::error_report(&sol, &problem, 40).unwrap();
                let mean: f64 = grid
                    .iter()
                    .map(|p| (solver::evaluate_solution(&sol, p) - exact(p)).abs())
                    .sum::<f64>()
                    / grid.len() as f64;
                println!(
                    "{label:>14} (n={}): max={:.3e} mean={:.3e} rmse={:.3e} kappa={:.3e}",
                    nodes.points.len(),
                    report.mae,
                    mean,
                    report.rmse,
                    sol.diagnostics.condition_number
                );
            }
        }
        "probe8" => {
            use hyrbf::reference::{reference_singular_integral, ReferenceLadder};
            use rand::{Rng, SeedableRng};
            let problem = problems::problem("ex6-boxes-3d").unwrap();
            let exact = problem.exact.clone().unwrap();
            let singular = problem.singular_factor.clone();
            let smooth = problem.smooth_factor.clone();
            let ladder = ReferenceLadder::staggered(3);
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
            let mut found = 0;
            while found < 4 {
                let p = vec![
                    rng.gen::<f64>() * 0.3,
                    rng.gen::<f64>() * 1.2 - 0.3,
                    rng.gen::<f64>() * 1.2,
                ];
                if !problem.domain.contains(&p) {
                    continue;
                }
                found += 1;
                let integrand = |t: &[f64], r: f64| singular(&p, t, r) * smooth(&p, t) * exact(t);
                let integral = reference_singular_integral(&problem.domain, &p, 0.01, &ladder, integrand).unwrap();
                let f_val = (problem.rhs)(&p);
                let resid = exact(&p) - problem.lambda * integral - f_val;
                println!(
                    "p=({:.3},{:.3},{:.3}) u={:.6} f={:.6} I={:.6} resid={:.2e}",
                    p[0], p[1], p[2], exact(&p), f_val, integral, resid
                );
            }
        }
        "probe9" => {
            use hyrbf::quadrature::{graded_cgl_1d, GradedQuadSpec};
            let mut worst_defect: (f64, String) = (0.0, String::new());
            let mut worst_quad: (f64, String) = (0.0, String::new());
            let mut worst_defect_grow: (f64, String) = (f64::NEG_INFINITY, String::new());
            let mut worst_quad_grow: (f64, String) = (f64::NEG_INFINITY, String::new());
            for m in 6..=12 {
                for levels in 2..=12 {
                    for k in 0..90 {
                        let sigma = 0.01 + 0.01 * k as f64;
                        if sigma >= 0.9 {
                            continue;
                        }
                        let spec = match GradedQuadSpec::new(m, levels, sigma) {
                            Ok(s) => s,
                            Err(_) => continue,
                        };
                        let fine = match GradedQuadSpec::new(m, 4 * levels, sigma) {
                            Ok(s) => s,
                            Err(_) => continue,
                        };
                        let tag = format!("m={m} L={levels} sigma={sigma:.2}");
                        let defect = |s: &GradedQuadSpec| {
                            (s.unit_nodes().iter().map(|&(_, w)| w).sum::<f64>() - 1.0).abs()
                        };
                        let qerr = |s: &GradedQuadSpec| {
                            (graded_cgl_1d(|y| 1.0 + y + y * y, s).unwrap() - (1.0 + 0.5 + 1.0 / 3.0))
                                .abs()
                        };
                        let (d0, d1) = (defect(&spec), defect(&fine));
                        let (q0, q1) = (qerr(&spec), qerr(&fine));
                        if d0 > worst_defect.0 {
                            worst_defect = (d0, tag.clone());
                        }
                        if q0 > worst_quad.0 {
                            worst_quad = (q0, tag.clone());
                        }
                        let dg = d1 / d0.max(1e-13);
                        if dg > worst_defect_grow.0 {
                            worst_defect_grow = (dg, tag.clone());
                        }
                        let qg = q1 / q0.max(1e-13);
                        if qg > worst_quad_grow.0 {
                            worst_quad_grow = (qg, tag.clone());
                        }
                    }
                }
            }
            println!("worst defect          {:.3e} at {}", worst_defect.0, worst_defect.1);
            println!("worst quadratic error {:.3e} at {}", worst_quad.0, worst_quad.1);
            println!("worst defect ratio d(4L)/max(d(L),1e-13)    {:.3e} at {}", worst_defect_grow.0, worst_defect_grow.1);
            println!("worst quadratic ratio q(4L)/max(q(L),1e-13) {:.3e} at {}", worst_quad_grow.0, worst_quad_grow.1);
        }
        "probe10" => {
            use hyrbf::pso::{optimize, PsoConfig};
            let cost = |e: f64, r: f64| (e - 1.0).powi(2) + (r - 0.5).powi(2);
            for seed in [0u64, 1, 7, 42] {
                let t = std::time::Instant::now();
                let res = optimize(cost, &PsoConfig { seed, ..PsoConfig::default() }).unwrap();
                println!(
                    "seed {seed}: eps {:.3e} (off {:.2e}) rho {:.3e} (off {:.2e}) cost {:.2e} iters {} dt {:.2}s",
                    res.eps_opt,
                    (res.eps_opt - 1.0).abs(),
                    res.rho_opt,
                    (res.rho_opt - 0.5).abs(),
                    res.best_cost,
                    res.iterations_used,
                    t.elapsed().as_secs_f64()
                );
            }
        }
        "ex6ga" => run("ex6-boxes-3d", 39, "GA", Some(0.42), None, &fast, 40),
        "ex6a" => run("ex6-boxes-3d", 39, "GA+CU", Some(0.07), Some(4.77e-8), &fast, 40),
        "ex6b" => run("ex6-boxes-3d", 54, "GA+CU", Some(0.14), Some(6.34e-8), &fast, 40),
        "ex6c" => run("ex6-boxes-3d", 117, "GA+CU", Some(0.26), Some(5.37e-9), &fast, 40),
        other => eprintln!("unknown case {other}"),
    }
}
