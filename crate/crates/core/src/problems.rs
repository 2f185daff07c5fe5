//! Built-in benchmark problems.
//!
//! Each entry packages one weakly singular integral equation with a known
//! exact solution. Problems whose literature source prints only the exact
//! solution get a manufactured right-hand side: `f = u - lambda F[u]` with
//! the integral evaluated by the self-validating reference integrator and
//! cached per evaluation point.

use std::collections::HashMap;
use std::f64::consts::{LN_2, PI};
use std::sync::{Arc, Mutex};

use crate::error::{Error, Result};
use crate::geometry::Domain;
use crate::reference::{reference_singular_integral, ReferenceLadder};
use crate::solver::{PairFn, PointFn, Problem, SingularFn};

/// One catalog row: a stable key, a human description, the kernel spec the
/// original experiments used, and the problem constructor.
#[derive(Clone, Copy, Debug)]
pub struct RegistryEntry {
    pub key: &'static str,
    pub description: &'static str,
    pub default_kernel: &'static str,
    build: fn() -> Problem,
}

impl RegistryEntry {
    /// Builds a fresh problem instance (manufactured-rhs caches start
    /// empty per instance).
    pub fn problem(&self) -> Problem {
        (self.build)()
    }
}

/// The full problem catalog.
pub fn registry() -> Vec<RegistryEntry> {
    vec![
        RegistryEntry {
            key: "ex1-log-interval",
            description: "log kernel on the unit interval, cubic exact solution",
            default_kernel: "GA+CU",
            build: ex1,
        },
        RegistryEntry {
            key: "ex2-cos-log",
            description: "cosine-difference log kernel rescaled to the unit interval, constant exact solution",
            default_kernel: "MQ+CU",
            build: ex2,
        },
        RegistryEntry {
            key: "ex2-cos-log-pi",
            description: "cosine-difference log kernel on its original interval, constant exact solution",
            default_kernel: "MQ+CU",
            build: ex2_pi,
        },
        RegistryEntry {
            key: "ex3-blade-2d",
            description: "log-distance kernel over the blade region, exponential exact solution",
            default_kernel: "GA+CU",
            build: ex3,
        },
        RegistryEntry {
            key: "ex4-crescent-2d",
            description: "log-distance kernel over the crescent region, sinc-like exact solution",
            default_kernel: "GA+CU",
            build: ex4,
        },
        RegistryEntry {
            key: "ex5-annulus-2d",
            description: "log-distance kernel over the annular region, log-ratio exact solution",
            default_kernel: "GA+TPS",
            build: ex5,
        },
        RegistryEntry {
            key: "ex6-boxes-3d",
            description: "log-distance kernel over the staircase union of boxes, rational exact solution",
            default_kernel: "GA+CU",
            build: ex6,
        },
    ]
}

/// Looks a problem up by key.
pub fn problem(key: &str) -> Result<Problem> {
    registry().into_iter().find(|e| e.key == key).map(|e| e.problem()).ok_or_else(|| {
        let keys: Vec<&str> = registry().iter().map(|e| e.key).collect();
        Error::Config(format!("unknown problem key {key:?}; known keys: {}", keys.join(", ")))
    })
}

/// Right-hand side consistent with the declared exact solution:
/// `f(x) = u(x) - lambda * I(x)` with `I(x)` the singular integral of
/// `K(x, .) u` evaluated through the escalation ladder. Values are cached
/// by the bit pattern of `x`; a ladder that fails to certify yields NaN,
/// which assembly rejects with the offending node attached.
pub fn manufactured_rhs(
    domain: &Domain,
    lambda: f64,
    singular: &SingularFn,
    smooth: &PairFn,
    exact: &PointFn,
    sigma: f64,
    ladder: ReferenceLadder,
) -> PointFn {
    let domain = domain.clone();
    let singular = Arc::clone(singular);
    let smooth = Arc::clone(smooth);
    let exact = Arc::clone(exact);
    let cache: Mutex<HashMap<Vec<u64>, f64>> = Mutex::new(HashMap::new());
    Arc::new(move |x: &[f64]| {
        let key: Vec<u64> = x.iter().map(|v| v.to_bits()).collect();
        if let Some(&v) = cache.lock().unwrap().get(&key) {
            return v;
        }
        let integral = reference_singular_integral(&domain, x, sigma, &ladder, |t, r| {
            singular(x, t, r) * smooth(x, t) * exact(t)
        });
        let v = match integral {
            Ok(i) => exact(x) - lambda * i,
            Err(_) => f64::NAN,
        };
        cache.lock().unwrap().insert(key, v);
        v
    })
}

/// Stable form of `ln |cos(a x) - cos(a t)|` through the exact node
/// distance: the product identity gives
/// `2 sin(a r / 2) |sin(a (x + t) / 2)|`, putting the diagonal singularity
/// entirely into the `r` factor.
fn ln_cos_difference(a: f64, x: f64, t: f64, r: f64) -> f64 {
    LN_2 + (0.5 * a * r).sin().ln() + (0.5 * a * (x + t)).sin().abs().ln()
}

fn ex1() -> Problem {
    Problem {
        domain: Domain::from_key("interval01").unwrap(),
        lambda: 1.0,
        singular_factor: Arc::new(|_, _, r| r.ln()),
        smooth_factor: Arc::new(|_, _| 1.0),
        rhs: Arc::new(|p: &[f64]| {
            let x = p[0];
            // (x^3 - x) ln((1-x)/x) extends continuously by 0 to both ends.
            let tail = if x <= 0.0 || x >= 1.0 {
                0.0
            } else {
                (x.powi(3) - x) * ((1.0 - x) / x).ln()
            };
            tail + 4.0 * x * x + 0.5 * x - 5.0 / 3.0
        }),
        exact: Some(Arc::new(|p: &[f64]| 3.0 * p[0] * p[0] - 1.0)),
        sigma_hint: 0.01,
    }
}

const EX2_EXACT: f64 = 1.0 / (PI * LN_2 + 1.0);

fn ex2() -> Problem {
    Problem {
        domain: Domain::from_key("interval01").unwrap(),
        lambda: 1.0,
        singular_factor: Arc::new(|x: &[f64], t: &[f64], r| ln_cos_difference(PI, x[0], t[0], r)),
        // Jacobian of rescaling the original interval onto [0, 1].
        smooth_factor: Arc::new(|_, _| PI),
        rhs: Arc::new(|_| 1.0),
        exact: Some(Arc::new(|_| EX2_EXACT)),
        sigma_hint: 0.01,
    }
}

fn ex2_pi() -> Problem {
    Problem {
        domain: Domain::interval(0.0, PI).unwrap(),
        lambda: 1.0,
        singular_factor: Arc::new(|x: &[f64], t: &[f64], r| ln_cos_difference(1.0, x[0], t[0], r)),
        smooth_factor: Arc::new(|_, _| 1.0),
        rhs: Arc::new(|_| 1.0),
        exact: Some(Arc::new(|_| EX2_EXACT)),
        sigma_hint: 0.01,
    }
}

fn ex3() -> Problem {
    let domain = Domain::from_key("example3-blade").unwrap();
    let singular: SingularFn = Arc::new(|_, _, r| r.ln());
    let smooth: PairFn =
        Arc::new(|x: &[f64], t: &[f64]| (x[0] + x[1]) / (t[0] * t[0] + t[1] * t[1] + 1.0).sqrt());
    let exact: PointFn = Arc::new(|p: &[f64]| (0.5 * (p[0] + p[1] - 3.0)).exp());
    let rhs =
        manufactured_rhs(&domain, 1.0, &singular, &smooth, &exact, 0.01, ReferenceLadder::for_dimension(2));
    Problem {
        domain,
        lambda: 1.0,
        singular_factor: singular,
        smooth_factor: smooth,
        rhs,
        exact: Some(exact),
        sigma_hint: 0.01,
    }
}

fn ex4() -> Problem {
    let domain = Domain::from_key("example4-crescent").unwrap();
    let singular: SingularFn = Arc::new(|_, _, r| r.ln());
    let smooth: PairFn = Arc::new(|x: &[f64], t: &[f64]| {
        let sum = x[0] + x[1];
        sum.sin() / ((sum + 2.0) * (t[0] * t[0] + t[1] * t[1]).exp())
    });
    let exact: PointFn = Arc::new(|p: &[f64]| {
        let a = p[0] + p[1] + 1.0;
        a.sin() / a
    });
    let rhs =
        manufactured_rhs(&domain, 1.0, &singular, &smooth, &exact, 0.01, ReferenceLadder::for_dimension(2));
    Problem {
        domain,
        lambda: 1.0,
        singular_factor: singular,
        smooth_factor: smooth,
        rhs,
        exact: Some(exact),
        sigma_hint: 0.01,
    }
}

fn ex5() -> Problem {
    let domain = Domain::from_key("example5-annulus").unwrap();
    let singular: SingularFn = Arc::new(|_, _, r| r.ln());
    let smooth: PairFn = Arc::new(|x: &[f64], t: &[f64]| {
        x[0] * (1.0 - t[0] * t[0]) / ((1.0 + x[1]) * (1.0 + t[1] * t[1]))
    });
    let exact: PointFn =
        Arc::new(|p: &[f64]| ((p[0] * p[0] + 1.0) / (p[1] * p[1] + 1.0)).ln());
    let rhs =
        manufactured_rhs(&domain, 1.0, &singular, &smooth, &exact, 0.01, ReferenceLadder::for_dimension(2));
    Problem {
        domain,
        lambda: 1.0,
        singular_factor: singular,
        smooth_factor: smooth,
        rhs,
        exact: Some(exact),
        sigma_hint: 0.01,
    }
}

fn ex6() -> Problem {
    let domain = Domain::from_key("example6-boxes3d").unwrap();
    let singular: SingularFn = Arc::new(|_, _, r| r.ln());
    let smooth: PairFn = Arc::new(|x: &[f64], t: &[f64]| {
        (t[0] + t[1] + t[2] + 1.0) * (-(x[0] * x[0] + x[1] * x[1] + x[2] * x[2])).exp()
    });
    let exact: PointFn = Arc::new(|p: &[f64]| 1.0 / (p[0] + p[1] + p[2] + 1.0));
    let rhs =
        manufactured_rhs(&domain, 1.0, &singular, &smooth, &exact, 0.01, ReferenceLadder::for_dimension(3));
    Problem {
        domain,
        lambda: 1.0,
        singular_factor: singular,
        smooth_factor: smooth,
        rhs,
        exact: Some(exact),
        sigma_hint: 0.01,
    }
}
