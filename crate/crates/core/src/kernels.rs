//! Pure and hybrid radial kernels evaluated as functions of distance.
//!
//! A hybrid kernel adds a smooth, shape-parameter-dependent radial kernel
//! and a weighted piecewise-smooth one:
//!
//! ```text
//! psi(r) = Phi_eps(r) + rho * phi(r)
//! ```
//!
//! Small `rho` keeps the accuracy of the smooth kernel while the rough term
//! bounds the conditioning of collocation matrices as `eps` shrinks.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Identifier of one radial kernel.
///
/// `Ga`, `Mq` and `Imq` are infinitely smooth and require a shape parameter
/// `eps > 0`; `Tps` and `Cu` are piecewise smooth and take no parameter.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum RadialKernelId {
    /// Gaussian `exp(-(eps r)^2)`.
    Ga,
    /// Multiquadric `sqrt(eps^2 r^2 + 1)`.
    Mq,
    /// Inverse multiquadric `1 / sqrt(eps^2 r^2 + 1)`.
    Imq,
    /// Thin plate spline `r^2 log r`, with value 0 at `r = 0`.
    Tps,
    /// Cubic `r^3`.
    Cu,
}

impl RadialKernelId {
    /// True when the kernel takes a shape parameter.
    pub fn needs_shape_parameter(self) -> bool {
        matches!(self, RadialKernelId::Ga | RadialKernelId::Mq | RadialKernelId::Imq)
    }

    fn parse(token: &str) -> Result<Self> {
        match token.to_ascii_uppercase().as_str() {
            "GA" => Ok(RadialKernelId::Ga),
            "MQ" => Ok(RadialKernelId::Mq),
            "IMQ" => Ok(RadialKernelId::Imq),
            "TPS" => Ok(RadialKernelId::Tps),
            "CU" => Ok(RadialKernelId::Cu),
            other => Err(Error::Config(format!("unknown radial kernel `{other}`"))),
        }
    }
}

impl fmt::Display for RadialKernelId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            RadialKernelId::Ga => "GA",
            RadialKernelId::Mq => "MQ",
            RadialKernelId::Imq => "IMQ",
            RadialKernelId::Tps => "TPS",
            RadialKernelId::Cu => "CU",
        };
        f.write_str(name)
    }
}

/// Unvalidated kernel shape: either one pure kernel or a smooth+rough pair.
///
/// Parsed from strings like `"GA+CU"`, `"mq+tps"` or `"IMQ"`
/// (case-insensitive). A hybrid must pair a smooth kernel with a rough one,
/// in that order.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KernelSpec {
    /// A single radial kernel.
    Pure(RadialKernelId),
    /// A smooth kernel plus `rho` times a rough kernel.
    Hybrid { smooth: RadialKernelId, rough: RadialKernelId },
}

impl FromStr for KernelSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        match s.split_once('+') {
            None => Ok(KernelSpec::Pure(RadialKernelId::parse(s)?)),
            Some((a, b)) => {
                let smooth = RadialKernelId::parse(a.trim())?;
                let rough = RadialKernelId::parse(b.trim())?;
                if smooth.needs_shape_parameter() && !rough.needs_shape_parameter() {
                    Ok(KernelSpec::Hybrid { smooth, rough })
                } else {
                    Err(Error::Config(format!(
                        "hybrid kernel must be <smooth>+<rough>, got `{smooth}+{rough}`"
                    )))
                }
            }
        }
    }
}

impl fmt::Display for KernelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KernelSpec::Pure(id) => write!(f, "{id}"),
            KernelSpec::Hybrid { smooth, rough } => write!(f, "{smooth}+{rough}"),
        }
    }
}

/// A smooth radial kernel plus `rho` times a rough one.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HybridKernel {
    /// Smooth part (`Ga`, `Mq` or `Imq`).
    pub smooth: RadialKernelId,
    /// Rough part (`Tps` or `Cu`).
    pub rough: RadialKernelId,
    /// Shape parameter of the smooth part; strictly positive.
    pub epsilon: f64,
    /// Weight of the rough part; nonnegative, 0 degenerates to the pure
    /// smooth kernel.
    pub rho: f64,
}

impl HybridKernel {
    /// Validates the invariants `epsilon > 0`, `rho >= 0` and the
    /// smooth/rough split.
    pub fn new(smooth: RadialKernelId, rough: RadialKernelId, epsilon: f64, rho: f64) -> Result<Self> {
        if !smooth.needs_shape_parameter() {
            return Err(Error::Config(format!("`{smooth}` is not a smooth kernel")));
        }
        if rough.needs_shape_parameter() {
            return Err(Error::Config(format!("`{rough}` is not a rough kernel")));
        }
        if !(epsilon > 0.0) || !epsilon.is_finite() {
            return Err(Error::Config(format!("shape parameter must be positive, got {epsilon}")));
        }
        if !(rho >= 0.0) || !rho.is_finite() {
            return Err(Error::Config(format!("weight parameter must be nonnegative, got {rho}")));
        }
        Ok(HybridKernel { smooth, rough, epsilon, rho })
    }
}

/// A validated, ready-to-evaluate kernel (pure or hybrid).
///
/// Construction checks every parameter so [`Kernel::eval`] itself is
/// infallible and cheap; it is the single call sites in assembly loops use.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Kernel {
    /// One radial kernel, with its shape parameter when it takes one.
    Pure {
        /// The kernel.
        id: RadialKernelId,
        /// Shape parameter; `None` exactly for `Tps`/`Cu`.
        epsilon: Option<f64>,
    },
    /// Smooth plus weighted rough kernel.
    Hybrid(HybridKernel),
}

impl Kernel {
    /// Builds a kernel from a parsed spec and optional parameters.
    ///
    /// `epsilon` is required iff the spec involves a smooth kernel. `rho`
    /// is required for hybrids (0 is allowed and degenerates to the pure
    /// smooth kernel); a pure kernel accepts `rho` only as `Some(0.0)`.
    pub fn from_spec(spec: KernelSpec, epsilon: Option<f64>, rho: Option<f64>) -> Result<Self> {
        match spec {
            KernelSpec::Pure(id) => {
                if let Some(rho) = rho {
                    if rho != 0.0 {
                        return Err(Error::Config(format!(
                            "weight parameter {rho} given for pure kernel `{id}`"
                        )));
                    }
                }
                let epsilon = check_epsilon(id, epsilon)?;
                Ok(Kernel::Pure { id, epsilon })
            }
            KernelSpec::Hybrid { smooth, rough } => {
                let epsilon = epsilon.ok_or_else(|| {
                    Error::Config(format!("kernel `{smooth}` requires a shape parameter"))
                })?;
                let rho = rho.ok_or_else(|| {
                    Error::Config("hybrid kernel requires a weight parameter".into())
                })?;
                Ok(Kernel::Hybrid(HybridKernel::new(smooth, rough, epsilon, rho)?))
            }
        }
    }

    /// Parses `"<smooth>+<rough>"` or a bare pure kernel name and attaches
    /// the parameters.
    pub fn parse(spec: &str, epsilon: Option<f64>, rho: Option<f64>) -> Result<Self> {
        Kernel::from_spec(spec.parse()?, epsilon, rho)
    }

    /// The spec this kernel was built from.
    pub fn spec(&self) -> KernelSpec {
        match *self {
            Kernel::Pure { id, .. } => KernelSpec::Pure(id),
            Kernel::Hybrid(h) => KernelSpec::Hybrid { smooth: h.smooth, rough: h.rough },
        }
    }

    /// Shape parameter, when the kernel has one.
    pub fn epsilon(&self) -> Option<f64> {
        match *self {
            Kernel::Pure { epsilon, .. } => epsilon,
            Kernel::Hybrid(h) => Some(h.epsilon),
        }
    }

    /// Weight parameter, when the kernel is a hybrid.
    pub fn rho(&self) -> Option<f64> {
        match *self {
            Kernel::Pure { .. } => None,
            Kernel::Hybrid(h) => Some(h.rho),
        }
    }

    /// Evaluates the kernel at distance `r >= 0`.
    #[inline]
    pub fn eval(&self, r: f64) -> f64 {
        debug_assert!(r >= 0.0);
        match *self {
            Kernel::Pure { id, epsilon } => raw_radial(id, epsilon.unwrap_or(0.0), r),
            Kernel::Hybrid(h) => {
                raw_radial(h.smooth, h.epsilon, r) + h.rho * raw_radial(h.rough, 0.0, r)
            }
        }
    }
}

impl fmt::Display for Kernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.spec())
    }
}

fn check_epsilon(id: RadialKernelId, epsilon: Option<f64>) -> Result<Option<f64>> {
    match (id.needs_shape_parameter(), epsilon) {
        (true, Some(e)) if e > 0.0 && e.is_finite() => Ok(Some(e)),
        (true, Some(e)) => Err(Error::Config(format!(
            "shape parameter must be positive, got {e}"
        ))),
        (true, None) => Err(Error::Config(format!("kernel `{id}` requires a shape parameter"))),
        (false, None) => Ok(None),
        (false, Some(_)) => Err(Error::Config(format!("kernel `{id}` takes no shape parameter"))),
    }
}

/// Radial formulas; `epsilon` is ignored by the parameter-free kernels.
#[inline]
fn raw_radial(id: RadialKernelId, epsilon: f64, r: f64) -> f64 {
    match id {
        RadialKernelId::Ga => {
            let er = epsilon * r;
            (-er * er).exp()
        }
        RadialKernelId::Mq => {
            let er = epsilon * r;
            (er * er + 1.0).sqrt()
        }
        RadialKernelId::Imq => {
            let er = epsilon * r;
            1.0 / (er * er + 1.0).sqrt()
        }
        // Value at 0 is the removable limit of r^2 log r.
        RadialKernelId::Tps => {
            if r == 0.0 {
                0.0
            } else {
                r * r * r.ln()
            }
        }
        RadialKernelId::Cu => r * r * r,
    }
}

/// Evaluates one radial kernel at distance `r`, checking every precondition.
///
/// `epsilon` must be present exactly for the kernels that take a shape
/// parameter. Negative `r` is a domain error.
pub fn eval_radial(id: RadialKernelId, epsilon: Option<f64>, r: f64) -> Result<f64> {
    if !(r >= 0.0) {
        return Err(Error::Domain(format!("radial distance must be nonnegative, got {r}")));
    }
    let epsilon = check_epsilon(id, epsilon)?;
    Ok(raw_radial(id, epsilon.unwrap_or(0.0), r))
}

/// Evaluates `psi(r) = Phi_eps(r) + rho * phi(r)`, checking `r >= 0`.
pub fn eval_hybrid(kernel: &HybridKernel, r: f64) -> Result<f64> {
    if !(r >= 0.0) {
        return Err(Error::Domain(format!("radial distance must be nonnegative, got {r}")));
    }
    Ok(raw_radial(kernel.smooth, kernel.epsilon, r) + kernel.rho * raw_radial(kernel.rough, 0.0, r))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn pure_kernel_values_match_the_radial_formulas() {
        assert_eq!(eval_radial(RadialKernelId::Ga, Some(1.0), 0.0).unwrap(), 1.0);
        assert_eq!(eval_radial(RadialKernelId::Tps, None, 1.0).unwrap(), 0.0);
        assert_relative_eq!(
            eval_radial(RadialKernelId::Mq, Some(2.0), 1.5).unwrap(),
            10f64.sqrt(),
            max_relative = 1e-15
        );
        assert_relative_eq!(
            eval_radial(RadialKernelId::Imq, Some(2.0), 1.5).unwrap(),
            1.0 / 10f64.sqrt(),
            max_relative = 1e-15
        );
        assert_eq!(eval_radial(RadialKernelId::Cu, None, 2.0).unwrap(), 8.0);
    }

    #[test]
    fn tps_is_zero_at_the_origin_and_continuous_nearby() {
        assert_eq!(eval_radial(RadialKernelId::Tps, None, 0.0).unwrap(), 0.0);
        let tiny = eval_radial(RadialKernelId::Tps, None, 1e-12).unwrap();
        assert!(tiny.abs() < 1e-22, "r^2 log r should vanish smoothly, got {tiny}");
    }

    #[test]
    fn hybrid_examples() {
        let ga_cu = HybridKernel::new(RadialKernelId::Ga, RadialKernelId::Cu, 1.0, 0.0).unwrap();
        assert_relative_eq!(eval_hybrid(&ga_cu, 2.0).unwrap(), (-4f64).exp(), max_relative = 1e-15);

        let ga_cu1 = HybridKernel::new(RadialKernelId::Ga, RadialKernelId::Cu, 1.0, 1.0).unwrap();
        assert_eq!(eval_hybrid(&ga_cu1, 0.0).unwrap(), 1.0);

        let mq_tps = HybridKernel::new(RadialKernelId::Mq, RadialKernelId::Tps, 1.0, 5.0).unwrap();
        assert_relative_eq!(eval_hybrid(&mq_tps, 1.0).unwrap(), 2f64.sqrt(), max_relative = 1e-15);
    }

    #[test]
    fn negative_distance_is_a_domain_error() {
        assert!(matches!(
            eval_radial(RadialKernelId::Ga, Some(1.0), -0.5),
            Err(Error::Domain(_))
        ));
        let k = HybridKernel::new(RadialKernelId::Ga, RadialKernelId::Cu, 1.0, 1.0).unwrap();
        assert!(matches!(eval_hybrid(&k, -1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn shape_parameter_presence_is_checked_both_ways() {
        assert!(matches!(eval_radial(RadialKernelId::Ga, None, 1.0), Err(Error::Config(_))));
        assert!(matches!(
            eval_radial(RadialKernelId::Cu, Some(1.0), 1.0),
            Err(Error::Config(_))
        ));
        assert!(matches!(
            HybridKernel::new(RadialKernelId::Ga, RadialKernelId::Cu, 0.0, 1.0),
            Err(Error::Config(_))
        ));
        assert!(matches!(
            HybridKernel::new(RadialKernelId::Ga, RadialKernelId::Cu, 1.0, -1e-9),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn spec_strings_parse_case_insensitively() {
        assert_eq!(
            "ga+cu".parse::<KernelSpec>().unwrap(),
            KernelSpec::Hybrid { smooth: RadialKernelId::Ga, rough: RadialKernelId::Cu }
        );
        assert_eq!(
            "IMQ+TPS".parse::<KernelSpec>().unwrap(),
            KernelSpec::Hybrid { smooth: RadialKernelId::Imq, rough: RadialKernelId::Tps }
        );
        assert_eq!("Cu".parse::<KernelSpec>().unwrap(), KernelSpec::Pure(RadialKernelId::Cu));
        assert_eq!("GA".parse::<KernelSpec>().unwrap(), KernelSpec::Pure(RadialKernelId::Ga));
    }

    #[test]
    fn malformed_spec_strings_are_rejected() {
        assert!("CU+GA".parse::<KernelSpec>().is_err());
        assert!("GA+MQ".parse::<KernelSpec>().is_err());
        assert!("TPS+CU".parse::<KernelSpec>().is_err());
        assert!("squiggle".parse::<KernelSpec>().is_err());
        assert!("GA+CU+TPS".parse::<KernelSpec>().is_err());
    }

    #[test]
    fn kernel_construction_enforces_parameter_arity() {
        assert!(Kernel::parse("GA+CU", Some(0.5), Some(1e-8)).is_ok());
        assert!(Kernel::parse("GA+CU", None, Some(1e-8)).is_err());
        assert!(Kernel::parse("GA+CU", Some(0.5), None).is_err());
        assert!(Kernel::parse("GA", Some(0.5), None).is_ok());
        assert!(Kernel::parse("GA", Some(0.5), Some(0.0)).is_ok());
        assert!(Kernel::parse("GA", Some(0.5), Some(1e-8)).is_err());
        assert!(Kernel::parse("CU", None, None).is_ok());
        assert!(Kernel::parse("CU", Some(0.5), None).is_err());
    }

    #[test]
    fn fast_eval_agrees_with_checked_eval() {
        let hybrid = Kernel::parse("MQ+TPS", Some(1.3), Some(0.25)).unwrap();
        let checked = HybridKernel::new(RadialKernelId::Mq, RadialKernelId::Tps, 1.3, 0.25).unwrap();
        for i in 0..100 {
            let r = i as f64 * 0.05;
            assert_eq!(hybrid.eval(r), eval_hybrid(&checked, r).unwrap());
        }
        let pure = Kernel::parse("TPS", None, None).unwrap();
        for i in 0..100 {
            let r = i as f64 * 0.05;
            assert_eq!(pure.eval(r), eval_radial(RadialKernelId::Tps, None, r).unwrap());
        }
    }

    #[test]
    fn monotonicity_spot_checks() {
        let grid: Vec<f64> = (1..200).map(|i| i as f64 * 0.02).collect();
        for pair in grid.windows(2) {
            let ga = |r| eval_radial(RadialKernelId::Ga, Some(0.8), r).unwrap();
            let mq = |r| eval_radial(RadialKernelId::Mq, Some(0.8), r).unwrap();
            let cu = |r| eval_radial(RadialKernelId::Cu, None, r).unwrap();
            assert!(ga(pair[1]) < ga(pair[0]));
            assert!(mq(pair[1]) > mq(pair[0]));
            assert!(cu(pair[1]) > cu(pair[0]));
        }
    }
}
