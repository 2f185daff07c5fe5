//! Self-validating singular integration for oracle duty.
//!
//! Production quadrature runs at one fixed profile and reports whatever it
//! gets. Reference values (manufactured right-hand sides, cross-checks in
//! tests) instead climb a ladder of increasingly fine profiles until two
//! consecutive estimates agree to the requested tolerance, so a returned
//! value carries its own error certificate.

use crate::error::{Error, Result};
use crate::geometry::Domain;
use crate::quadrature::GradedQuadSpec;

/// Escalation schedule: `(points, levels)` profiles from coarse to fine,
/// plus the agreement tolerance between consecutive rungs.
#[derive(Clone, Debug)]
pub struct ReferenceLadder {
    pub profiles: Vec<(usize, usize)>,
    /// Two estimates `a`, `b` agree when `|a - b| <= tolerance * max(1, |b|)`.
    pub tolerance: f64,
}

impl ReferenceLadder {
    /// At least two rungs (a single rung can never certify itself) and a
    /// positive tolerance.
    pub fn new(profiles: Vec<(usize, usize)>, tolerance: f64) -> Result<ReferenceLadder> {
        if profiles.len() < 2 {
            return Err(Error::Config("a reference ladder needs at least two rungs".to_string()));
        }
        if !(tolerance > 0.0 && tolerance.is_finite()) {
            return Err(Error::Config(format!(
                "reference tolerance must be positive and finite, got {tolerance}"
            )));
        }
        Ok(ReferenceLadder { profiles, tolerance })
    }

    /// Default schedule by domain dimension. Node counts grow with the
    /// dimension-th power of the profile, so the rungs and the achievable
    /// tolerance shrink as the dimension rises.
    pub fn for_dimension(dimension: usize) -> ReferenceLadder {
        match dimension {
            1 => ReferenceLadder { profiles: vec![(10, 15), (14, 25)], tolerance: 1e-10 },
            2 => ReferenceLadder { profiles: vec![(10, 15), (12, 22)], tolerance: 1e-10 },
            _ => ReferenceLadder { profiles: vec![(6, 8), (8, 11)], tolerance: 1e-8 },
        }
    }

    /// A schedule sharing no rung with `for_dimension`, for cross-checking
    /// values produced by the default one on genuinely different meshes.
    pub fn staggered(dimension: usize) -> ReferenceLadder {
        match dimension {
            1 => ReferenceLadder { profiles: vec![(11, 18), (15, 28)], tolerance: 1e-10 },
            2 => ReferenceLadder { profiles: vec![(11, 18), (13, 26)], tolerance: 1e-10 },
            _ => ReferenceLadder { profiles: vec![(7, 9), (9, 12)], tolerance: 1e-8 },
        }
    }
}

/// Integrates `f(point, r)` over the domain with the singularity at `x0`,
/// escalating through the ladder until two consecutive profiles agree;
/// returns the finest estimate. Exhausting the ladder without agreement
/// reports the last estimate inside the error.
pub fn reference_singular_integral(
    domain: &Domain,
    x0: &[f64],
    sigma: f64,
    ladder: &ReferenceLadder,
    f: impl Fn(&[f64], f64) -> f64,
) -> Result<f64> {
    if ladder.profiles.len() < 2 {
        return Err(Error::Config("a reference ladder needs at least two rungs".to_string()));
    }
    let mut prev: Option<f64> = None;
    let mut last = f64::NAN;
    for &(points, levels) in &ladder.profiles {
        let spec = GradedQuadSpec::new(points, levels, sigma)?;
        let estimate = domain.integrate_singular(&f, x0, &spec)?;
        if let Some(p) = prev {
            if (estimate - p).abs() <= ladder.tolerance * estimate.abs().max(1.0) {
                return Ok(estimate);
            }
        }
        prev = Some(estimate);
        last = estimate;
    }
    Err(Error::ReferenceNoConvergence { estimate: last })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn ladder_construction_is_validated() {
        assert!(ReferenceLadder::new(vec![(4, 4), (6, 6)], 1e-9).is_ok());
        assert!(ReferenceLadder::new(vec![(4, 4)], 1e-9).is_err());
        assert!(ReferenceLadder::new(vec![(4, 4), (6, 6)], 0.0).is_err());
        assert!(ReferenceLadder::new(vec![(4, 4), (6, 6)], f64::NAN).is_err());
    }

    #[test]
    fn default_and_staggered_schedules_share_no_rung() {
        for d in 1..=3 {
            let a = ReferenceLadder::for_dimension(d);
            let b = ReferenceLadder::staggered(d);
            for rung in &a.profiles {
                assert!(!b.profiles.contains(rung), "dimension {d} shares rung {rung:?}");
            }
            assert_eq!(a.tolerance, b.tolerance);
        }
    }

    #[test]
    fn certified_values_match_closed_forms() {
        let interval = Domain::from_key("interval01").unwrap();
        let ladder = ReferenceLadder::for_dimension(1);
        let v = reference_singular_integral(&interval, &[0.5], 0.01, &ladder, |_, r| r.ln())
            .unwrap();
        assert_abs_diff_eq!(v, 0.5f64.ln() - 1.0, epsilon = 1e-12);

        let blade = Domain::from_key("example3-blade").unwrap();
        let v = reference_singular_integral(
            &blade,
            &[0.4, 0.3],
            0.01,
            &ReferenceLadder::staggered(2),
            |_, r| r.ln(),
        )
        .unwrap();
        assert_abs_diff_eq!(v, -0.8249160182126374, epsilon = 1e-9);
    }

    #[test]
    fn disagreement_is_reported_with_the_estimate() {
        let interval = Domain::from_key("interval01").unwrap();
        // Coarse rungs cannot resolve this oscillation, so consecutive
        // estimates stay far apart.
        let ladder = ReferenceLadder::new(vec![(2, 2), (3, 3)], 1e-12).unwrap();
        match reference_singular_integral(&interval, &[0.5], 0.01, &ladder, |p, _| {
            (137.0 * p[0]).cos()
        }) {
            Err(Error::ReferenceNoConvergence { estimate }) => assert!(estimate.is_finite()),
            other => panic!("expected no-convergence, got {other:?}"),
        }
    }

    #[test]
    fn non_finite_integrands_propagate() {
        let interval = Domain::from_key("interval01").unwrap();
        let ladder = ReferenceLadder::for_dimension(1);
        let out =
            reference_singular_integral(&interval, &[0.5], 0.01, &ladder, |_, _| f64::NAN);
        assert!(matches!(out, Err(Error::NonFiniteIntegrand { .. })));
    }
}
