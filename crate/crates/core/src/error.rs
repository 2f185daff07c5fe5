//! Error type shared by all library modules.

use thiserror::Error;

/// Errors produced by kernel evaluation, quadrature, geometry, the solver,
/// and the optimizer.
#[derive(Debug, Error)]
pub enum Error {
    /// Invalid configuration value (bad parameter range, malformed spec
    /// string, missing field).
    #[error("configuration: {0}")]
    Config(String),

    /// An integrand returned a non-finite value at a quadrature node.
    #[error("integration: non-finite integrand value at node {node:?}")]
    NonFiniteIntegrand { node: Vec<f64> },

    /// A geometric precondition failed (point outside a region, empty
    /// region, empty probe set).
    #[error("domain: {0}")]
    Domain(String),

    /// Invalid data passed to a metric (duplicate nodes, too few nodes).
    #[error("data: {0}")]
    Data(String),

    /// Node generation could not place the requested number of points.
    #[error("node generation: placed {placed} of {requested} requested points")]
    NodeGeneration { requested: usize, placed: usize },

    /// Assembly failed while computing one matrix entry.
    #[error("assembly at entry ({row}, {col}): {source}")]
    Assembly {
        row: usize,
        col: usize,
        #[source]
        source: Box<Error>,
    },

    /// The collocation matrix is numerically singular.
    #[error("singular collocation system (condition number about {kappa:.3e})")]
    SingularSystem { kappa: f64 },

    /// The SVD used for condition numbers did not converge.
    #[error("numerical: SVD failed to converge")]
    SvdFailure,

    /// Every cost evaluation in an optimizer run was non-finite.
    #[error("optimization: all cost evaluations were non-finite")]
    AllCostsNonFinite,

    /// A reference integration did not reach the requested tolerance.
    #[error("reference integration did not converge (estimated error {estimate:.3e})")]
    ReferenceNoConvergence { estimate: f64 },
}

/// Convenience alias used across the crate.
pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// True for failures of numerical processes (as opposed to bad inputs).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NonFiniteIntegrand { .. }
                | Error::Assembly { .. }
                | Error::SingularSystem { .. }
                | Error::SvdFailure
                | Error::AllCostsNonFinite
                | Error::ReferenceNoConvergence { .. }
        )
    }
}
