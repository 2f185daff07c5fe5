//! Meshless collocation solver for weakly singular Fredholm integral
//! equations of the second kind.
//!
//! The equation class is
//!
//! ```text
//! u(x) - lambda * integral_Omega K(x, t) u(t) dt = f(x),    x in Omega,
//! ```
//!
//! where the kernel `K = R * S` factors into a radial part `R` that is weakly
//! singular on the diagonal `t = x` (logarithmic or an algebraic power
//! `r^v` with `-1 < v < 0`) and a smooth part `S`. The unknown `u` is
//! expanded in hybrid radial kernels centered at scattered nodes, the
//! singular integrals are evaluated with graded composite Gauss-Legendre
//! rules, and collocation yields a dense linear system.
//!
//! Module map:
//!
//! * [`kernels`] - pure and hybrid radial kernel evaluation.
//! * [`quadrature`] - Gauss-Legendre rules and the graded singular rules in
//!   one, two, and `d` dimensions.
//! * [`geometry`] - domains, scattered node generation, evaluation grids,
//!   fill and separation distances.
//! * [`solver`] - collocation system assembly, dense solve, error reports.
//! * [`pso`] - particle swarm search over the kernel parameters.
//! * [`problems`] - registry of ready-made benchmark problems.
//! * [`reference`] - slow adaptive integrator used to validate the
//!   production rules.

pub mod error;
pub mod geometry;
pub mod kernels;
pub mod problems;
pub mod pso;
pub mod quadrature;
pub mod reference;
pub mod solver;

pub use error::{Error, Result};
