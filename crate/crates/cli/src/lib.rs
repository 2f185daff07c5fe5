//! Experiment drivers and result-file schemas behind the `hyrbf` binary.
//!
//! The library half exists so integration tests and downstream scripts can
//! run the same drivers the binary runs: [`drivers`] turns resolved
//! configurations into records and table rows, [`record`] defines the JSON
//! schemas those records serialize to.

pub mod drivers;
pub mod record;

pub use drivers::{
    execute_converge, execute_pso_tune, execute_quad_test, execute_solve, execute_sweep,
    load_overlay, problem_lines, ConvergeArgs, PsoTuneArgs, QuadTestArgs, SolveArgs, SweepArgs,
};
pub use record::{PsoRecord, RunRecord, SCHEMA_VERSION};
