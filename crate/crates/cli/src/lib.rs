//! Experiment front end for the D2D offloading push-strategy solvers:
//! JSON instance ingestion, solver dispatch, parameter sweeps, oracle
//! comparisons, and CSV emission. The `d2dpush` binary is a thin clap layer
//! over these functions.

pub mod compare;
pub mod error;
pub mod instance;
pub mod output;
pub mod sweep;

pub use compare::{run_comparison, CompareSpec};
pub use error::CliError;
pub use instance::{
    load_instance, parse_instance, parse_strategy, random_group_independent_instance,
    random_instance, serialize_instance,
};
pub use sweep::{run_sweep, RunOutcome, SweepParam, SweepSolver, SweepSpec};
