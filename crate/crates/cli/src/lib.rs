//! Command-line front end for the declarative statistics models.
//!
//! The commands are plain functions so they can be driven from tests:
//! [`fit`], [`ci`], [`region::scan`] and [`coverage::coverage`]. The binary
//! maps their outcomes to exit codes: 0 feasible, 2 infeasible, 3 resource
//! limit, 1 input error.

pub mod commands;
pub mod coverage;
pub mod error;
pub mod input;
pub mod region;

pub use commands::{ci, fit, CiReport, FitReport};
pub use error::{CliError, Status};
pub use input::{Dataset, ModelArgs, ModelKind, RunSpec};
