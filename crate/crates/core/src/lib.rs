//! Declarative statistics on a hybrid constraint solver.
//!
//! Statistical hypothesis tests are posted as constraints over decision
//! variables, so that the feasible region of a model is the set of parameter
//! values a test fails to reject: a confidence region. The crate provides
//! the solver ([`kernel`]), distributions ([`dist`]), counting and matrix
//! constraints, descriptive statistics, the test constraints ([`sct`]) and
//! ready-made models ([`models`]).

pub mod counting;
pub mod dist;
pub mod kernel;
pub mod matrix;
pub mod models;
pub mod sct;
pub mod stats;

pub use kernel::{Cmp, Expr, Interval, Model, ModelError, Outcome, SearchConfig, Solution, VarId};
