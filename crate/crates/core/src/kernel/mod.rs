//! Hybrid finite/continuous constraint solving core.
//!
//! Variables carry either a finite integer set or a real interval. Models
//! are built with [`Model`], contracted with [`propagate`] and solved with
//! [`solve_satisfaction`] or [`optimize`].

pub mod domain;
pub mod expr;
pub mod interval;
pub mod model;
pub mod propagate;
pub mod search;

pub use domain::{Domain, FiniteSet};
pub use expr::Expr;
pub use interval::Interval;
pub use model::{Cmp, ConstraintKind, ConstraintNode, Direction, Model, ModelError, Objective, VarId, VarInfo};
pub use propagate::{propagate, Fail, Propagators, Store};
pub use search::{optimize, solve_satisfaction, Branching, Outcome, SearchConfig, SearchStats, Solution, Value};
