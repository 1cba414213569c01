//! Combined task allocation and multi-agent path finding on 4-connected
//! grids.
//!
//! [`tcbs::solve`] is the optimal tree search; [`baselines`] holds the
//! greedy and collision-blind allocators (each followed by conflict-based
//! search); [`oracle`] is an exhaustive joint-state solver for tiny
//! instances; [`bench`] and [`scenario`] drive experiments and file I/O.

pub mod baselines;
pub mod bench;
pub mod error;
pub mod grid;
pub mod model;
pub mod oracle;
pub mod planner;
pub mod scenario;
pub mod tcbs;

pub use error::{Error, Result};
pub use grid::{manhattan, parse_map, Cell, DistanceTable, GridMap};
pub use model::{validate_solution, Problem, Solution, Task, ValidationMode, ViolationClass};
pub use planner::{plan_constrained, Constraint, ConstraintSet, Path, Waypoint};
pub use tcbs::{solve, SolverConfig};
