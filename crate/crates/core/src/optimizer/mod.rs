//! Maximizing `K` over piecewise-linear paths: multistart projected
//! coordinate ascent, an exhaustive lattice oracle for small grids, and a
//! scan for the bottleneck of a growth profile.

mod oracle;
mod problem;
mod scan;
mod search;

pub use oracle::{brute_force_oracle, ORACLE_MAX_NODES};
pub use problem::{BallMetric, OptBudget, OptConstraint, OptProblem};
pub use scan::{bottleneck_scan, BottleneckReport, ProfileClass};
pub use search::{optimize, LogEntry, OptResult, StartSummary};
