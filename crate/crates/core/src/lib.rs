//! Shape-dependent rectangle fragmentation.
//!
//! Rectangles split at rates that depend on their aspect ratio. In log
//! coordinates each fragment is a particle of a two-type branching random
//! walk; this crate simulates it, evaluates the large-deviation rate
//! functionals along paths, and checks the probabilistic estimates behind them.

// `!(x > 0.0)` is how validation rejects NaN along with non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod coupling;
pub mod error;
pub mod ext;
pub mod functionals;
pub mod model;
pub mod optimizer;
pub mod paths;
pub mod simulator;
pub mod stats;
pub mod verify;

pub use error::{Error, Result};
pub use ext::ExtReal;
pub use model::{AspectRule, LogPoint, Rect, SplitRule};
pub use paths::{HybridPath, PLGrid, PathSet, Track};
pub use stats::Estimate;
