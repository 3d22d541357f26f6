//! The three-process coupling on one interval, and compound Poisson tube
//! bounds.

pub mod run;
pub mod tube;

pub use run::{
    couple_run, couple_simulate, spine_on_interval, CoupledRun, CoupledStep, CouplingSetup, GridInterval, JumpCounts,
    RUN_CSV_HEADER,
};
pub use tube::{tube_bounds, tube_event, tube_prob_mc, TubeBounds, TubeSpec};
