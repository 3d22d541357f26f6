//! The marked binary tree, its alive sets and rescaled paths, the spine, and
//! lineage diagnostics.

pub mod moments;
pub mod rng;
pub mod spine;
pub mod stream;
pub mod tree;

pub use moments::{all_ones_position, discrete_moments, MomentReport};
pub use rng::{replica_key, replica_rng, root_key, FixedMarks, HashMarks, MarkSource, VertexMark};
pub use spine::{
    direct_population_estimate, many_to_one_estimate, spine_run, spine_simulate, spine_step, SpineJump, SpineState,
};
pub use stream::{
    alive_count, count_in_set_streaming, count_in_set_streaming_with, diagonal_census, lineage_path, tree_keys,
    StreamVertex, Walker,
};
pub use tree::{AliveSet, Horizon, MarkedTree, Particle, Vertex, DEFAULT_CAP, FRAME_CSV_HEADER};
