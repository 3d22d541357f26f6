//! Paths in `E²`: piecewise-linear tracks with explicit jumps, the Lévy,
//! grid and sup metrics, good cones, path sets with their envelope boxes, and
//! the covering quantization.

mod io;
mod metric;
mod sets;
mod track;

pub use io::{path_from_csv, path_to_csv, PATH_CSV_HEADER};
pub use metric::{grid_distance, levy_distance, levy_distance_scan, levy_distance_track, sup_distance};
pub use sets::{
    check_cover, is_good, is_good_on, quantize_to_cover, BoxEnvelope, Constraint, CoverCheck, GoodCheck, GoodSetSpec,
    PathSet,
};
pub use track::{Component, HybridPath, Knot, PLGrid, Piece, Track};

/// Sum of the jumps of `track` at times in `(a, b]`.
pub fn singular_increment(track: &Track, a: f64, b: f64) -> crate::Result<f64> {
    if !(0.0 <= a && a <= b && b <= 1.0) {
        return Err(crate::Error::Domain(format!("need 0 <= a <= b <= 1, got ({a}, {b})")));
    }
    Ok(track.jump_sum(a, b))
}
