//! Criterion benchmarks for `rectfrag-core`; see `benches/`.

use rectfrag_core::PLGrid;

/// A kinked monotone grid path used as a fixed benchmark input.
pub fn kinked_grid(n: usize) -> PLGrid {
    let xs = (0..=n).map(|i| 0.8 * i as f64 / n as f64).collect();
    let ys = (0..=n).map(|i| {
        let s = i as f64 / n as f64;
        if s < 0.5 {
            0.4 * s
        } else {
            0.2 + 1.6 * (s - 0.5)
        }
    });
    PLGrid::new(xs, ys.collect()).expect("monotone grid")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kinked_grid_is_monotone_with_a_kink_at_half() {
        let g = kinked_grid(4);
        assert!(g.xs.iter().zip([0.0, 0.2, 0.4, 0.6, 0.8]).all(|(a, b)| (a - b).abs() < 1e-15));
        assert!((g.ys[2] - 0.2).abs() < 1e-15 && (g.ys[4] - 1.0).abs() < 1e-15);
    }
}
