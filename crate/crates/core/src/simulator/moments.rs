//! Discrete-time diagnostics along the all-ones lineage.

use rayon::prelude::*;
use serde::Serialize;

use super::rng::{child_key, replica_key, HashMarks, MarkSource};
use crate::error::{domain, Result};
use crate::model::{AspectRule, LogPoint, SplitRule};
use crate::stats::Estimate;

/// Position of `v_j = 1...1` (`j` ones) in the tree rooted at `root`.
pub fn all_ones_position(marks: &dyn MarkSource, rule: &dyn SplitRule, root: u64, j: u32) -> LogPoint {
    let mut key = root;
    let mut z = LogPoint::ORIGIN;
    for _ in 0..j {
        let m = marks.mark(key);
        let step = -m.u_split.ln();
        if m.u_dir <= rule.dir_prob(z) {
            z.x += step;
        } else {
            z.y += step;
        }
        key = child_key(key, 1);
    }
    z
}

/// Empirical moments of `Δ_j = X - Y` and `S_j = X + Y - j`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MomentReport {
    pub j: u32,
    pub delta2: Estimate,
    pub delta4: Estimate,
    pub delta6: Estimate,
    pub s6: Estimate,
}

impl MomentReport {
    /// Upper bounds on `E[Δ²]`, `E[Δ⁴]`, `E[Δ⁶]`.
    pub fn delta_bounds(j: u32) -> [f64; 3] {
        let j = j as f64;
        [2.0 * j, 12.0 * j * (j + 1.0), 120.0 * j * (j * j + 6.0 * j + 11.0)]
    }
}

/// Moments over `replicas` independent trees under `seed`.
pub fn discrete_moments(seed: u64, j: u32, replicas: usize) -> Result<MomentReport> {
    if replicas == 0 {
        return domain("need at least one replica");
    }
    let pts: Vec<LogPoint> = (0..replicas as u64)
        .into_par_iter()
        .map(|i| all_ones_position(&HashMarks, &AspectRule, replica_key(seed, i), j))
        .collect();
    let col = |f: &dyn Fn(LogPoint) -> f64| Estimate::from_samples(&pts.iter().map(|&z| f(z)).collect::<Vec<_>>());
    Ok(MomentReport {
        j,
        delta2: col(&|z| (z.x - z.y).powi(2)),
        delta4: col(&|z| (z.x - z.y).powi(4)),
        delta6: col(&|z| (z.x - z.y).powi(6)),
        s6: col(&|z| (z.x + z.y - j as f64).powi(6)),
    })
}
