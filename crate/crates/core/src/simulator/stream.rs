//! Depth-first walks over the tree that never materialize it. Subtrees are
//! cut as soon as a lineage piece rules them out.

use rayon::prelude::*;

use super::rng::{replica_key, root_key, HashMarks, MarkSource};
use super::tree::split;
use crate::error::{domain, Error, Result};
use crate::model::{AspectRule, SplitRule};
use crate::paths::{HybridPath, PathSet, Track};

/// Tolerance for the per-piece pruning test; the final test is exact.
const PRUNE_TOL: f64 = 1e-12;

/// A vertex seen during a walk.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StreamVertex {
    pub key: u64,
    pub depth: u32,
    pub x: f64,
    pub y: f64,
    pub t_birth: f64,
    pub t_death: f64,
}

/// Walks every vertex born by `horizon`, pruning with `keep` and counting the
/// vertices alive at `horizon` whose lineage passes `accept`.
pub struct Walker<'a> {
    pub marks: &'a dyn MarkSource,
    pub rule: &'a dyn SplitRule,
    pub horizon: f64,
    /// Bound on visited vertices.
    pub cap: usize,
}

impl Walker<'_> {
    pub fn count<K, A>(&self, root: u64, keep: &K, accept: &A) -> Result<u64>
    where
        K: Fn(&StreamVertex) -> bool,
        A: Fn(&[StreamVertex]) -> Result<bool>,
    {
        if !(self.horizon >= 0.0) || !self.horizon.is_finite() {
            return domain(format!("horizon must be finite and >= 0, got {}", self.horizon));
        }
        let mut lineage = Vec::new();
        let mut visited = 0usize;
        let mut count = 0u64;
        self.visit(root, 0, 0.0, 0.0, 0.0, &mut lineage, &mut visited, &mut count, keep, accept)?;
        Ok(count)
    }

    #[allow(clippy::too_many_arguments)]
    fn visit<K, A>(
        &self,
        key: u64,
        depth: u32,
        x: f64,
        y: f64,
        t_birth: f64,
        lineage: &mut Vec<StreamVertex>,
        visited: &mut usize,
        count: &mut u64,
        keep: &K,
        accept: &A,
    ) -> Result<()>
    where
        K: Fn(&StreamVertex) -> bool,
        A: Fn(&[StreamVertex]) -> Result<bool>,
    {
        *visited += 1;
        if *visited > self.cap {
            return Err(Error::Resource {
                message: format!("walk visits more than {} vertices", self.cap),
                reached: *visited,
            });
        }
        let mark = self.marks.mark(key);
        let sp = split(self.rule, &mark, key, x, y, t_birth);
        let v = StreamVertex { key, depth, x, y, t_birth, t_death: sp.t_death };
        if !keep(&v) {
            return Ok(());
        }
        lineage.push(v);
        let r = if sp.t_death > self.horizon {
            accept(lineage).map(|ok| *count += ok as u64)
        } else {
            sp.children.iter().try_for_each(|&(k, cx, cy)| {
                self.visit(k, depth + 1, cx, cy, sp.t_death, lineage, visited, count, keep, accept)
            })
        };
        lineage.pop();
        r
    }
}

/// The rescaled path of a lineage ending alive at `scale`.
pub fn lineage_path(lineage: &[StreamVertex], scale: f64) -> Result<HybridPath> {
    let mut jx = Vec::new();
    let mut jy = Vec::new();
    for w in lineage.windows(2) {
        let s = w[1].t_birth / scale;
        if w[1].x > w[0].x {
            jx.push((s, (w[1].x - w[0].x) / scale));
        }
        if w[1].y > w[0].y {
            jy.push((s, (w[1].y - w[0].y) / scale));
        }
    }
    Ok(HybridPath::new(Track::from_jumps(&jx)?, Track::from_jumps(&jy)?))
}

/// `N_T(F)` for the tree of `seed`, without materializing it. `cap` bounds
/// the number of visited vertices.
pub fn count_in_set_streaming(seed: u64, t: f64, set: &PathSet, cap: usize) -> Result<u64> {
    count_in_set_streaming_with(&HashMarks, &AspectRule, root_key(seed), t, set, cap)
}

pub fn count_in_set_streaming_with(
    marks: &dyn MarkSource,
    rule: &dyn SplitRule,
    root: u64,
    t: f64,
    set: &PathSet,
    cap: usize,
) -> Result<u64> {
    if !(t > 0.0) {
        return domain("scale T must be positive");
    }
    let walker = Walker { marks, rule, horizon: t, cap };
    // Pointwise sets are decided piece by piece; others get a loose prune
    // and an exact test on the whole lineage.
    let exact = set.is_pointwise();
    let tol = if exact { 0.0 } else { PRUNE_TOL };
    let keep = |v: &StreamVertex| {
        let z = crate::model::LogPoint { x: v.x / t, y: v.y / t };
        set.admits_constant(z, v.t_birth / t, v.t_death.min(t) / t, tol)
    };
    let accept = |lin: &[StreamVertex]| {
        if exact {
            Ok(true)
        } else {
            set.contains(&lineage_path(lin, t)?)
        }
    };
    walker.count(root, &keep, &accept)
}

/// `|N_t|` for the tree rooted at `root`.
pub fn alive_count(root: u64, t: f64, cap: usize) -> Result<u64> {
    let walker = Walker { marks: &HashMarks, rule: &AspectRule, horizon: t, cap };
    walker.count(root, &|_| true, &|_| Ok(true))
}

/// Size of `V'`: particles alive at `⌈n^{7/8}⌉T/n` that stayed within
/// `radius` (max-norm, unscaled) of `(s/2, s/2)` throughout; one count per seed.
pub fn diagonal_census(seeds: &[u64], n: usize, t: f64, radius: f64, cap: usize) -> Result<Vec<u64>> {
    if n == 0 || !(t > 0.0) || !(radius >= 0.0) {
        return domain("census needs n >= 1, T > 0 and radius >= 0");
    }
    let k0 = (n as f64).powf(7.0 / 8.0).ceil();
    let horizon = k0 * t / n as f64;
    let keep = |v: &StreamVertex| {
        let b = v.t_death.min(horizon);
        [v.t_birth, b].iter().all(|&s| (v.x - 0.5 * s).abs() <= radius && (v.y - 0.5 * s).abs() <= radius)
    };
    seeds
        .par_iter()
        .map(|&seed| {
            let walker = Walker { marks: &HashMarks, rule: &AspectRule, horizon, cap };
            walker.count(root_key(seed), &keep, &|_| Ok(true))
        })
        .collect()
}

/// Root keys for independent trees under one seed.
pub fn tree_keys(seed: u64, trees: usize) -> Vec<u64> {
    (0..trees as u64).map(|i| replica_key(seed, i)).collect()
}
