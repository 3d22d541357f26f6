use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::functionals::{rate_k_with, KOptions};
use crate::model::LogPoint;
use crate::paths::{levy_distance, PLGrid};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BallMetric {
    Grid,
    Sup,
    Levy,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OptConstraint {
    None,
    Endpoint(LogPoint),
    /// Closed ball. Grid and sup balls need a center on the same grid.
    Ball {
        center: PLGrid,
        radius: f64,
        metric: BallMetric,
    },
}

/// Search effort per start.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptBudget {
    pub sweeps: usize,
    pub random_starts: usize,
    pub initial_step: f64,
    pub min_step: f64,
    /// Profile grid used while searching; the final value uses the default.
    pub search_grid: usize,
}

impl Default for OptBudget {
    fn default() -> Self {
        OptBudget { sweeps: 400, random_starts: 4, initial_step: 0.25, min_step: 1e-8, search_grid: 64 }
    }
}

/// Maximize `K` over `PL_n² ∩ G_M²` intersected with the constraint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptProblem {
    pub n: usize,
    pub m: f64,
    pub constraint: OptConstraint,
    #[serde(default)]
    pub budget: OptBudget,
}

/// Per-gridpoint value corridors, one per coordinate. `lo` is non-decreasing,
/// `hi` too, so clamping a monotone sequence keeps it monotone.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Corridors {
    pub lo: [Vec<f64>; 2],
    pub hi: [Vec<f64>; 2],
}

impl OptProblem {
    pub fn new(n: usize, m: f64, constraint: OptConstraint) -> Result<Self> {
        let p = OptProblem { n, m, constraint, budget: OptBudget::default() };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return domain("optimizer needs n >= 1");
        }
        if !(self.m > 1.0) || !self.m.is_finite() {
            return domain(format!("good-set M must exceed 1, got {}", self.m));
        }
        let b = &self.budget;
        if b.search_grid < 2 || !(b.initial_step > 0.0) || !(b.min_step > 0.0) {
            return domain("budget needs search_grid >= 2 and positive steps");
        }
        match &self.constraint {
            OptConstraint::None => {}
            OptConstraint::Endpoint(z) => {
                LogPoint::new(z.x, z.y)?;
            }
            OptConstraint::Ball { center, radius, metric } => {
                if !(*radius >= 0.0) || !radius.is_finite() {
                    return domain(format!("ball radius must be finite and >= 0, got {radius}"));
                }
                if *metric != BallMetric::Levy && center.n != self.n {
                    return domain(format!("ball center lives on a 1/{} grid, problem on 1/{}", center.n, self.n));
                }
            }
        }
        Ok(())
    }

    /// Corridors from `G_M`, the endpoint and grid/sup balls, or an
    /// infeasibility certificate naming the first empty corridor.
    pub(crate) fn corridors(&self) -> Result<Corridors> {
        self.validate()?;
        let n = self.n;
        let s = |i: usize| i as f64 / n as f64;
        let mut lo: [Vec<f64>; 2] = std::array::from_fn(|_| (0..=n).map(|i| s(i) / self.m).collect());
        let mut hi: [Vec<f64>; 2] = std::array::from_fn(|_| (0..=n).map(|i| s(i) * self.m).collect());
        match &self.constraint {
            OptConstraint::None => {}
            OptConstraint::Endpoint(z) => {
                for (c, v) in [z.x, z.y].into_iter().enumerate() {
                    lo[c][n] = lo[c][n].max(v);
                    hi[c][n] = hi[c][n].min(v);
                }
            }
            OptConstraint::Ball { center, radius, metric } => {
                if *metric != BallMetric::Levy {
                    for (c, vals) in [&center.xs, &center.ys].into_iter().enumerate() {
                        for i in 0..=n {
                            lo[c][i] = lo[c][i].max(vals[i] - radius);
                            hi[c][i] = hi[c][i].min(vals[i] + radius);
                        }
                    }
                }
            }
        }
        for c in 0..2 {
            for i in 1..=n {
                lo[c][i] = lo[c][i].max(lo[c][i - 1]);
            }
            for i in (0..n).rev() {
                hi[c][i] = hi[c][i].min(hi[c][i + 1]);
            }
            if let Some(i) = (0..=n).find(|&i| lo[c][i] > hi[c][i]) {
                return Err(Error::Infeasible(format!(
                    "{} corridor empty at s = {}: lower {} exceeds upper {}",
                    ["X", "Y"][c],
                    s(i),
                    lo[c][i],
                    hi[c][i]
                )));
            }
        }
        Ok(Corridors { lo, hi })
    }

    /// The Lévy ball, which the corridors cannot express.
    pub(crate) fn admits(&self, g: &PLGrid) -> Result<bool> {
        match &self.constraint {
            OptConstraint::Ball { center, radius, metric: BallMetric::Levy } => {
                Ok(levy_distance(&g.to_path(), &center.to_path())? <= *radius)
            }
            _ => Ok(true),
        }
    }

    pub(crate) fn search_options(&self) -> KOptions {
        KOptions { grid: self.budget.search_grid, ..KOptions::default() }
    }
}

impl Corridors {
    /// Nonnegative increments, cumulated, then clamped into the corridors.
    pub fn project(&self, inc: &[Vec<f64>; 2]) -> PLGrid {
        let mut vals: [Vec<f64>; 2] = [Vec::new(), Vec::new()];
        for c in 0..2 {
            let mut acc = 0.0;
            vals[c].push(0.0);
            for (i, d) in inc[c].iter().enumerate() {
                acc += d.max(0.0);
                vals[c].push(acc.clamp(self.lo[c][i + 1], self.hi[c][i + 1]));
            }
        }
        let [xs, ys] = vals;
        PLGrid::new(xs, ys).expect("clamped monotone sequence")
    }
}

pub(crate) fn increments(g: &PLGrid) -> [Vec<f64>; 2] {
    let d = |v: &[f64]| v.windows(2).map(|w| w[1] - w[0]).collect();
    [d(&g.xs), d(&g.ys)]
}

/// `K(g)` with the given options; `-inf` marks K-infeasible paths. Paths on
/// which the functionals are undefined count as infeasible too.
pub(crate) fn objective(g: &PLGrid, opt: KOptions) -> f64 {
    rate_k_with(&g.to_path(), opt).map_or(f64::NEG_INFINITY, |r| r.k_value)
}
