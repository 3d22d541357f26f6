//! The spine under the tilted measure, and the many-to-one estimator.

use rand::Rng;
use rand_distr::Exp1;
use rayon::prelude::*;

use super::rng::replica_rng;
use super::stream::{alive_count, tree_keys};
use crate::error::{domain, Result};
use crate::model::{AspectRule, LogPoint, SplitRule};
use crate::stats::Estimate;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpineJump {
    pub time: f64,
    pub dx: f64,
    pub dy: f64,
}

/// The spine at the end of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct SpineState {
    pub z: LogPoint,
    /// `∫_0^t R(ξ_s) ds`.
    pub integral: f64,
    pub jumps: Vec<SpineJump>,
}

impl SpineState {
    /// Many-to-one weight `exp(∫R)`.
    pub fn weight(&self) -> f64 {
        self.integral.exp()
    }
}

/// Runs the spine from `start` for time `t`: jumps at rate `2R(z)`, an Exp(1)
/// step in `X` with probability `P(z)`, else in `Y`.
pub fn spine_run<G: Rng + ?Sized>(rng: &mut G, rule: &dyn SplitRule, start: LogPoint, t: f64) -> SpineState {
    let mut z = start;
    let mut now = 0.0;
    let mut integral = 0.0;
    let mut jumps = Vec::new();
    loop {
        let r = rule.rate(z);
        let (wait, dx, dy) = spine_step(rng, rule, z);
        if now + wait > t {
            integral += r * (t - now);
            return SpineState { z, integral, jumps };
        }
        now += wait;
        integral += r * wait;
        z.x += dx;
        z.y += dy;
        jumps.push(SpineJump { time: now, dx, dy });
    }
}

/// Holding time at `z` and the jump that ends it.
pub fn spine_step<G: Rng + ?Sized>(rng: &mut G, rule: &dyn SplitRule, z: LogPoint) -> (f64, f64, f64) {
    let wait = rng.sample::<f64, _>(Exp1) / (2.0 * rule.rate(z));
    let size: f64 = rng.sample(Exp1);
    if rng.random::<f64>() < rule.dir_prob(z) {
        (wait, size, 0.0)
    } else {
        (wait, 0.0, size)
    }
}

fn check_time(t: f64) -> Result<()> {
    if !(t >= 0.0) || !t.is_finite() {
        return domain(format!("time must be finite and >= 0, got {t}"));
    }
    Ok(())
}

/// One spine run from the origin under `seed`.
pub fn spine_simulate(seed: u64, t: f64) -> Result<SpineState> {
    check_time(t)?;
    Ok(spine_run(&mut replica_rng(seed, 0), &AspectRule, LogPoint::ORIGIN, t))
}

/// Estimates `E[Σ_{u ∈ N_t} f(Z_u(t))]` by `Q[f(ξ_t) e^{∫R}]`.
pub fn many_to_one_estimate<F>(seed: u64, t: f64, replicas: usize, f: F) -> Result<Estimate>
where
    F: Fn(LogPoint) -> f64 + Sync,
{
    check_time(t)?;
    if replicas == 0 {
        return domain("need at least one replica");
    }
    let samples: Vec<f64> = (0..replicas as u64)
        .into_par_iter()
        .map(|i| {
            let s = spine_run(&mut replica_rng(seed, i), &AspectRule, LogPoint::ORIGIN, t);
            f(s.z) * s.weight()
        })
        .collect();
    Ok(Estimate::from_samples(&samples))
}

/// Average of `|N_t|` over independent trees, by direct simulation.
pub fn direct_population_estimate(seed: u64, t: f64, trees: usize, cap: usize) -> Result<Estimate> {
    check_time(t)?;
    if trees == 0 {
        return domain("need at least one tree");
    }
    let counts = tree_keys(seed, trees)
        .into_par_iter()
        .map(|k| alive_count(k, t, cap).map(|c| c as f64))
        .collect::<Result<Vec<f64>>>()?;
    Ok(Estimate::from_samples(&counts))
}
