//! Probability that a compound Poisson process follows a line.

use rand::Rng;
use rand_distr::Exp1;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{domain, Result};
use crate::simulator::replica_rng;
use crate::stats::Estimate;

/// `X` is compound Poisson with rate `RT` and Exp(`T`) jumps. The tube event is
/// `|a + X(s) - As| < δ` for `s <= t`, plus `|a + X(t) - At| < δ/2` when an
/// offset `a` is given.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TubeSpec {
    pub rate: f64,
    pub slope: f64,
    pub delta: f64,
    pub duration: f64,
    pub scale: f64,
    pub offset: Option<f64>,
}

impl TubeSpec {
    pub fn validate(&self) -> Result<()> {
        let TubeSpec { rate, slope, delta, duration, scale, offset } = *self;
        if !(rate >= 0.5) || !rate.is_finite() {
            return domain(format!("tube rate must be >= 1/2, got {rate}"));
        }
        if !(slope > 0.0) || !(delta > 0.0) || !(duration > 0.0) || !(scale > 0.0) {
            return domain("tube slope, width, duration and scale must be positive");
        }
        if let Some(a) = offset {
            if !(a < duration * slope / 2.0) || !(a.abs() <= delta / 2.0) {
                return domain(format!("offset {a} needs a < tA/2 and |a| <= delta/2"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TubeBounds {
    pub upper: f64,
    /// Present only when `T` exceeds the threshold.
    pub lower: Option<f64>,
    pub threshold: f64,
}

fn lemma_threshold(r: f64, a: f64, t: f64, d: f64) -> f64 {
    2.0 * a.powf(1.5) * (4.0 * t + d) / (r.sqrt() * d * d * a.min(1.0).powi(2))
}

/// Analytic bounds on the tube probability.
pub fn tube_bounds(spec: &TubeSpec) -> Result<TubeBounds> {
    spec.validate()?;
    let TubeSpec { rate: r, slope: a, delta: d, duration: t, scale: big_t, offset } = *spec;
    let gap = (r.sqrt() - a.sqrt()).powi(2);
    let tilt = (1.0 - (r / a).sqrt()).abs();
    match offset {
        None => {
            let threshold = lemma_threshold(r, a, t, d);
            let upper = (-t * big_t * gap + d * tilt * big_t).exp();
            let lower = (big_t > threshold).then(|| 0.5 * (-t * big_t * gap - d * a.min(1.0) * tilt * big_t).exp());
            Ok(TubeBounds { upper, lower, threshold })
        }
        Some(off) => {
            let threshold = lemma_threshold(r, a - off / t, t, d);
            // The event forces |X(s) - As| < δ + |a|.
            let upper = (-t * big_t * gap + (d + off.abs()) * tilt * big_t).exp();
            let slack = d * (1.0 + r.sqrt() * ((2.0 * t / d).sqrt() + 0.5));
            let lower = (big_t > threshold).then(|| 0.5 * (-t * big_t * gap - slack * big_t).exp());
            Ok(TubeBounds { upper, lower, threshold })
        }
    }
}

/// One sample of the tube event. Between jumps the gap `a + X(s) - As` falls
/// linearly, so checking both sides of each jump is exact.
pub fn tube_event<G: Rng + ?Sized>(rng: &mut G, spec: &TubeSpec) -> bool {
    let TubeSpec { rate, slope, delta, duration, scale, offset } = *spec;
    let a = offset.unwrap_or(0.0);
    let jump_rate = rate * scale;
    if a.abs() >= delta {
        return false;
    }
    let mut now = 0.0;
    let mut x = 0.0;
    loop {
        let next = now + rng.sample::<f64, _>(Exp1) / jump_rate;
        let stop = next.min(duration);
        if a + x - slope * stop <= -delta {
            return false;
        }
        if next >= duration {
            let end = a + x - slope * duration;
            return offset.is_none() || end.abs() < delta / 2.0;
        }
        x += rng.sample::<f64, _>(Exp1) / scale;
        now = next;
        if a + x - slope * now >= delta {
            return false;
        }
    }
}

/// Monte Carlo estimate of the tube probability.
pub fn tube_prob_mc(seed: u64, spec: &TubeSpec, replicas: usize) -> Result<Estimate> {
    spec.validate()?;
    if replicas == 0 {
        return domain("need at least one replica");
    }
    let hits: Vec<f64> = (0..replicas as u64)
        .into_par_iter()
        .map(|i| tube_event(&mut replica_rng(seed, i), spec) as u8 as f64)
        .collect();
    Ok(Estimate::from_samples(&hits))
}
