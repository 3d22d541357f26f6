use std::fmt::Write as _;

use rand::Rng;
use rand_distr::Exp1;

use crate::error::{domain, Error, Result};
use crate::functionals::IntervalRates;
use crate::model::{rate_x, rate_y, AspectRule, LogPoint};
use crate::paths::{BoxEnvelope, PathSet};
use crate::simulator::{replica_rng, spine_step};

/// `I_j = [j/n, (j+1)/n]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GridInterval {
    pub n: usize,
    pub j: usize,
}

impl GridInterval {
    pub fn new(n: usize, j: usize) -> Result<Self> {
        if n == 0 || j >= n {
            return domain(format!("interval {j} of {n} does not exist"));
        }
        Ok(GridInterval { n, j })
    }

    pub fn lo(&self) -> f64 {
        self.j as f64 / self.n as f64
    }

    pub fn hi(&self) -> f64 {
        if self.j + 1 == self.n {
            1.0
        } else {
            (self.j + 1) as f64 / self.n as f64
        }
    }
}

/// Envelope and extreme rates of a set over one interval, at scale `T`.
#[derive(Debug, Clone)]
pub struct CouplingSetup<'a> {
    pub set: &'a PathSet,
    pub interval: GridInterval,
    pub scale: f64,
    pub env: BoxEnvelope,
    pub rates: IntervalRates,
}

impl<'a> CouplingSetup<'a> {
    pub fn new(set: &'a PathSet, interval: GridInterval, scale: f64) -> Result<Self> {
        if !set.is_pointwise() {
            return Err(Error::Unsupported("coupling against a Levy ball".into()));
        }
        let env = set.box_envelope(interval.n)?;
        let rates = IntervalRates::from_envelope(&env, interval.j, scale)?;
        Ok(CouplingSetup { set, interval, scale, env, rates })
    }

    /// `V(I, F)`, as `((x⁻, x⁺), (y⁻, y⁺))` at the left endpoint.
    pub fn start_box(&self) -> ((f64, f64), (f64, f64)) {
        let j = self.interval.j;
        ((self.env.x_lo[j], self.env.x_hi[j]), (self.env.y_lo[j], self.env.y_hi[j]))
    }

    fn check_start(&self, z: LogPoint) -> Result<()> {
        let ((x0, x1), (y0, y1)) = self.start_box();
        if z.x < x0 || z.x > x1 || z.y < y0 || z.y > y1 {
            return domain(format!("start {z:?} outside the start box"));
        }
        Ok(())
    }
}

/// One row of a coupled run, after the event at `s`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoupledStep {
    pub s: f64,
    pub minus: LogPoint,
    pub z: LogPoint,
    pub plus: LogPoint,
    /// `Z` restricted to `[I⁻, s]` extends to a member of the set.
    pub in_set: bool,
}

/// Jump counts per coordinate: `[X, Y]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct JumpCounts {
    pub plus: [u32; 2],
    pub z: [u32; 2],
    pub minus: [u32; 2],
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoupledRun {
    pub steps: Vec<CoupledStep>,
    pub jumps: JumpCounts,
}

impl CoupledRun {
    pub fn last(&self) -> &CoupledStep {
        self.steps.last().expect("a run has at least its start row")
    }

    /// Whether the sandwich holds at every row where `Z` is still in the set.
    pub fn sandwich_violations(&self) -> usize {
        self.steps
            .iter()
            .filter(|r| r.in_set)
            .filter(|r| !(r.minus.x <= r.z.x && r.z.x <= r.plus.x && r.minus.y <= r.z.y && r.z.y <= r.plus.y))
            .count()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(RUN_CSV_HEADER);
        out.push('\n');
        for r in &self.steps {
            let _ = writeln!(
                out,
                "{:?},{:?},{:?},{:?},{:?},{:?},{:?},{}",
                r.s, r.minus.x, r.z.x, r.plus.x, r.minus.y, r.z.y, r.plus.y, r.in_set as u8
            );
        }
        out
    }
}

pub const RUN_CSV_HEADER: &str = "s,x_minus,x,x_plus,y_minus,y,y_plus,in_set";

/// Runs `(Z₋, Z, Z₊)` over the interval from `start`.
pub fn couple_run<G: Rng + ?Sized>(rng: &mut G, setup: &CouplingSetup, start: LogPoint) -> Result<CoupledRun> {
    setup.check_start(start)?;
    let t = setup.scale;
    let r = setup.rates;
    let (lo, hi) = (setup.interval.lo(), setup.interval.hi());
    let total = 2.0 * (r.rx_plus + r.ry_plus) * t;
    let p_x = r.rx_plus / (r.rx_plus + r.ry_plus);
    let (mut minus, mut z, mut plus) = (start, start, start);
    let mut jumps = JumpCounts::default();
    let mut alive = true;
    let mut last = lo;
    let mut steps = vec![CoupledStep { s: lo, minus, z, plus, in_set: setup.set.admits_point(z, lo, 0.0) }];
    loop {
        let s = last + rng.sample::<f64, _>(Exp1) / total;
        if s > hi {
            break;
        }
        alive = alive && setup.set.admits_constant(z, last, s, 0.0);
        let size = rng.sample::<f64, _>(Exp1) / t;
        let u: f64 = rng.random();
        let (tz, tzy) = (t * z.x, t * z.y);
        if rng.random::<f64>() < p_x {
            plus.x += size;
            jumps.plus[0] += 1;
            if u <= rate_x(tz, tzy) / r.rx_plus {
                z.x += size;
                jumps.z[0] += 1;
            }
            if u <= r.rx_minus / r.rx_plus {
                minus.x += size;
                jumps.minus[0] += 1;
            }
        } else {
            plus.y += size;
            jumps.plus[1] += 1;
            if u <= rate_y(tz, tzy) / r.ry_plus {
                z.y += size;
                jumps.z[1] += 1;
            }
            if u <= r.ry_minus / r.ry_plus {
                minus.y += size;
                jumps.minus[1] += 1;
            }
        }
        last = s;
        steps.push(CoupledStep { s, minus, z, plus, in_set: alive && setup.set.admits_point(z, s, 0.0) });
    }
    alive = alive && setup.set.admits_constant(z, last, hi, 0.0);
    steps.push(CoupledStep { s: hi, minus, z, plus, in_set: alive && setup.set.admits_point(z, hi, 0.0) });
    Ok(CoupledRun { steps, jumps })
}

/// A coupled run with the generator of `seed`.
pub fn couple_simulate(
    seed: u64,
    interval: GridInterval,
    set: &PathSet,
    scale: f64,
    start: LogPoint,
) -> Result<CoupledRun> {
    let setup = CouplingSetup::new(set, interval, scale)?;
    couple_run(&mut replica_rng(seed, 0), &setup, start)
}

/// The rescaled spine `ξ^T` over the interval from `start`, without the
/// coupling: its endpoint and whether it stayed in the set.
pub fn spine_on_interval<G: Rng + ?Sized>(
    rng: &mut G,
    setup: &CouplingSetup,
    start: LogPoint,
) -> Result<(LogPoint, bool)> {
    setup.check_start(start)?;
    let t = setup.scale;
    let (lo, hi) = (setup.interval.lo(), setup.interval.hi());
    let mut z = start;
    let mut last = lo;
    let mut alive = true;
    loop {
        let (wait, dx, dy) = spine_step(rng, &AspectRule, z.scale(t));
        let s = last + wait / t;
        if s > hi {
            break;
        }
        alive = alive && setup.set.admits_constant(z, last, s, 0.0);
        z.x += dx / t;
        z.y += dy / t;
        last = s;
    }
    alive = alive && setup.set.admits_constant(z, last, hi, 0.0) && setup.set.admits_point(z, hi, 0.0);
    Ok((z, alive))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::paths::HybridPath;

    fn lambda_setup(set: &PathSet) -> CouplingSetup<'_> {
        CouplingSetup::new(set, GridInterval::new(10, 0).unwrap(), 50.0).unwrap()
    }

    fn diag_set() -> PathSet {
        PathSet::lambda(HybridPath::linear(1.0, 1.0).unwrap(), 10, 3.0, 50.0).unwrap()
    }

    #[test]
    fn start_box_is_enforced() {
        let set = diag_set();
        let setup = lambda_setup(&set);
        let ((x0, x1), _) = setup.start_box();
        assert!(x0 <= x1);
        let bad = LogPoint { x: x1 + 1.0, y: 0.0 };
        assert!(couple_run(&mut replica_rng(1, 0), &setup, bad).is_err());
        assert!(GridInterval::new(4, 4).is_err());
    }

    #[test]
    fn jumps_are_nested() {
        let set = diag_set();
        let setup = lambda_setup(&set);
        for i in 0..200 {
            let run = couple_run(&mut replica_rng(2, i), &setup, LogPoint::ORIGIN).unwrap();
            let j = run.jumps;
            for c in 0..2 {
                assert!(j.minus[c] <= j.plus[c] && j.z[c] <= j.plus[c]);
            }
            let end = run.last();
            assert!(end.z.x <= end.plus.x && end.z.y <= end.plus.y);
            assert_eq!(end.s, setup.interval.hi());
        }
    }

    #[test]
    fn degenerate_rates_share_decisions() {
        // Ahead in X, so R_X is exactly 1/2 throughout the box.
        let set = PathSet::sup_ball(HybridPath::linear(3.0, 0.5).unwrap(), 0.05).unwrap();
        let setup = CouplingSetup::new(&set, GridInterval::new(4, 2).unwrap(), 40.0).unwrap();
        assert_eq!(setup.rates.rx_minus, setup.rates.rx_plus);
        let ((x0, _), (y0, _)) = setup.start_box();
        let start = LogPoint { x: x0 + 0.01, y: y0 + 0.01 };
        for i in 0..200 {
            let run = couple_run(&mut replica_rng(3, i), &setup, start).unwrap();
            for r in run.steps.iter().filter(|r| r.in_set) {
                assert_eq!(r.minus.x, r.z.x);
            }
        }
    }

    #[test]
    fn csv_shape() {
        let set = diag_set();
        let run = couple_simulate(4, GridInterval::new(10, 0).unwrap(), &set, 50.0, LogPoint::ORIGIN).unwrap();
        let csv = run.to_csv();
        assert!(csv.starts_with(RUN_CSV_HEADER));
        assert_eq!(csv.lines().count(), run.steps.len() + 1);
    }
}
