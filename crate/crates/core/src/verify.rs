//! Statistical and deterministic checks of the simulator, the coupling, the
//! tube bounds, the metrics and the optimizer, grouped into named suites.
//!
//! Every check is deterministic given its seed. `scale` shrinks the sample
//! sizes for quick runs; `1.0` is the full size.

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::coupling::{
    couple_run, spine_on_interval, tube_bounds, tube_prob_mc, CouplingSetup, GridInterval, TubeBounds, TubeSpec,
};
use crate::error::{domain, Result};
use crate::functionals::delta_bound;
use crate::model::{limit_component_rates, LogPoint};
use crate::optimizer::{brute_force_oracle, optimize, BallMetric, OptConstraint, OptProblem};
use crate::paths::{
    check_cover, is_good, levy_distance_scan, levy_distance_track, quantize_to_cover, GoodSetSpec, HybridPath, Knot,
    PLGrid, PathSet, Track,
};
use crate::simulator::{
    direct_population_estimate, discrete_moments, many_to_one_estimate, replica_rng, spine_run, MomentReport,
    DEFAULT_CAP,
};
use crate::stats::Estimate;

pub const SUITES: [&str; 8] =
    ["mto", "moments", "coupling", "tube", "metrics", "sandwich", "cover", "optimizer-oracle"];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

impl Check {
    fn new(name: &str, pass: bool, detail: String) -> Self {
        Check { name: name.into(), pass, detail }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub checks: Vec<Check>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

fn sized(base: usize, scale: f64, min: usize) -> usize {
    ((base as f64 * scale).ceil() as usize).max(min)
}

fn check_scale(scale: f64) -> Result<()> {
    if !(scale > 0.0 && scale <= 1.0) {
        return domain(format!("scale must lie in (0, 1], got {scale}"));
    }
    Ok(())
}

fn agree(name: &str, a: &Estimate, b: &Estimate, k: f64) -> Check {
    Check::new(
        name,
        a.agrees_with(b, k),
        format!("{:.6} ± {:.6} vs {:.6} ± {:.6}", a.mean, a.std_error, b.mean, b.std_error),
    )
}

/// Runs one suite by name.
pub fn run_suite(name: &str, seed: u64, scale: f64) -> Result<SuiteReport> {
    check_scale(scale)?;
    let checks = match name {
        "mto" => vec![many_to_one(seed, scale)?],
        "moments" => moments(seed, scale)?,
        "coupling" => vec![coupling_sandwich(seed, scale)?, coupling_thinning(seed, scale)?]
            .into_iter()
            .chain(coupling_spine_law(seed, scale)?)
            .collect(),
        "tube" => tube_grid(seed, scale)?,
        "metrics" => metrics(seed, scale)?,
        "sandwich" => vec![delta_sandwich(seed, scale)?],
        "cover" => vec![cover(seed, scale)?],
        "optimizer-oracle" => vec![optimizer_oracle(seed, scale)?],
        other => return domain(format!("unknown suite '{other}'; known: {}", SUITES.join(", "))),
    };
    Ok(SuiteReport { suite: name.into(), checks })
}

/// Mean population at `t = 2`: direct simulation against the spine.
pub fn many_to_one(seed: u64, scale: f64) -> Result<Check> {
    let direct = direct_population_estimate(seed, 2.0, sized(10_000, scale, 200), DEFAULT_CAP)?;
    let spine = many_to_one_estimate(seed ^ 0x9e37_79b9, 2.0, sized(100_000, scale, 2000), |_| 1.0)?;
    Ok(agree("mean |N_2|: trees vs spine", &direct, &spine, 3.0))
}

/// Upper bounds on the moments of `X - Y` along the all-ones lineage at `j = 20`.
pub fn moments(seed: u64, scale: f64) -> Result<Vec<Check>> {
    let r = discrete_moments(seed, 20, sized(100_000, scale, 2000))?;
    let b = MomentReport::delta_bounds(20);
    Ok([("E[D^2]", r.delta2, b[0]), ("E[D^4]", r.delta4, b[1]), ("E[D^6]", r.delta6, b[2])]
        .into_iter()
        .map(|(name, e, bound)| {
            let top = e.mean + 3.0 * e.std_error;
            Check::new(name, top <= bound, format!("mean + 3SE = {top:.3} <= {bound}"))
        })
        .collect())
}

fn diagonal_lambda() -> Result<PathSet> {
    PathSet::lambda(HybridPath::linear(1.0, 1.0)?, 10, 3.0, 50.0)
}

fn uniform_start<G: Rng>(rng: &mut G, setup: &CouplingSetup) -> LogPoint {
    let ((x0, x1), (y0, y1)) = setup.start_box();
    LogPoint { x: x0 + (x1 - x0) * rng.random::<f64>(), y: y0 + (y1 - y0) * rng.random::<f64>() }
}

/// `Z₋ <= Z <= Z₊` while `Z` stays in the set, over `I = [0, 0.1]` at `T = 50`.
pub fn coupling_sandwich(seed: u64, scale: f64) -> Result<Check> {
    let set = diagonal_lambda()?;
    let setup = CouplingSetup::new(&set, GridInterval::new(10, 0)?, 50.0)?;
    let runs = sized(10_000, scale, 200);
    let tallies = (0..runs as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = replica_rng(seed, i);
            let start = uniform_start(&mut rng, &setup);
            let run = couple_run(&mut rng, &setup, start)?;
            Ok((run.sandwich_violations(), run.steps.iter().filter(|r| r.in_set).count()))
        })
        .collect::<Result<Vec<_>>>()?;
    let bad: usize = tallies.iter().map(|t| t.0).sum();
    let rows: usize = tallies.iter().map(|t| t.1).sum();
    Ok(Check::new("sandwich", bad == 0, format!("{bad} violations over {rows} in-set rows, {runs} runs")))
}

/// `X₊` jumps rejected by `X₋` form a Poisson count with mean
/// `2(R⁺ - R⁻)T|I|`: chi-square goodness of fit.
pub fn coupling_thinning(seed: u64, scale: f64) -> Result<Check> {
    let set = diagonal_lambda()?;
    let setup = CouplingSetup::new(&set, GridInterval::new(10, 0)?, 50.0)?;
    let start = LogPoint::ORIGIN;
    let runs = sized(10_000, scale, 500);
    let counts = (0..runs as u64)
        .into_par_iter()
        .map(|i| {
            let run = couple_run(&mut replica_rng(seed ^ 0x7f4a_7c15, i), &setup, start)?;
            Ok((run.jumps.plus[0] - run.jumps.minus[0]) as usize)
        })
        .collect::<Result<Vec<usize>>>()?;
    let r = setup.rates;
    let mean = 2.0 * (r.rx_plus - r.rx_minus) * setup.scale * 0.1;
    let (stat, df, p) = poisson_chi_square(&counts, mean);
    Ok(Check::new(
        "thinned X jumps are Poisson",
        p > 1e-3,
        format!("mean {mean:.4}, chi2 = {stat:.3} on {df} df, p = {p:.4}"),
    ))
}

/// Pearson statistic with bins merged until each expects at least 5.
fn poisson_chi_square(counts: &[usize], mean: f64) -> (f64, usize, f64) {
    let n = counts.len() as f64;
    if mean == 0.0 {
        let ok = counts.iter().all(|&c| c == 0);
        return (0.0, 0, if ok { 1.0 } else { 0.0 });
    }
    let top = counts.iter().copied().max().unwrap_or(0) + 1;
    let mut obs = vec![0.0; top + 1];
    for &c in counts {
        obs[c] += 1.0;
    }
    let mut pmf = (-mean).exp();
    let mut bins: Vec<(f64, f64)> = Vec::new();
    let (mut o, mut e) = (0.0, 0.0);
    let mut cum = 0.0;
    for (k, &ok) in obs.iter().enumerate().take(top) {
        o += ok;
        e += n * pmf;
        cum += pmf;
        if e >= 5.0 {
            bins.push((o, e));
            o = 0.0;
            e = 0.0;
        }
        pmf *= mean / (k + 1) as f64;
    }
    // Everything beyond the last observed count joins the final bin.
    let tail = n * (1.0 - cum).max(0.0);
    match bins.last_mut() {
        Some(last) if e + tail < 5.0 => {
            last.0 += o;
            last.1 += e + tail;
        }
        _ => bins.push((o, e + tail)),
    }
    let stat: f64 = bins.iter().map(|(o, e)| (o - e).powi(2) / e).sum();
    let df = bins.len().saturating_sub(1).max(1);
    let p = 1.0 - ChiSquared::new(df as f64).map_or(1.0, |d| d.cdf(stat));
    (stat, df, p)
}

/// `Z` stopped when it leaves the set against the rescaled spine: the
/// in-set probability and the stopped endpoint means.
pub fn coupling_spine_law(seed: u64, scale: f64) -> Result<Vec<Check>> {
    // A ball wide enough that a fair share of runs stays inside.
    let set = PathSet::sup_ball(HybridPath::linear(1.0, 1.0)?, 0.1)?;
    let setup = CouplingSetup::new(&set, GridInterval::new(10, 0)?, 50.0)?;
    let ((x0, x1), (y0, y1)) = setup.start_box();
    let start = LogPoint { x: 0.5 * (x0 + x1), y: 0.5 * (y0 + y1) };
    let runs = sized(10_000, scale, 500) as u64;
    let coupled = (0..runs)
        .into_par_iter()
        .map(|i| {
            let end = *couple_run(&mut replica_rng(seed ^ 0x2545_f491, i), &setup, start)?.last();
            Ok((end.z, end.in_set))
        })
        .collect::<Result<Vec<_>>>()?;
    let direct = (0..runs)
        .into_par_iter()
        .map(|i| spine_on_interval(&mut replica_rng(seed ^ 0x4f1b_bcdc, i), &setup, start))
        .collect::<Result<Vec<_>>>()?;
    let stats = |v: &[(LogPoint, bool)]| {
        let col = |f: &dyn Fn(&(LogPoint, bool)) -> f64| Estimate::from_samples(&v.iter().map(f).collect::<Vec<_>>());
        [col(&|p| p.1 as u8 as f64), col(&|p| if p.1 { p.0.x } else { 0.0 }), col(&|p| if p.1 { p.0.y } else { 0.0 })]
    };
    let (a, b) = (stats(&coupled), stats(&direct));
    Ok(["stopped: P(in set)", "stopped: E[X; in set]", "stopped: E[Y; in set]"]
        .into_iter()
        .zip(a.iter().zip(&b))
        .map(|(name, (a, b))| agree(name, a, b, 3.0))
        .collect())
}

/// Bounds and Monte Carlo estimates on the grid `R ∈ {1,2,4}`,
/// `A ∈ {1/2,1,2}`, `δ ∈ {0.2,0.5}`, `t = 1`, `T = 2000`.
pub fn tube_cases(seed: u64, scale: f64, offset: Option<f64>) -> Result<Vec<(TubeSpec, TubeBounds, Estimate)>> {
    let reps = sized(100_000, scale, 2000);
    let mut out = Vec::new();
    for rate in [1.0, 2.0, 4.0] {
        for slope in [0.5, 1.0, 2.0] {
            for delta in [0.2, 0.5] {
                let spec = TubeSpec { rate, slope, delta, duration: 1.0, scale: 2000.0, offset };
                let k = out.len() as u64 + if offset.is_some() { 100 } else { 0 };
                out.push((spec, tube_bounds(&spec)?, tube_prob_mc(seed.wrapping_add(k), &spec, reps)?));
            }
        }
    }
    Ok(out)
}

/// Tube cases with and without the endpoint condition. With no hits the
/// standard error is floored at `1/reps` so a positive but astronomically
/// small lower bound is not rejected.
pub fn tube_grid(seed: u64, scale: f64) -> Result<Vec<Check>> {
    let mut out = Vec::new();
    for offset in [None, Some(0.0)] {
        for (spec, b, e) in tube_cases(seed, scale, offset)? {
            let se = if e.std_error == 0.0 { 1.0 / e.samples as f64 } else { e.std_error };
            let lower = b.lower.unwrap_or(f64::NAN);
            let pass = b.lower.is_some() && lower - 3.0 * se <= e.mean && e.mean <= b.upper + 3.0 * se;
            let form = if offset.is_some() { "endpoint" } else { "plain" };
            out.push(Check::new(
                &format!("tube {form} R={} A={} delta={}", spec.rate, spec.slope, spec.delta),
                pass,
                format!("{lower:.3e} <= {:.4e} ± {:.1e} <= {:.3e}", e.mean, e.std_error, b.upper),
            ));
        }
    }
    Ok(out)
}

fn random_track<G: Rng>(rng: &mut G) -> Track {
    let k = rng.random_range(1..5);
    let mut pts: Vec<(f64, f64, bool)> =
        (0..k).map(|_| (rng.random_range(0.01..0.99), rng.random_range(0.0..0.5), rng.random())).collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    pts.dedup_by(|a, b| (a.0 - b.0).abs() < 1e-6);
    let mut knots = vec![Knot::cont(0.0, 0.0)];
    let mut v = 0.0;
    for (t, inc, jump) in pts {
        knots.push(if jump { Knot { t, left: v, value: v + inc } } else { Knot::cont(t, v + inc) });
        v += inc;
    }
    knots.push(Knot::cont(1.0, v + 0.1));
    Track::new(knots).expect("increasing knots")
}

/// Lévy distance: symmetry and the triangle inequality on random triples,
/// and agreement with a slow scan on random pairs.
pub fn metrics(seed: u64, scale: f64) -> Result<Vec<Check>> {
    let triples = sized(500, scale, 20) as u64;
    let worst = (0..triples)
        .into_par_iter()
        .map(|i| {
            let mut rng = replica_rng(seed, i);
            let (f, g, h) = (random_track(&mut rng), random_track(&mut rng), random_track(&mut rng));
            let fg = levy_distance_track(&f, &g)?;
            let gf = levy_distance_track(&g, &f)?;
            let fh = levy_distance_track(&f, &h)?;
            let gh = levy_distance_track(&g, &h)?;
            Ok(((fg - gf).abs(), fh - fg - gh))
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold((0.0f64, f64::NEG_INFINITY), |a, b| (a.0.max(b.0), a.1.max(b.1)));
    let pairs = sized(200, scale, 10) as u64;
    let gap = (0..pairs)
        .into_par_iter()
        .map(|i| {
            let mut rng = replica_rng(seed ^ 0x51ed_270b, i);
            let (f, g) = (random_track(&mut rng), random_track(&mut rng));
            Ok((levy_distance_track(&f, &g)? - levy_distance_scan(&f, &g, 1e-4)).abs())
        })
        .collect::<Result<Vec<f64>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    Ok(vec![
        Check::new("symmetry", worst.0 <= 1e-9, format!("max |d(f,g) - d(g,f)| = {:.3e}", worst.0)),
        Check::new("triangle", worst.1 <= 2e-9, format!("max d(f,h) - d(f,g) - d(g,h) = {:.3e}", worst.1)),
        Check::new("scan oracle", gap <= 1e-4, format!("max gap {gap:.3e} over {pairs} pairs")),
    ])
}

/// A random member of `PL_n² ∩ G_M²`: every slope in `[1/M, M]`.
pub fn random_good_grid<G: Rng>(rng: &mut G, n: usize, m: f64) -> PLGrid {
    let mut walk = || {
        let mut v = vec![0.0];
        for _ in 0..n {
            let slope = (1.0 / m) * (m * m).powf(rng.random::<f64>());
            v.push(v.last().unwrap() + slope / n as f64);
        }
        v
    };
    let xs = walk();
    let ys = walk();
    PLGrid::new(xs, ys).expect("increasing walk")
}

/// `R_X⁺(j) - δ <= R*_X(f(s)) <= R_X⁻(j) + δ` at interval midpoints, for the
/// Λ set around random `f ∈ PL_64² ∩ G_2²`.
pub fn delta_sandwich(seed: u64, scale: f64) -> Result<Check> {
    let (n, m) = (64usize, 2.0);
    let paths = sized(100, scale, 10) as u64;
    let fails = (0..paths)
        .into_par_iter()
        .map(|i| {
            let mut rng = replica_rng(seed, i);
            let f = random_good_grid(&mut rng, n, m);
            let t = [1e3, 1e4, 1e6][i as usize % 3];
            let env = PathSet::lambda(f.to_path(), n, m, t)?.box_envelope(n)?;
            let path = f.to_path();
            let mut bad = 0usize;
            for j in 8..n {
                let r = crate::functionals::IntervalRates::from_envelope(&env, j, t)?;
                let d = delta_bound(m, t, j, n, &f)?;
                let s = (j as f64 + 0.5) / n as f64;
                let rx = limit_component_rates(path.at(s))?.0.to_f64();
                if !(r.rx_plus - d <= rx && rx <= r.rx_minus + d) {
                    bad += 1;
                }
            }
            Ok(bad)
        })
        .collect::<Result<Vec<usize>>>()?;
    let bad: usize = fails.iter().sum();
    Ok(Check::new("delta sandwich", bad == 0, format!("{bad} failures over {} intervals", paths as usize * 56)))
}

/// Covering quantization of rescaled spine paths in `G²_{M,T}`,
/// `M = 2`, `n = 16`, `T = (4Mn)^{3/2}`.
pub fn cover(seed: u64, scale: f64) -> Result<Check> {
    let (m, n) = (2.0, 16usize);
    let t = (4.0 * m * n as f64).powf(1.5);
    let spec = GoodSetSpec::new(m, Some(t))?;
    let want = sized(1000, scale, 20);
    let one = |i: u64| -> Result<Option<bool>> {
        let s = spine_run(&mut replica_rng(seed, i), &crate::model::AspectRule, LogPoint::ORIGIN, t);
        let jx: Vec<_> = s.jumps.iter().filter(|j| j.dx > 0.0).map(|j| (j.time / t, j.dx / t)).collect();
        let jy: Vec<_> = s.jumps.iter().filter(|j| j.dy > 0.0).map(|j| (j.time / t, j.dy / t)).collect();
        let h = HybridPath::new(Track::from_jumps(&jx)?, Track::from_jumps(&jy)?);
        if !is_good(&h, &spec).good {
            return Ok(None);
        }
        let g = quantize_to_cover(&h, n)?;
        Ok(Some(check_cover(&h, &g, m)?.all()))
    };
    // Trajectories outside G_(M,T) are skipped; draw batches until enough qualify.
    let mut used = Vec::new();
    let mut next = 0u64;
    while used.len() < want && next < 20 * want as u64 {
        let batch = (want - used.len()) as u64;
        let got = (next..next + batch).into_par_iter().map(one).collect::<Result<Vec<_>>>()?;
        used.extend(got.into_iter().flatten());
        next += batch;
    }
    let bad = used.iter().filter(|ok| !**ok).count();
    Ok(Check::new(
        "cover",
        bad == 0 && used.len() == want,
        format!("{bad} failures over {} trajectories in G_(M,T)", used.len()),
    ))
}

/// Small problems on which the optimizer must match the lattice oracle.
pub fn oracle_problems(seed: u64, count: usize) -> Vec<(OptProblem, f64)> {
    let mut rng = replica_rng(seed, u64::MAX);
    (0..count)
        .map(|i| {
            let n = 1 + i % 2;
            let m = [2.0, 3.0, 4.0][(i / 2) % 3];
            let constraint = match i % 4 {
                0 => OptConstraint::None,
                1 | 2 => {
                    let x: f64 = rng.random_range(0.6..1.8);
                    let y: f64 = rng.random_range(0.6..1.8);
                    OptConstraint::Endpoint(LogPoint { x: x.min(m), y: y.min(m) })
                }
                _ => OptConstraint::Ball {
                    center: PLGrid::linear(n, rng.random_range(0.6..1.6), rng.random_range(0.6..1.6)),
                    radius: rng.random_range(0.2..0.5),
                    metric: if rng.random() { BallMetric::Grid } else { BallMetric::Sup },
                },
            };
            let q = if n == 1 { 0.05 } else { 0.2 };
            (OptProblem::new(n, m, constraint).expect("valid problem"), q)
        })
        .collect()
}

/// The optimizer against exhaustive lattice search on `n <= 2` problems.
pub fn optimizer_oracle(seed: u64, scale: f64) -> Result<Check> {
    let problems = oracle_problems(seed, sized(20, scale, 4));
    let mut worst = f64::NEG_INFINITY;
    let mut bad = 0;
    for (i, (p, q)) in problems.iter().enumerate() {
        let o = brute_force_oracle(p, *q)?;
        let r = optimize(p, seed.wrapping_add(i as u64))?;
        let gap = if o.value == f64::NEG_INFINITY { f64::NEG_INFINITY } else { o.value - r.value };
        worst = worst.max(gap);
        if gap > 1e-6 {
            bad += 1;
        }
    }
    Ok(Check::new(
        "optimizer >= oracle - 1e-6",
        bad == 0,
        format!("{bad} of {} problems below the oracle; worst oracle - optimizer = {worst:.3e}", problems.len()),
    ))
}
