use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::problem::{increments, objective, Corridors, OptConstraint, OptProblem};
use crate::error::{Error, Result};
use crate::functionals::{build_h, rate_k, KOptions, RateReport};
use crate::paths::{HybridPath, PLGrid};
use crate::simulator::replica_rng;

/// One accepted step of one start.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LogEntry {
    pub start: usize,
    pub sweep: usize,
    pub step: f64,
    pub evaluations: usize,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StartSummary {
    pub label: String,
    pub value: f64,
    pub evaluations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OptResult {
    pub best: PLGrid,
    /// `K(best)` from a fresh default evaluation; `-inf` when no K-feasible
    /// path was found.
    pub value: f64,
    pub report: RateReport,
    pub log: Vec<LogEntry>,
    pub starts: Vec<StartSummary>,
    pub multistarts: usize,
}

impl OptResult {
    pub fn feasible(&self) -> bool {
        self.value > f64::NEG_INFINITY
    }

    pub fn path_csv(&self) -> String {
        let mut out = String::from("s,x,y\n");
        for i in 0..=self.best.n {
            let s = i as f64 / self.best.n as f64;
            out.push_str(&format!("{s:?},{:?},{:?}\n", self.best.xs[i], self.best.ys[i]));
        }
        out
    }
}

fn starting_points(p: &OptProblem, cor: &Corridors, seed: u64) -> Vec<(String, PLGrid)> {
    let n = p.n;
    let mut out = Vec::new();
    let mut add = |label: String, g: &PLGrid| out.push((label, cor.project(&increments(g))));
    match &p.constraint {
        OptConstraint::Endpoint(z) => add("line".into(), &PLGrid::linear(n, z.x, z.y)),
        OptConstraint::Ball { center, .. } if center.n == n => add("center".into(), center),
        _ => {}
    }
    for (a, b) in [(1.0, 1.0), (2.0, 2.0), (3.0, 3.0), (2.0, 4.0), (4.0, 2.0)] {
        add(format!("diagonal({a}/2,{b}/2)"), &PLGrid::linear(n, a / 2.0, b / 2.0));
    }
    // h needs 2⌈N^{7/8}⌉ <= N, so build it on a refinement and sample.
    let target = match &p.constraint {
        OptConstraint::Endpoint(z) => HybridPath::linear(z.x, z.y).ok(),
        OptConstraint::Ball { center, .. } => Some(center.to_path()),
        OptConstraint::None => HybridPath::linear(1.0, 1.0).ok(),
    };
    let k = 256usize.div_ceil(n);
    if let Some(h) = target.and_then(|f| build_h(&f, n * k, 1).ok()) {
        let xs = (0..=n).map(|i| h.xs[i * k]).collect();
        let ys = (0..=n).map(|i| h.ys[i * k]).collect();
        if let Ok(g) = PLGrid::new(xs, ys) {
            add("build_h".into(), &g);
        }
    }
    for r in 0..p.budget.random_starts {
        let mut rng = replica_rng(seed, r as u64);
        let scale = rng.random_range(0.3..2.5) / n as f64;
        let inc = std::array::from_fn(|_| (0..n).map(|_| scale * rng.random_range(0.0..2.0)).collect());
        out.push((format!("random#{r}"), cor.project(&inc)));
    }
    out
}

struct Ascent<'a> {
    problem: &'a OptProblem,
    cor: &'a Corridors,
    opt: KOptions,
    evaluations: usize,
}

impl Ascent<'_> {
    /// Objective of an admissible candidate, `None` otherwise.
    fn value(&mut self, g: &PLGrid) -> Result<Option<f64>> {
        if !self.problem.admits(g)? {
            return Ok(None);
        }
        self.evaluations += 1;
        Ok(Some(objective(g, self.opt)))
    }

    /// Candidate after shifting increment `i` of coordinate `c`, or moving
    /// value `i + 1` alone when `transfer` is set.
    fn propose(&self, g: &PLGrid, c: usize, i: usize, delta: f64, transfer: bool) -> Option<PLGrid> {
        let mut inc = increments(g);
        inc[c][i] += delta;
        if transfer {
            inc[c][i + 1] -= delta;
        }
        let cand = self.cor.project(&inc);
        (cand != *g).then_some(cand)
    }

    fn run(&mut self, index: usize, start: PLGrid, log: &mut Vec<LogEntry>) -> Result<(PLGrid, f64)> {
        let b = self.problem.budget;
        let n = self.problem.n;
        let mut cur = start;
        let mut val = self.value(&cur)?.unwrap_or(f64::NEG_INFINITY);
        let mut step = b.initial_step;
        for sweep in 0..b.sweeps {
            let mut improved = false;
            for c in 0..2 {
                for i in 0..n {
                    for transfer in [false, true] {
                        if transfer && i + 1 == n {
                            continue;
                        }
                        for sign in [1.0, -1.0] {
                            // Keep going, doubling, while the direction pays.
                            let mut delta = sign * step;
                            while let Some(cand) = self.propose(&cur, c, i, delta, transfer) {
                                match self.value(&cand)? {
                                    Some(v) if v > f64::NEG_INFINITY && v > val => {
                                        cur = cand;
                                        val = v;
                                        improved = true;
                                        log.push(LogEntry {
                                            start: index,
                                            sweep,
                                            step: delta.abs(),
                                            evaluations: self.evaluations,
                                            value: v,
                                        });
                                        delta *= 2.0;
                                    }
                                    _ => break,
                                }
                            }
                        }
                    }
                }
            }
            if !improved {
                step *= 0.5;
                if step < b.min_step {
                    break;
                }
            }
        }
        Ok((cur, val))
    }
}

/// Final grid, its default-grid value, accepted steps and summary of one start.
type StartRun = (PLGrid, f64, Vec<LogEntry>, StartSummary);

/// Projected coordinate ascent from several starts, merged by the value of
/// a fresh default evaluation. Deterministic given `seed`.
pub fn optimize(problem: &OptProblem, seed: u64) -> Result<OptResult> {
    let cor = problem.corridors()?;
    let starts = starting_points(problem, &cor, seed);
    let runs: Vec<Result<StartRun>> = starts
        .into_par_iter()
        .enumerate()
        .map(|(index, (label, g))| {
            let mut a = Ascent { problem, cor: &cor, opt: problem.search_options(), evaluations: 0 };
            let mut log = Vec::new();
            if !problem.admits(&g)? {
                let s = StartSummary { label, value: f64::NEG_INFINITY, evaluations: 0 };
                return Ok((g, f64::NEG_INFINITY, log, s));
            }
            let (best, _) = a.run(index, g, &mut log)?;
            let value = objective(&best, KOptions::default());
            Ok((best, value, log, StartSummary { label, value, evaluations: a.evaluations }))
        })
        .collect();
    let mut runs = runs.into_iter().collect::<Result<Vec<_>>>()?;
    let multistarts = runs.len();
    let admitted: Vec<usize> = (0..runs.len()).filter(|&i| runs[i].3.evaluations > 0).collect();
    if admitted.is_empty() {
        return Err(Error::Infeasible("no starting point satisfies the Levy ball".into()));
    }
    // Ties go to the earliest start.
    let pick = admitted.iter().copied().fold(admitted[0], |b, i| if runs[i].1 > runs[b].1 { i } else { b });
    let log = runs.iter_mut().flat_map(|r| std::mem::take(&mut r.2)).collect();
    let starts = runs.iter().map(|r| r.3.clone()).collect();
    let best = runs.swap_remove(pick).0;
    let report = rate_k(&best.to_path())?;
    Ok(OptResult { value: report.k_value, best, report, log, starts, multistarts })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functionals::kappa;
    use crate::model::LogPoint;
    use crate::optimizer::{BallMetric, OptBudget};

    #[test]
    fn linear_restriction_reaches_the_best_slope() {
        let p = OptProblem::new(1, 3.0, OptConstraint::None).unwrap();
        let r = optimize(&p, 1).unwrap();
        let mut grid_max = f64::MIN;
        for i in 1..=300 {
            for j in 1..=300 {
                let (l, m) = (i as f64 / 100.0, j as f64 / 100.0);
                if (1.0 / 3.0..=3.0).contains(&l) && (1.0 / 3.0..=3.0).contains(&m) {
                    grid_max = grid_max.max(kappa(l, m).unwrap());
                }
            }
        }
        assert!(r.value >= kappa(1.0, 1.0).unwrap());
        assert!(r.value >= grid_max - 1e-6 && r.value <= grid_max + 1e-3, "{} vs {grid_max}", r.value);
        assert!((r.value - kappa(r.best.xs[1], r.best.ys[1]).unwrap()).abs() < 1e-9);
    }

    #[test]
    fn endpoint_half_beats_the_line() {
        let p = OptProblem::new(4, 3.0, OptConstraint::Endpoint(LogPoint { x: 0.5, y: 0.5 })).unwrap();
        let r = optimize(&p, 2).unwrap();
        assert!(r.value >= 2.0 * 2f64.sqrt() - 2.0 - 1e-9);
        assert_eq!((r.best.xs[4], r.best.ys[4]), (0.5, 0.5));
        assert!((r.value - rate_k(&r.best.to_path()).unwrap().k_value).abs() < 1e-9);
    }

    #[test]
    fn steep_endpoint_is_infeasible() {
        let p = OptProblem::new(2, 10.0, OptConstraint::Endpoint(LogPoint { x: 10.0, y: 10.0 })).unwrap();
        let r = optimize(&p, 3).unwrap();
        assert_eq!(r.value, f64::NEG_INFINITY);
        assert!(!r.feasible());
    }

    #[test]
    fn accepted_values_never_decrease() {
        let p = OptProblem::new(3, 3.0, OptConstraint::Endpoint(LogPoint { x: 1.5, y: 0.7 })).unwrap();
        let r = optimize(&p, 4).unwrap();
        for w in r.log.windows(2).filter(|w| w[0].start == w[1].start) {
            assert!(w[1].value >= w[0].value);
        }
        assert_eq!(r.multistarts, r.starts.len());
    }

    #[test]
    fn deterministic_and_ball_respecting() {
        let center = PLGrid::linear(2, 0.8, 1.2);
        let ball = |metric| OptConstraint::Ball { center: center.clone(), radius: 0.1, metric };
        let mut p = OptProblem::new(2, 3.0, ball(BallMetric::Grid)).unwrap();
        p.budget = OptBudget { random_starts: 2, ..OptBudget::default() };
        let a = optimize(&p, 5).unwrap();
        assert_eq!(a, optimize(&p, 5).unwrap());
        for i in 0..=2 {
            assert!(a.best.point(i).dist(center.point(i)) <= 0.1 + 1e-12);
        }
        p.constraint = ball(BallMetric::Levy);
        let l = optimize(&p, 5).unwrap();
        let d = crate::paths::levy_distance(&l.best.to_path(), &center.to_path()).unwrap();
        assert!(d <= 0.1);
    }

    #[test]
    fn infeasible_constraints_carry_a_certificate() {
        let p = OptProblem::new(2, 2.0, OptConstraint::Endpoint(LogPoint { x: 3.0, y: 1.0 })).unwrap();
        assert!(matches!(optimize(&p, 1), Err(Error::Infeasible(_))));
    }
}
