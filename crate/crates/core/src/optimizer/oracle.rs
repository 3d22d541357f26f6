use rayon::prelude::*;

use super::problem::{objective, Corridors, OptConstraint, OptProblem};
use super::search::{OptResult, StartSummary};
use crate::error::{domain, Error, Result};
use crate::functionals::rate_k;
use crate::paths::PLGrid;

/// Largest lattice the oracle will enumerate.
pub const ORACLE_MAX_NODES: f64 = 1e7;

/// Monotone value sequences of one coordinate with increments on the
/// `q`-lattice; under an endpoint constraint the last increment is whatever
/// reaches it.
fn sequences(cor: &Corridors, c: usize, q: f64, end: Option<f64>) -> Vec<Vec<f64>> {
    let n = cor.lo[c].len() - 1;
    let free = if end.is_some() { n - 1 } else { n };
    let eps = 1e-12;
    let mut out = Vec::new();
    let mut stack = vec![(vec![0.0], 0u64)];
    while let Some((vals, units)) = stack.pop() {
        let i = vals.len();
        if i > free {
            let mut vals = vals;
            if let Some(z) = end {
                if z < vals[n - 1] - eps {
                    continue;
                }
                vals[n - 1] = vals[n - 1].min(z);
                vals.push(z);
            }
            out.push(vals);
            continue;
        }
        // Reverse so the stack pops in increasing order.
        let mut next = Vec::new();
        for k in units.. {
            let v = k as f64 * q;
            if v > cor.hi[c][i] + eps {
                break;
            }
            if v >= cor.lo[c][i] - eps {
                let mut w = vals.clone();
                w.push(v);
                next.push((w, k));
            }
        }
        stack.extend(next.into_iter().rev());
    }
    out
}

/// Exhaustive search over increment tuples on the `q`-lattice, `n <= 2`.
pub fn brute_force_oracle(problem: &OptProblem, q: f64) -> Result<OptResult> {
    if problem.n > 2 {
        return domain(format!("the oracle handles n <= 2, got {}", problem.n));
    }
    if !(q > 0.0) || !q.is_finite() {
        return domain(format!("lattice step must be positive, got {q}"));
    }
    let cor = problem.corridors()?;
    let end = match &problem.constraint {
        OptConstraint::Endpoint(z) => [Some(z.x), Some(z.y)],
        _ => [None, None],
    };
    let free = if end[0].is_some() { problem.n - 1 } else { problem.n } as i32;
    let nodes: f64 = (0..2).map(|c| ((cor.hi[c][problem.n] / q).floor() + 1.0).powi(free)).product();
    if nodes > ORACLE_MAX_NODES {
        return Err(Error::Resource {
            message: format!("oracle lattice has {nodes:e} nodes, limit {ORACLE_MAX_NODES:e}"),
            reached: 0,
        });
    }
    let xs = sequences(&cor, 0, q, end[0]);
    let ys = sequences(&cor, 1, q, end[1]);
    if xs.is_empty() || ys.is_empty() {
        return Err(Error::Infeasible("no lattice path satisfies the constraints".into()));
    }
    let opt = problem.search_options();
    let scored: Vec<(f64, usize, usize)> = xs
        .par_iter()
        .enumerate()
        .map(|(i, x)| -> Result<Vec<(f64, usize, usize)>> {
            let mut row = Vec::new();
            for (j, y) in ys.iter().enumerate() {
                let g = PLGrid { n: problem.n, xs: x.clone(), ys: y.clone() };
                if problem.admits(&g)? {
                    row.push((objective(&g, opt), i, j));
                }
            }
            Ok(row)
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    let Some(&(_, i, j)) = scored.iter().fold(None, |b: Option<&(f64, usize, usize)>, s| match b {
        Some(b) if b.0 >= s.0 => Some(b),
        _ => Some(s),
    }) else {
        return Err(Error::Infeasible("no lattice path satisfies the Levy ball".into()));
    };
    let best = PLGrid { n: problem.n, xs: xs[i].clone(), ys: ys[j].clone() };
    let report = rate_k(&best.to_path())?;
    let starts = vec![StartSummary { label: "lattice".into(), value: report.k_value, evaluations: scored.len() }];
    Ok(OptResult { value: report.k_value, best, report, log: Vec::new(), starts, multistarts: 1 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::LogPoint;
    use crate::optimizer::optimize;

    #[test]
    fn linear_lattice_peaks_near_the_kappa_maximum() {
        let p = OptProblem::new(1, 3.0, OptConstraint::None).unwrap();
        let r = brute_force_oracle(&p, 0.1).unwrap();
        let (l, m) = (r.best.xs[1], r.best.ys[1]);
        // κ peaks at about (1.11, 1.97) and its mirror.
        let near = |a: f64, b: f64| (l - a).abs() <= 0.1 && (m - b).abs() <= 0.1;
        assert!(near(1.1, 2.0) || near(2.0, 1.1), "({l}, {m})");
        assert!(r.value > 1.0);
        assert_eq!(r.starts[0].evaluations, 27 * 27);
    }

    #[test]
    fn optimizer_dominates_the_lattice() {
        for (n, z) in [(1, None), (2, None), (2, Some((0.5, 0.5))), (2, Some((1.2, 0.6)))] {
            let c = z.map_or(OptConstraint::None, |(x, y)| OptConstraint::Endpoint(LogPoint { x, y }));
            let p = OptProblem::new(n, 3.0, c).unwrap();
            let o = brute_force_oracle(&p, 0.1).unwrap();
            let r = optimize(&p, 7).unwrap();
            assert!(r.value >= o.value - 1e-6, "n={n} {z:?}: {} < {}", r.value, o.value);
        }
    }

    #[test]
    fn steep_endpoint_has_no_feasible_lattice_point() {
        let p = OptProblem::new(2, 10.0, OptConstraint::Endpoint(LogPoint { x: 10.0, y: 10.0 })).unwrap();
        let o = brute_force_oracle(&p, 0.25).unwrap();
        assert_eq!(o.value, f64::NEG_INFINITY);
        assert!(o.starts[0].evaluations > 100);
    }

    #[test]
    fn limits() {
        let p = OptProblem::new(3, 3.0, OptConstraint::None).unwrap();
        assert!(brute_force_oracle(&p, 0.1).is_err());
        let p = OptProblem::new(2, 3.0, OptConstraint::None).unwrap();
        assert!(matches!(brute_force_oracle(&p, 1e-3), Err(Error::Resource { .. })));
        // Corridors that miss the lattice entirely.
        let tight = OptConstraint::Ball {
            center: PLGrid::linear(1, 1.05, 1.05),
            radius: 0.01,
            metric: super::super::BallMetric::Sup,
        };
        let p = OptProblem::new(1, 3.0, tight).unwrap();
        assert!(matches!(brute_force_oracle(&p, 0.1), Err(Error::Infeasible(_))));
    }
}
