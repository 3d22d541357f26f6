//! End-to-end acceptance checks. Each criterion prints one PASS/FAIL line;
//! the process exits nonzero if any criterion fails.

use std::time::Instant;

use rand::Rng;
use rectfrag_core::functionals::{
    gamma_path, kappa, kappa_region_contains, rate_k, rate_ktilde, rate_ktilde_both, DIAG_LO, MU_MAX,
};
use rectfrag_core::simulator::{count_in_set_streaming, replica_rng};
use rectfrag_core::verify::{self, Check};
use rectfrag_core::{HybridPath, PathSet, Result};

const SEED: u64 = 20_260_415;

/// Visit cap for the streaming counts. The walker keeps only the current
/// lineage in memory, so resident particles stay far below 10^6, while
/// visits at T = 15 run well past 10^6.
const STREAM_CAP: usize = 1_000_000_000;

fn criterion_1() -> Result<Check> {
    let mut rng = replica_rng(SEED, 1);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let (l, m) = (rng.random_range(0.05..5.0), rng.random_range(0.05..5.0));
        let k = rate_ktilde(&HybridPath::linear(l, m)?, 0.0, 1.0)?.to_f64();
        worst = worst.max((k - kappa(l, m)?).abs());
    }
    Ok(check("kappa consistency", worst <= 1e-8, format!("max |Ktilde - kappa| = {worst:.2e}")))
}

fn criterion_2() -> Result<Check> {
    let mut rng = replica_rng(SEED, 2);
    let (mut worst, mut missing) = (0.0f64, 0);
    for _ in 0..500 {
        let f = verify::random_good_grid(&mut rng, 16, 3.0).to_path();
        match rate_ktilde_both(&f, 0.0, 1.0)? {
            (a, Some(b)) => worst = worst.max((a.to_f64() - b).abs()),
            _ => missing += 1,
        }
    }
    Ok(check(
        "form equivalence",
        worst <= 1e-8 && missing == 0,
        format!("max gap {worst:.2e}, {missing} paths without the expanded form"),
    ))
}

fn criterion_3() -> Result<Check> {
    let half = rate_k(&HybridPath::linear(0.5, 0.5)?)?.k_value;
    let unit = rate_k(&HybridPath::linear(1.0, 1.0)?)?.k_value;
    let steep = rate_k(&HybridPath::linear(10.0, 10.0)?)?.k_value;
    let pass = (half - 0.8284271).abs() <= 1e-6 && (unit - 1.0).abs() <= 1e-6 && steep == f64::NEG_INFINITY;
    Ok(check("named values", pass, format!("K(s/2,s/2) = {half:.9}, K(s,s) = {unit:.9}, K(10s,10s) = {steep}")))
}

fn criterion_7() -> Result<Check> {
    let mut fails = Vec::new();
    let cases = verify::tube_cases(SEED, 1.0, Some(0.0))?;
    for (spec, b, e) in &cases {
        let ok = match b.lower {
            Some(lo) => lo - 3.0 * e.std_error <= e.mean && e.mean <= b.upper + 3.0 * e.std_error,
            None => false,
        };
        if !ok {
            fails.push(format!(
                "R={} A={} delta={}: {:?} <= {:.4e} ± {:.1e} <= {:.3e}",
                spec.rate, spec.slope, spec.delta, b.lower, e.mean, e.std_error, b.upper
            ));
        }
    }
    Ok(check("tube bounds", fails.is_empty(), format!("{} cases, failures: {fails:?}", cases.len())))
}

fn stream_counts(slope: f64, radius: f64) -> Result<Vec<u64>> {
    let set = PathSet::sup_ball(HybridPath::linear(slope, slope)?, radius)?;
    (1..=20).map(|seed| count_in_set_streaming(seed, 15.0, &set, STREAM_CAP)).collect()
}

fn criterion_8() -> Result<Check> {
    let mut rates: Vec<f64> = stream_counts(1.0, 0.3)?.iter().map(|&n| (n as f64).ln() / 15.0).collect();
    rates.sort_by(f64::total_cmp);
    let median = 0.5 * (rates[9] + rates[10]);
    Ok(check("finite-T growth", (0.5..=1.3).contains(&median), format!("median (1/T) ln N_T = {median:.4}")))
}

fn criterion_9() -> Result<Check> {
    let counts = stream_counts(10.0, 0.5)?;
    let pass = counts.iter().all(|&n| n == 0);
    Ok(check("bottleneck extinction", pass, format!("N_T = {counts:?}")))
}

fn criterion_13() -> Result<Check> {
    // Grid over (0, 12]² so the whole region and a margin around it are covered.
    let steps = 200;
    let axis: Vec<f64> = (1..=steps).map(|i| 12.0 * i as f64 / steps as f64).collect();
    let mut worst_outside = f64::NEG_INFINITY;
    for &l in &axis {
        for &m in &axis {
            if !kappa_region_contains(l, m) {
                worst_outside = worst_outside.max(kappa(l, m)?);
            }
        }
    }

    let mut rng = replica_rng(SEED, 13);
    let (mut targets, mut bad) = (0, Vec::new());
    while targets < 500 {
        let (a, b) = (rng.random_range(0.0..MU_MAX), rng.random_range(0.0..MU_MAX));
        let (l, m) = (a.min(b), a.max(b));
        if !(l > 0.0 && kappa_region_contains(l, m) && kappa(l, m)? > 0.0) {
            continue;
        }
        targets += 1;
        let g = gamma_path(l, m)?;
        for (w, k) in g.waypoints.windows(2).zip(g.knots.windows(2)) {
            let dt = k[1] - k[0];
            if dt > 0.0 && ((w[1].0 - w[0].0).abs() / dt > 20.0 + 1e-12 || (w[1].1 - w[0].1).abs() / dt > 20.0 + 1e-12)
            {
                bad.push(format!("slope at ({l}, {m})"));
            }
        }
        for i in 0..100 {
            let (x, y) = g.eval(i as f64 / 99.0);
            let in_range = |v: f64| (DIAG_LO..=MU_MAX).contains(&v);
            if !in_range(x) || !in_range(y) || kappa(x, y)? <= 0.0 {
                bad.push(format!("gamma({l}, {m}) at t = {}", i as f64 / 99.0));
                break;
            }
        }
    }
    Ok(check(
        "region and gamma",
        worst_outside < 1e-12 && bad.is_empty(),
        format!("max kappa outside the region {worst_outside:.3e}; {targets} gamma paths, failures: {bad:?}"),
    ))
}

fn check(name: &str, pass: bool, detail: String) -> Check {
    Check { name: name.into(), pass, detail }
}

fn all(name: &str, checks: Vec<Check>) -> Check {
    let pass = checks.iter().all(|c| c.pass);
    let detail = checks.iter().map(|c| format!("{}: {}", c.name, c.detail)).collect::<Vec<_>>().join("; ");
    check(name, pass, detail)
}

fn main() {
    type Run = Box<dyn Fn() -> Result<Check>>;
    let criteria: Vec<(&str, Run)> = vec![
        ("1", Box::new(criterion_1)),
        ("2", Box::new(criterion_2)),
        ("3", Box::new(criterion_3)),
        ("4", Box::new(|| verify::many_to_one(SEED, 1.0))),
        ("5", Box::new(|| Ok(all("moment bounds", verify::moments(SEED, 1.0)?)))),
        ("6", Box::new(|| verify::coupling_sandwich(SEED, 1.0))),
        ("7", Box::new(criterion_7)),
        ("8", Box::new(criterion_8)),
        ("9", Box::new(criterion_9)),
        ("10", Box::new(|| verify::cover(SEED, 1.0))),
        ("11", Box::new(|| Ok(all("metric suite", verify::metrics(SEED, 1.0)?)))),
        ("12", Box::new(|| verify::delta_sandwich(SEED, 1.0))),
        ("13", Box::new(criterion_13)),
        ("14", Box::new(|| verify::optimizer_oracle(SEED, 1.0))),
    ];
    let total = criteria.len();
    let mut failed = Vec::new();
    for (id, run) in criteria {
        let start = Instant::now();
        let c = run().unwrap_or_else(|e| check("error", false, e.to_string()));
        let secs = start.elapsed().as_secs_f64();
        println!("{} [{id}] {} ({secs:.1} s): {}", if c.pass { "PASS" } else { "FAIL" }, c.name, c.detail);
        if !c.pass {
            failed.push(id);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all {total} criteria passed");
    } else {
        println!("acceptance: failed criteria {failed:?}");
        std::process::exit(1);
    }
}
