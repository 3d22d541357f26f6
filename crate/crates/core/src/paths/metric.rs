use super::track::{HybridPath, Track};
use crate::error::{domain, Result};

const LEVY_TOL: f64 = 1e-9;
const SLACK: f64 = 1e-12;

/// Checks `f(x - r) - r <= g(x) <= f(x + r) + r` on `[-r, 1 + r]`.
///
/// Between consecutive candidate points every term is linear, so checking the
/// values and left limits at the candidates is enough. Candidates coming from a
/// knot `t` of `f` carry `t` itself as the shifted argument, so rounding in
/// `(t + r) - r` cannot step over a jump.
fn corridor_holds(f: &Track, g: &Track, r: f64) -> bool {
    let mut cand: Vec<(f64, f64, f64)> = vec![(-r, -2.0 * r, 0.0), (1.0 + r, 1.0, 1.0 + 2.0 * r)];
    cand.extend(g.times().map(|x| (x, x - r, x + r)));
    for t in f.times() {
        cand.push((t - r, t - 2.0 * r, t));
        cand.push((t + r, t, t + 2.0 * r));
    }
    let ok = |gv: f64, lo: f64, hi: f64| gv >= lo - r - SLACK && gv <= hi + r + SLACK;
    cand.iter().filter(|c| c.0 >= -r && c.0 <= 1.0 + r).all(|&(x, lo, hi)| {
        let right = ok(g.value(x), f.value(lo), f.value(hi));
        let left = x <= -r || ok(g.left_limit(x), f.left_limit(lo), f.left_limit(hi));
        right && left
    })
}

fn check_in_e(t: &Track) -> Result<()> {
    let k = t.knots();
    if k[0].value != 0.0 {
        return domain("track must start at 0");
    }
    Ok(())
}

/// Lévy distance between two tracks, to within `1e-9`.
pub fn levy_distance_track(f: &Track, g: &Track) -> Result<f64> {
    check_in_e(f)?;
    check_in_e(g)?;
    let mut hi = sup_distance_track(f, g) + LEVY_TOL;
    if corridor_holds(f, g, 0.0) {
        return Ok(0.0);
    }
    let mut lo = 0.0;
    while hi - lo > LEVY_TOL * 0.5 {
        let mid = 0.5 * (lo + hi);
        if corridor_holds(f, g, mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// Product Lévy distance: the larger of the two track distances.
pub fn levy_distance(f: &HybridPath, g: &HybridPath) -> Result<f64> {
    Ok(levy_distance_track(&f.x, &g.x)?.max(levy_distance_track(&f.y, &g.y)?))
}

/// `max_i ||f(i/n) - g(i/n)||`.
pub fn grid_distance(f: &HybridPath, g: &HybridPath, n: usize) -> f64 {
    (0..=n)
        .map(|i| {
            let s = if i == n { 1.0 } else { i as f64 / n as f64 };
            f.at(s).dist(g.at(s))
        })
        .fold(0.0, f64::max)
}

fn sup_distance_track(f: &Track, g: &Track) -> f64 {
    f.times()
        .chain(g.times())
        .map(|t| (f.value(t) - g.value(t)).abs().max((f.left_limit(t) - g.left_limit(t)).abs()))
        .fold(0.0, f64::max)
}

/// Dense-grid corridor test with the knots of both tracks added. Left limits
/// and shifted knots are probed `1e-12` to the safe side.
fn dense_corridor_holds(f: &Track, g: &Track, r: f64) -> bool {
    let m = 4000;
    let mut xs: Vec<f64> = (0..=m).map(|i| -r + (1.0 + 2.0 * r) * i as f64 / m as f64).collect();
    xs.extend(g.times());
    xs.extend(f.times().flat_map(|t| [t - r, t + r]));
    xs.iter().filter(|&&x| x >= -r && x <= 1.0 + r).all(|&x| {
        [x, x - 1e-12].iter().all(|&y| {
            let v = g.value(y);
            v >= f.value(y - r + 1e-12) - r - 1e-9 && v <= f.value(y + r - 1e-12) + r + 1e-9
        })
    })
}

/// Lévy distance by a linear scan over `r` in steps of `step`, a slow check
/// on [`levy_distance_track`]. Returns the first feasible `r` on the grid.
pub fn levy_distance_scan(f: &Track, g: &Track, step: f64) -> f64 {
    let coarse = 100.0 * step;
    let mut r = 0.0;
    while !dense_corridor_holds(f, g, r + coarse) {
        r += coarse;
    }
    loop {
        if dense_corridor_holds(f, g, r) {
            return r;
        }
        r += step;
    }
}

/// `sup_s ||f(s) - g(s)||`.
pub fn sup_distance(f: &HybridPath, g: &HybridPath) -> f64 {
    sup_distance_track(&f.x, &g.x).max(sup_distance_track(&f.y, &g.y))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use proptest::strategy::ValueTree;

    fn lin(a: f64) -> Track {
        Track::linear(a).unwrap()
    }

    #[test]
    fn levy_examples() {
        assert_eq!(levy_distance_track(&lin(1.0), &lin(1.0)).unwrap(), 0.0);
        let d = levy_distance_track(&lin(1.0), &lin(2.0)).unwrap();
        assert!((d - 1.0).abs() <= 1e-9, "{d}");
        let step = Track::from_jumps(&[(0.5, 0.3)]).unwrap();
        let d = levy_distance_track(&Track::zero(), &step).unwrap();
        assert!((d - 0.3).abs() <= 1e-9, "{d}");
    }

    #[test]
    fn levy_shift_is_small_for_translated_jumps() {
        let a = Track::from_jumps(&[(0.5, 1.0)]).unwrap();
        let b = Track::from_jumps(&[(0.52, 1.0)]).unwrap();
        let d = levy_distance_track(&a, &b).unwrap();
        assert!((d - 0.02).abs() < 1e-8, "{d}");
        assert!(sup_distance_track(&a, &b) == 1.0);
    }

    #[test]
    fn grid_and_sup_examples() {
        let diag = HybridPath::linear(1.0, 1.0).unwrap();
        assert_eq!(grid_distance(&diag, &diag, 5), 0.0);
        assert_eq!(grid_distance(&diag, &HybridPath::zero(), 1), 1.0);
        let sq = Track::from_points(&[(0.0, 0.0), (0.5, 0.25), (1.0, 1.0)]).unwrap();
        let f = HybridPath::new(lin(1.0), lin(1.0));
        let g = HybridPath::new(sq, lin(1.0));
        assert_eq!(grid_distance(&f, &g, 2), 0.25);
        let h = HybridPath::linear(0.5, 0.5).unwrap();
        assert_eq!(sup_distance(&f, &h), 0.5);
        assert_eq!(sup_distance(&f, &f), 0.0);
    }

    fn arb_track() -> impl Strategy<Value = Track> {
        (prop::collection::vec((0.01f64..0.99, 0.0f64..0.5, prop::bool::ANY), 1..5)).prop_map(|mut pts| {
            pts.sort_by(|a, b| a.0.total_cmp(&b.0));
            pts.dedup_by(|a, b| (a.0 - b.0).abs() < 1e-6);
            let mut knots = vec![super::super::track::Knot::cont(0.0, 0.0)];
            let mut v = 0.0;
            for (t, inc, jump) in pts {
                if jump {
                    knots.push(super::super::track::Knot { t, left: v, value: v + inc });
                } else {
                    knots.push(super::super::track::Knot::cont(t, v + inc));
                }
                v += inc;
            }
            knots.push(super::super::track::Knot::cont(1.0, v + 0.1));
            Track::new(knots).unwrap()
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn levy_is_a_metric(f in arb_track(), g in arb_track(), h in arb_track()) {
            let fg = levy_distance_track(&f, &g).unwrap();
            let gf = levy_distance_track(&g, &f).unwrap();
            let fh = levy_distance_track(&f, &h).unwrap();
            let gh = levy_distance_track(&g, &h).unwrap();
            prop_assert!((fg - gf).abs() <= 1e-9);
            prop_assert!(fh <= fg + gh + 2e-9);
            prop_assert!(levy_distance_track(&f, &f).unwrap() == 0.0);
        }

        #[test]
        fn levy_below_sup(f in arb_track(), g in arb_track()) {
            prop_assert!(levy_distance_track(&f, &g).unwrap() <= sup_distance_track(&f, &g) + 1e-9);
        }

        #[test]
        fn sup_dominates_grid(f in arb_track(), g in arb_track(), n in 1usize..20) {
            let a = HybridPath::new(f.clone(), g.clone());
            let b = HybridPath::new(g, f);
            prop_assert!(sup_distance(&a, &b) >= grid_distance(&a, &b, n));
        }
    }

    #[test]
    fn levy_matches_grid_oracle() {
        let mut runner = proptest::test_runner::TestRunner::deterministic();
        for _ in 0..20 {
            let f = arb_track().new_tree(&mut runner).unwrap().current();
            let g = arb_track().new_tree(&mut runner).unwrap().current();
            let d = levy_distance_track(&f, &g).unwrap();
            let o = levy_distance_scan(&f, &g, 1e-4);
            assert!((d - o).abs() <= 1e-4, "{d} vs {o}\n{f:?}\n{g:?}");
        }
    }
}
