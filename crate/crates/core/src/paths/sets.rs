use serde::{Deserialize, Serialize};

use super::metric::{grid_distance, levy_distance, sup_distance};
use super::track::{HybridPath, PLGrid, Track};
use crate::error::{domain, Error, Result};
use crate::model::LogPoint;

/// The cone `s/M - c <= f(s) <= M(s + c)` with `c = 2 T^{-2/3}`, or `c = 0`
/// when `t` is absent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GoodSetSpec {
    pub m: f64,
    pub t: Option<f64>,
}

impl GoodSetSpec {
    pub fn new(m: f64, t: Option<f64>) -> Result<Self> {
        if !(m > 1.0) || !m.is_finite() {
            return domain(format!("good-set M must exceed 1, got {m}"));
        }
        if let Some(t) = t {
            if !(t > 1.0) {
                return domain(format!("good-set T must exceed 1, got {t}"));
            }
        }
        Ok(GoodSetSpec { m, t })
    }

    pub fn slack(&self) -> f64 {
        self.t.map_or(0.0, |t| 2.0 * t.powf(-2.0 / 3.0))
    }

    pub fn lower(&self, s: f64) -> f64 {
        s / self.m - self.slack()
    }

    pub fn upper(&self, s: f64) -> f64 {
        self.m * (s + self.slack())
    }
}

/// Result of a good-set test: `witness` is a violating time when not good.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GoodCheck {
    pub good: bool,
    pub witness: Option<f64>,
}

fn first_violation(tr: &Track, spec: &GoodSetSpec, theta: f64) -> Option<f64> {
    let bad = |s: f64, v: f64| v < spec.lower(s) || v > spec.upper(s);
    let knots = tr.prefix_knots(theta);
    if let Some(k) = knots.iter().find(|k| bad(k.t, k.value)) {
        return Some(k.t);
    }
    // Only a left limit can still fail; the violating region sits just before the knot.
    for w in knots.windows(2) {
        let (a, b) = (w[0], w[1]);
        for (edge, sign) in [(spec.lower(b.t), 1.0), (spec.upper(b.t), -1.0)] {
            let gb = sign * (b.left - edge);
            if gb < 0.0 {
                let ga = sign * (a.value - if sign > 0.0 { spec.lower(a.t) } else { spec.upper(a.t) });
                let c = a.t + (b.t - a.t) * ga / (ga - gb);
                return Some(0.5 * (c + b.t));
            }
        }
    }
    None
}

/// Tests membership of both tracks in the good cone.
pub fn is_good(path: &HybridPath, spec: &GoodSetSpec) -> GoodCheck {
    is_good_on(path, spec, 1.0)
}

/// Good-set test restricted to `[0, theta]`.
pub fn is_good_on(path: &HybridPath, spec: &GoodSetSpec, theta: f64) -> GoodCheck {
    let w = first_violation(&path.x, spec, theta).or_else(|| first_violation(&path.y, spec, theta));
    GoodCheck { good: w.is_none(), witness: w }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Constraint {
    LevyBall { radius: f64 },
    GridBall { n: usize, radius: f64 },
    SupBall { radius: f64 },
    Good(GoodSetSpec),
}

/// An intersection of balls around `center` and a good set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathSet {
    pub center: HybridPath,
    pub constraints: Vec<Constraint>,
}

impl PathSet {
    pub fn new(center: HybridPath, constraints: Vec<Constraint>) -> Result<Self> {
        for c in &constraints {
            let bad = match *c {
                Constraint::LevyBall { radius } | Constraint::SupBall { radius } => !(radius > 0.0),
                Constraint::GridBall { n, radius } => n == 0 || !(radius > 0.0),
                Constraint::Good(g) => GoodSetSpec::new(g.m, g.t).is_err(),
            };
            if bad {
                return domain(format!("invalid constraint {c:?}"));
            }
        }
        Ok(PathSet { center, constraints })
    }

    /// `B_Δn(f, 1/n²) ∩ B_d(f, 1/n) ∩ G²_{M,T}`.
    pub fn gamma(center: HybridPath, n: usize, m: f64, t: f64) -> Result<Self> {
        let nf = n as f64;
        PathSet::new(
            center,
            vec![
                Constraint::GridBall { n, radius: 1.0 / (nf * nf) },
                Constraint::LevyBall { radius: 1.0 / nf },
                Constraint::Good(GoodSetSpec::new(m, Some(t))?),
            ],
        )
    }

    /// `B_ρ(f, 1/n²) ∩ G²_{M,T}`.
    pub fn lambda(center: HybridPath, n: usize, m: f64, t: f64) -> Result<Self> {
        let nf = n as f64;
        PathSet::new(
            center,
            vec![Constraint::SupBall { radius: 1.0 / (nf * nf) }, Constraint::Good(GoodSetSpec::new(m, Some(t))?)],
        )
    }

    /// `B_ρ(f, r)`.
    pub fn sup_ball(center: HybridPath, radius: f64) -> Result<Self> {
        PathSet::new(center, vec![Constraint::SupBall { radius }])
    }

    pub fn good_spec(&self) -> Option<GoodSetSpec> {
        self.constraints.iter().find_map(|c| match c {
            Constraint::Good(g) => Some(*g),
            _ => None,
        })
    }

    pub fn contains(&self, g: &HybridPath) -> Result<bool> {
        self.contains_on(g, 1.0)
    }

    /// Whether the restriction of `g` to `[0, theta]` extends to a member.
    ///
    /// Exact for sup balls, grid balls and good sets, whose conditions are
    /// pointwise in time. The Lévy ball couples times, so partial membership is
    /// not supported there.
    pub fn contains_on(&self, g: &HybridPath, theta: f64) -> Result<bool> {
        if !(0.0..=1.0).contains(&theta) {
            return domain(format!("prefix time {theta} outside [0, 1]"));
        }
        let f = &self.center;
        for c in &self.constraints {
            let ok = match *c {
                Constraint::LevyBall { radius } => {
                    if theta < 1.0 {
                        return Err(Error::Unsupported("prefix membership for a Levy ball".into()));
                    }
                    levy_distance(f, g)? < radius
                }
                Constraint::GridBall { n, radius } => {
                    (0..=n).map(|i| i as f64 / n as f64).filter(|&s| s <= theta).all(|s| f.at(s).dist(g.at(s)) < radius)
                }
                Constraint::SupBall { radius } => {
                    if theta >= 1.0 {
                        sup_distance(f, g) < radius
                    } else {
                        sup_distance(&f.frozen_after(theta)?, &g.frozen_after(theta)?) < radius
                    }
                }
                Constraint::Good(spec) => is_good_on(g, &spec, theta).good,
            };
            if !ok {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Necessary condition for a member to sit at the constant `z` on `[a, b)`
    /// (on `[a, 1]` when `b >= 1`). Only pointwise constraints are tested, each
    /// loosened by `tol`, so a `false` answer rules out every extension.
    pub fn admits_constant(&self, z: LogPoint, a: f64, b: f64, tol: f64) -> bool {
        let f = &self.center;
        let closed = b >= 1.0;
        let b = b.min(1.0);
        self.constraints.iter().all(|c| match *c {
            Constraint::LevyBall { .. } => true,
            Constraint::SupBall { radius } => {
                let lim = radius + tol;
                let mut inner = f.x.times().chain(f.y.times()).filter(|&t| t > a && t < b);
                f.at(a).dist(z) < lim
                    && f.left_at(b).dist(z) < lim
                    && (!closed || f.at(b).dist(z) < lim)
                    && inner.all(|t| f.at(t).dist(z) < lim && f.left_at(t).dist(z) < lim)
            }
            Constraint::GridBall { n, radius } => {
                let nf = n as f64;
                let first = (a * nf).ceil() as usize;
                (first..=n)
                    .map(|i| if i == n { 1.0 } else { i as f64 / nf })
                    .take_while(|&s| s < b || (closed && s <= b))
                    .all(|s| f.at(s).dist(z) < radius + tol)
            }
            Constraint::Good(g) => {
                let (lo, hi) = (g.lower(b) - tol, g.upper(a) + tol);
                z.x >= lo && z.y >= lo && z.x <= hi && z.y <= hi
            }
        })
    }

    /// Pointwise constraints at the single time `s`; Lévy balls are ignored.
    pub fn admits_point(&self, z: LogPoint, s: f64, tol: f64) -> bool {
        let f = &self.center;
        self.constraints.iter().all(|c| match *c {
            Constraint::LevyBall { .. } => true,
            Constraint::SupBall { radius } => f.at(s).dist(z) < radius + tol,
            Constraint::GridBall { n, radius } => {
                let k = (s * n as f64).round();
                (s * n as f64 - k).abs() > 1e-12 || f.at(s).dist(z) < radius + tol
            }
            Constraint::Good(g) => {
                let (lo, hi) = (g.lower(s) - tol, g.upper(s) + tol);
                z.x >= lo && z.y >= lo && z.x <= hi && z.y <= hi
            }
        })
    }

    /// Whether membership is decided time by time (no Lévy ball), in which
    /// case a pure-jump path is a member exactly when every constant piece
    /// passes [`PathSet::admits_constant`] with zero tolerance.
    pub fn is_pointwise(&self) -> bool {
        !self.constraints.iter().any(|c| matches!(c, Constraint::LevyBall { .. }))
    }

    /// Pointwise bounds on `g(s)` implied by each constraint, before monotone closure.
    fn pointwise(&self, s: f64) -> [(f64, f64); 2] {
        let f = &self.center;
        let mut b = [(0.0f64, f64::INFINITY); 2];
        for c in &self.constraints {
            for (k, tr) in [&f.x, &f.y].into_iter().enumerate() {
                let (lo, hi) = match *c {
                    Constraint::SupBall { radius } => (tr.value(s) - radius, tr.value(s) + radius),
                    Constraint::LevyBall { radius } => (tr.value(s - radius) - radius, tr.value(s + radius) + radius),
                    Constraint::GridBall { n, radius } => {
                        let nf = n as f64;
                        let i = (s * nf).floor();
                        let a = i / nf;
                        if (s - a).abs() < 1e-15 || i >= nf {
                            (tr.value(s) - radius, tr.value(s) + radius)
                        } else {
                            (tr.value(a) - radius, tr.value((i + 1.0) / nf) + radius)
                        }
                    }
                    Constraint::Good(g) => (g.lower(s), g.upper(s)),
                };
                b[k].0 = b[k].0.max(lo);
                b[k].1 = b[k].1.min(hi);
            }
        }
        b
    }

    /// Bounds on `g(j/n)` over members `g`, for `j = 0..=n`.
    ///
    /// Exact for a sup ball intersected with a good set; a superset hull
    /// otherwise.
    pub fn box_envelope(&self, n: usize) -> Result<BoxEnvelope> {
        if n == 0 {
            return domain("envelope needs n >= 1");
        }
        if !self.constraints.iter().any(|c| !matches!(c, Constraint::Good(_))) {
            return domain("envelope needs at least one ball constraint");
        }
        let mut env = BoxEnvelope {
            n,
            x_lo: vec![0.0; n + 1],
            x_hi: vec![0.0; n + 1],
            y_lo: vec![0.0; n + 1],
            y_hi: vec![0.0; n + 1],
            empty: false,
        };
        for j in 1..=n {
            let s = if j == n { 1.0 } else { j as f64 / n as f64 };
            let [bx, by] = self.pointwise(s);
            env.x_lo[j] = bx.0;
            env.x_hi[j] = bx.1;
            env.y_lo[j] = by.0;
            env.y_hi[j] = by.1;
        }
        // g is non-decreasing: carry lower bounds forward and upper bounds back.
        for v in [&mut env.x_lo, &mut env.y_lo] {
            for j in 1..=n {
                v[j] = v[j].max(v[j - 1]);
            }
        }
        for v in [&mut env.x_hi, &mut env.y_hi] {
            for j in (0..n).rev() {
                v[j] = v[j].min(v[j + 1]);
            }
        }
        env.empty = (0..=n).any(|j| env.x_lo[j] > env.x_hi[j] || env.y_lo[j] > env.y_hi[j]);
        Ok(env)
    }
}

/// Bounds `x⁻ <= g_X(j/n) <= x⁺` (and likewise for `Y`) over a path set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxEnvelope {
    pub n: usize,
    pub x_lo: Vec<f64>,
    pub x_hi: Vec<f64>,
    pub y_lo: Vec<f64>,
    pub y_hi: Vec<f64>,
    pub empty: bool,
}

/// `g(j/n) = floor(n² h(j/n)) / n²`, linearly interpolated.
pub fn quantize_to_cover(h: &HybridPath, n: usize) -> Result<PLGrid> {
    if n == 0 {
        return domain("cover needs n >= 1");
    }
    let n2 = (n * n) as f64;
    let q = |tr: &Track| -> Vec<f64> {
        (0..=n)
            .map(|j| {
                let s = if j == n { 1.0 } else { j as f64 / n as f64 };
                (n2 * tr.value(s)).floor() / n2
            })
            .collect()
    };
    PLGrid::new(q(&h.x), q(&h.y))
}

/// Checks the covering post-conditions: `Δ_n(g,h) < 1/n²`, `d(g,h) <= 1/n`
/// and `g ∈ G²_{4M}`.
pub fn check_cover(h: &HybridPath, g: &PLGrid, m: f64) -> Result<CoverCheck> {
    let n = g.n as f64;
    let gp = g.to_path();
    let grid = grid_distance(&gp, h, g.n);
    let levy = levy_distance(&gp, h)?;
    let good = is_good(&gp, &GoodSetSpec::new(4.0 * m, None)?).good;
    Ok(CoverCheck { grid_ok: grid < 1.0 / (n * n), levy_ok: levy <= 1.0 / n + 1e-9, good_ok: good, grid, levy })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoverCheck {
    pub grid_ok: bool,
    pub levy_ok: bool,
    pub good_ok: bool,
    pub grid: f64,
    pub levy: f64,
}

impl CoverCheck {
    pub fn all(&self) -> bool {
        self.grid_ok && self.levy_ok && self.good_ok
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diag() -> HybridPath {
        HybridPath::linear(1.0, 1.0).unwrap()
    }

    #[test]
    fn good_examples() {
        let m = 3.0;
        let spec = GoodSetSpec::new(m, None).unwrap();
        assert!(is_good(&HybridPath::linear(m, m).unwrap(), &spec).good);
        let c = is_good(&HybridPath::linear(m + 1.0, m).unwrap(), &spec);
        assert!(!c.good && c.witness.unwrap() > 0.0);
        let spec_t = GoodSetSpec::new(m, Some(1000.0)).unwrap();
        let c = is_good(&HybridPath::zero(), &spec_t);
        assert!(!c.good);
        assert_eq!(c.witness, Some(1.0));
        // T^{2/3} >= 2M / ... the cone contains 0 once the slack exceeds 1/M.
        let big_slack = GoodSetSpec::new(m, Some(1.1)).unwrap();
        assert!(1.0 / m <= big_slack.slack());
        assert!(is_good(&HybridPath::zero(), &big_slack).good);
        assert!(GoodSetSpec::new(1.0, None).is_err());
        assert!(GoodSetSpec::new(2.0, Some(0.5)).is_err());
    }

    #[test]
    fn witness_lies_in_violation_region() {
        let spec = GoodSetSpec::new(2.0, None).unwrap();
        // Flat after a jump: left limit at 0.8 falls under s/2.
        let x = Track::from_points(&[(0.0, 0.0), (0.2, 0.2), (0.8, 0.2), (1.0, 0.9)]).unwrap();
        let p = HybridPath::new(x.clone(), Track::linear(1.0).unwrap());
        let c = is_good(&p, &spec);
        let w = c.witness.unwrap();
        assert!(x.value(w) < w / 2.0, "{w}");
    }

    #[test]
    fn quantize_examples() {
        let g = quantize_to_cover(&HybridPath::zero(), 4).unwrap();
        assert!(g.xs.iter().chain(&g.ys).all(|&v| v == 0.0));
        let g = quantize_to_cover(&diag(), 2).unwrap();
        assert_eq!(g.xs, vec![0.0, 0.5, 1.0]);
        let third = HybridPath::linear(1.0 / 3.0, 1.0 / 3.0).unwrap();
        let g = quantize_to_cover(&third, 2).unwrap();
        assert_eq!(g.xs, vec![0.0, 0.0, 0.25]);
    }

    #[test]
    fn lambda_box_is_center_plus_minus_radius() {
        let set = PathSet::sup_ball(diag(), 0.1).unwrap();
        let env = set.box_envelope(2).unwrap();
        assert!((env.x_lo[1] - 0.4).abs() < 1e-15);
        assert!((env.x_hi[1] - 0.6).abs() < 1e-15);
        assert!(!env.empty);
    }

    #[test]
    fn lambda_box_clipped_by_cone() {
        let m = 2.0;
        let t = 1e6;
        let set = PathSet::lambda(HybridPath::linear(0.55, 1.0).unwrap(), 4, m, t).unwrap();
        let env = set.box_envelope(4).unwrap();
        let spec = set.good_spec().unwrap();
        for j in 1..=4 {
            let s = j as f64 / 4.0;
            let lo = (0.55 * s - 1.0 / 16.0).max(spec.lower(s)).max(0.0);
            assert!((env.x_lo[j] - lo).abs() < 1e-15);
        }
        assert!(env.x_lo[4] == spec.lower(1.0));
    }

    #[test]
    fn disjoint_constraints_flag_empty() {
        let set = PathSet::new(
            HybridPath::linear(5.0, 5.0).unwrap(),
            vec![Constraint::SupBall { radius: 0.1 }, Constraint::Good(GoodSetSpec::new(2.0, None).unwrap())],
        )
        .unwrap();
        assert!(set.box_envelope(4).unwrap().empty);
        assert!(PathSet::sup_ball(diag(), 0.0).is_err());
    }

    #[test]
    fn lambda_box_faces_are_attained() {
        let n = 8;
        let f = HybridPath::new(
            Track::from_points(&[(0.0, 0.0), (0.4, 0.1), (1.0, 0.9)]).unwrap(),
            Track::linear(1.0).unwrap(),
        );
        let set = PathSet::lambda(f.clone(), n, 3.0, 50.0).unwrap();
        let spec = set.good_spec().unwrap();
        let env = set.box_envelope(n).unwrap();
        let r = (1.0 - 1e-12) / (n * n) as f64;
        let fine = 2000;
        let build = |lower: bool, tr: &Track| -> Track {
            let pts: Vec<(f64, f64)> = (0..=fine)
                .map(|i| {
                    let s = i as f64 / fine as f64;
                    let v = if lower {
                        (tr.value(s) - r).max(spec.lower(s)).max(0.0)
                    } else {
                        (tr.value(s) + r).min(spec.upper(s)).min(s * 1e12)
                    };
                    (s, v)
                })
                .collect();
            Track::from_points(&pts).unwrap()
        };
        let low = HybridPath::new(build(true, &f.x), build(true, &f.y));
        let high = HybridPath::new(build(false, &f.x), build(false, &f.y));
        assert!(set.contains(&low).unwrap());
        assert!(set.contains(&high).unwrap());
        for j in 0..=n {
            let s = j as f64 / n as f64;
            assert!((low.at(s).x - env.x_lo[j]).abs() < 1e-9);
            assert!((high.at(s).x - env.x_hi[j]).abs() < 1e-9);
            assert!((low.at(s).y - env.y_lo[j]).abs() < 1e-9);
            assert!((high.at(s).y - env.y_hi[j]).abs() < 1e-9);
        }
    }

    #[test]
    fn prefix_membership() {
        let set = PathSet::sup_ball(diag(), 0.1).unwrap();
        let g = HybridPath::new(
            Track::from_points(&[(0.0, 0.0), (0.5, 0.5), (1.0, 0.5)]).unwrap(),
            Track::linear(1.0).unwrap(),
        );
        assert!(set.contains_on(&g, 0.55).unwrap());
        assert!(!set.contains(&g).unwrap());
        let lev = PathSet::new(diag(), vec![Constraint::LevyBall { radius: 0.1 }]).unwrap();
        assert!(matches!(lev.contains_on(&g, 0.5), Err(Error::Unsupported(_))));
    }

    proptest::proptest! {
        #[test]
        fn members_admit_each_constant_piece(
            jx in proptest::collection::vec((0.01f64..1.0, 0.0f64..0.4), 0..6),
            jy in proptest::collection::vec((0.01f64..1.0, 0.0f64..0.4), 0..6),
            r in 0.05f64..0.6,
            which in 0usize..3,
        ) {
            let sorted = |mut v: Vec<(f64, f64)>| { v.sort_by(|a, b| a.0.total_cmp(&b.0)); v };
            let (jx, jy) = (sorted(jx), sorted(jy));
            let g = HybridPath::new(Track::from_jumps(&jx).unwrap(), Track::from_jumps(&jy).unwrap());
            let c = match which {
                0 => Constraint::SupBall { radius: r },
                1 => Constraint::GridBall { n: 7, radius: r },
                _ => Constraint::Good(GoodSetSpec::new(1.5, Some(1.0 + 10.0 * r)).unwrap()),
            };
            let set = PathSet::new(HybridPath::linear(0.8, 0.6).unwrap(), vec![c]).unwrap();
            if set.contains(&g).unwrap() {
                let ts = g.breakpoints();
                for w in ts.windows(2) {
                    proptest::prop_assert!(set.admits_constant(g.at(w[0]), w[0], w[1], 1e-12));
                }
            }
            // With zero tolerance the piece test decides membership.
            let ts = g.breakpoints();
            let pieces_ok = ts.windows(2).all(|w| set.admits_constant(g.at(w[0]), w[0], w[1], 0.0));
            proptest::prop_assert_eq!(pieces_ok, set.contains(&g).unwrap());
        }
    }
}
