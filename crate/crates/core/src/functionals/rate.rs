use std::f64::consts::SQRT_2;
use std::fmt::Write as _;

use serde::Serialize;

use super::quad::integrate;
use crate::error::{domain, Result};
use crate::ext::ExtReal;
use crate::model::{limit_rate_raw, limit_rate_x_raw, limit_rate_y_raw};
use crate::paths::{HybridPath, Piece};

const QUAD_TOL: f64 = 1e-13;

/// Integrals of one path over `[a, b]`; `None` marks `+inf`.
#[derive(Debug, Clone, Copy, Default)]
struct Integrals {
    rstar: Option<f64>,
    cost: Option<f64>,
    root_x: Option<f64>,
    root_y: Option<f64>,
}

fn add(a: Option<f64>, b: Option<f64>) -> Option<f64> {
    Some(a? + b?)
}

impl Integrals {
    const ZERO: Integrals = Integrals { rstar: Some(0.0), cost: Some(0.0), root_x: Some(0.0), root_y: Some(0.0) };
    const INF: Integrals = Integrals { rstar: None, cost: None, root_x: None, root_y: None };

    fn plus(self, o: Integrals) -> Integrals {
        Integrals {
            rstar: add(self.rstar, o.rstar),
            cost: add(self.cost, o.cost),
            root_x: add(self.root_x, o.root_x),
            root_y: add(self.root_y, o.root_y),
        }
    }
}

/// Integrals over a linear piece restricted to `[a, b]`.
fn piece_integrals(p: &Piece, a: f64, b: f64) -> Integrals {
    if b <= a {
        return Integrals::ZERO;
    }
    let (z, v) = (p.at(a), p.vel);
    let x_flat_zero = z.x == 0.0 && v.x == 0.0;
    let y_flat_zero = z.y == 0.0 && v.y == 0.0;
    if x_flat_zero && y_flat_zero {
        // Resting at the origin: R* = 1, R*_X = R*_Y = 1/2, no motion.
        let h = b - a;
        return Integrals { rstar: Some(h), cost: Some(2.0 * h), root_x: Some(0.0), root_y: Some(0.0) };
    }
    // On an open axis R* is infinite; leaving an axis from a point off the
    // origin makes R* blow up like 1/s, which is not integrable either.
    if x_flat_zero || y_flat_zero || (z.x == 0.0 && z.y > 0.0) || (z.y == 0.0 && z.x > 0.0) {
        return Integrals::INF;
    }
    // The kernel switches branch where x = y.
    let mut cuts = vec![a];
    let (dx, dv) = (z.x - z.y, v.x - v.y);
    if dv != 0.0 {
        let c = a - dx / dv;
        if c > a && c < b {
            cuts.push(c);
        }
    }
    cuts.push(b);
    let (sx, sy) = (v.x.sqrt(), v.y.sqrt());
    let mut out = Integrals::ZERO;
    for w in cuts.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        let at = |s: f64| p.at(s);
        let rstar = integrate(
            |s| {
                let q = at(s);
                limit_rate_raw(q.x, q.y)
            },
            lo,
            hi,
            QUAD_TOL,
        );
        let cost = integrate(
            |s| {
                let q = at(s);
                let ax = (2.0 * limit_rate_x_raw(q.x, q.y)).sqrt() - sx;
                let ay = (2.0 * limit_rate_y_raw(q.x, q.y)).sqrt() - sy;
                ax * ax + ay * ay
            },
            lo,
            hi,
            QUAD_TOL,
        );
        let root_x = integrate(
            |s| {
                let q = at(s);
                (limit_rate_x_raw(q.x, q.y) * v.x).sqrt()
            },
            lo,
            hi,
            QUAD_TOL,
        );
        let root_y = integrate(
            |s| {
                let q = at(s);
                (limit_rate_y_raw(q.x, q.y) * v.y).sqrt()
            },
            lo,
            hi,
            QUAD_TOL,
        );
        out = out.plus(Integrals { rstar: Some(rstar), cost: Some(cost), root_x: Some(root_x), root_y: Some(root_y) });
    }
    out
}

fn integrals(f: &HybridPath, a: f64, b: f64) -> Integrals {
    f.pieces(a, b).iter().fold(Integrals::ZERO, |acc, p| acc.plus(piece_integrals(p, p.a, p.b)))
}

fn check_interval(a: f64, b: f64) -> Result<()> {
    if !(0.0 <= a && a <= b && b <= 1.0) {
        return domain(format!("need 0 <= a <= b <= 1, got ({a}, {b})"));
    }
    Ok(())
}

fn ext(v: Option<f64>) -> ExtReal {
    v.map_or(ExtReal::PosInf, ExtReal::Finite)
}

fn jumps(f: &HybridPath, a: f64, b: f64) -> f64 {
    f.x.jump_sum(a, b) + f.y.jump_sum(a, b)
}

/// `∫_a^b R*(f(s)) ds`.
pub fn integrated_rate(f: &HybridPath, a: f64, b: f64) -> Result<ExtReal> {
    check_interval(a, b)?;
    Ok(ext(integrals(f, a, b).rstar))
}

/// Cost of following `f` on `[a, b]`, absolutely continuous part only.
pub fn rate_i(f: &HybridPath, a: f64, b: f64) -> Result<ExtReal> {
    check_interval(a, b)?;
    Ok(ext(integrals(f, a, b).cost))
}

/// `I` plus the jumps of both tracks on `(a, b]`.
pub fn rate_j(f: &HybridPath, a: f64, b: f64) -> Result<ExtReal> {
    check_interval(a, b)?;
    ext(integrals(f, a, b).cost).checked_add(ExtReal::Finite(jumps(f, a, b)))
}

fn ktilde_from(f: &HybridPath, a: f64, b: f64, it: Integrals) -> Result<ExtReal> {
    match it.cost {
        None => Ok(ExtReal::NegInf),
        Some(c) => ext(it.rstar).checked_sub(ExtReal::Finite(c + jumps(f, a, b))),
    }
}

/// `K̃(f, a, b) = ∫R* - J`, or `-inf` when `J` is infinite.
pub fn rate_ktilde(f: &HybridPath, a: f64, b: f64) -> Result<ExtReal> {
    check_interval(a, b)?;
    ktilde_from(f, a, b, integrals(f, a, b))
}

/// The expanded form `-∫R* + 2√2 ∫√(R*_X f'_X) + 2√2 ∫√(R*_Y f'_Y) - Δf_X - Δf_Y`.
/// `None` when `∫R*` is infinite and the expansion does not apply.
pub fn rate_ktilde_expanded(f: &HybridPath, a: f64, b: f64) -> Result<Option<f64>> {
    check_interval(a, b)?;
    let it = integrals(f, a, b);
    let (Some(r), Some(rx), Some(ry)) = (it.rstar, it.root_x, it.root_y) else {
        return Ok(None);
    };
    let dx = f.x.value(b) - f.x.value(a);
    let dy = f.y.value(b) - f.y.value(a);
    Ok(Some(-r + 2.0 * SQRT_2 * (rx + ry) - dx - dy))
}

/// Both forms of `K̃`, for cross-checking.
pub fn rate_ktilde_both(f: &HybridPath, a: f64, b: f64) -> Result<(ExtReal, Option<f64>)> {
    Ok((rate_ktilde(f, a, b)?, rate_ktilde_expanded(f, a, b)?))
}

/// Tolerances for [`rate_k`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KOptions {
    pub grid: usize,
    pub tol: f64,
    pub locate: f64,
}

impl Default for KOptions {
    fn default() -> Self {
        KOptions { grid: 1024, tol: 1e-9, locate: 1e-6 }
    }
}

/// Profile of `s -> K̃(f, 0, s)` and the resulting value of `K`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateReport {
    pub i_value: f64,
    pub j_value: f64,
    pub ktilde: f64,
    pub derivative_at_zero: f64,
    /// `(s, K̃(f, 0, s))`, IEEE infinities for the sentinels.
    pub profile: Vec<(f64, f64)>,
    pub k_value: f64,
    pub bottleneck: Option<f64>,
}

impl RateReport {
    pub fn k(&self) -> ExtReal {
        ExtReal::from(self.k_value)
    }

    pub fn profile_csv(&self) -> String {
        let mut out = String::from("s,ktilde\n");
        for (s, k) in &self.profile {
            let _ = writeln!(out, "{s:?},{k:?}");
        }
        out
    }
}

struct Profile<'a> {
    f: &'a HybridPath,
    pts: Vec<(f64, ExtReal)>,
}

impl Profile<'_> {
    /// `K̃(f, 0, s)` from the nearest profile point at or below `s`.
    fn at(&self, s: f64) -> Result<ExtReal> {
        let i = self.pts.partition_point(|p| p.0 <= s).saturating_sub(1);
        let (s0, k0) = self.pts[i];
        if k0 == ExtReal::NegInf {
            return Ok(ExtReal::NegInf);
        }
        k0.checked_add(ktilde_from(self.f, s0, s, integrals(self.f, s0, s))?)
    }
}

/// Computes `K(f)`: `K̃(f, 0, 1)` when the profile starts with positive slope
/// and stays positive, `-inf` when it dips below `-tol`, and `0` otherwise.
pub fn rate_k(f: &HybridPath) -> Result<RateReport> {
    rate_k_with(f, KOptions::default())
}

pub fn rate_k_with(f: &HybridPath, opt: KOptions) -> Result<RateReport> {
    if opt.grid < 2 {
        return domain("profile grid needs at least two points");
    }
    let mut grid: Vec<f64> = (0..=opt.grid).map(|i| i as f64 / opt.grid as f64).collect();
    grid.extend(f.breakpoints());
    grid.sort_by(f64::total_cmp);
    grid.dedup();

    let mut pts = Vec::with_capacity(grid.len());
    let mut acc = ExtReal::ZERO;
    let mut total = Integrals::ZERO;
    pts.push((0.0, acc));
    for w in grid.windows(2) {
        let it = integrals(f, w[0], w[1]);
        total = total.plus(it);
        if acc != ExtReal::NegInf {
            acc = acc.checked_add(ktilde_from(f, w[0], w[1], it)?)?;
        }
        pts.push((w[1], acc));
    }
    let prof = Profile { f, pts };
    let neg = |k: ExtReal| k < ExtReal::Finite(-opt.tol);

    let first_break = f.breakpoints().into_iter().find(|&t| t > 0.0).unwrap_or(1.0);
    let h = opt.locate.min(0.5 * first_break);
    let d0 = prof.at(h)?.to_f64() / h;

    // A dip between grid points can hide below a local minimum of the profile.
    let mut dip: Option<(usize, f64)> = None;
    if !prof.pts.iter().any(|p| neg(p.1)) {
        for i in 1..prof.pts.len() - 1 {
            let (l, m, r) = (prof.pts[i - 1].1, prof.pts[i].1, prof.pts[i + 1].1);
            if m <= l && m <= r {
                let (s, v) = golden_min(&prof, prof.pts[i - 1].0, prof.pts[i + 1].0)?;
                if neg(v) {
                    dip = Some((i - 1, s));
                    break;
                }
            }
        }
    }

    let first_neg = prof.pts.iter().position(|p| neg(p.1));
    let bottleneck = match (first_neg, dip) {
        (Some(i), _) => Some(bisect_crossing(&prof, prof.pts[i - 1].0, prof.pts[i].0, opt)?),
        (None, Some((i, s))) => Some(bisect_crossing(&prof, prof.pts[i].0, s, opt)?),
        _ => None,
    };

    let ktilde = prof.pts.last().unwrap().1;
    let positive = prof.pts.iter().skip(1).all(|p| p.1 > ExtReal::ZERO);
    let k_value = if bottleneck.is_some() {
        ExtReal::NegInf
    } else if d0 > opt.tol && positive {
        ktilde
    } else {
        ExtReal::ZERO
    };
    Ok(RateReport {
        i_value: ext(total.cost).to_f64(),
        j_value: ext(add(total.cost, Some(jumps(f, 0.0, 1.0)))).to_f64(),
        ktilde: ktilde.to_f64(),
        derivative_at_zero: d0,
        profile: prof.pts.iter().map(|&(s, k)| (s, k.to_f64())).collect(),
        k_value: k_value.to_f64(),
        bottleneck,
    })
}

/// First time in `(lo, hi]` where the profile drops below `-tol`, to within `locate`.
fn bisect_crossing(prof: &Profile, mut lo: f64, mut hi: f64, opt: KOptions) -> Result<f64> {
    let neg = |k: ExtReal| k < ExtReal::Finite(-opt.tol);
    while hi - lo > opt.locate {
        let mid = 0.5 * (lo + hi);
        if neg(prof.at(mid)?) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

fn golden_min(prof: &Profile, mut a: f64, mut b: f64) -> Result<(f64, ExtReal)> {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (prof.at(c)?, prof.at(d)?);
    for _ in 0..60 {
        if b - a < 1e-12 {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = prof.at(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = prof.at(d)?;
        }
    }
    Ok(if fc < fd { (c, fc) } else { (d, fd) })
}
