use std::f64::consts::SQRT_2;
use std::fmt::Write as _;

use serde::Serialize;

use crate::error::{domain, Result};
use crate::paths::{HybridPath, PLGrid};

/// Lower edge of the positive region on the diagonal, `3/2 - √2`.
pub const DIAG_LO: f64 = 1.5 - SQRT_2;
/// Upper edge of the positive region on the diagonal, `3/2 + √2`.
pub const DIAG_HI: f64 = 1.5 + SQRT_2;
/// Column used to enter the upper part of the region, `3/2 + √2/2`.
pub const PIVOT: f64 = 1.5 + SQRT_2 / 2.0;
pub const MU_MAX: f64 = 10.0;

/// Growth rate per unit time along `s -> (λs, μs)`; arguments are put in
/// `λ <= μ` order first.
pub fn kappa(lambda: f64, mu: f64) -> Result<f64> {
    if !(lambda > 0.0 && mu > 0.0) || !lambda.is_finite() || !mu.is_finite() {
        return domain(format!("kappa needs positive slopes, got ({lambda}, {mu})"));
    }
    let (l, m) = if lambda <= mu { (lambda, mu) } else { (mu, lambda) };
    let q = m / l;
    let mid = SQRT_2 * (q - 0.5).sqrt() - l.sqrt();
    let last = 1.0 - m.sqrt();
    Ok(q - mid * mid - last * last)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Region {
    /// `λ ∈ (3/2-√2, 3/2+√2)`, `μ ∈ [λ, 10)`.
    Lower,
    /// `μ ∈ (3/2+√2, 10)`, `λ ∈ [3/2+√2, μ]`.
    Upper,
}

/// Which part of the positive region contains `(λ, μ)`, after ordering.
pub fn kappa_region(lambda: f64, mu: f64) -> Option<Region> {
    let (l, m) = if lambda <= mu { (lambda, mu) } else { (mu, lambda) };
    if l > DIAG_LO && l < DIAG_HI && m >= l && m < MU_MAX {
        Some(Region::Lower)
    } else if m > DIAG_HI && m < MU_MAX && l >= DIAG_HI && l <= m {
        Some(Region::Upper)
    } else {
        None
    }
}

pub fn kappa_region_contains(lambda: f64, mu: f64) -> bool {
    kappa_region(lambda, mu).is_some()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KappaPoint {
    pub lambda: f64,
    pub mu: f64,
    pub value: f64,
}

impl KappaPoint {
    pub fn new(lambda: f64, mu: f64) -> Result<Self> {
        let value = kappa(lambda, mu)?;
        let (lambda, mu) = if lambda <= mu { (lambda, mu) } else { (mu, lambda) };
        Ok(KappaPoint { lambda, mu, value })
    }
}

/// `lambda,mu,kappa,in_region` rows over the product of the two axes.
pub fn kappa_map_csv(lambdas: &[f64], mus: &[f64]) -> Result<String> {
    let mut out = String::from("lambda,mu,kappa,in_region\n");
    for &l in lambdas {
        for &m in mus {
            let k = kappa(l, m)?;
            let _ = writeln!(out, "{l:?},{m:?},{k:?},{}", kappa_region_contains(l, m) as u8);
        }
    }
    Ok(out)
}

/// Piecewise-linear path of slopes from `(1/2, 1/2)` to a target, at constant
/// speed on `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GammaPath {
    pub waypoints: Vec<(f64, f64)>,
    /// Parameter value at each waypoint; `0` first, `1` last.
    pub knots: Vec<f64>,
    /// Total Euclidean length, which is also the speed.
    pub length: f64,
}

impl GammaPath {
    fn through(waypoints: Vec<(f64, f64)>) -> Self {
        let mut cum = vec![0.0];
        for w in waypoints.windows(2) {
            let d = ((w[1].0 - w[0].0).powi(2) + (w[1].1 - w[0].1).powi(2)).sqrt();
            cum.push(cum.last().unwrap() + d);
        }
        let length = *cum.last().unwrap();
        let knots = if length > 0.0 { cum.iter().map(|c| c / length).collect() } else { vec![0.0; waypoints.len()] };
        GammaPath { waypoints, knots, length }
    }

    pub fn eval(&self, t: f64) -> (f64, f64) {
        let t = t.clamp(0.0, 1.0);
        if self.length == 0.0 || t >= 1.0 {
            return *self.waypoints.last().unwrap();
        }
        let i = self.knots.partition_point(|&k| k <= t).clamp(1, self.knots.len() - 1);
        let (k0, k1) = (self.knots[i - 1], self.knots[i]);
        let (a, b) = (self.waypoints[i - 1], self.waypoints[i]);
        let u = if k1 > k0 { (t - k0) / (k1 - k0) } else { 0.0 };
        (a.0 + (b.0 - a.0) * u, a.1 + (b.1 - a.1) * u)
    }
}

/// Waypoints of the slope path for a point of the region, without checking
/// the sign of `κ` at the target.
pub fn gamma_waypoints(lambda: f64, mu: f64) -> Result<Vec<(f64, f64)>> {
    if !(lambda > 0.0 && lambda <= mu) {
        return domain(format!("gamma needs 0 < lambda <= mu, got ({lambda}, {mu})"));
    }
    let start = (0.5, 0.5);
    match kappa_region(lambda, mu) {
        Some(Region::Lower) => Ok(vec![start, (lambda, lambda), (lambda, mu)]),
        Some(Region::Upper) => Ok(vec![start, (PIVOT, PIVOT), (PIVOT, mu), (lambda, mu)]),
        None => domain(format!("({lambda}, {mu}) lies outside the positive region")),
    }
}

/// Path of slopes from `(1/2, 1/2)` to `(λ, μ)` along which `κ` stays positive.
pub fn gamma_path(lambda: f64, mu: f64) -> Result<GammaPath> {
    let waypoints = gamma_waypoints(lambda, mu)?;
    let k = kappa(lambda, mu)?;
    if !(k > 0.0) {
        return domain(format!("gamma needs kappa > 0 at the target, got kappa({lambda}, {mu}) = {k}"));
    }
    Ok(GammaPath::through(waypoints))
}

/// The diagonal-start approximation `h` of `f` on the `1/n` grid, built with
/// `m` slope steps, evaluated lazily at gridpoints.
#[derive(Debug, Clone)]
pub struct HConstruction {
    pub n: usize,
    pub m: usize,
    /// `ceil(n^{7/8})`: the diagonal runs over the first `k0` cells.
    pub k0: usize,
    /// `τ n = m^m k0`.
    pub tau_cells: usize,
    pub gamma: GammaPath,
    /// Slopes `γ(j/m)` on cells `[k0 m^{j-1}, k0 m^j)`, `j = 1..=m`.
    pub steps: Vec<(usize, usize, f64, f64)>,
    swapped: bool,
    f: HybridPath,
}

impl HConstruction {
    pub fn new(f: &HybridPath, n: usize, m: usize) -> Result<Self> {
        if m == 0 || n < m {
            return domain(format!("need 1 <= m <= n, got m = {m}, n = {n}"));
        }
        // f is linear on [0, first) in both coordinates.
        let first = f.breakpoints()[1];
        let lambda = f.x.left_limit(first) / first;
        let mu = f.y.left_limit(first) / first;
        if !(lambda > 0.0 && mu > 0.0) {
            return domain("f is not M-good for any M: zero slope at the origin");
        }
        let swapped = lambda > mu;
        let (lambda, mu, f) =
            if swapped { (mu, lambda, HybridPath::new(f.y.clone(), f.x.clone())) } else { (lambda, mu, f.clone()) };
        let k0 = (n as f64).powf(7.0 / 8.0).ceil() as usize;
        let tau_cells = (m as u64)
            .checked_pow(m as u32)
            .and_then(|mm| mm.checked_mul(k0 as u64))
            .filter(|&u| 2 * u <= n as u64)
            .ok_or_else(|| {
                crate::Error::Domain(format!("tau = m^m ceil(n^(7/8))/n must be at most 1/2 (m = {m}, n = {n})"))
            })? as usize;
        let gamma = gamma_path(lambda, mu)?;
        let mut steps = Vec::with_capacity(m);
        let mut lo = k0;
        for j in 1..=m {
            let (l, u) = gamma.eval(j as f64 / m as f64);
            steps.push((lo, lo * m, l, u));
            lo *= m;
        }
        Ok(HConstruction { n, m, k0, tau_cells, gamma, steps, swapped, f })
    }

    fn at_sorted(&self, i: usize) -> (f64, f64) {
        let nf = self.n as f64;
        let tau = self.tau_cells;
        if i <= tau {
            let d = i.min(self.k0) as f64;
            let (mut x, mut y) = (0.5 * d, 0.5 * d);
            for &(lo, hi, l, u) in &self.steps {
                if i > lo {
                    let c = (i.min(hi) - lo) as f64;
                    x += l * c;
                    y += u * c;
                }
            }
            return (x / nf, y / nf);
        }
        if i < 2 * tau {
            let (hx, hy) = self.at_sorted(tau);
            let z = self.f.at(2.0 * tau as f64 / nf);
            let w = (i - tau) as f64 / tau as f64;
            return (hx + (z.x - hx) * w, hy + (z.y - hy) * w);
        }
        let z = self.f.at(if i == self.n { 1.0 } else { i as f64 / nf });
        (z.x, z.y)
    }

    /// `h(i/n)`.
    pub fn at(&self, i: usize) -> (f64, f64) {
        let (x, y) = self.at_sorted(i);
        if self.swapped {
            (y, x)
        } else {
            (x, y)
        }
    }

    pub fn to_grid(&self) -> Result<PLGrid> {
        let (xs, ys) = (0..=self.n).map(|i| self.at(i)).unzip();
        PLGrid::new(xs, ys)
    }
}

/// `h` materialized on the `1/n` grid.
pub fn build_h(f: &HybridPath, n: usize, m: usize) -> Result<PLGrid> {
    HConstruction::new(f, n, m)?.to_grid()
}
