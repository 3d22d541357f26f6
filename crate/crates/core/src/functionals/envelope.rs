use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::model::{rate_x, rate_y};
use crate::paths::{BoxEnvelope, PLGrid, PathSet};

/// Extreme jump rates over `I_j` for paths in a set, at scale `T`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IntervalRates {
    pub rx_minus: f64,
    pub rx_plus: f64,
    pub ry_minus: f64,
    pub ry_plus: f64,
}

impl IntervalRates {
    /// `R_X` falls in `x` and rises in `y`, so the extremes sit at opposite
    /// corners of the box spanned over `I_j`.
    pub fn from_envelope(env: &BoxEnvelope, j: usize, t: f64) -> Result<Self> {
        if env.empty {
            return Err(Error::Infeasible("empty path set".into()));
        }
        if j >= env.n {
            return domain(format!("interval index {j} out of range for n = {}", env.n));
        }
        if !(t > 0.0) {
            return domain("scale T must be positive");
        }
        let (xl, xh) = (t * env.x_lo[j], t * env.x_hi[j + 1]);
        let (yl, yh) = (t * env.y_lo[j], t * env.y_hi[j + 1]);
        Ok(IntervalRates {
            rx_plus: rate_x(xl, yh),
            rx_minus: rate_x(xh, yl),
            ry_plus: rate_y(xh, yl),
            ry_minus: rate_y(xl, yh),
        })
    }
}

pub fn envelope_rates(set: &PathSet, n: usize, j: usize, t: f64) -> Result<IntervalRates> {
    IntervalRates::from_envelope(&set.box_envelope(n)?, j, t)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CaseTag {
    /// Drift covers more than the distance to travel.
    Minus,
    /// Distance to travel exceeds the drift.
    Plus,
    Neither,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CaseQuantity {
    pub tag: CaseTag,
    pub e_plus: f64,
    pub e_minus: f64,
}

fn sq_diff(a: f64, b: f64) -> f64 {
    let d = a.max(0.0).sqrt() - b.max(0.0).sqrt();
    d * d
}

/// Case split and `𝓔^±` for one coordinate.
///
/// `outer = x⁺(I⁺) - x⁻(I⁻)` and `inner = x⁻(I⁺) - x⁺(I⁻)`. A negative inner
/// gap (possible in the minus case) is clamped to zero under the root.
pub fn case_quantity(r_minus: f64, r_plus: f64, len: f64, outer: f64, inner: f64) -> CaseQuantity {
    let (lo, hi) = (2.0 * r_minus * len, 2.0 * r_plus * len);
    if lo > outer {
        CaseQuantity { tag: CaseTag::Minus, e_plus: sq_diff(lo, outer), e_minus: sq_diff(hi, inner) }
    } else if inner > hi {
        CaseQuantity { tag: CaseTag::Plus, e_plus: sq_diff(hi, inner), e_minus: sq_diff(lo, outer) }
    } else {
        CaseQuantity { tag: CaseTag::Neither, e_plus: 0.0, e_minus: 0.0 }
    }
}

/// `(X, Y)` case quantities on `I_j` for the set behind `env`.
pub fn interval_case_quantities(env: &BoxEnvelope, j: usize, t: f64) -> Result<(CaseQuantity, CaseQuantity)> {
    let r = IntervalRates::from_envelope(env, j, t)?;
    let len = 1.0 / env.n as f64;
    let qx = case_quantity(r.rx_minus, r.rx_plus, len, env.x_hi[j + 1] - env.x_lo[j], env.x_lo[j + 1] - env.x_hi[j]);
    let qy = case_quantity(r.ry_minus, r.ry_plus, len, env.y_hi[j + 1] - env.y_lo[j], env.y_lo[j + 1] - env.y_hi[j]);
    Ok((qx, qy))
}

/// Slack `δ_{M,T}(j, n)` between `R*_X(f(s))` and the interval rates on `I_j`.
pub fn delta_bound(m: f64, t: f64, j: usize, n: usize, f: &PLGrid) -> Result<f64> {
    let nf = n as f64;
    if !(m > 1.0) || !(t > 1.0) {
        return domain("delta needs M > 1 and T > 1");
    }
    if nf < 2.0 * m {
        return domain(format!("delta needs n >= 2M, got n = {n}, M = {m}"));
    }
    if (j as f64) < nf.sqrt() || j >= n {
        return domain(format!("delta needs sqrt(n) <= j < n, got j = {j}"));
    }
    if f.n != n {
        return domain("grid path resolution differs from n");
    }
    for i in [j, j + 1] {
        let s = i as f64 / nf;
        for v in [f.xs[i], f.ys[i]] {
            if v < s / m || v > m * s {
                return domain(format!("f is not M-good at s = {s}"));
            }
        }
    }
    let dx = f.xs[j + 1] - f.xs[j];
    let dy = f.ys[j + 1] - f.ys[j];
    let m2 = m * m;
    let m3 = m2 * m;
    Ok((6.0 * m3 * nf.sqrt() + 2.0 * m2 * nf / t) * dx
        + m * nf.sqrt() * dy
        + 7.0 * m3 / nf.powf(1.5)
        + 3.0 * m3 * nf / t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::paths::HybridPath;

    fn env_box(x: (f64, f64), y: (f64, f64)) -> BoxEnvelope {
        BoxEnvelope {
            n: 1,
            x_lo: vec![x.0, x.0],
            x_hi: vec![x.1, x.1],
            y_lo: vec![y.0, y.0],
            y_hi: vec![y.1, y.1],
            empty: false,
        }
    }

    #[test]
    fn rate_examples() {
        let r = IntervalRates::from_envelope(&env_box((0.4, 0.6), (0.9, 1.1)), 0, 100.0).unwrap();
        assert!((r.rx_plus - (111.0 / 41.0 - 0.5)).abs() < 1e-14);
        assert!(r.rx_minus <= r.rx_plus && r.ry_minus <= r.ry_plus);
        let r = IntervalRates::from_envelope(&env_box((0.3, 0.3), (0.7, 0.7)), 0, 10.0).unwrap();
        assert_eq!(r.rx_minus, r.rx_plus);
        assert_eq!(r.rx_plus, rate_x(3.0, 7.0));
        assert_eq!(r.ry_plus, rate_y(3.0, 7.0));
        let mut e = env_box((0.3, 0.3), (0.7, 0.7));
        e.empty = true;
        assert!(IntervalRates::from_envelope(&e, 0, 10.0).is_err());
    }

    #[test]
    fn case_examples() {
        let q = case_quantity(1.0, 1.0, 0.5, 0.2, 0.1);
        assert_eq!(q.tag, CaseTag::Minus);
        assert!((q.e_plus - (1.0 - 0.2f64.sqrt()).powi(2)).abs() < 1e-15);
        let q = case_quantity(1.0, 2.0, 0.5, 1.0, 0.5);
        assert_eq!(q.tag, CaseTag::Neither);
        assert_eq!((q.e_plus, q.e_minus), (0.0, 0.0));
        let q = case_quantity(0.25, 0.5, 0.5, 1.2, 0.9);
        assert_eq!(q.tag, CaseTag::Plus);
        assert!((q.e_plus - (0.5f64.sqrt() - 0.9f64.sqrt()).powi(2)).abs() < 1e-15);
        let q = case_quantity(1.0, 1.5, 0.5, 0.2, -0.1);
        assert!((q.e_minus - 1.5).abs() < 1e-15);
    }

    #[test]
    fn delta_examples() {
        let n = 64;
        let f = PLGrid::linear(n, 1.0, 1.0);
        let base = delta_bound(2.0, 1e6, 8, n, &f).unwrap();
        let inc = 1.0 / 64.0;
        let coef_x = 6.0 * 8.0 * 8.0 + 2.0 * 4.0 * 64.0 / 1e6;
        let consts = 7.0 * 8.0 / 512.0 + 3.0 * 8.0 * 64.0 / 1e6;
        assert!((base - (coef_x * inc + 2.0 * 8.0 * inc + consts)).abs() < 1e-12);
        assert!((consts - (0.109375 + 0.001536)).abs() < 1e-15);
        let mut flat = f.clone();
        flat.xs[9] = flat.xs[8];
        flat.ys[9] = flat.ys[8];
        assert!((delta_bound(2.0, 1e6, 8, n, &flat).unwrap() - consts).abs() < 1e-15);
        assert!(delta_bound(2.0, 1e6, 7, n, &f).is_err());
        assert!(delta_bound(40.0, 1e6, 8, n, &f).is_err());
    }

    #[test]
    fn interval_quantities_from_a_set() {
        let set = PathSet::lambda(HybridPath::linear(1.0, 1.0).unwrap(), 8, 2.0, 1e6).unwrap();
        let env = set.box_envelope(8).unwrap();
        let (qx, qy) = interval_case_quantities(&env, 4, 1e6).unwrap();
        assert!(qx.e_plus >= 0.0 && qy.e_minus >= 0.0);
    }
}
