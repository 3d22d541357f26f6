use serde::Serialize;

use crate::error::Result;
use crate::functionals::{rate_k_with, rate_ktilde, KOptions};
use crate::paths::HybridPath;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProfileClass {
    PositiveEverywhere,
    TouchesZero,
    GoesNegative,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BottleneckReport {
    pub class: ProfileClass,
    /// Minimizer of `s -> K̃(f, 0, s)` over `(0, 1]`.
    pub argmin: f64,
    pub min_value: f64,
    /// First time the profile drops below zero.
    pub crossing: Option<f64>,
}

/// Where the growth profile of `f` is smallest, and whether it goes negative.
pub fn bottleneck_scan(f: &HybridPath, grid: usize) -> Result<BottleneckReport> {
    let opt = KOptions { grid: grid.max(2), ..KOptions::default() };
    let rep = rate_k_with(f, opt)?;
    let class = if rep.bottleneck.is_some() {
        ProfileClass::GoesNegative
    } else if rep.k_value == rep.ktilde && rep.k_value > 0.0 {
        ProfileClass::PositiveEverywhere
    } else {
        ProfileClass::TouchesZero
    };
    let pts = &rep.profile;
    let i = (1..pts.len()).fold(1, |b, i| if pts[i].1 < pts[b].1 { i } else { b });
    let (mut a, mut b) = (pts[i - 1].0, pts.get(i + 1).map_or(pts[i].0, |p| p.0));
    let at = |s: f64| -> Result<f64> { Ok(rate_ktilde(f, 0.0, s)?.to_f64()) };
    let g = 0.5 * (5f64.sqrt() - 1.0);
    if pts[i].1.is_finite() {
        while b - a > 1e-12 {
            let (c, d) = (b - g * (b - a), a + g * (b - a));
            if at(c)? < at(d)? {
                b = d;
            } else {
                a = c;
            }
        }
    }
    let mid = 0.5 * (a + b);
    let (argmin, min_value) = match at(mid)? {
        v if a > 0.0 && v <= pts[i].1 => (mid, v),
        _ => pts[i],
    };
    Ok(BottleneckReport { class, argmin, min_value, crossing: rep.bottleneck })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::paths::Track;

    #[test]
    fn diagonal_profile_is_smallest_at_the_start() {
        let r = bottleneck_scan(&HybridPath::linear(1.0, 1.0).unwrap(), 256).unwrap();
        assert_eq!(r.class, ProfileClass::PositiveEverywhere);
        assert!(r.argmin <= 1.0 / 256.0 + 1e-12 && r.min_value <= 1.0 / 256.0 + 1e-9);
        assert!(r.crossing.is_none());
    }

    #[test]
    fn steep_path_fails_at_once() {
        let r = bottleneck_scan(&HybridPath::linear(10.0, 10.0).unwrap(), 256).unwrap();
        assert_eq!(r.class, ProfileClass::GoesNegative);
        assert!(r.crossing.unwrap() < 1e-5);
    }

    #[test]
    fn crossing_after_a_slope_change() {
        let t = Track::from_points(&[(0.0, 0.0), (0.5, 0.5), (1.0, 5.5)]).unwrap();
        let f = HybridPath::new(t.clone(), t);
        let r = bottleneck_scan(&f, 256).unwrap();
        // Profile s on [0, 1/2], then 1/2 + (1 - 2(1 - √10)²)(s - 1/2).
        let slope = 1.0 - 2.0 * (1.0 - 10f64.sqrt()).powi(2);
        let exact = 0.5 - 0.5 / slope;
        assert_eq!(r.class, ProfileClass::GoesNegative);
        assert!((r.crossing.unwrap() - exact).abs() < 1e-6, "{:?} vs {exact}", r.crossing);
    }
}
