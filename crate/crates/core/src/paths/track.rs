use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::model::LogPoint;

/// Breakpoint of a track: the left limit and the (right-continuous) value at `t`.
/// `value > left` marks a jump.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Knot {
    pub t: f64,
    pub left: f64,
    pub value: f64,
}

impl Knot {
    pub fn cont(t: f64, v: f64) -> Self {
        Knot { t, left: v, value: v }
    }

    pub fn jump_size(&self) -> f64 {
        self.value - self.left
    }
}

/// A non-decreasing cadlag function on `[0, 1]` with `f(0) = 0`, linear between
/// knots and with explicit jumps at knots.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Track {
    knots: Vec<Knot>,
}

impl Track {
    /// Validates the knot list. The first knot must be `(0, 0, 0)` and the last
    /// must sit at `t = 1`.
    pub fn new(knots: Vec<Knot>) -> Result<Self> {
        if knots.len() < 2 {
            return domain("a track needs knots at 0 and 1");
        }
        let first = knots[0];
        if first.t != 0.0 || first.left != 0.0 || first.value != 0.0 {
            return domain("a track must start at (0, 0) without a jump");
        }
        if knots[knots.len() - 1].t != 1.0 {
            return domain("a track must end at t = 1");
        }
        for w in knots.windows(2) {
            let (a, b) = (w[0], w[1]);
            if !(b.t > a.t) {
                return domain(format!("knot times must increase strictly ({} then {})", a.t, b.t));
            }
            if !(b.left >= a.value) || !(b.value >= b.left) {
                return domain(format!("track decreases near t = {}", b.t));
            }
            if !b.value.is_finite() {
                return domain("track values must be finite");
            }
        }
        Ok(Track { knots })
    }

    pub fn zero() -> Self {
        Track { knots: vec![Knot::cont(0.0, 0.0), Knot::cont(1.0, 0.0)] }
    }

    /// `s -> slope * s`.
    pub fn linear(slope: f64) -> Result<Self> {
        Track::new(vec![Knot::cont(0.0, 0.0), Knot::cont(1.0, slope)])
    }

    /// Continuous piecewise-linear track through `(t_i, v_i)`.
    pub fn from_points(points: &[(f64, f64)]) -> Result<Self> {
        Track::new(points.iter().map(|&(t, v)| Knot::cont(t, v)).collect())
    }

    /// Linear interpolation of values at `j / n`, `j = 0..=n`.
    pub fn from_grid(values: &[f64]) -> Result<Self> {
        if values.len() < 2 {
            return domain("grid track needs at least two values");
        }
        let n = (values.len() - 1) as f64;
        Track::new(
            values
                .iter()
                .enumerate()
                .map(|(j, &v)| Knot::cont(if j + 1 == values.len() { 1.0 } else { j as f64 / n }, v))
                .collect(),
        )
    }

    /// Piecewise-constant track with jumps `(time, size)`; times in `(0, 1]`.
    pub fn from_jumps(jumps: &[(f64, f64)]) -> Result<Self> {
        let mut knots = vec![Knot::cont(0.0, 0.0)];
        let mut level = 0.0;
        for &(t, size) in jumps {
            if size < 0.0 {
                return domain("jump sizes must be nonnegative");
            }
            if t <= 0.0 || t > 1.0 {
                return domain("jump times must lie in (0, 1]");
            }
            let last = knots.last_mut().unwrap();
            if last.t == t {
                last.value += size;
                level = last.value;
                continue;
            }
            knots.push(Knot { t, left: level, value: level + size });
            level += size;
        }
        if knots.last().unwrap().t != 1.0 {
            knots.push(Knot::cont(1.0, level));
        }
        Track::new(knots)
    }

    pub fn knots(&self) -> &[Knot] {
        &self.knots
    }

    pub fn end_value(&self) -> f64 {
        self.knots[self.knots.len() - 1].value
    }

    /// Index of the last knot with `t <= s`, for `s` in `[0, 1]`.
    fn locate(&self, s: f64) -> usize {
        self.knots.partition_point(|k| k.t <= s).saturating_sub(1)
    }

    /// Value at `s`, with the flat extension outside `[0, 1]`.
    pub fn value(&self, s: f64) -> f64 {
        if s <= 0.0 {
            return 0.0;
        }
        if s >= 1.0 {
            return self.end_value();
        }
        let i = self.locate(s);
        let a = self.knots[i];
        if a.t == s {
            return a.value;
        }
        let b = self.knots[i + 1];
        a.value + (b.left - a.value) * (s - a.t) / (b.t - a.t)
    }

    /// Left limit at `s`, with the flat extension outside `[0, 1]`.
    pub fn left_limit(&self, s: f64) -> f64 {
        if s <= 0.0 {
            return 0.0;
        }
        if s > 1.0 {
            return self.end_value();
        }
        let i = self.locate(s);
        let a = self.knots[i];
        if a.t == s {
            return a.left;
        }
        let b = self.knots[i + 1];
        a.value + (b.left - a.value) * (s - a.t) / (b.t - a.t)
    }

    /// Sum of jump sizes at times in `(a, b]`.
    pub fn jump_sum(&self, a: f64, b: f64) -> f64 {
        self.knots.iter().filter(|k| k.t > a && k.t <= b).map(Knot::jump_size).sum()
    }

    pub fn has_jumps(&self) -> bool {
        self.knots.iter().any(|k| k.value > k.left)
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        self.knots.iter().map(|k| k.t)
    }

    /// Restriction of the track to `[0, theta]`, as knots ending at `theta`.
    pub(crate) fn prefix_knots(&self, theta: f64) -> Vec<Knot> {
        let mut out: Vec<Knot> = self.knots.iter().copied().filter(|k| k.t < theta).collect();
        out.push(Knot { t: theta, left: self.left_limit(theta), value: self.value(theta) });
        out
    }
}

/// A pair of tracks: a path in `E^2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HybridPath {
    pub x: Track,
    pub y: Track,
}

impl HybridPath {
    pub fn new(x: Track, y: Track) -> Self {
        HybridPath { x, y }
    }

    pub fn zero() -> Self {
        HybridPath { x: Track::zero(), y: Track::zero() }
    }

    /// `s -> (lambda s, mu s)`.
    pub fn linear(lambda: f64, mu: f64) -> Result<Self> {
        Ok(HybridPath { x: Track::linear(lambda)?, y: Track::linear(mu)? })
    }

    /// Right-continuous evaluation.
    pub fn eval(&self, s: f64) -> Result<LogPoint> {
        if !(0.0..=1.0).contains(&s) {
            return domain(format!("path time {s} outside [0, 1]"));
        }
        Ok(self.at(s))
    }

    pub(crate) fn at(&self, s: f64) -> LogPoint {
        LogPoint { x: self.x.value(s), y: self.y.value(s) }
    }

    pub(crate) fn left_at(&self, s: f64) -> LogPoint {
        LogPoint { x: self.x.left_limit(s), y: self.y.left_limit(s) }
    }

    pub fn track(&self, c: Component) -> &Track {
        match c {
            Component::X => &self.x,
            Component::Y => &self.y,
        }
    }

    /// Sorted union of knot times of both tracks.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut ts: Vec<f64> = self.x.times().chain(self.y.times()).collect();
        ts.sort_by(f64::total_cmp);
        ts.dedup();
        ts
    }

    /// Linear pieces `(a, b, start, velocity)` of the path on `[lo, hi]`, where
    /// `start` is the right value at `a` and both coordinates move linearly up to
    /// (but excluding) `b`.
    pub fn pieces(&self, lo: f64, hi: f64) -> Vec<Piece> {
        let mut ts: Vec<f64> = self.breakpoints().into_iter().filter(|&t| t > lo && t < hi).collect();
        ts.insert(0, lo);
        ts.push(hi);
        ts.windows(2)
            .filter(|w| w[1] > w[0])
            .map(|w| {
                let (a, b) = (w[0], w[1]);
                let start = self.at(a);
                let end = self.left_at(b);
                let h = b - a;
                Piece { a, b, start, vel: LogPoint { x: (end.x - start.x) / h, y: (end.y - start.y) / h } }
            })
            .collect()
    }

    pub fn has_jumps(&self) -> bool {
        self.x.has_jumps() || self.y.has_jumps()
    }

    /// Restriction to `[0, theta]` rescaled to a path on `[0, 1]` is not what
    /// callers want; this keeps the time axis and freezes the path after `theta`.
    pub fn frozen_after(&self, theta: f64) -> Result<Self> {
        let freeze = |tr: &Track| -> Result<Track> {
            let mut k = tr.prefix_knots(theta);
            if theta < 1.0 {
                let v = k.last().unwrap().value;
                k.push(Knot::cont(1.0, v));
            }
            Track::new(k)
        };
        Ok(HybridPath { x: freeze(&self.x)?, y: freeze(&self.y)? })
    }
}

/// A linear piece of a path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Piece {
    pub a: f64,
    pub b: f64,
    pub start: LogPoint,
    pub vel: LogPoint,
}

impl Piece {
    pub fn at(&self, s: f64) -> LogPoint {
        let h = s - self.a;
        LogPoint { x: self.start.x + self.vel.x * h, y: self.start.y + self.vel.y * h }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Component {
    X,
    Y,
}

/// Values at `j / n`, `j = 0..=n`, of a member of `PL_n^2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PLGrid {
    pub n: usize,
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
}

impl PLGrid {
    pub fn new(xs: Vec<f64>, ys: Vec<f64>) -> Result<Self> {
        if xs.len() != ys.len() || xs.len() < 2 {
            return domain("grid needs matching value lists of length n + 1 >= 2");
        }
        for v in [&xs, &ys] {
            if v[0] != 0.0 {
                return domain("grid path must start at 0");
            }
            if v.windows(2).any(|w| !(w[1] >= w[0]) || !w[1].is_finite()) {
                return domain("grid values must be finite and non-decreasing");
            }
        }
        Ok(PLGrid { n: xs.len() - 1, xs, ys })
    }

    /// Grid path with `f(j/n) = (lambda j/n, mu j/n)`.
    pub fn linear(n: usize, lambda: f64, mu: f64) -> Self {
        let xs = (0..=n).map(|j| lambda * j as f64 / n as f64).collect();
        let ys = (0..=n).map(|j| mu * j as f64 / n as f64).collect();
        PLGrid { n, xs, ys }
    }

    pub fn to_path(&self) -> HybridPath {
        HybridPath {
            x: Track::from_grid(&self.xs).expect("validated grid"),
            y: Track::from_grid(&self.ys).expect("validated grid"),
        }
    }

    pub fn point(&self, j: usize) -> LogPoint {
        LogPoint { x: self.xs[j], y: self.ys[j] }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eval_examples() {
        assert_eq!(HybridPath::zero().eval(0.7).unwrap(), LogPoint::ORIGIN);
        let diag = HybridPath::linear(1.0, 1.0).unwrap();
        assert_eq!(diag.eval(0.25).unwrap(), LogPoint { x: 0.25, y: 0.25 });
        let jump = HybridPath::new(Track::from_jumps(&[(0.5, 0.2)]).unwrap(), Track::zero());
        assert_eq!(jump.eval(0.5).unwrap().x, 0.2);
        assert_eq!(jump.left_at(0.5).x, 0.0);
        assert_eq!(jump.eval(0.49).unwrap().x, 0.0);
        assert!(jump.eval(1.2).is_err());
        assert!(jump.eval(-0.1).is_err());
    }

    #[test]
    fn singular_part_is_the_jump_list() {
        let pl = Track::linear(2.0).unwrap();
        assert_eq!(pl.jump_sum(0.0, 1.0), 0.0);
        let j = Track::from_jumps(&[(0.5, 0.2)]).unwrap();
        assert_eq!(j.jump_sum(0.0, 1.0), 0.2);
        assert_eq!(j.jump_sum(0.6, 1.0), 0.0);
        assert_eq!(j.jump_sum(0.0, 0.5), 0.2);
        assert_eq!(j.jump_sum(0.5, 1.0), 0.0);
    }

    #[test]
    fn rejects_invalid_tracks() {
        assert!(Track::from_points(&[(0.0, 0.0), (0.5, 1.0), (1.0, 0.5)]).is_err());
        assert!(Track::from_points(&[(0.0, 0.1), (1.0, 0.5)]).is_err());
        assert!(Track::from_points(&[(0.0, 0.0), (0.5, 0.1), (0.5, 0.2), (1.0, 0.5)]).is_err());
        assert!(PLGrid::new(vec![0.0, 1.0, 0.5], vec![0.0, 0.0, 0.0]).is_err());
    }

    #[test]
    fn pieces_cover_the_interval() {
        let p = HybridPath::new(
            Track::from_points(&[(0.0, 0.0), (0.3, 0.6), (1.0, 1.0)]).unwrap(),
            Track::from_jumps(&[(0.5, 0.4)]).unwrap(),
        );
        let pcs = p.pieces(0.0, 1.0);
        assert_eq!(pcs.len(), 3);
        assert_eq!(pcs[0].vel.x, 2.0);
        assert_eq!(pcs[2].start.y, 0.4);
        let sub = p.pieces(0.1, 0.4);
        assert_eq!(sub.len(), 2);
        assert!((sub[0].start.x - 0.2).abs() < 1e-15);
    }

    #[test]
    fn freezing_keeps_prefix() {
        let p = HybridPath::linear(1.0, 2.0).unwrap();
        let q = p.frozen_after(0.5).unwrap();
        assert_eq!(q.at(0.25), p.at(0.25));
        assert_eq!(q.at(0.9), LogPoint { x: 0.5, y: 1.0 });
    }
}
