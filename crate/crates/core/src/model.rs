//! The splitting rule, in rectangle coordinates and in log coordinates, and
//! its large-scale limit.
//!
//! A rectangle of base `b` and height `h` lives at the log point
//! `(x, y) = (-ln b, -ln h)`. Everything the simulator and the functionals need
//! is a pure function of that point.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::ext::ExtReal;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub base: f64,
    pub height: f64,
}

impl Rect {
    pub fn new(base: f64, height: f64) -> Result<Self> {
        if !(base > 0.0 && height > 0.0) || !base.is_finite() || !height.is_finite() {
            return domain(format!("rectangle sides must be positive, got {base} x {height}"));
        }
        Ok(Rect { base, height })
    }

    pub fn unit() -> Self {
        Rect { base: 1.0, height: 1.0 }
    }

    pub fn to_log_point(self) -> LogPoint {
        LogPoint { x: -self.base.ln(), y: -self.height.ln() }
    }

    pub fn area(self) -> f64 {
        self.base * self.height
    }
}

/// A position `(x, y) = (-ln base, -ln height)`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct LogPoint {
    pub x: f64,
    pub y: f64,
}

impl LogPoint {
    pub const ORIGIN: LogPoint = LogPoint { x: 0.0, y: 0.0 };

    /// Checked constructor: both coordinates must be finite and nonnegative.
    pub fn new(x: f64, y: f64) -> Result<Self> {
        if !(x >= 0.0 && y >= 0.0) || !x.is_finite() || !y.is_finite() {
            return domain(format!("log point must lie in the closed quadrant, got ({x}, {y})"));
        }
        Ok(LogPoint { x, y })
    }

    pub fn scale(self, k: f64) -> LogPoint {
        LogPoint { x: self.x * k, y: self.y * k }
    }

    /// Max-coordinate distance.
    pub fn dist(self, other: LogPoint) -> f64 {
        (self.x - other.x).abs().max((self.y - other.y).abs())
    }
}

fn check_rect(rect: Rect) -> Result<(f64, f64)> {
    let lb = 1.0 - rect.base.ln();
    let lh = 1.0 - rect.height.ln();
    if !(rect.base > 0.0 && rect.height > 0.0) {
        return domain(format!("rectangle sides must be positive, got {} x {}", rect.base, rect.height));
    }
    if !(lb > 0.0 && lh > 0.0) {
        return domain("rectangle sides must be below e for 1 - ln(side) to stay positive");
    }
    Ok((lb, lh))
}

/// `r(b, h)`: the rate at which a `b x h` rectangle splits.
pub fn split_rate_rect(rect: Rect) -> Result<f64> {
    let (lb, lh) = check_rect(rect)?;
    Ok((lb / lh).max(lh / lb))
}

/// `p(b, h)`: probability that a `b x h` rectangle splits vertically (cuts its base).
pub fn split_prob_rect(rect: Rect) -> Result<f64> {
    let (lb, lh) = check_rect(rect)?;
    if rect.base <= rect.height {
        Ok(lh / (2.0 * lb))
    } else {
        Ok(1.0 - lb / (2.0 * lh))
    }
}

/// A splitting rule in log coordinates.
///
/// `dir_prob` is the probability that a split moves the X coordinate (a
/// vertical cut). Only [`AspectRule`] ships; the trait exists so the simulator
/// does not hard-code the rule.
pub trait SplitRule: Sync {
    /// Branching rate. Caller guarantees a valid point.
    fn rate(&self, z: LogPoint) -> f64;
    fn dir_prob(&self, z: LogPoint) -> f64;

    /// `(R_X, R_Y) = (R P, R (1 - P))`.
    fn component_rates(&self, z: LogPoint) -> (f64, f64) {
        let r = self.rate(z);
        let p = self.dir_prob(z);
        (r * p, r * (1.0 - p))
    }
}

/// The rule `R = (x+1)/(y+1) v (y+1)/(x+1)` with the matching direction law.
#[derive(Debug, Clone, Copy, Default)]
pub struct AspectRule;

impl SplitRule for AspectRule {
    #[inline]
    fn rate(&self, z: LogPoint) -> f64 {
        let a = z.x + 1.0;
        let b = z.y + 1.0;
        (a / b).max(b / a)
    }

    #[inline]
    fn dir_prob(&self, z: LogPoint) -> f64 {
        let a = z.x + 1.0;
        let b = z.y + 1.0;
        if z.x >= z.y {
            b / (2.0 * a)
        } else {
            1.0 - a / (2.0 * b)
        }
    }

    /// Closed form: the coordinate that is "ahead" moves at rate exactly 1/2.
    #[inline]
    fn component_rates(&self, z: LogPoint) -> (f64, f64) {
        let r = self.rate(z);
        if z.x >= z.y {
            (0.5, r - 0.5)
        } else {
            (r - 0.5, 0.5)
        }
    }
}

pub fn branch_rate(z: LogPoint) -> Result<f64> {
    let z = LogPoint::new(z.x, z.y)?;
    Ok(AspectRule.rate(z))
}

pub fn dir_prob(z: LogPoint) -> Result<f64> {
    let z = LogPoint::new(z.x, z.y)?;
    Ok(AspectRule.dir_prob(z))
}

pub fn component_rates(z: LogPoint) -> Result<(f64, f64)> {
    let z = LogPoint::new(z.x, z.y)?;
    Ok(AspectRule.component_rates(z))
}

/// `R_X(x, y)` without validation; `x, y >= 0` assumed.
#[inline]
pub(crate) fn rate_x(x: f64, y: f64) -> f64 {
    ((y + 1.0) / (x + 1.0)).max(1.0) - 0.5
}

#[inline]
pub(crate) fn rate_y(x: f64, y: f64) -> f64 {
    ((x + 1.0) / (y + 1.0)).max(1.0) - 0.5
}

// Limit kernel. Internally these return IEEE infinity on the axes; the public
// wrappers convert to `ExtReal`.

#[inline]
pub(crate) fn limit_rate_raw(x: f64, y: f64) -> f64 {
    if x == 0.0 && y == 0.0 {
        1.0
    } else if x == 0.0 || y == 0.0 {
        f64::INFINITY
    } else {
        (x / y).max(y / x)
    }
}

#[inline]
pub(crate) fn limit_rate_x_raw(x: f64, y: f64) -> f64 {
    if y == 0.0 {
        0.5
    } else if x == 0.0 {
        f64::INFINITY
    } else {
        (y / x).max(1.0) - 0.5
    }
}

#[inline]
pub(crate) fn limit_rate_y_raw(x: f64, y: f64) -> f64 {
    limit_rate_x_raw(y, x)
}

/// `R*(x, y)`, infinite on the open axes.
pub fn limit_rate(z: LogPoint) -> Result<ExtReal> {
    let z = LogPoint::new(z.x, z.y)?;
    ExtReal::from_f64(limit_rate_raw(z.x, z.y))
}

/// `P*(x, y)`.
pub fn limit_dir_prob(z: LogPoint) -> Result<f64> {
    let z = LogPoint::new(z.x, z.y)?;
    Ok(if z.x == 0.0 && z.y == 0.0 {
        0.5
    } else if z.x >= z.y {
        z.y / (2.0 * z.x)
    } else {
        1.0 - z.x / (2.0 * z.y)
    })
}

/// `(R*_X, R*_Y)` with the boundary conventions `R*_X(., 0) = R*_Y(0, .) = 1/2`.
pub fn limit_component_rates(z: LogPoint) -> Result<(ExtReal, ExtReal)> {
    let z = LogPoint::new(z.x, z.y)?;
    Ok((ExtReal::from_f64(limit_rate_x_raw(z.x, z.y))?, ExtReal::from_f64(limit_rate_y_raw(z.x, z.y))?))
}
