//! Extended reals with explicit infinite sentinels.
//!
//! The rate functionals are genuinely infinite in places (the limit rate on the
//! axes, the cost of following a path that sits on an axis). Rather than let
//! `f64::INFINITY` leak through arithmetic, values are carried as an enum and
//! any `inf - inf` combination is reported as an error.

use std::cmp::Ordering;
use std::fmt;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExtReal {
    NegInf,
    Finite(f64),
    PosInf,
}

impl ExtReal {
    pub const ZERO: ExtReal = ExtReal::Finite(0.0);

    /// Wraps an `f64`, mapping IEEE infinities onto the sentinels. NaN is rejected.
    pub fn from_f64(v: f64) -> Result<Self> {
        if v.is_nan() {
            Err(Error::Undefined("NaN".into()))
        } else if v == f64::INFINITY {
            Ok(ExtReal::PosInf)
        } else if v == f64::NEG_INFINITY {
            Ok(ExtReal::NegInf)
        } else {
            Ok(ExtReal::Finite(v))
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, ExtReal::Finite(_))
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            ExtReal::Finite(v) => Some(v),
            _ => None,
        }
    }

    /// IEEE view, for reporting and CSV export only.
    pub fn to_f64(self) -> f64 {
        match self {
            ExtReal::NegInf => f64::NEG_INFINITY,
            ExtReal::Finite(v) => v,
            ExtReal::PosInf => f64::INFINITY,
        }
    }

    pub fn checked_add(self, other: ExtReal) -> Result<ExtReal> {
        use ExtReal::*;
        match (self, other) {
            (Finite(a), Finite(b)) => Ok(Finite(a + b)),
            (PosInf, NegInf) | (NegInf, PosInf) => Err(Error::Undefined("+inf + -inf".into())),
            (PosInf, _) | (_, PosInf) => Ok(PosInf),
            (NegInf, _) | (_, NegInf) => Ok(NegInf),
        }
    }

    pub fn checked_sub(self, other: ExtReal) -> Result<ExtReal> {
        self.checked_add(-other)
    }
}

impl std::ops::Neg for ExtReal {
    type Output = ExtReal;

    fn neg(self) -> ExtReal {
        match self {
            ExtReal::NegInf => ExtReal::PosInf,
            ExtReal::PosInf => ExtReal::NegInf,
            ExtReal::Finite(v) => ExtReal::Finite(-v),
        }
    }
}

impl From<f64> for ExtReal {
    /// Panics on NaN; use [`ExtReal::from_f64`] for untrusted input.
    fn from(v: f64) -> Self {
        ExtReal::from_f64(v).expect("NaN is not an extended real")
    }
}

impl PartialOrd for ExtReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        self.to_f64().partial_cmp(&other.to_f64())
    }
}

impl fmt::Display for ExtReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtReal::NegInf => write!(f, "-inf"),
            ExtReal::PosInf => write!(f, "inf"),
            ExtReal::Finite(v) => write!(f, "{v}"),
        }
    }
}
