use std::cmp::Ordering;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Mul};

use serde::{Deserialize, Serialize};

/// A nonnegative real stored as its natural logarithm. Zero is `-inf`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LogWeight(f64);

impl LogWeight {
    pub const ZERO: Self = Self(f64::NEG_INFINITY);
    pub const ONE: Self = Self(0.0);

    pub fn from_log(log_value: f64) -> Self {
        Self(log_value)
    }

    pub fn from_value(value: f64) -> Self {
        debug_assert!(value >= 0.0, "LogWeight of negative value {value}");
        Self(value.ln())
    }

    pub fn ln(self) -> f64 {
        self.0
    }

    pub fn value(self) -> f64 {
        self.0.exp()
    }

    pub fn is_zero(self) -> bool {
        self.0 == f64::NEG_INFINITY
    }

    /// Relative difference `|a - b| / max(a, b)`, computed without leaving log space.
    pub fn rel_diff(self, other: Self) -> f64 {
        let (hi, lo) = if self.0 >= other.0 {
            (self.0, other.0)
        } else {
            (other.0, self.0)
        };
        if hi == f64::NEG_INFINITY {
            return 0.0;
        }
        -(lo - hi).exp_m1()
    }
}

#[inline]
pub(crate) fn log_add(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if lo == f64::NEG_INFINITY {
        return hi;
    }
    hi + (lo - hi).exp().ln_1p()
}

impl Add for LogWeight {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self(log_add(self.0, rhs.0))
    }
}

impl AddAssign for LogWeight {
    fn add_assign(&mut self, rhs: Self) {
        self.0 = log_add(self.0, rhs.0);
    }
}

// multiplying values adds their logarithms
#[allow(clippy::suspicious_arithmetic_impl)]
impl Mul for LogWeight {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        Self(self.0 + rhs.0)
    }
}

impl Sum for LogWeight {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        // max-shifted accumulation keeps long sums accurate
        let items: Vec<f64> = iter.map(|w| w.0).collect();
        let max = items.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if max == f64::NEG_INFINITY {
            return Self::ZERO;
        }
        let s: f64 = items.iter().map(|&x| (x - max).exp()).sum();
        Self(max + s.ln())
    }
}

impl PartialOrd for LogWeight {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        self.0.partial_cmp(&other.0)
    }
}
