// SPDX-License-Identifier: Apache-2.0

//! Closed subintervals of `[0, 1]` and the outward rounding helpers used by
//! every enclosure in the crate.

use crate::error::{Error, Result};

/// A closed interval `[left, right]` with `0 <= left <= right <= 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    left: f64,
    right: f64,
}

impl Interval {
    pub fn new(left: f64, right: f64) -> Result<Self> {
        if !(left.is_finite() && right.is_finite()) || left < 0.0 || right > 1.0 || left > right {
            return Err(Error::InvalidInterval { left, right });
        }
        Ok(Self { left, right })
    }

    /// Builds `[min(a, b), max(a, b)]` clipped to `[0, 1]`.
    pub fn clamped(a: f64, b: f64) -> Self {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        Self {
            left: lo.clamp(0.0, 1.0),
            right: hi.clamp(0.0, 1.0),
        }
    }

    /// `[center - radius, center + radius]` clipped to `[0, 1]`.
    pub fn centered(center: f64, radius: f64) -> Self {
        Self::clamped(center - radius, center + radius)
    }

    pub const fn unit() -> Self {
        Self {
            left: 0.0,
            right: 1.0,
        }
    }

    #[inline]
    pub fn left(&self) -> f64 {
        self.left
    }

    #[inline]
    pub fn right(&self) -> f64 {
        self.right
    }

    #[inline]
    pub fn length(&self) -> f64 {
        self.right - self.left
    }

    #[inline]
    pub fn midpoint(&self) -> f64 {
        0.5 * (self.left + self.right)
    }

    #[inline]
    pub fn contains(&self, x: f64) -> bool {
        self.left <= x && x <= self.right
    }

    pub fn contains_interval(&self, other: &Interval) -> bool {
        self.left <= other.left && other.right <= self.right
    }

    /// True when the interiors overlap.
    pub fn overlaps_interior(&self, other: &Interval) -> bool {
        self.left < other.right && other.left < self.right
    }

    pub fn is_degenerate(&self) -> bool {
        self.left == self.right
    }
}

impl std::fmt::Display for Interval {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "[{}, {}]", self.left, self.right)
    }
}

/// Scales a nonnegative value down by `ulps` relative machine epsilons.
#[inline]
pub(crate) fn round_down(x: f64, ulps: f64) -> f64 {
    if x <= 0.0 {
        return x;
    }
    (x * (1.0 - ulps * f64::EPSILON)).next_down()
}

/// Scales a nonnegative value up by `ulps` relative machine epsilons.
#[inline]
pub(crate) fn round_up(x: f64, ulps: f64) -> f64 {
    if x < 0.0 || x.is_infinite() {
        return x;
    }
    (x * (1.0 + ulps * f64::EPSILON)).next_up()
}
