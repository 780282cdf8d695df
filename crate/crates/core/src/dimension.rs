// SPDX-License-Identifier: Apache-2.0

//! Root of the Moran equation `sum_k |slope_k|^h = 1`, the common Hausdorff
//! and packing dimension of the limit set.

use crate::error::{Error, Result};
use crate::ifs::IfsSystem;

/// Default bound on `|residual|`.
pub const DEFAULT_TOLERANCE: f64 = 1e-14;

const MAX_ITERATIONS: usize = 400;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DimensionResult {
    pub h: f64,
    /// Moran function at `h`.
    pub residual: f64,
    pub iterations: usize,
    pub tolerance: f64,
}

/// `sum_k |slope_k|^h - 1`.
pub fn moran_residual(system: &IfsSystem, h: f64) -> f64 {
    let logs: Vec<f64> = log_ratios(system);
    residual_and_slope(&logs, h).0
}

fn log_ratios(system: &IfsSystem) -> Vec<f64> {
    system.branches().iter().map(|b| b.ratio().ln()).collect()
}

// Compensated sums of the Moran function and its derivative.
fn residual_and_slope(logs: &[f64], h: f64) -> (f64, f64) {
    let mut sum = -1.0;
    let mut comp = 0.0;
    let mut slope = 0.0;
    for &l in logs {
        let term = (h * l).exp();
        let t = sum + term;
        if sum.abs() >= term.abs() {
            comp += (sum - t) + term;
        } else {
            comp += (term - t) + sum;
        }
        sum = t;
        slope += term * l;
    }
    (sum + comp, slope)
}

/// Safeguarded Newton iteration inside a bisection bracket on `[0, 1]`.
pub fn solve_dimension(system: &IfsSystem, tolerance: f64) -> Result<DimensionResult> {
    if !(tolerance > 0.0 && tolerance.is_finite()) {
        return Err(Error::InvalidTolerance(tolerance));
    }
    if system.n() == 1 {
        return Ok(DimensionResult {
            h: 0.0,
            residual: 0.0,
            iterations: 0,
            tolerance,
        });
    }
    let logs = log_ratios(system);
    // The Moran function is positive at 0 and negative at 1.
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    let mut x = 0.5;
    let mut best = (f64::INFINITY, x);
    for iteration in 1..=MAX_ITERATIONS {
        let (r, d) = residual_and_slope(&logs, x);
        if r.abs() < best.0 {
            best = (r.abs(), x);
        }
        if r.abs() <= tolerance {
            return Ok(DimensionResult {
                h: x,
                residual: r,
                iterations: iteration,
                tolerance,
            });
        }
        if r > 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let newton = x - r / d;
        let next = if d < 0.0 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if next == x || hi - lo <= f64::EPSILON * hi {
            break;
        }
        x = next;
    }
    let residual = residual_and_slope(&logs, best.1).0;
    Err(Error::NotConverged {
        residual,
        tolerance,
    })
}
