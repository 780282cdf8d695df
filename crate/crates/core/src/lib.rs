// SPDX-License-Identifier: Apache-2.0

//! Packing dimension, conformal measure and packing measure of the linear
//! Gauss iterated function systems `S_n`.
//!
//! `S_n` consists of the decreasing affine maps `g_k(x) = 1/k - x/(k(k+1))`,
//! `k = 1..=n`, which send `[0, 1]` onto `[1/(k+1), 1/k]`. Its limit set `J_n`
//! is a Cantor set whose dimension `h_n` solves the Moran equation. The
//! normalized packing measure `m_n` is the `h_n`-conformal measure on `J_n`,
//! and the packing measure of `J_n` equals the reciprocal of the smallest
//! density `m_n(F) / |F|^{h_n}` over closed intervals `F` centered in `J_n`.
//!
//! Every measure value is returned as an enclosure `[lower, upper]` that
//! contains the exact value.
//!
//! ```
//! use gauss_packing::{dimension, ifs::IfsSystem, interval::Interval, measure};
//!
//! let system = IfsSystem::gauss_linear(2).unwrap();
//! let dim = dimension::solve_dimension(&system, dimension::DEFAULT_TOLERANCE).unwrap();
//! let cylinder = Interval::new(1.0 / 3.0, 0.5).unwrap();
//! let record = measure::density(&system, dim.h, cylinder, 60, 1e-10).unwrap();
//! assert!(record.density_lower <= 1.0 && 1.0 <= record.density_upper);
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dimension;
pub mod error;
pub mod exec;
pub mod ifs;
pub mod interval;
pub mod measure;
pub mod packing;
pub mod record;
pub mod verify;

pub use error::{Error, Result};
