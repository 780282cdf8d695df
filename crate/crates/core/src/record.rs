// SPDX-License-Identifier: Apache-2.0

//! Line-oriented serialization of results: one JSON object per line and CSV
//! rows for sweeps.
//!
//! Reals are written with 17 significant digits so they read back to the same
//! double. Infinities are written as `inf` (quoted in JSON).

use std::fmt::Write as _;

use crate::dimension::DimensionResult;
use crate::measure::{DensityRecord, MeasureBound};
use crate::packing::PackingEstimate;
use crate::verify::SuiteReport;

/// Header of [`csv_row`].
pub const CSV_HEADER: &str =
    "n,h,dmin_upper,dmin_lower,packing_lower,packing_upper,witness_center,witness_radius";

/// A real with 17 significant digits, or `inf`, `-inf`, `nan`.
pub fn real(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        }
    } else {
        format!("{x:.16e}")
    }
}

pub fn csv_row(e: &PackingEstimate) -> String {
    [
        e.n.to_string(),
        real(e.h),
        real(e.dmin_upper),
        real(e.dmin_lower),
        real(e.packing_lower),
        real(e.packing_upper),
        real(e.witness_center),
        real(e.witness_radius),
    ]
    .join(",")
}

/// Builder for a single-line JSON object with fields in insertion order.
#[derive(Debug, Default)]
pub struct JsonLine {
    buf: String,
}

impl JsonLine {
    pub fn new() -> Self {
        Self::default()
    }

    fn key(&mut self, key: &str) {
        self.buf.push(if self.buf.is_empty() { '{' } else { ',' });
        push_string(&mut self.buf, key);
        self.buf.push(':');
    }

    pub fn str(mut self, key: &str, value: &str) -> Self {
        self.key(key);
        push_string(&mut self.buf, value);
        self
    }

    pub fn int(mut self, key: &str, value: u64) -> Self {
        self.key(key);
        let _ = write!(self.buf, "{value}");
        self
    }

    pub fn bool(mut self, key: &str, value: bool) -> Self {
        self.key(key);
        self.buf.push_str(if value { "true" } else { "false" });
        self
    }

    pub fn real(mut self, key: &str, value: f64) -> Self {
        self.key(key);
        if value.is_finite() {
            self.buf.push_str(&real(value));
        } else {
            push_string(&mut self.buf, &real(value));
        }
        self
    }

    pub fn opt_real(self, key: &str, value: Option<f64>) -> Self {
        match value {
            Some(v) => self.real(key, v),
            None => self.null(key),
        }
    }

    pub fn null(mut self, key: &str) -> Self {
        self.key(key);
        self.buf.push_str("null");
        self
    }

    pub fn finish(mut self) -> String {
        if self.buf.is_empty() {
            self.buf.push('{');
        }
        self.buf.push('}');
        self.buf
    }
}

fn push_string(buf: &mut String, s: &str) {
    buf.push('"');
    for ch in s.chars() {
        match ch {
            '"' => buf.push_str("\\\""),
            '\\' => buf.push_str("\\\\"),
            '\n' => buf.push_str("\\n"),
            '\r' => buf.push_str("\\r"),
            '\t' => buf.push_str("\\t"),
            c if (c as u32) < 0x20 => {
                let _ = write!(buf, "\\u{:04x}", c as u32);
            }
            c => buf.push(c),
        }
    }
    buf.push('"');
}

/// Types with a one-line JSON form.
pub trait Record {
    fn json(&self) -> JsonLine;

    fn json_line(&self) -> String {
        self.json().finish()
    }
}

impl Record for PackingEstimate {
    fn json(&self) -> JsonLine {
        let line = JsonLine::new()
            .int("n", self.n as u64)
            .real("h", self.h)
            .real("dmin_upper", self.dmin_upper)
            .real("dmin_lower", self.dmin_lower)
            .real("packing_lower", self.packing_lower)
            .real("packing_upper", self.packing_upper)
            .real("witness_center", self.witness_center)
            .real("witness_radius", self.witness_radius)
            .real("witness_left", self.witness.left())
            .real("witness_right", self.witness.right());
        match &self.lower_bound {
            Some(b) => line
                .bool("lower_bound_partial", b.partial)
                .int("lower_bound_splits", b.splits as u64),
            None => line,
        }
    }
}

impl Record for SuiteReport {
    fn json(&self) -> JsonLine {
        JsonLine::new()
            .str("suite", &self.suite)
            .int("n", self.n as u64)
            .int("samples", self.samples as u64)
            .int("seed", self.seed)
            .int("violations", self.violations as u64)
            .real("worst_margin", self.worst_margin)
            .bool("pass", self.pass)
            .opt_real("statistic", self.statistic)
    }
}

/// Dimension result tagged with its `n`.
pub fn dimension_json(n: usize, d: &DimensionResult) -> JsonLine {
    JsonLine::new()
        .int("n", n as u64)
        .real("h", d.h)
        .real("residual", d.residual)
        .int("iterations", d.iterations as u64)
        .real("tolerance", d.tolerance)
}

pub fn measure_json(n: usize, h: f64, left: f64, right: f64, m: &MeasureBound) -> JsonLine {
    JsonLine::new()
        .int("n", n as u64)
        .real("h", h)
        .real("left", left)
        .real("right", right)
        .real("lower", m.lower)
        .real("upper", m.upper)
        .int("depth_used", m.depth_used as u64)
        .real("unresolved_mass", m.unresolved_mass)
}

pub fn density_json(n: usize, d: &DensityRecord) -> JsonLine {
    JsonLine::new()
        .int("n", n as u64)
        .real("h", d.h)
        .real("left", d.interval.left())
        .real("right", d.interval.right())
        .real("measure_lower", d.measure.lower)
        .real("measure_upper", d.measure.upper)
        .real("density_lower", d.density_lower)
        .real("density_upper", d.density_upper)
}
