// SPDX-License-Identifier: Apache-2.0

//! Numerical checks of the density and measure inequalities known for `S_n`
//! at finite `n`. Each suite is deterministic in `(n, samples, seed)` and
//! compares the conservative end of an enclosure with the claimed bound.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dimension::{solve_dimension, DEFAULT_TOLERANCE};
use crate::error::{Error, Result};
use crate::ifs::{Affine, IfsSystem};
use crate::interval::Interval;
use crate::measure::{ConformalMeasure, DEFAULT_MAX_DEPTH, DEFAULT_TOL};
use crate::packing::{candidate_centers, i_n_density, i_n_interval};

/// Slack allowed below a claimed bound.
pub const SUITE_TOL: f64 = 1e-8;

pub const SUITES: [&str; 6] = [
    "zero_r",
    "uniform_left",
    "uniform_right",
    "lower_bound_interval",
    "regularity",
    "gap_structure",
];

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteReport {
    pub suite: String,
    pub n: usize,
    pub samples: usize,
    pub seed: u64,
    pub violations: usize,
    /// Smallest `checked - required` over all samples.
    pub worst_margin: f64,
    pub pass: bool,
    /// Suite-specific summary, such as the empirical regularity constant.
    pub statistic: Option<f64>,
}

struct Tally {
    samples: usize,
    violations: usize,
    worst: f64,
}

impl Tally {
    fn new() -> Self {
        Self {
            samples: 0,
            violations: 0,
            worst: f64::INFINITY,
        }
    }

    fn check(&mut self, margin: f64) {
        self.samples += 1;
        if !(margin >= 0.0) {
            self.violations += 1;
        }
        self.worst = self.worst.min(if margin.is_nan() {
            f64::NEG_INFINITY
        } else {
            margin
        });
    }

    fn report(self, suite: &str, n: usize, seed: u64, statistic: Option<f64>) -> SuiteReport {
        SuiteReport {
            suite: suite.to_string(),
            n,
            samples: self.samples,
            seed,
            violations: self.violations,
            worst_margin: self.worst,
            pass: self.violations == 0,
            statistic,
        }
    }
}

struct Context {
    system: IfsSystem,
    mu: ConformalMeasure,
}

impl Context {
    fn new(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidParameter(format!(
                "suites need n >= 2, got {n}"
            )));
        }
        let system = IfsSystem::gauss_linear(n)?;
        let h = solve_dimension(&system, DEFAULT_TOLERANCE)?.h;
        let mu = ConformalMeasure::new(&system, h)?;
        Ok(Self { system, mu })
    }

    fn h(&self) -> f64 {
        self.mu.h()
    }

    fn n(&self) -> usize {
        self.system.n()
    }

    // Measure with unresolved mass relative to `scale^h`.
    fn measure_lower(&self, interval: Interval, scale: f64) -> f64 {
        let tol = 1e-12 * scale.powf(self.h());
        self.mu
            .measure(interval, DEFAULT_MAX_DEPTH, tol.max(f64::MIN_POSITIVE))
            .lower
    }

    // Random point of the limit set whose first letter lies in `first`.
    fn random_point(&self, rng: &mut ChaCha8Rng, first: std::ops::RangeInclusive<usize>) -> f64 {
        let mut map = Affine::IDENTITY;
        map = map.then(self.system.branch(rng.gen_range(first)).unwrap());
        while map.a.abs() > 1e-18 {
            map = map.then(self.system.branch(rng.gen_range(1..=self.n())).unwrap());
        }
        map.apply(self.system.leftmost_point())
    }
}

/// `d([0, r]) >= [((n-k)/(n+1)) (k/(k+1))]^h` for `[0, r]` centered in `J_n`,
/// where `1/(k+1) < r <= 1/k`.
pub fn verify_zero_r(n: usize, samples: usize, seed: u64) -> Result<SuiteReport> {
    let ctx = Context::new(n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut tally = Tally::new();
    let nf = n as f64;
    for i in 0..samples.max(1) {
        let c = if i == 0 {
            ctx.system.leftmost_point()
        } else {
            ctx.random_point(&mut rng, 2..=n)
        };
        let r = 2.0 * c;
        let k = (1.0 / r).floor().max(1.0);
        // Guard the floor against r sitting exactly on 1/k.
        let k = if 1.0 / (k + 1.0) < r && r <= 1.0 / k {
            k
        } else {
            k - 1.0
        };
        let bound = (((nf - k) / (nf + 1.0)) * (k / (k + 1.0))).powf(ctx.h());
        let interval = Interval::clamped(0.0, r);
        let density = ctx.measure_lower(interval, r) / r.powf(ctx.h());
        tally.check(density - bound + SUITE_TOL);
    }
    Ok(tally.report("zero_r", n, seed, None))
}

/// `m([1/(n+1), d]) / (d - 1/(n+1))^h >= 1 - 2/(n+2)` for `d > 1/n`.
pub fn verify_uniform_left(n: usize, samples: usize, seed: u64) -> Result<SuiteReport> {
    let ctx = Context::new(n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut tally = Tally::new();
    let nf = n as f64;
    let a = 1.0 / (nf + 1.0);
    let bound = 1.0 - 2.0 / (nf + 2.0);
    for i in 0..samples.max(1) {
        let d = match i {
            0 => 1.0,
            _ if i % 2 == 1 => (1.0 / nf) * nf.powf(1.0 - rng.gen::<f64>()),
            _ => ctx.random_point(&mut rng, 1..=n - 1),
        };
        if !(d > 1.0 / nf) {
            continue;
        }
        let ratio = ctx.measure_lower(Interval::clamped(a, d), d - a) / (d - a).powf(ctx.h());
        tally.check(ratio - bound + SUITE_TOL);
    }
    Ok(tally.report("uniform_left", n, seed, None))
}

/// `m([d, 1]) / (1 - d)^h >= 1 - 2/(n+2)` for `d < 1/2`.
pub fn verify_uniform_right(n: usize, samples: usize, seed: u64) -> Result<SuiteReport> {
    let ctx = Context::new(n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut tally = Tally::new();
    let nf = n as f64;
    let bound = 1.0 - 2.0 / (nf + 2.0);
    for i in 0..samples.max(1) {
        let d = match i {
            0 => 0.0,
            _ if i % 2 == 1 => 0.5 * (1.0 - 10f64.powf(-6.0 * rng.gen::<f64>())),
            _ => ctx.random_point(&mut rng, 2..=n),
        };
        if !(d < 0.5) {
            continue;
        }
        let ratio = ctx.measure_lower(Interval::clamped(d, 1.0), 1.0 - d) / (1.0 - d).powf(ctx.h());
        tally.check(ratio - bound + SUITE_TOL);
    }
    Ok(tally.report("uniform_right", n, seed, None))
}

/// Density enclosure of `I_n` contains `(1/2)^h ((2n^2+2n-1)/(2n^2+n-1))^h`.
pub fn verify_lower_bound_interval(n: usize) -> Result<SuiteReport> {
    verify_lower_bound_interval_at(n, DEFAULT_MAX_DEPTH)
}

pub fn verify_lower_bound_interval_at(n: usize, max_depth: usize) -> Result<SuiteReport> {
    let ctx = Context::new(n)?;
    let exact = i_n_density(n, ctx.h());
    let record = ctx
        .mu
        .density(i_n_interval(n), max_depth.max(1), DEFAULT_TOL)?;
    let mut tally = Tally::new();
    let slack = 1e-9;
    tally.check((exact - record.density_lower).min(record.density_upper - exact) + slack);
    Ok(tally.report(
        "lower_bound_interval",
        n,
        0,
        Some(record.density_upper - record.density_lower),
    ))
}

/// `m(B(x, r)) / r^h` is finite and positive for centers `x` in `J_n` and
/// `r` in `[1e-6, 1/4]`. The statistic is the empirical constant
/// `max(ratio, 1/ratio)`.
pub fn verify_regularity(n: usize, samples: usize, seed: u64) -> Result<SuiteReport> {
    let ctx = Context::new(n)?;
    let generation = if n <= 10 { 3 } else { 2 };
    let centers = candidate_centers(&ctx.system, generation)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut tally = Tally::new();
    let mut constant: f64 = 1.0;
    let (ln_lo, ln_hi) = (1e-6f64.ln(), 0.25f64.ln());
    for _ in 0..samples.max(1) {
        let x = centers[rng.gen_range(0..centers.len())];
        let r = (ln_lo + (ln_hi - ln_lo) * rng.gen::<f64>()).exp();
        let interval = Interval::centered(x, r);
        let tol = 1e-6 * r.powf(ctx.h());
        let m = ctx.mu.measure(interval, DEFAULT_MAX_DEPTH, tol);
        let scale = r.powf(ctx.h());
        let (lo, hi) = (m.lower / scale, m.upper / scale);
        if lo > 0.0 && hi.is_finite() {
            constant = constant.max(hi).max(1.0 / lo);
        }
        tally.check(if lo.is_finite() && hi.is_finite() {
            lo
        } else {
            f64::NEG_INFINITY
        });
    }
    Ok(tally.report("regularity", n, seed, Some(constant)))
}

/// The gaps `(g_k(1/(n+1)), 1/k)` and `(1/k, g_{k-1}(g_1(1/(n+1))))` meet no
/// cylinder of a deep generation and carry no mass. Generation 3 is the
/// first at which the right-hand gaps are uncovered.
pub fn verify_gap_structure(n: usize) -> Result<SuiteReport> {
    let ctx = Context::new(n)?;
    let mut generation = 3;
    while (n as u64).pow(generation as u32 + 1) <= 100_000 {
        generation += 1;
    }
    let cylinders = ctx
        .system
        .enumerate_generation(generation, ctx.h(), u64::MAX)?;
    let edge = 1.0 / (n as f64 + 1.0);
    let g = |k: usize, x: f64| ctx.system.branch(k).unwrap().apply(x);
    let mut gaps = Vec::new();
    for k in 1..=n {
        let kf = k as f64;
        gaps.push((g(k, edge), 1.0 / kf));
        if k >= 2 {
            gaps.push((1.0 / kf, g(k - 1, g(1, edge))));
        }
    }
    let mut tally = Tally::new();
    for (lo, hi) in gaps {
        let pad = 4.0 * f64::EPSILON;
        let hits = cylinders
            .iter()
            .filter(|c| c.interval.right() > lo + pad && c.interval.left() < hi - pad)
            .count();
        let m = ctx
            .mu
            .measure(Interval::clamped(lo, hi), DEFAULT_MAX_DEPTH, DEFAULT_TOL);
        let margin = if hits == 0 {
            DEFAULT_TOL - m.upper
        } else {
            -(hits as f64)
        };
        tally.check(margin);
    }
    Ok(tally.report("gap_structure", n, 0, Some(generation as f64)))
}

/// Runs a suite by name.
pub fn run_suite(name: &str, n: usize, samples: usize, seed: u64) -> Result<SuiteReport> {
    match name {
        "zero_r" => verify_zero_r(n, samples, seed),
        "uniform_left" => verify_uniform_left(n, samples, seed),
        "uniform_right" => verify_uniform_right(n, samples, seed),
        "lower_bound_interval" => verify_lower_bound_interval(n),
        "regularity" => verify_regularity(n, samples, seed),
        "gap_structure" => verify_gap_structure(n),
        other => Err(Error::InvalidParameter(format!("unknown suite {other:?}"))),
    }
}
