// SPDX-License-Identifier: Apache-2.0

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(
    name = "gauss-packing",
    version,
    about = "Dimension, conformal measure and packing measure bounds for the linear Gauss systems S_n"
)]
pub struct Cli {
    /// Write records here instead of stdout
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,

    #[arg(long, value_enum, default_value_t = Format::JsonLines, global = true)]
    pub format: Format,

    /// Omit the timestamp from structured output
    #[arg(long, global = true)]
    pub no_timestamp: bool,

    /// Worker threads (0 = one per core)
    #[arg(
        long,
        env = "GAUSS_PACKING_THREADS",
        default_value_t = 0,
        global = true
    )]
    pub threads: usize,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    JsonLines,
    Human,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Solve the Moran equation for h_n
    Dimension(DimensionArgs),
    /// Enclose the measure of an interval
    Measure(IntervalArgs),
    /// Enclose the density of an interval
    Density(IntervalArgs),
    /// Estimate d_min and the packing measure for one n
    Dmin(DminArgs),
    /// Packing measure estimates over a range of n
    Sweep(SweepArgs),
    /// Run the numerical verification suites
    Verify(VerifyArgs),
}

#[derive(Args, Debug)]
pub struct Range {
    #[arg(long, conflicts_with_all = ["n_min", "n_max", "n_values"])]
    pub n: Option<usize>,

    #[arg(long, requires = "n_max")]
    pub n_min: Option<usize>,

    #[arg(long, requires = "n_min")]
    pub n_max: Option<usize>,

    /// Comma-separated list of n
    #[arg(long, value_delimiter = ',', conflicts_with_all = ["n_min", "n_max"])]
    pub n_values: Option<Vec<usize>>,
}

impl Range {
    pub fn values(&self) -> Result<Vec<usize>, String> {
        if let Some(n) = self.n {
            return Ok(vec![n]);
        }
        if let Some(v) = &self.n_values {
            let mut v = v.clone();
            v.sort_unstable();
            v.dedup();
            return Ok(v);
        }
        match (self.n_min, self.n_max) {
            (Some(lo), Some(hi)) if lo <= hi => Ok((lo..=hi).collect()),
            (Some(lo), Some(hi)) => Err(format!("--n-min {lo} exceeds --n-max {hi}")),
            _ => Err("one of --n, --n-min/--n-max or --n-values is required".into()),
        }
    }
}

#[derive(Args, Debug)]
pub struct DimensionArgs {
    #[command(flatten)]
    pub range: Range,

    #[arg(long, default_value_t = gauss_packing::dimension::DEFAULT_TOLERANCE)]
    pub tol: f64,
}

#[derive(Args, Debug)]
pub struct IntervalArgs {
    #[arg(long)]
    pub n: usize,

    /// Closed interval as `left,right`
    #[arg(long, value_parser = parse_pair)]
    pub interval: (f64, f64),

    #[arg(long, default_value_t = gauss_packing::measure::DEFAULT_MAX_DEPTH)]
    pub depth: usize,

    /// Unresolved mass allowed
    #[arg(long, default_value_t = gauss_packing::measure::DEFAULT_TOL)]
    pub tol: f64,
}

#[derive(Args, Debug, Clone)]
pub struct SearchArgs {
    /// Longest word used for candidate centers
    #[arg(long, default_value_t = gauss_packing::packing::DEFAULT_GENERATION)]
    pub generation: usize,

    /// Radii per center
    #[arg(long, default_value_t = gauss_packing::packing::DEFAULT_RADII_PER_CENTER)]
    pub radii: usize,

    #[arg(long, default_value_t = gauss_packing::measure::DEFAULT_MAX_DEPTH)]
    pub depth: usize,

    /// Unresolved mass per candidate, relative to its length^h
    #[arg(long, default_value_t = gauss_packing::packing::DEFAULT_REL_TOL)]
    pub tol: f64,

    /// Limit on n^generation
    #[arg(long, default_value_t = gauss_packing::ifs::DEFAULT_ENUMERATION_CAP)]
    pub cap: u64,

    /// Box splits for the certified lower bound (omit to skip it)
    #[arg(long)]
    pub budget: Option<usize>,

    /// Evaluate every candidate instead of pruning
    #[arg(long)]
    pub exhaustive: bool,
}

#[derive(Args, Debug)]
pub struct DminArgs {
    #[arg(long)]
    pub n: usize,

    #[command(flatten)]
    pub search: SearchArgs,
}

#[derive(Args, Debug)]
pub struct SweepArgs {
    #[command(flatten)]
    pub range: Range,

    #[command(flatten)]
    pub search: SearchArgs,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub range: Range,

    /// Suite name, or `all`
    #[arg(long, default_value = "all")]
    pub suite: String,

    #[arg(long, default_value_t = 200)]
    pub samples: usize,

    #[arg(long, default_value_t = 1)]
    pub seed: u64,
}

fn parse_pair(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s
        .split_once(',')
        .ok_or_else(|| format!("expected `left,right`, got {s:?}"))?;
    let parse = |t: &str| {
        t.trim()
            .parse::<f64>()
            .map_err(|e| format!("bad number {t:?}: {e}"))
    };
    Ok((parse(a)?, parse(b)?))
}
