// SPDX-License-Identifier: Apache-2.0

//! `gauss-packing` command-line tool.
//!
//! Exit codes: 0 success, 1 usage error, 2 computation failure (including an
//! exhausted lower-bound budget), 3 failed verification suite.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod args;
mod output;

use std::process::ExitCode;

use clap::Parser;
use gauss_packing::dimension::solve_dimension;
use gauss_packing::exec::Execution;
use gauss_packing::ifs::IfsSystem;
use gauss_packing::interval::Interval;
use gauss_packing::measure::ConformalMeasure;
use gauss_packing::packing::{
    sweep_values, LowerBoundOptions, PackingEstimate, PackingOptions, SamplingOptions, Search,
    PACKING_LIMIT,
};
use gauss_packing::record::{self, real, Record, CSV_HEADER};
use gauss_packing::verify;

use args::{Cli, Command, SearchArgs};
use output::{Output, Row};

enum Failure {
    Usage(String),
    Compute(String),
    Verify(usize),
}

impl From<gauss_packing::Error> for Failure {
    fn from(e: gauss_packing::Error) -> Self {
        Failure::Compute(e.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Compute(format!("write failed: {e}"))
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Compute(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Verify(failed)) => {
            eprintln!("{failed} suite(s) failed");
            ExitCode::from(3)
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    let execution = configure_threads(cli.threads)?;
    let mut out = Output::open(cli.output.as_deref(), cli.format, !cli.no_timestamp)?;
    match cli.command {
        Command::Dimension(a) => {
            if !(a.tol > 0.0) {
                return Err(Failure::Usage("--tol must be positive".into()));
            }
            let values = a.range.values().map_err(Failure::Usage)?;
            let mut rows = Vec::new();
            for n in values {
                let system = IfsSystem::gauss_linear(n)?;
                let d = solve_dimension(&system, a.tol)?;
                rows.push(Row {
                    csv: vec![
                        n.to_string(),
                        real(d.h),
                        real(d.residual),
                        d.iterations.to_string(),
                    ],
                    human: format!("n = {n:>5}  h = {:.15}  residual = {:.2e}", d.h, d.residual),
                    json: record::dimension_json(n, &d),
                });
            }
            out.table(&["n", "h", "residual", "iterations"], rows)?;
        }
        Command::Measure(a) | Command::Density(a) if a.n == 0 => {
            return Err(Failure::Usage("--n must be at least 1".into()));
        }
        Command::Measure(a) => {
            let (_, h, mu) = prepare(a.n)?;
            let interval = Interval::new(a.interval.0, a.interval.1)?;
            check_query(a.depth, a.tol)?;
            let m = mu.measure(interval, a.depth, a.tol);
            let row = Row {
                csv: vec![
                    a.n.to_string(),
                    real(h),
                    real(interval.left()),
                    real(interval.right()),
                    real(m.lower),
                    real(m.upper),
                    m.depth_used.to_string(),
                    real(m.unresolved_mass),
                ],
                human: format!(
                    "m_{}({interval}) in [{}, {}]  depth {}",
                    a.n,
                    real(m.lower),
                    real(m.upper),
                    m.depth_used
                ),
                json: record::measure_json(a.n, h, interval.left(), interval.right(), &m),
            };
            out.table(
                &[
                    "n",
                    "h",
                    "left",
                    "right",
                    "lower",
                    "upper",
                    "depth_used",
                    "unresolved_mass",
                ],
                vec![row],
            )?;
        }
        Command::Density(a) => {
            let (_, h, mu) = prepare(a.n)?;
            let interval = Interval::new(a.interval.0, a.interval.1)?;
            check_query(a.depth, a.tol)?;
            let d = mu.density(interval, a.depth, a.tol)?;
            let row = Row {
                csv: vec![
                    a.n.to_string(),
                    real(h),
                    real(interval.left()),
                    real(interval.right()),
                    real(d.measure.lower),
                    real(d.measure.upper),
                    real(d.density_lower),
                    real(d.density_upper),
                ],
                human: format!(
                    "d_{}({interval}) in [{}, {}]",
                    a.n,
                    real(d.density_lower),
                    real(d.density_upper)
                ),
                json: record::density_json(a.n, &d),
            };
            out.table(
                &[
                    "n",
                    "h",
                    "left",
                    "right",
                    "measure_lower",
                    "measure_upper",
                    "density_lower",
                    "density_upper",
                ],
                vec![row],
            )?;
        }
        Command::Dmin(a) => {
            let opts = packing_options(&a.search, execution)?;
            let estimates = sweep_values(&[a.n], &opts, None)?;
            write_estimates(&mut out, &estimates)?;
            check_budget(&estimates)?;
        }
        Command::Sweep(a) => {
            let values = a.range.values().map_err(Failure::Usage)?;
            let opts = packing_options(&a.search, execution)?;
            let progress = |e: &PackingEstimate| {
                eprintln!("n = {:>4}  packing_lower = {:.9}", e.n, e.packing_lower);
            };
            let estimates = sweep_values(&values, &opts, Some(&progress))?;
            write_estimates(&mut out, &estimates)?;
            check_budget(&estimates)?;
        }
        Command::Verify(a) => {
            let values = a.range.values().map_err(Failure::Usage)?;
            let suites: Vec<&str> = if a.suite == "all" {
                verify::SUITES.to_vec()
            } else if verify::SUITES.contains(&a.suite.as_str()) {
                vec![a.suite.as_str()]
            } else {
                return Err(Failure::Usage(format!(
                    "unknown suite {:?}; expected one of {} or all",
                    a.suite,
                    verify::SUITES.join(", ")
                )));
            };
            let mut rows = Vec::new();
            let mut failed = 0;
            for n in values {
                for suite in &suites {
                    let r = verify::run_suite(suite, n, a.samples, a.seed)?;
                    if !r.pass {
                        failed += 1;
                    }
                    rows.push(Row {
                        csv: vec![
                            r.suite.clone(),
                            r.n.to_string(),
                            r.samples.to_string(),
                            r.seed.to_string(),
                            r.violations.to_string(),
                            real(r.worst_margin),
                            r.pass.to_string(),
                            r.statistic.map(real).unwrap_or_default(),
                        ],
                        human: format!(
                            "{:<22} n = {:>4}  {}  violations = {}  worst margin = {:.3e}",
                            r.suite,
                            r.n,
                            if r.pass { "pass" } else { "FAIL" },
                            r.violations,
                            r.worst_margin
                        ),
                        json: r.json(),
                    });
                }
            }
            out.table(
                &[
                    "suite",
                    "n",
                    "samples",
                    "seed",
                    "violations",
                    "worst_margin",
                    "pass",
                    "statistic",
                ],
                rows,
            )?;
            if failed > 0 {
                return Err(Failure::Verify(failed));
            }
        }
    }
    out.flush()?;
    Ok(())
}

fn configure_threads(threads: usize) -> Result<Execution, Failure> {
    #[cfg(feature = "parallel")]
    if threads > 1 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| Failure::Compute(format!("thread pool: {e}")))?;
    }
    Ok(if threads == 1 {
        Execution::Sequential
    } else {
        Execution::Parallel
    })
}

fn prepare(n: usize) -> Result<(IfsSystem, f64, ConformalMeasure), Failure> {
    let system = IfsSystem::gauss_linear(n)?;
    let h = solve_dimension(&system, gauss_packing::dimension::DEFAULT_TOLERANCE)?.h;
    let mu = ConformalMeasure::new(&system, h)?;
    Ok((system, h, mu))
}

fn check_query(depth: usize, tol: f64) -> Result<(), Failure> {
    if depth == 0 {
        return Err(Failure::Usage("--depth must be at least 1".into()));
    }
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(Failure::Usage("--tol must be positive".into()));
    }
    Ok(())
}

fn packing_options(a: &SearchArgs, execution: Execution) -> Result<PackingOptions, Failure> {
    check_query(a.depth, a.tol)?;
    if a.radii < 2 {
        return Err(Failure::Usage("--radii must be at least 2".into()));
    }
    Ok(PackingOptions {
        sampling: SamplingOptions {
            generation: a.generation,
            radii_per_center: a.radii,
            max_depth: a.depth,
            rel_tol: a.tol,
            cap: a.cap,
            search: if a.exhaustive {
                Search::Exhaustive
            } else {
                Search::Pruned
            },
            execution,
        },
        lower_bound: a.budget.map(|budget| LowerBoundOptions {
            budget,
            max_depth: a.depth,
            ..LowerBoundOptions::default()
        }),
        ..PackingOptions::default()
    })
}

fn write_estimates(out: &mut Output, estimates: &[PackingEstimate]) -> Result<(), Failure> {
    let rows = estimates
        .iter()
        .map(|e| Row {
            csv: record::csv_row(e).split(',').map(str::to_string).collect(),
            human: format!(
                "n = {:>4}  h = {:.9}  dmin in [{:.9}, {:.9}]  packing in [{:.9}, {}]  limit = {}",
                e.n,
                e.h,
                e.dmin_lower,
                e.dmin_upper,
                e.packing_lower,
                if e.packing_upper.is_finite() {
                    format!("{:.9}", e.packing_upper)
                } else {
                    "inf".into()
                },
                PACKING_LIMIT
            ),
            json: e.json(),
        })
        .collect();
    let header: Vec<&str> = CSV_HEADER.split(',').collect();
    out.table(&header, rows)?;
    Ok(())
}

fn check_budget(estimates: &[PackingEstimate]) -> Result<(), Failure> {
    let partial: Vec<String> = estimates
        .iter()
        .filter(|e| e.lower_bound.is_some_and(|b| b.partial))
        .map(|e| e.n.to_string())
        .collect();
    if partial.is_empty() {
        Ok(())
    } else {
        Err(Failure::Compute(format!(
            "lower-bound budget exhausted for n = {}",
            partial.join(", ")
        )))
    }
}
