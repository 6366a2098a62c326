//! Suite runner: reproducible, configured verification batteries over the
//! core library, JSON reports with a versioned schema, and CSV extraction of
//! per-case array data.

#![allow(clippy::needless_range_loop)]

pub mod config;
pub mod report;
pub mod suites;

pub use config::RunConfig;
pub use report::{CaseResult, Header, Report, Series, Summary};

use anyhow::{bail, Result};

pub const SUITE_NAMES: [&str; 6] = [
    "orbifold",
    "calibration",
    "metrics",
    "volume",
    "mirror",
    "realalg",
];

/// Execute a named suite (or `all`) and assemble the report.
pub fn run_suite(name: &str, cfg: &RunConfig) -> Result<Report> {
    let cases = match name {
        "orbifold" => suites::orbifold::run(cfg)?,
        "calibration" => suites::calibration::run(cfg)?,
        "metrics" => suites::metrics::run(cfg)?,
        "volume" => suites::volume::run(cfg)?,
        "mirror" => suites::mirror::run(cfg)?,
        "realalg" => suites::realalg::run(cfg)?,
        "all" => {
            if cfg.parallel_cases {
                // run the six suites concurrently; cases keep suite order
                let results: Vec<Result<Report>> = std::thread::scope(|scope| {
                    let handles: Vec<_> = SUITE_NAMES
                        .iter()
                        .map(|s| scope.spawn(move || run_suite(s, cfg)))
                        .collect();
                    handles
                        .into_iter()
                        .map(|h| h.join().expect("suite thread"))
                        .collect()
                });
                let mut all = Vec::new();
                for r in results {
                    all.extend(r?.cases);
                }
                all
            } else {
                let mut all = Vec::new();
                for s in SUITE_NAMES {
                    all.extend(run_suite(s, cfg)?.cases);
                }
                all
            }
        }
        other => bail!("unknown suite '{other}' (expected one of {SUITE_NAMES:?} or 'all')"),
    };
    Ok(Report::assemble(name, cfg, cases))
}

/// Extract a case's array data as CSV ('.' decimal, no locale dependence).
/// Scalar-only cases are refused with an explanatory error.
pub fn emit_plot_data(report: &Report, case_id: &str) -> Result<String> {
    let case = report
        .cases
        .iter()
        .find(|c| c.id == case_id)
        .ok_or_else(|| anyhow::anyhow!("no case '{case_id}' in this report"))?;
    let Some(series) = &case.series else {
        bail!(
            "case '{case_id}' carries only scalar data (measured = {}); nothing to plot",
            case.measured
        );
    };
    let mut out = String::new();
    out.push_str(&series.headers.join(","));
    out.push('\n');
    for row in &series.rows {
        let cells: Vec<String> = row.iter().map(|v| format!("{v:?}")).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    Ok(out)
}
