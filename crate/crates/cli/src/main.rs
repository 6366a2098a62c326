//! Command-line front end: run a verification suite with a reproducible
//! configuration, write the JSON report, and extract per-case CSV data.
//!
//! Exit codes: 0 all cases passed, 1 some case failed, 2 usage or
//! configuration error.

use calfib_cli::{emit_plot_data, run_suite, RunConfig};
use clap::Parser;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser, Debug)]
#[command(
    name = "calfib",
    about = "Verification suites for calibrated torus fibrations",
    version
)]
struct Args {
    /// Suite to run: orbifold | calibration | metrics | volume | mirror |
    /// realalg | all
    #[arg(long)]
    suite: Option<String>,

    /// Flat key=value configuration file
    #[arg(long)]
    config: Option<PathBuf>,

    /// Random seed (overrides the config file)
    #[arg(long)]
    seed: Option<u64>,

    /// Output directory for JSON reports
    #[arg(long)]
    out: Option<PathBuf>,

    /// Resolution override, repeatable: --resolution name=value
    #[arg(long = "resolution", value_name = "KEY=VALUE")]
    resolution: Vec<String>,

    /// Tolerance override, repeatable: --tolerance name=value
    #[arg(long = "tolerance", value_name = "KEY=VALUE")]
    tolerance: Vec<String>,

    /// Extract a case's array data as CSV from an existing report
    #[arg(long, value_name = "REPORT.json", requires = "case")]
    csv_from_report: Option<PathBuf>,

    /// Case id for --csv-from-report
    #[arg(long)]
    case: Option<String>,

    /// Where to write the CSV (stdout if omitted)
    #[arg(long)]
    csv_out: Option<PathBuf>,
}

fn parse_kv(pairs: &[String], prefix: &str, cfg: &mut RunConfig) -> anyhow::Result<()> {
    for pair in pairs {
        let (k, v) = pair
            .split_once('=')
            .ok_or_else(|| anyhow::anyhow!("expected KEY=VALUE, got '{pair}'"))?;
        cfg.apply_pair(&format!("{prefix}.{k}"), v)?;
    }
    Ok(())
}

fn real_main() -> anyhow::Result<i32> {
    let args = Args::parse();

    // CSV extraction mode
    if let Some(report_path) = &args.csv_from_report {
        let case = args.case.as_deref().expect("clap enforces --case");
        let text = std::fs::read_to_string(report_path)?;
        let report: calfib_cli::Report = serde_json::from_str(&text)?;
        let csv = match emit_plot_data(&report, case) {
            Ok(csv) => csv,
            Err(e) => {
                eprintln!("refused: {e}");
                return Ok(2);
            }
        };
        match &args.csv_out {
            Some(path) => std::fs::write(path, csv)?,
            None => print!("{csv}"),
        }
        return Ok(0);
    }

    let Some(suite) = args.suite.as_deref() else {
        eprintln!("usage: calfib --suite <name> [--config PATH] [--seed N] [--out DIR] ...");
        return Ok(2);
    };

    let mut cfg = match &args.config {
        Some(path) => RunConfig::from_file(path)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &args.out {
        cfg.out_dir = out.clone();
    }
    parse_kv(&args.resolution, "resolution", &mut cfg)?;
    parse_kv(&args.tolerance, "tolerance", &mut cfg)?;

    let report = run_suite(suite, &cfg)?;
    for case in &report.cases {
        let status = if case.pass { "PASS" } else { "FAIL" };
        println!("[{status}] {}/{}: {}", suite, case.id, case.claim);
    }
    println!(
        "{}: {} passed, {} failed of {}",
        suite, report.summary.passed, report.summary.failed, report.summary.total
    );

    std::fs::create_dir_all(&cfg.out_dir)?;
    let path = cfg.out_dir.join(format!("report-{suite}.json"));
    std::fs::write(&path, report.to_json())?;
    println!("report written to {}", path.display());

    Ok(if report.all_passed() { 0 } else { 1 })
}

fn main() -> ExitCode {
    match real_main() {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
