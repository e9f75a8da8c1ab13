//! `burden` command line: validate a bundle, run the deterministic model or
//! the Monte Carlo, and write report tables.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 invalid bundle or model error.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::bundle::{load_bundle, validate_bundle, ScenarioBundle, Severity, ValidationReport};
use crate::burden::assemble_report;
use crate::error::BundleError;
use crate::report::{self, Format};
use crate::uncertainty::simulate;

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_INVALID: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "burden", version, about = "Lung cancer disease and economic burden model")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check a bundle and list errors and warnings.
    Validate {
        bundle: PathBuf,
    },
    /// Run the deterministic model and write report tables.
    Run {
        bundle: PathBuf,
        #[command(flatten)]
        output: OutputArgs,
        /// Also write cohort survivors by year since diagnosis.
        #[arg(long)]
        dump_intermediates: bool,
    },
    /// Run the Monte Carlo and write interval tables.
    Simulate {
        bundle: PathBuf,
        #[command(flatten)]
        output: OutputArgs,
        /// Number of iterations; defaults to the manifest value.
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        iterations: Option<u64>,
        /// Base seed; defaults to the manifest value.
        #[arg(long)]
        seed: Option<u64>,
        /// Lower and upper percentiles, e.g. `2.5,97.5`.
        #[arg(long, value_parser = parse_percentiles)]
        percentiles: Option<(f64, f64)>,
    },
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
    /// Comma-separated output formats: csv, json, md.
    #[arg(long, value_delimiter = ',', default_value = "csv")]
    pub format: Vec<Format>,
}

fn parse_percentiles(s: &str) -> Result<(f64, f64), String> {
    let parts: Vec<&str> = s.split(',').collect();
    let [a, b] = parts.as_slice() else {
        return Err("expected two comma-separated percentiles".into());
    };
    let a: f64 = a.trim().parse().map_err(|e| format!("{a}: {e}"))?;
    let b: f64 = b.trim().parse().map_err(|e| format!("{b}: {e}"))?;
    if !(0.0 < a && a < b && b < 100.0) {
        return Err("percentiles must satisfy 0 < lower < upper < 100".into());
    }
    Ok((a, b))
}

fn print_report(report: &ValidationReport) {
    for issue in &report.issues {
        let level = match issue.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        eprintln!("{level} [{}] {}", issue.code, issue.message);
    }
}

fn bundle_exit_code(err: &BundleError) -> i32 {
    match err {
        BundleError::MissingDirectory(_) | BundleError::Io { .. } => EXIT_IO,
        _ => EXIT_INVALID,
    }
}

/// Loads and validates; prints issues. Returns the bundle only when it has no errors.
fn load_valid(path: &Path) -> Result<ScenarioBundle, i32> {
    let bundle = load_bundle(path).map_err(|e| {
        eprintln!("error: {e}");
        bundle_exit_code(&e)
    })?;
    let report = validate_bundle(&bundle);
    print_report(&report);
    if report.has_errors() {
        eprintln!("{}: {} validation error(s)", path.display(), report.errors().count());
        return Err(EXIT_INVALID);
    }
    Ok(bundle)
}

fn write_all(tables: &[report::Table], out: &OutputArgs, meta: Option<&serde_json::Map<String, serde_json::Value>>) -> i32 {
    for t in tables {
        if let Err(e) = report::write_table(t, &out.out, &out.format, meta) {
            eprintln!("error: writing {} to {}: {e}", t.name, out.out.display());
            return EXIT_IO;
        }
    }
    EXIT_OK
}

fn dedup(formats: &mut Vec<Format>) {
    let mut seen = Vec::new();
    formats.retain(|f| {
        let new = !seen.contains(f);
        seen.push(*f);
        new
    });
}

pub fn execute(cli: Cli) -> i32 {
    match cli.command {
        Command::Validate { bundle } => match load_valid(&bundle) {
            Ok(_) => {
                eprintln!("{}: ok", bundle.display());
                EXIT_OK
            }
            Err(code) => code,
        },
        Command::Run {
            bundle,
            mut output,
            dump_intermediates,
        } => {
            let b = match load_valid(&bundle) {
                Ok(b) => b,
                Err(code) => return code,
            };
            let result = match assemble_report(&b) {
                Ok(r) => r,
                Err(e) => {
                    eprintln!("error: {e}");
                    return EXIT_INVALID;
                }
            };
            dedup(&mut output.format);
            let mut tables = report::run_tables(&result, b.shares());
            if dump_intermediates {
                tables.push(report::prevalence_by_year_table(&result));
            }
            write_all(&tables, &output, None)
        }
        Command::Simulate {
            bundle,
            mut output,
            iterations,
            seed,
            percentiles,
        } => {
            let b = match load_valid(&bundle) {
                Ok(b) => b,
                Err(code) => return code,
            };
            let mc = &b.manifest.mc_defaults;
            let n = iterations.map_or(mc.iterations, |n| n as usize);
            let seed = seed.unwrap_or(mc.seed);
            let pct = percentiles.unwrap_or(mc.percentiles);
            let summary = match simulate(&b, n, seed, pct) {
                Ok(s) => s,
                Err(e) => {
                    eprintln!("error: {e}");
                    return EXIT_INVALID;
                }
            };
            dedup(&mut output.format);
            let meta = report::simulation_metadata(&summary);
            write_all(&[report::intervals_table(&summary)], &output, Some(&meta))
        }
    }
}

/// Parses `args` (program name first) and runs the command.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => execute(cli),
        Err(e) => {
            let _ = e.print();
            if e.use_stderr() {
                EXIT_INVALID
            } else {
                EXIT_OK
            }
        }
    }
}
