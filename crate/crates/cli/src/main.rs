mod config;
mod suites;
mod svg;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context as _, Result};
use clap::{Parser, Subcommand};
use serde::Serialize;

use anisoperim_core::report::fmt_f64;

use config::{ExperimentConfig, PRESETS};
use suites::{run_suite, Context, SuiteOutput};

#[derive(Parser)]
#[command(name = "anisoperim", version, about = "Numerical checks for anisotropic perimeter symmetrization")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment from a TOML file or `preset:NAME`.
    Run {
        target: String,
        /// Output directory, overriding `[output] dir`.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Run the suites concurrently. Output is identical.
        #[arg(long)]
        parallel: bool,
    },
    /// List built-in experiments.
    Presets,
    /// Print the version.
    Version,
}

/// Exit status: 0 all checks pass, 1 some check fails, 2 bad input.
fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Presets => {
            for p in PRESETS {
                println!("{:<26} {}", p.name, p.description);
            }
            ExitCode::SUCCESS
        }
        Command::Version => {
            println!("anisoperim {}", env!("CARGO_PKG_VERSION"));
            ExitCode::SUCCESS
        }
        Command::Run { target, out, parallel } => {
            let config = match load(&target, out) {
                Ok(c) => c,
                Err(e) => {
                    eprintln!("error: {e:#}");
                    return ExitCode::from(2);
                }
            };
            match run(config, parallel) {
                Ok(true) => ExitCode::SUCCESS,
                Ok(false) => ExitCode::from(1),
                Err(e) => {
                    eprintln!("error: {e:#}");
                    ExitCode::from(2)
                }
            }
        }
    }
}

fn load(target: &str, out: Option<PathBuf>) -> Result<ExperimentConfig> {
    let mut c = match target.strip_prefix("preset:") {
        Some(name) => config::preset(name)?,
        None => ExperimentConfig::load(Path::new(target))?,
    };
    if let Some(dir) = out {
        c.output.dir = dir;
    }
    Ok(c)
}

#[derive(Serialize)]
struct SummaryRow<'a> {
    suite: &'a str,
    check: &'a str,
    value: String,
    tolerance: String,
    pass: bool,
}

fn run(config: ExperimentConfig, parallel: bool) -> Result<bool> {
    let dir = config.output.dir.clone();
    let selected = config.suites.run.clone();
    let ctx = Context::new(config)?;
    let outputs: Vec<SuiteOutput> = if parallel {
        std::thread::scope(|s| {
            let ctx = &ctx;
            let handles: Vec<_> = selected.iter().map(|&suite| s.spawn(move || run_suite(ctx, suite))).collect();
            handles.into_iter().map(|h| h.join().expect("suite thread panicked")).collect()
        })
    } else {
        selected.iter().map(|&suite| run_suite(&ctx, suite)).collect()
    };

    std::fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut summary = csv::Writer::from_path(dir.join("summary.csv"))?;
    let mut all_pass = true;
    for o in &outputs {
        write_suite(&dir, o)?;
        for c in &o.report.checks {
            summary.serialize(SummaryRow {
                suite: o.suite.name(),
                check: &c.name,
                value: fmt_f64(c.value),
                tolerance: fmt_f64(c.tolerance),
                pass: c.pass(),
            })?;
        }
        let failed = o.report.failures().count();
        all_pass &= failed == 0;
        if let Some(e) = &o.error {
            eprintln!("{}: {e}", o.suite.name());
        }
        println!(
            "{:<18} {:>3} checks  {}",
            o.suite.name(),
            o.report.len(),
            if failed == 0 { "PASS".to_string() } else { format!("FAIL ({failed})") }
        );
        for c in o.report.failures() {
            println!("    {} = {} (tolerance {})", c.name, c.value, c.tolerance);
        }
    }
    summary.flush()?;
    println!("results written to {}", dir.display());
    Ok(all_pass)
}

fn write_suite(dir: &Path, o: &SuiteOutput) -> Result<()> {
    let f = std::fs::File::create(dir.join(o.suite.file_name()))?;
    o.report.write_csv(f)?;
    for (sub, items) in [("tables", &o.tables), ("plots", &o.plots)] {
        if items.is_empty() {
            continue;
        }
        let d = dir.join(sub);
        std::fs::create_dir_all(&d)?;
        for a in items.iter() {
            std::fs::write(d.join(&a.name), &a.contents)?;
        }
    }
    Ok(())
}

