use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use ctqw_core::graph::{gen_binomial, gen_regular};
use ctqw_harness::report::{build_report, REPORT_TABLES};
use ctqw_harness::{run_experiment, ExperimentConfig, HarnessError, RunOptions};

#[derive(Parser)]
#[command(name = "ctqw", version, about = "Quantum-walk MAX-CUT experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Family {
    Binomial,
    Regular,
}

#[derive(Subcommand)]
enum Command {
    /// Print a random graph as JSON.
    Gen {
        #[arg(long, value_enum)]
        family: Family,
        #[arg(long)]
        n: usize,
        /// Edge probability (binomial).
        #[arg(long)]
        p: Option<f64>,
        /// Vertex degree (regular).
        #[arg(long)]
        degree: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Run the experiment described by a TOML config.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Output directory; overrides the config's `output`.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        threads: Option<usize>,
        #[arg(long)]
        quiet: bool,
    },
    /// Aggregate result CSVs under a directory into a summary table.
    Report {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, help = format!("one of: {}", REPORT_TABLES.join(", ")))]
        table: String,
        /// Write the table here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn fail(e: HarnessError) -> ExitCode {
    eprintln!("error: {e}");
    // bad input is the caller's problem; anything else is a run failure
    if e.is_validation() || matches!(e, HarnessError::Core(ctqw_core::Error::Parameter(_) | ctqw_core::Error::Validation(_))) {
        ExitCode::from(1)
    } else {
        ExitCode::from(2)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Gen { family, n, p, degree, seed } => {
            let g = match family {
                Family::Binomial => match p {
                    Some(p) => gen_binomial(n, p, seed),
                    None => return fail(HarnessError::Config("--p is required for binomial graphs".into())),
                },
                Family::Regular => match degree {
                    Some(d) => gen_regular(n, d, seed),
                    None => return fail(HarnessError::Config("--degree is required for regular graphs".into())),
                },
            };
            match g {
                Ok(g) => {
                    println!("{}", g.to_json());
                    ExitCode::SUCCESS
                }
                Err(e) => fail(e.into()),
            }
        }
        Command::Run { config, out, threads, quiet } => {
            let (cfg, text) = match ExperimentConfig::load(&config) {
                Ok(c) => c,
                Err(e) => return fail(e),
            };
            if threads == Some(0) {
                return fail(HarnessError::Config("--threads must be at least 1".into()));
            }
            let Some(out_dir) = out.or_else(|| cfg.output.clone()) else {
                return fail(HarnessError::Config("no output directory: set `output` in the config or pass --out".into()));
            };
            let opts = RunOptions { threads, progress: !quiet };
            match run_experiment(&cfg, &text, &out_dir, &opts) {
                Ok(summary) => {
                    if !quiet {
                        eprintln!(
                            "{} instances, {} failed, {} failed checks; results in {}",
                            summary.instances,
                            summary.failures.len(),
                            summary.failed_checks,
                            summary.out_dir.display()
                        );
                    }
                    for (id, err) in &summary.failures {
                        eprintln!("failed: {id}: {err}");
                    }
                    if summary.is_complete() {
                        ExitCode::SUCCESS
                    } else {
                        ExitCode::from(2)
                    }
                }
                Err(e) => fail(e),
            }
        }
        Command::Report { input, table, out } => {
            let t = match build_report(&input, &table) {
                Ok(t) => t,
                Err(e) => return fail(e),
            };
            let text = match t.to_csv() {
                Ok(s) => s,
                Err(e) => return fail(e),
            };
            match out {
                Some(path) => match std::fs::write(&path, text) {
                    Ok(()) => ExitCode::SUCCESS,
                    Err(e) => fail(HarnessError::io(&path, e)),
                },
                None => {
                    print!("{text}");
                    ExitCode::SUCCESS
                }
            }
        }
    }
}
