use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};

use idobs::config;
use idobs::runner::{self, OutputOptions};
use idobs_core::stability::{alpha_chain, routh_hurwitz};

/// Integral-derivative observer scenarios and stability tools.
#[derive(Parser, Debug)]
#[command(name = "idobs", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run the scenario described by a JSON config file.
    Run {
        config: PathBuf,
        /// Output directory.
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Keep every m-th row in the CSV output.
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
        decimate: u64,
        /// Also write SVG plots.
        #[arg(long)]
        plot: bool,
    },
    /// Validate a config file and print every problem found.
    CheckConfig { file: PathBuf },
    /// Print the exponent chain alpha_1..alpha_n.
    Alpha { n: usize, alpha_n: f64 },
    /// Print the Routh table and stability verdict, coefficients in descending powers.
    Routh {
        #[arg(required = true, allow_negative_numbers = true)]
        coeffs: Vec<f64>,
    },
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn load(path: &Path) -> anyhow::Result<Result<idobs_core::scenario::ScenarioSpec, config::ConfigErrors>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(config::load(&text))
}

fn report_errors(path: &Path, errs: &config::ConfigErrors) {
    eprintln!("{}: {} problem(s)", path.display(), errs.0.len());
    for e in &errs.0 {
        eprintln!("  - {e}");
    }
}

fn dispatch(cli: Cli) -> anyhow::Result<ExitCode> {
    match cli.command {
        Command::Run { config, out, decimate, plot } => {
            let spec = match load(&config)? {
                Ok(s) => s,
                Err(errs) => {
                    report_errors(&config, &errs);
                    return Ok(ExitCode::FAILURE);
                }
            };
            match runner::execute(&spec) {
                Ok(outcome) => {
                    if let idobs_core::scenario::ScenarioOutcome::Sweep(rep) = &outcome {
                        for m in rep.members.iter().filter(|m| m.outcome.is_err()) {
                            eprintln!("warning: sweep member epsilon={} failed", m.epsilon);
                        }
                    }
                    let opts = OutputOptions { dir: out, decimate: decimate as usize, plot };
                    let written = runner::write_outputs(&spec, &outcome, &opts).context("writing outputs")?;
                    for line in outcome.report_lines() {
                        println!("{line}");
                    }
                    for p in written {
                        eprintln!("wrote {}", p.display());
                    }
                    Ok(ExitCode::SUCCESS)
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    if let Some(p) = runner::write_partial(&spec, &e, &out).context("writing partial trace")? {
                        eprintln!("wrote {}", p.display());
                    }
                    Ok(ExitCode::FAILURE)
                }
            }
        }
        Command::CheckConfig { file } => match load(&file)? {
            Ok(spec) => {
                println!("{}: ok ({}, horizon {} s)", file.display(), spec.tag, spec.horizon);
                Ok(ExitCode::SUCCESS)
            }
            Err(errs) => {
                report_errors(&file, &errs);
                Ok(ExitCode::FAILURE)
            }
        },
        Command::Alpha { n, alpha_n } => {
            let chain = alpha_chain(n, alpha_n)?;
            for (i, a) in chain.as_slice().iter().enumerate() {
                println!("alpha_{} = {a}", i + 1);
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Routh { coeffs } => {
            let table = routh_hurwitz(&coeffs)?;
            for (k, row) in table.rows.iter().enumerate() {
                let cells: Vec<String> = row.iter().map(|v| format!("{v}")).collect();
                println!("s^{:<2} | {}", table.degree - k, cells.join("  "));
            }
            println!("verdict: {}", table.verdict);
            Ok(ExitCode::SUCCESS)
        }
    }
}
