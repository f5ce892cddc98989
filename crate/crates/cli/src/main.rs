use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand};
use eqo_cli::emit::{self, Format};
use eqo_cli::{check, presets, resolve_target, run_scenario, RunOutput, Scenario};

#[derive(Parser)]
#[command(
    name = "eqo",
    version,
    about = "Squeezing and decay of a mode coupled to a discretized bath"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run presets or scenario files and write their time series.
    Run {
        /// Preset names or paths to scenario JSON files.
        #[arg(required = true)]
        targets: Vec<String>,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        /// Output file (single target) or directory (several targets).
        /// Without it a single target is written to stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Print worst invariant residuals seen during each run to stderr.
        #[arg(long)]
        tolerance_report: bool,
    },
    /// List the built-in presets.
    ListPresets,
    /// Run the invariant suite on scenarios without emitting series.
    Check {
        #[arg(required = true)]
        targets: Vec<String>,
        /// Print every check, not only failures.
        #[arg(long)]
        tolerance_report: bool,
    },
}

fn main() -> ExitCode {
    match real_main() {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}

fn real_main() -> anyhow::Result<bool> {
    match Cli::parse().command {
        Command::ListPresets => {
            for name in presets::PRESET_NAMES {
                let s = presets::preset(name).expect("listed preset exists");
                println!("{name:<8} {}", s.description);
            }
            Ok(true)
        }
        Command::Check {
            targets,
            tolerance_report,
        } => {
            let mut ok = true;
            for target in &targets {
                let scenario = resolve_target(target)?;
                let results = check::run_checks(&scenario)?;
                let failed = results.iter().filter(|r| !r.passed()).count();
                for r in results.iter().filter(|r| tolerance_report || !r.passed()) {
                    println!("{}: {r}", scenario.name);
                }
                println!("{}: {} checks, {failed} failed", scenario.name, results.len());
                ok &= failed == 0;
            }
            Ok(ok)
        }
        Command::Run {
            targets,
            format,
            out,
            tolerance_report,
        } => run(&targets, format, out.as_deref(), tolerance_report),
    }
}

enum Destination {
    Stdout,
    File(PathBuf),
}

fn destination(scenario: &Scenario, format: Format, out: Option<&Path>, batch: bool) -> Destination {
    let file_name = || format!("{}.{}", scenario.name, format.extension());
    match out {
        Some(dir) if batch || dir.is_dir() => Destination::File(dir.join(file_name())),
        Some(file) => Destination::File(file.to_path_buf()),
        None => {
            let configured = match format {
                Format::Csv => &scenario.output.csv,
                Format::Json => &scenario.output.json,
            };
            configured.clone().map_or(Destination::Stdout, Destination::File)
        }
    }
}

fn run(targets: &[String], format: Format, out: Option<&Path>, report: bool) -> anyhow::Result<bool> {
    let scenarios = targets
        .iter()
        .map(|t| resolve_target(t))
        .collect::<Result<Vec<_>, _>>()?;
    let batch = scenarios.len() > 1;
    if batch {
        let Some(dir) = out else {
            bail!("running several targets needs --out DIR");
        };
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }

    let outcomes: Vec<anyhow::Result<RunOutput>> = std::thread::scope(|scope| {
        let handles: Vec<_> = scenarios
            .iter()
            .map(|s| {
                scope.spawn(move || -> anyhow::Result<RunOutput> {
                    let output = run_scenario(s)?;
                    if let Destination::File(path) = destination(s, format, out, batch) {
                        emit::emit(&output, format, &path)?;
                    }
                    Ok(output)
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("worker panicked"))
            .collect()
    });

    let mut ok = true;
    for (scenario, outcome) in scenarios.iter().zip(outcomes) {
        match outcome {
            Ok(output) => {
                if let Destination::Stdout = destination(scenario, format, out, batch) {
                    print!("{}", emit::render(&output, format));
                }
                if report {
                    let d = output.diagnostics;
                    eprintln!(
                        "{}: {} samples, max commutator residual {:.3e}, max symplectic residual {:.3e}, max conjugation residual {:.3e}",
                        scenario.name,
                        d.n_samples,
                        d.max_commutator_residual,
                        d.max_symplectic_residual,
                        d.max_conjugation_residual
                    );
                }
            }
            Err(err) => {
                eprintln!("error: {err:#}");
                ok = false;
            }
        }
    }
    Ok(ok)
}
