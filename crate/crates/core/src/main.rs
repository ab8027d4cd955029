use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use helstrom_lab::labcli::report::{
    render_baseline_csv, render_leaves_csv, summary_path, write_file,
};
use helstrom_lab::labcli::{
    optimize, parse_config, render_csv, render_scaling_csv, render_summary, request_from_config,
    run_sweep, scaling_study, sweep_points, ModeSelection, SweepConfig,
};
use helstrom_lab::{protocol, LabError, Result};

#[derive(Parser)]
#[command(
    name = "helstrom-lab",
    version,
    about = "Evolve-and-watch state discrimination lab"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// key=value configuration file
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override or add a config entry, e.g. --set k=1,5
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// CSV destination; the summary goes to <stem>.summary.txt beside it
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Accounting mode, overriding the config
    #[arg(long, global = true, value_parser = ["exact", "paper", "both"])]
    mode: Option<String>,
    /// Suppress the summary on stderr
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Helstrom baselines of the initial pair, exact and paper-convention
    Baseline,
    /// One protocol evaluation with its full outcome tree
    Run,
    /// Cartesian sweep over every grid in the config
    Sweep,
    /// Power-law fits of formula residuals against delta
    Scaling,
    /// Search k and/or dt for the lowest total cost
    Optimize,
}

fn load_config(cli: &Cli) -> Result<SweepConfig> {
    let mut text = match &cli.config {
        Some(path) => fs::read_to_string(path).map_err(|e| LabError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?,
        None => String::new(),
    };
    if !cli.set.is_empty() {
        let keys: Vec<&str> = cli
            .set
            .iter()
            .filter_map(|s| s.split_once('='))
            .map(|(k, _)| k.trim())
            .collect();
        text = text
            .lines()
            .map(|line| {
                let key = line
                    .split('#')
                    .next()
                    .unwrap_or("")
                    .split('=')
                    .next()
                    .unwrap_or("")
                    .trim();
                if keys.contains(&key) {
                    ""
                } else {
                    line
                }
            })
            .chain(cli.set.iter().map(String::as_str))
            .collect::<Vec<_>>()
            .join("\n");
    }
    let mut config = parse_config(&text)?;
    if let Some(mode) = &cli.mode {
        config.mode = ModeSelection::parse(mode).expect("clap restricts the values");
    }
    if let Some(out) = &cli.out {
        config.output = Some(out.clone());
    }
    Ok(config)
}

/// CSV to the output path (or stdout), summary beside it (or stderr).
fn emit(config: &SweepConfig, quiet: bool, csv: &str, summary: Option<&str>) -> Result<()> {
    match &config.output {
        Some(path) => {
            write_file(path, csv)?;
            if let Some(text) = summary {
                write_file(&summary_path(path), text)?;
            }
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(csv.as_bytes())
                .map_err(|e| io_error(Path::new("<stdout>"), e))?;
        }
    }
    if let (Some(text), false) = (summary, quiet) {
        eprint!("{text}");
    }
    Ok(())
}

fn io_error(path: &Path, e: std::io::Error) -> LabError {
    LabError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    }
}

fn execute(cli: &Cli) -> Result<()> {
    let config = load_config(cli)?;
    let digits = config.digits;
    match cli.command {
        Command::Baseline => {
            let rows = run_sweep(&SweepConfig {
                ks: vec![1],
                dt: helstrom_lab::labcli::config::DtGrid::Explicit(vec![1.0]),
                ..config.clone()
            });
            emit(
                &config,
                cli.quiet,
                &render_baseline_csv(&rows, digits),
                None,
            )
        }
        Command::Run => {
            let points = sweep_points(&config);
            let [point] = points.as_slice() else {
                return Err(LabError::Validation(format!(
                    "'run' evaluates a single point; the config describes {}",
                    points.len()
                )));
            };
            let params = point.params()?;
            let reports = config
                .mode
                .modes()
                .into_iter()
                .map(|mode| protocol::run(&params.clone().with_mode(mode)))
                .collect::<Result<Vec<_>>>()?;
            let rows = run_sweep(&config);
            emit(
                &config,
                cli.quiet,
                &render_leaves_csv(&reports, digits),
                Some(&render_summary(&rows)),
            )?;
            match reports.iter().find_map(|r| r.pruned.first()) {
                Some(branch) => Err(LabError::DegenerateBranch {
                    survive_prob: branch.survive_prob,
                    click_prob: 1.0 - branch.survive_prob,
                }),
                None => Ok(()),
            }
        }
        Command::Sweep => {
            let rows = run_sweep(&config);
            emit(
                &config,
                cli.quiet,
                &render_csv(&rows, digits),
                Some(&render_summary(&rows)),
            )
        }
        Command::Scaling => {
            let rows = scaling_study(&config)?;
            emit(&config, cli.quiet, &render_scaling_csv(&rows, digits), None)
        }
        Command::Optimize => {
            let mut rows = Vec::new();
            for mode in config.mode.modes() {
                rows.push(optimize(&request_from_config(&config, mode)?)?.row);
            }
            emit(
                &config,
                cli.quiet,
                &render_csv(&rows, digits),
                Some(&render_summary(&rows)),
            )
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_numerical() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
