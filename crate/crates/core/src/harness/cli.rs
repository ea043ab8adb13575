//! `panel-svd` command line.
//!
//! Exit codes: 0 success, 1 invalid input (usage, config, validation,
//! infeasible design), 2 runtime failure (I/O, numerical non-convergence, or
//! every sweep cell failed).

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use super::config::{preset, ExperimentConfig, PRESET_NAMES};
use super::fixtures::write_fixtures;
use super::slope::fit_metric_slope;
use super::sweep::{run_sweep_to_path, SweepOptions, TrialTable, TrialWriter};
use super::trial::{metric_columns, run_trial};
use super::validate::feasibility_report;
use crate::error::Error;

/// Default output directory when `--out` is not given.
pub const OUT_DIR_ENV: &str = "PANEL_SVD_OUT_DIR";

pub const DEFAULT_SLOPE_METRIC: &str = "m_two_infty_normalized";

#[derive(Debug, Parser)]
#[command(name = "panel-svd", version, about = "Row-scaled truncated-SVD effect estimation: simulation harness")]
struct Cli {
    /// Worker threads for sweeps (default: all hardware threads).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Override the config's base seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output file (run, trial) or directory (fixtures).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct ConfigSource {
    /// Experiment config (TOML).
    config: Option<PathBuf>,
    /// Use a built-in preset instead of a file.
    #[arg(long, conflicts_with = "config")]
    preset: Option<String>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the full (n, trial) sweep and write the trial CSV.
    Run {
        #[command(flatten)]
        source: ConfigSource,
        /// Override the number of replications per n.
        #[arg(long)]
        replications: Option<usize>,
    },
    /// Run one cell and print its CSV (schema line, header, one row).
    Trial {
        #[command(flatten)]
        source: ConfigSource,
        /// Units; defaults to the first configured n.
        #[arg(long)]
        n: Option<usize>,
        /// Trial index.
        #[arg(long, default_value_t = 0)]
        trial: usize,
        #[arg(long)]
        aspect_ratio: Option<f64>,
        #[arg(long)]
        rank: Option<usize>,
        #[arg(long)]
        k_a: Option<f64>,
        #[arg(long)]
        k_e: Option<f64>,
        #[arg(long)]
        rank_cap: Option<usize>,
    },
    /// Fit the log-log rate of per-n medians in a trial CSV.
    Slope {
        csv: PathBuf,
        #[arg(long, default_value = DEFAULT_SLOPE_METRIC)]
        metric: String,
    },
    /// Report design parameters, thresholds, SNR floor and incoherence.
    Validate {
        #[command(flatten)]
        source: ConfigSource,
    },
    /// Write oracle reference matrices and a sample instance.
    Fixtures,
    /// Print a built-in preset as TOML, or list presets.
    Preset { name: Option<String> },
}

enum Failure {
    Input(String),
    Runtime(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Io(_) | Error::Csv(_) | Error::Numerical(_) => Failure::Runtime(e.to_string()),
            _ => Failure::Input(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Runtime(e.to_string())
    }
}

/// Entry point used by the binary; returns the process exit code.
pub fn cli_main<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{text}");
                    0
                }
                _ => {
                    let _ = write!(err, "{text}");
                    1
                }
            };
        }
    };
    match dispatch(cli, out, err) {
        Ok(()) => 0,
        Err(Failure::Input(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            1
        }
        Err(Failure::Runtime(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            2
        }
    }
}

fn load(source: &ConfigSource, seed: Option<u64>) -> Result<ExperimentConfig, Failure> {
    let mut config = match (&source.config, &source.preset) {
        (Some(path), None) => ExperimentConfig::from_file(path)?,
        (None, Some(name)) => preset(name).ok_or_else(|| {
            Failure::Input(format!("unknown preset `{name}`; known: {}", PRESET_NAMES.join(", ")))
        })?,
        _ => return Err(Failure::Input("give a config file or --preset NAME".into())),
    };
    if let Some(seed) = seed {
        config.base_seed = seed;
    }
    Ok(config)
}

fn sweep_path(config: &ExperimentConfig, out: Option<&Path>) -> PathBuf {
    if let Some(p) = out {
        return p.to_path_buf();
    }
    let dir = std::env::var_os(OUT_DIR_ENV).map(PathBuf::from).unwrap_or_else(|| PathBuf::from("results"));
    match &config.output.path {
        Some(p) if p.is_absolute() => p.clone(),
        Some(p) => dir.join(p),
        None => dir.join(format!("{}.csv", config.name)),
    }
}

fn dispatch(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), Failure> {
    let options = SweepOptions { threads: cli.threads };
    match cli.command {
        Command::Run { source, replications } => {
            let mut config = load(&source, cli.seed)?;
            if let Some(r) = replications {
                config.replications = r;
            }
            config.validate()?;
            let path = sweep_path(&config, cli.out.as_deref());
            let table = run_sweep_to_path(&config, &path, options)?;
            let failures = table.failures();
            writeln!(out, "wrote {} rows to {}", table.records.len(), path.display())?;
            if failures > 0 {
                writeln!(err, "warning: {failures} of {} cells failed; see the error column", table.records.len())?;
            }
            if failures == table.records.len() {
                return Err(Failure::Runtime("every cell failed".into()));
            }
            if config.dimensions.n.len() >= 2 {
                if let Ok((medians, fit)) = fit_metric_slope(&table.records, DEFAULT_SLOPE_METRIC) {
                    for (n, v) in medians {
                        writeln!(out, "n = {n:>6}  median {DEFAULT_SLOPE_METRIC} = {v:.6}")?;
                    }
                    writeln!(out, "slope = {:.4}  (r^2 = {:.4})", fit.slope, fit.r_squared)?;
                }
            }
        }
        Command::Trial {
            source,
            n,
            trial,
            aspect_ratio,
            rank,
            k_a,
            k_e,
            rank_cap,
        } => {
            let source = if source.config.is_none() && source.preset.is_none() {
                ConfigSource {
                    config: None,
                    preset: Some("row-homogeneous".into()),
                }
            } else {
                source
            };
            let mut config = load(&source, cli.seed)?;
            let n = n.unwrap_or(config.dimensions.n[0]);
            config.dimensions.n = vec![n];
            if let Some(v) = aspect_ratio {
                config.dimensions.aspect_ratio = v;
            }
            if let Some(v) = rank {
                config.signal.rank = v;
            }
            if let Some(v) = k_a {
                config.signal.k_a = v;
            }
            if let Some(v) = k_e {
                config.noise.k_e = v;
            }
            if let Some(v) = rank_cap {
                config.estimator.rank_cap = v;
            }
            config.replications = config.replications.max(trial + 1);
            config.validate()?;
            let record = run_trial(&config, n, trial)?;
            let mut buf = Vec::new();
            let mut writer = TrialWriter::new(&mut buf, &metric_columns(&config))?;
            writer.write(&record)?;
            writer.finish()?;
            match &cli.out {
                Some(path) => std::fs::write(path, &buf)?,
                None => out.write_all(&buf)?,
            }
        }
        Command::Slope { csv, metric } => {
            let table = TrialTable::from_csv_file(&csv)?;
            if !table.metric_columns.contains(&metric) {
                return Err(Failure::Input(format!("column `{metric}` not in {}", csv.display())));
            }
            let (medians, fit) = fit_metric_slope(&table.records, &metric)?;
            writeln!(out, "n,median_{metric}")?;
            for (n, v) in &medians {
                writeln!(out, "{n},{v:.6e}")?;
            }
            writeln!(out, "slope = {:.6}", fit.slope)?;
            writeln!(out, "intercept = {:.6}", fit.intercept)?;
            writeln!(out, "r_squared = {:.6}", fit.r_squared)?;
        }
        Command::Validate { source } => {
            let config = load(&source, cli.seed)?;
            let report = feasibility_report(&config)?;
            write!(out, "{report}")?;
            if !report.all_snr_met() {
                writeln!(
                    out,
                    "note: the signal-strength condition is not met at some n; \
                     theoretical guarantees do not apply there"
                )?;
            }
        }
        Command::Fixtures => {
            let dir = cli.out.unwrap_or_else(|| PathBuf::from("fixtures"));
            let files = write_fixtures(&dir, cli.seed.unwrap_or(1))?;
            writeln!(out, "wrote {} files to {}", files.len(), dir.display())?;
        }
        Command::Preset { name } => match name {
            None => {
                for n in PRESET_NAMES {
                    writeln!(out, "{n}")?;
                }
            }
            Some(name) => {
                let config = preset(&name).ok_or_else(|| Failure::Input(format!("unknown preset `{name}`")))?;
                write!(out, "{}", config.to_toml_string())?;
            }
        },
    }
    Ok(())
}
