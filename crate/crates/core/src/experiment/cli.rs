//! Command-line front end shared by the `utilcast` binary and tests.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{ArgAction, Args, Parser, Subcommand};

use crate::data::DecimalLocale;
use crate::error::{Error, Result};
use crate::eval::FeatureConfig;
use crate::tuning::ModelFamily;

use super::config::{ExperimentConfig, Preset};
use super::pipeline::{
    cmd_analyze, cmd_benchmark, cmd_forecast, cmd_ingest, cmd_optimize, load_spec, ForecastSelection, RunLayout,
};
use super::synth::write_synthetic;

const RUNS_DIR: &str = "runs";
const SYNTH_DIR: &str = "synthetic-data";

#[derive(Debug, Parser)]
#[command(name = "utilcast", version, about = "Monthly utility consumption forecasting experiments")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// Experiment config (TOML).
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Forecast horizon in months.
    #[arg(long, global = true)]
    pub horizon: Option<usize>,
    /// Only run the arm with climate predictors.
    #[arg(long, global = true, conflicts_with = "without_climate")]
    pub with_climate: bool,
    /// Only run the arm without climate predictors.
    #[arg(long, global = true)]
    pub without_climate: bool,
    /// Decimal separator of input files: period or comma.
    #[arg(long, global = true)]
    pub locale: Option<DecimalLocale>,
    /// Run directory (data directory for `synth`).
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Worker threads; results do not depend on this.
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    /// Continue GA runs from their checkpoints.
    #[arg(long, global = true)]
    pub resume: bool,
    /// GA preset POPULATION:GENERATIONS; repeat to replace the configured list.
    #[arg(long = "preset", global = true, value_name = "POP:GEN")]
    pub presets: Vec<Preset>,
    /// Model family to run (rf or svr); repeat for several.
    #[arg(long = "family", global = true)]
    pub families: Vec<ModelFamily>,
    /// More log output (-v info, -vv debug).
    #[arg(short, long, global = true, action = ArgAction::Count)]
    pub verbose: u8,
    /// Only errors in the log.
    #[arg(short, long, global = true)]
    pub quiet: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write the seeded synthetic dataset and a matching experiment.toml.
    Synth,
    /// Load, aggregate and join the input files; write summary statistics.
    Ingest,
    /// Trend, seasonality, randomness and stationarity tests plus correlograms.
    Analyze,
    /// Genetic hyperparameter search over the experiment grid.
    Optimize,
    /// Train the selected models and forecast the holdout.
    Forecast {
        /// Restrict to a series; repeat for several.
        #[arg(long)]
        series: Vec<String>,
        /// Model settings (JSON) instead of the optimized genomes.
        #[arg(long, value_name = "FILE")]
        spec: Option<PathBuf>,
    },
    /// Compare smoothing baselines with the best tuned models.
    Benchmark {
        /// Skip the tuned models.
        #[arg(long)]
        baseline_only: bool,
    },
}

/// Result of a successful invocation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    /// Directory the command wrote to.
    pub out: PathBuf,
    /// Combinations that failed without aborting the command.
    pub failures: usize,
}

impl Cli {
    /// Config file values overridden by flags.
    pub fn config(&self) -> Result<ExperimentConfig> {
        let g = &self.global;
        let mut cfg = match &g.config {
            Some(path) => ExperimentConfig::load(path)?,
            None => ExperimentConfig::default(),
        };
        if let Some(seed) = g.seed {
            cfg.seed = seed;
        }
        if let Some(h) = g.horizon {
            cfg.horizon = h;
        }
        if g.with_climate {
            cfg.arms = vec![FeatureConfig::WithClimate];
        }
        if g.without_climate {
            cfg.arms = vec![FeatureConfig::WithoutClimate];
        }
        if let Some(locale) = g.locale {
            cfg.locale = locale;
        }
        if g.out.is_some() {
            cfg.out = g.out.clone();
        }
        if g.workers.is_some() {
            cfg.workers = g.workers;
        }
        if !g.presets.is_empty() {
            cfg.presets = g.presets.clone();
        }
        if !g.families.is_empty() {
            cfg.families = g.families.clone();
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Most recent run directory under `runs/` that holds an ingested dataset.
fn latest_run(base: &Path) -> Option<PathBuf> {
    let mut dirs: Vec<PathBuf> = fs::read_dir(base)
        .ok()?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| RunLayout::new(p).dataset_file().exists())
        .collect();
    dirs.sort();
    dirs.pop()
}

fn run_directory(cfg: &ExperimentConfig, command: &Command) -> Result<PathBuf> {
    if let Some(out) = &cfg.out {
        return Ok(out.clone());
    }
    match command {
        Command::Synth => Ok(PathBuf::from(SYNTH_DIR)),
        Command::Ingest => Ok(Path::new(RUNS_DIR).join(chrono::Local::now().format("%Y%m%d-%H%M%S").to_string())),
        _ => latest_run(Path::new(RUNS_DIR))
            .inspect(|p| log::info!("using run directory {}", p.display()))
            .ok_or_else(|| Error::Config("no run directory found; pass --out or run `ingest` first".into())),
    }
}

pub fn run(cli: &Cli) -> Result<Outcome> {
    let cfg = cli.config()?;
    let out = run_directory(&cfg, &cli.command)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers.unwrap_or(0))
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    let layout = RunLayout::new(&out);
    let failures = pool.install(|| -> Result<usize> {
        Ok(match &cli.command {
            Command::Synth => {
                let files = write_synthetic(&out, cfg.seed, cfg.locale)?;
                log::info!("wrote {} files to {}", files.len(), out.display());
                0
            }
            Command::Ingest => {
                cmd_ingest(&cfg, &layout)?;
                0
            }
            Command::Analyze => {
                cmd_analyze(&cfg, &layout)?;
                0
            }
            Command::Optimize => cmd_optimize(&cfg, &layout, cli.global.resume)?
                .iter()
                .filter(|r| r.error.is_some())
                .count(),
            Command::Forecast { series, spec } => {
                let selection = ForecastSelection {
                    series: series.clone(),
                    spec: spec.as_deref().map(load_spec).transpose()?,
                };
                cmd_forecast(&cfg, &layout, &selection)?
                    .iter()
                    .filter(|o| o.result.is_err())
                    .count()
            }
            Command::Benchmark { baseline_only } => {
                cmd_benchmark(&cfg, &layout, *baseline_only)?;
                super::pipeline::recorded_failures(&layout, "benchmark")?
            }
        })
    })?;
    Ok(Outcome { out, failures })
}

fn init_logging(verbose: u8, quiet: bool) {
    let level = match (quiet, verbose) {
        (true, _) => log::LevelFilter::Error,
        (false, 0) => log::LevelFilter::Info,
        (false, _) => log::LevelFilter::Debug,
    };
    let _ = env_logger::Builder::new()
        .filter_level(level)
        .parse_default_env()
        .format_timestamp(None)
        .try_init();
}

/// Parses `args` and runs the command. Exit code 0 on success, 1 when some
/// combination failed, 2 on usage or fatal errors.
pub fn main_with_args<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    init_logging(cli.global.verbose, cli.global.quiet);
    match run(&cli) {
        Ok(o) if o.failures == 0 => ExitCode::SUCCESS,
        Ok(o) => {
            eprintln!("error: {} combination(s) failed; see {}", o.failures, o.out.join("manifest.json").display());
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

/// Parses and runs without touching the process exit code.
pub fn run_args<I, T>(args: I) -> Result<Outcome>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(args).map_err(|e| Error::Config(e.to_string()))?;
    init_logging(cli.global.verbose, cli.global.quiet);
    run(&cli)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_config() {
        let cli = Cli::try_parse_from([
            "utilcast",
            "optimize",
            "--seed",
            "9",
            "--without-climate",
            "--preset",
            "20:10",
            "--family",
            "rf",
            "--locale",
            "comma",
        ])
        .unwrap();
        let cfg = cli.config().unwrap();
        assert_eq!(cfg.seed, 9);
        assert_eq!(cfg.arms, vec![FeatureConfig::WithoutClimate]);
        assert_eq!(cfg.presets, vec![Preset { population: 20, generations: 10 }]);
        assert_eq!(cfg.families, vec![ModelFamily::Rf]);
        assert_eq!(cfg.locale, DecimalLocale::Comma);
    }

    #[test]
    fn climate_flags_conflict() {
        assert!(Cli::try_parse_from(["utilcast", "ingest", "--with-climate", "--without-climate"]).is_err());
    }

    #[test]
    fn invalid_values_rejected() {
        assert!(Cli::try_parse_from(["utilcast", "optimize", "--preset", "20"]).is_err());
        assert!(Cli::try_parse_from(["utilcast", "optimize", "--family", "knn"]).is_err());
        let cli = Cli::try_parse_from(["utilcast", "optimize", "--horizon", "0"]).unwrap();
        assert!(cli.config().is_err());
    }
}
