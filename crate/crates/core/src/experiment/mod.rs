//! Experiment runner: configuration, the synthetic dataset and the
//! `ingest` → `analyze` → `optimize` → `forecast` → `benchmark` pipeline.

pub mod cli;
mod config;
mod pipeline;
mod synth;

pub use config::{DataPaths, ExperimentConfig, GaSettings, Preset, DEFAULT_SEED};
pub use pipeline::{
    cmd_analyze, cmd_benchmark, cmd_forecast, cmd_ingest, cmd_optimize, load_monthly_file, load_spec, plan_grid,
    BaselineFit, BenchmarkReport, BestModel, CanonicalDataset, CommandRecord, ForecastOutcome, ForecastSelection,
    GaOutcome, GridCell, Manifest, NamedGene, OptimizeRecord, RunLayout, OPTIMIZE_CSV_HEADER,
};
pub use synth::{
    calibrate, generate_synthetic, synthetic_config, write_synthetic, SyntheticDataset, SyntheticFile, TargetProfile,
    ACTIVITY_FILE, CLIMATE_FILE, CONFIG_FILE, ELECTRICITY_FILE, ELECTRICITY_MONTHS, ELECTRICITY_PROFILE, WATER_FILE,
    WATER_MONTHS, WATER_PROFILE,
};
