//! The experiment subcommands. Each reads its inputs from the run directory,
//! writes its artifacts there and records itself in `manifest.json`.
//!
//! CSV and JSON artifacts depend only on the config and seed; wall times go
//! to markdown reports and the log.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baselines::{fit_smoothing, forecast as smoothing_forecast, SmoothingMethod, SmoothingParams, DEFAULT_PERIOD};
use crate::data::{
    aggregate_daily_to_monthly_with, aggregate_hourly_to_daily, join_exogenous, load_csv, partition_by_series,
    write_csv, ColumnKind, CsvSchema, ExogenousSeries, FeatureKind, FeatureTable, Frequency, MonthlySeries,
    SeriesSummary, Sidecar,
};
use crate::diagnostics::{run_battery, Correlogram, DiagnosticsReport, DEFAULT_ALPHA};
use crate::error::{Error, Result};
use crate::eval::{
    compare_models, evaluate_run, forecast_chart_svg, ComparisonTable, FeatureConfig, ForecastRun, MetricReport,
    ModelKind,
};
use crate::ga::{evolve, GaConfig, GeneValue};
use crate::model::TrainedModel;
use crate::tuning::{decode, holdout_forecast, HoldoutFitness, ModelFamily, ModelSpec};

use super::config::{ExperimentConfig, Preset};

/// Paths inside a run directory.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunLayout {
    pub root: PathBuf,
}

impl RunLayout {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Self { root: root.into() }
    }

    pub fn dataset_file(&self) -> PathBuf {
        self.root.join("dataset").join("dataset.json")
    }

    pub fn dir(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }

    pub fn manifest(&self) -> PathBuf {
        self.root.join("manifest.json")
    }

    fn relative(&self, path: &Path) -> String {
        path.strip_prefix(&self.root)
            .unwrap_or(path)
            .to_string_lossy()
            .replace('\\', "/")
    }
}

fn write_file(path: &Path, contents: impl AsRef<[u8]>) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_file(path, text)
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
}

/// Collects written artifacts for the manifest.
#[derive(Debug, Default)]
struct Artifacts {
    paths: Vec<PathBuf>,
}

impl Artifacts {
    fn text(&mut self, path: PathBuf, contents: impl AsRef<[u8]>) -> Result<()> {
        write_file(&path, contents)?;
        self.paths.push(path);
        Ok(())
    }

    fn json<T: Serialize>(&mut self, path: PathBuf, value: &T) -> Result<()> {
        write_json(&path, value)?;
        self.paths.push(path);
        Ok(())
    }
}

/// What one subcommand did, as recorded in the manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CommandRecord {
    pub artifacts: Vec<String>,
    pub failures: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub seed: u64,
    pub config: ExperimentConfig,
    pub commands: BTreeMap<String, CommandRecord>,
}

fn record_command(
    layout: &RunLayout,
    cfg: &ExperimentConfig,
    command: &str,
    artifacts: Artifacts,
    failures: Vec<String>,
) -> Result<CommandRecord> {
    let path = layout.manifest();
    let mut manifest = if path.exists() {
        read_json::<Manifest>(&path)?
    } else {
        Manifest {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            seed: cfg.seed,
            config: cfg.snapshot(),
            commands: BTreeMap::new(),
        }
    };
    manifest.seed = cfg.seed;
    manifest.config = cfg.snapshot();
    let mut names: Vec<String> = artifacts.paths.iter().map(|p| layout.relative(p)).collect();
    names.sort();
    let record = CommandRecord {
        artifacts: names,
        failures,
    };
    manifest.commands.insert(command.to_string(), record.clone());
    write_json(&path, &manifest)?;
    Ok(record)
}

// ---------------------------------------------------------------- ingest

/// Monthly targets and predictors produced by `ingest`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CanonicalDataset {
    pub targets: Vec<MonthlySeries>,
    pub exogenous: Vec<ExogenousSeries>,
}

impl CanonicalDataset {
    pub fn target(&self, name: &str) -> Result<&MonthlySeries> {
        self.targets
            .iter()
            .find(|t| t.name() == name)
            .ok_or_else(|| Error::invalid(format!("dataset has no series `{name}`")))
    }

    /// Feature table of one target for one arm (no lag columns).
    pub fn table(&self, series: &str, arm: FeatureConfig) -> Result<FeatureTable> {
        join_exogenous(self.target(series)?, &self.exogenous, arm.includes_climate())
    }

    pub fn load(layout: &RunLayout) -> Result<Self> {
        let path = layout.dataset_file();
        if !path.exists() {
            return Err(Error::Config(format!(
                "{} not found; run `ingest` first",
                path.display()
            )));
        }
        read_json(&path)
    }
}

/// Loads one sidecar-described file into monthly series.
pub fn load_monthly_file(path: &Path, locale: crate::data::DecimalLocale) -> Result<Vec<(MonthlySeries, ColumnKind)>> {
    let sidecar = Sidecar::load_for(path)?;
    if sidecar.columns.is_empty() {
        return Err(Error::Config(format!(
            "{}: sidecar declares no columns",
            Sidecar::path_for(path).display()
        )));
    }
    let schema = CsvSchema::new("timestamp", sidecar.columns.keys().cloned().collect());
    let records = load_csv(path, &schema, locale)?;
    let by_series = partition_by_series(&records);
    let mut out = Vec::new();
    for (name, meta) in &sidecar.columns {
        let recs = by_series
            .get(name)
            .ok_or_else(|| Error::invalid(format!("{}: column `{name}` has no values", path.display())))?;
        let daily = match sidecar.frequency {
            Frequency::Hourly => aggregate_hourly_to_daily(recs)?,
            Frequency::Daily | Frequency::Monthly => recs.clone(),
        };
        let series = aggregate_daily_to_monthly_with(&daily, meta.monthly)
            .map_err(|e| Error::invalid(format!("{}: {e}", path.display())))?
            .with_name(name.clone())
            .with_unit(meta.unit.clone());
        out.push((series, meta.kind));
    }
    Ok(out)
}

pub fn cmd_ingest(cfg: &ExperimentConfig, layout: &RunLayout) -> Result<Vec<SeriesSummary>> {
    let files: Vec<PathBuf> = cfg
        .data
        .targets
        .iter()
        .chain(&cfg.data.exogenous)
        .map(|p| cfg.resolve(p))
        .collect();
    if files.is_empty() {
        return Err(Error::Config("no data files configured".into()));
    }
    let mut targets = Vec::new();
    let mut exogenous = Vec::new();
    for path in &files {
        for (series, kind) in load_monthly_file(path, cfg.locale)? {
            let taken = targets
                .iter()
                .map(|t: &MonthlySeries| t.name())
                .chain(exogenous.iter().map(|e: &ExogenousSeries| e.series.name()))
                .any(|n| n == series.name());
            if taken {
                return Err(Error::Config(format!(
                    "{}: series `{}` is defined twice",
                    path.display(),
                    series.name()
                )));
            }
            match kind {
                ColumnKind::Target => targets.push(series),
                ColumnKind::Activity => exogenous.push(ExogenousSeries { series, kind: FeatureKind::Activity }),
                ColumnKind::Climate => exogenous.push(ExogenousSeries { series, kind: FeatureKind::Climate }),
            }
        }
    }
    if targets.is_empty() {
        return Err(Error::Config("no column is declared with kind = \"target\"".into()));
    }
    let dataset = CanonicalDataset { targets, exogenous };
    let mut art = Artifacts::default();
    let summaries: Vec<SeriesSummary> = dataset.targets.iter().map(SeriesSummary::of).collect();
    for t in &dataset.targets {
        let table = join_exogenous(t, &dataset.exogenous, true)?;
        art.text(layout.dir("dataset").join(format!("{}.csv", t.name())), table_csv(&table, cfg)?)?;
    }
    art.json(layout.dataset_file(), &dataset)?;
    art.text(layout.dir("dataset").join("summary.csv"), summary_csv(&summaries))?;
    art.text(layout.dir("dataset").join("summary.md"), summary_markdown(&summaries))?;
    for s in &summaries {
        log::info!(
            "{}: {} months, mean {:.2}, std {:.2}",
            s.name,
            s.observations,
            s.mean,
            s.std_dev
        );
    }
    record_command(layout, cfg, "ingest", art, vec![])?;
    Ok(summaries)
}

fn table_csv(table: &FeatureTable, cfg: &ExperimentConfig) -> Result<String> {
    let mut names = vec!["target".to_string()];
    names.extend(table.feature_names());
    let columns: Vec<&str> = names.iter().map(String::as_str).collect();
    let rows: Vec<(String, Vec<f64>)> = (0..table.len())
        .map(|i| {
            let mut v = vec![table.target()[i]];
            v.extend(table.row(i));
            (table.months()[i].to_string(), v)
        })
        .collect();
    let mut buf = Vec::new();
    write_csv(&mut buf, "timestamp", &columns, &rows, cfg.locale)?;
    Ok(String::from_utf8(buf).expect("csv is utf-8"))
}

fn summary_csv(rows: &[SeriesSummary]) -> String {
    let mut out = String::from("series,unit,frequency,observations,min,max,mean,std_dev\n");
    for s in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            s.name, s.unit, s.frequency, s.observations, s.min, s.max, s.mean, s.std_dev
        );
    }
    out
}

fn summary_markdown(rows: &[SeriesSummary]) -> String {
    let mut out = String::from(
        "| Series | Frequency | Observations | Minimum | Maximum | Mean | Standard deviation |\n|---|---|---:|---:|---:|---:|---:|\n",
    );
    for s in rows {
        let _ = writeln!(
            out,
            "| {} ({}) | {} | {} | {:.2} | {:.2} | {:.2} | {:.2} |",
            s.name, s.unit, s.frequency, s.observations, s.min, s.max, s.mean, s.std_dev
        );
    }
    out
}

// ---------------------------------------------------------------- analyze

pub fn cmd_analyze(cfg: &ExperimentConfig, layout: &RunLayout) -> Result<Vec<DiagnosticsReport>> {
    let dataset = CanonicalDataset::load(layout)?;
    let reports: Vec<DiagnosticsReport> = dataset
        .targets
        .par_iter()
        .map(|s| run_battery(s, DEFAULT_ALPHA))
        .collect();
    let dir = layout.dir("analysis");
    let mut art = Artifacts::default();
    let mut csv = String::from("series,test,significance,statistic,p_value,critical_value,conclusion,error\n");
    let mut md = String::new();
    let mut failures = Vec::new();
    for r in &reports {
        let _ = writeln!(md, "### {} ({} observations)\n", r.series, r.observations);
        md.push_str("| Test | Critical Value | Statistic | P-Value | Conclusion |\n|---|---|---:|---:|---|\n");
        let significance = format!("{}%", r.alpha * 100.0);
        for row in &r.rows {
            match &row.outcome {
                Ok(t) => {
                    let p = t.p_value.map(|p| p.to_string()).unwrap_or_default();
                    let c = t.critical_value.map(|c| c.to_string()).unwrap_or_default();
                    let _ = writeln!(
                        csv,
                        "{},{},{significance},{},{p},{c},{},",
                        r.series, row.test_name, t.statistic, t.conclusion
                    );
                    let p_cell = t
                        .p_value
                        .map(|p| format!("{p:.5}"))
                        .or(t.critical_value.map(|c| format!("crit. {c:.3}")))
                        .unwrap_or_default();
                    let _ = writeln!(
                        md,
                        "| {} | {significance} | {:.4} | {p_cell} | {} |",
                        row.test_name, t.statistic, t.conclusion
                    );
                }
                Err(e) => {
                    let _ = writeln!(csv, "{},{},{significance},,,,,\"{}\"", r.series, row.test_name, e.replace('"', "'"));
                    let _ = writeln!(md, "| {} | {significance} | | | error: {e} |", row.test_name);
                    failures.push(format!("{} / {}: {e}", r.series, row.test_name));
                }
            }
        }
        md.push('\n');
        art.text(dir.join(format!("correlogram_{}.csv", r.series)), correlogram_csv(r))?;
    }
    art.text(dir.join("diagnostics.csv"), csv)?;
    art.text(dir.join("diagnostics.md"), md)?;
    art.json(dir.join("diagnostics.json"), &reports)?;
    // test-level failures are part of the report, not command failures
    record_command(layout, cfg, "analyze", art, vec![])?;
    for f in failures {
        log::warn!("diagnostic failed: {f}");
    }
    Ok(reports)
}

fn correlogram_csv(r: &DiagnosticsReport) -> String {
    let mut out = String::from("function,lag,coefficient,confidence_band\n");
    let mut emit = |name: &str, c: &std::result::Result<Correlogram, String>| {
        if let Ok(c) = c {
            for (lag, v) in c.lags.iter().zip(&c.coefficients) {
                let _ = writeln!(out, "{name},{lag},{v},{}", c.confidence_band);
            }
        }
    };
    emit("acf", &r.acf);
    emit("pacf", &r.pacf);
    out
}

// ---------------------------------------------------------------- optimize

/// One (series, arm, family, preset) combination of the GA grid.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridCell {
    pub series: String,
    pub features: FeatureConfig,
    pub family: ModelFamily,
    pub preset: Preset,
}

impl GridCell {
    pub fn key(&self) -> String {
        format!("{}_{}_{}_{}", self.series, self.features, self.family, self.preset.label())
    }
}

/// Series × arms × families × presets, in that nesting order.
pub fn plan_grid(cfg: &ExperimentConfig, series: &[String]) -> Vec<GridCell> {
    let mut cells = Vec::new();
    for s in series {
        for &features in &cfg.arms {
            for &family in &cfg.families {
                for &preset in &cfg.presets {
                    cells.push(GridCell {
                        series: s.clone(),
                        features,
                        family,
                        preset,
                    });
                }
            }
        }
    }
    cells
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedGene {
    pub name: String,
    pub value: GeneValue,
}

/// Best individual of one GA run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaOutcome {
    pub genome: Vec<NamedGene>,
    pub lags: usize,
    /// Holdout mean squared error.
    pub fitness: f64,
    pub rmse: f64,
    pub spec: ModelSpec,
    pub evaluations: usize,
    pub cache_hits: usize,
    pub trace: Vec<f64>,
}

impl GaOutcome {
    /// Genome without the lag gene, as `name=value` pairs.
    pub fn individual(&self) -> String {
        self.genome
            .iter()
            .filter(|g| g.name != "lags")
            .map(|g| format!("{}={}", g.name, g.value))
            .collect::<Vec<_>>()
            .join(";")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizeRecord {
    pub cell: GridCell,
    pub seed: u64,
    pub outcome: Option<GaOutcome>,
    pub error: Option<String>,
    #[serde(skip)]
    pub wall_time_secs: f64,
}

/// Lowest-fitness run over presets for one (series, arm, family).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BestModel {
    pub series: String,
    pub features: FeatureConfig,
    pub family: ModelFamily,
    pub preset: Preset,
    pub outcome: GaOutcome,
}

fn best_model_path(layout: &RunLayout, series: &str, features: FeatureConfig, family: ModelFamily) -> PathBuf {
    layout
        .dir("optimize")
        .join("best")
        .join(format!("{series}_{features}_{family}.json"))
}

fn run_cell(
    cfg: &ExperimentConfig,
    dataset: &CanonicalDataset,
    cell: &GridCell,
    checkpoint: &Path,
    resume: bool,
) -> Result<(GaOutcome, f64)> {
    let table = dataset.table(&cell.series, cell.features)?;
    let task = HoldoutFitness {
        family: cell.family,
        table,
        horizon: cfg.horizon,
        seed: cfg.seed,
    };
    let ga = GaConfig {
        population_size: cell.preset.population,
        generations: cell.preset.generations,
        mutation_probability: cfg.ga.mutation_probability,
        elite_fraction: cfg.ga.elite_fraction,
        seed: cfg.seed,
    };
    let schema = cell.family.schema();
    let result = evolve(&schema, &ga, &task, Some(checkpoint), resume)?;
    let fitness = result
        .best
        .fitness
        .filter(|f| f.is_finite())
        .ok_or_else(|| Error::invalid("no individual could be evaluated"))?;
    let spec = decode(cell.family, &result.best.genes, cfg.seed)?;
    let genome = schema
        .genes
        .iter()
        .zip(&result.best.genes)
        .map(|(g, v)| NamedGene {
            name: g.name.clone(),
            value: v.clone(),
        })
        .collect();
    Ok((
        GaOutcome {
            genome,
            lags: spec.lags(),
            fitness,
            rmse: fitness.sqrt(),
            spec,
            evaluations: result.evaluations,
            cache_hits: result.cache_hits,
            trace: result.trace,
        },
        result.wall_time_secs,
    ))
}

pub fn cmd_optimize(cfg: &ExperimentConfig, layout: &RunLayout, resume: bool) -> Result<Vec<OptimizeRecord>> {
    let dataset = CanonicalDataset::load(layout)?;
    let names: Vec<String> = dataset.targets.iter().map(|t| t.name().to_string()).collect();
    let cells = plan_grid(cfg, &names);
    let dir = layout.dir("optimize");
    let ckpt_dir = dir.join("checkpoints");
    fs::create_dir_all(&ckpt_dir).map_err(|e| Error::io(&ckpt_dir, e))?;
    log::info!("optimize: {} GA runs", cells.len());
    let records: Vec<OptimizeRecord> = cells
        .par_iter()
        .map(|cell| {
            let started = Instant::now();
            let checkpoint = ckpt_dir.join(format!("{}.json", cell.key()));
            let outcome = run_cell(cfg, &dataset, cell, &checkpoint, resume);
            let elapsed = started.elapsed().as_secs_f64();
            match outcome {
                Ok((o, ga_secs)) => {
                    log::info!(
                        "{}: fitness {} in {ga_secs:.2}s ({} evaluations)",
                        cell.key(),
                        o.fitness,
                        o.evaluations
                    );
                    OptimizeRecord {
                        cell: cell.clone(),
                        seed: cfg.seed,
                        outcome: Some(o),
                        error: None,
                        wall_time_secs: ga_secs,
                    }
                }
                Err(e) => {
                    log::error!("{}: {e}", cell.key());
                    OptimizeRecord {
                        cell: cell.clone(),
                        seed: cfg.seed,
                        outcome: None,
                        error: Some(e.to_string()),
                        wall_time_secs: elapsed,
                    }
                }
            }
        })
        .collect();

    let mut art = Artifacts::default();
    art.paths.extend(cells.iter().map(|c| ckpt_dir.join(format!("{}.json", c.key()))).filter(|p| p.exists()));
    art.json(dir.join("results.json"), &records)?;
    art.text(dir.join("results.csv"), optimize_csv(&records))?;
    art.text(dir.join("report.md"), optimize_markdown(&records))?;

    let mut best: BTreeMap<(String, FeatureConfig, ModelFamily), &OptimizeRecord> = BTreeMap::new();
    for r in &records {
        let Some(o) = &r.outcome else { continue };
        let key = (r.cell.series.clone(), r.cell.features, r.cell.family);
        let better = best
            .get(&key)
            .is_none_or(|b| o.fitness < b.outcome.as_ref().expect("kept records have outcomes").fitness);
        if better {
            best.insert(key, r);
        }
    }
    for ((series, features, family), r) in &best {
        let model = BestModel {
            series: series.clone(),
            features: *features,
            family: *family,
            preset: r.cell.preset,
            outcome: r.outcome.clone().expect("kept records have outcomes"),
        };
        art.json(best_model_path(layout, series, *features, *family), &model)?;
    }
    let failures: Vec<String> = records
        .iter()
        .filter_map(|r| r.error.as_ref().map(|e| format!("{}: {e}", r.cell.key())))
        .collect();
    record_command(layout, cfg, "optimize", art, failures)?;
    Ok(records)
}

pub const OPTIMIZE_CSV_HEADER: &str = "series,features,family,population,generations,individual,lags,fitness,rmse,evaluations,cache_hits,status";

fn optimize_csv(records: &[OptimizeRecord]) -> String {
    let mut out = format!("{OPTIMIZE_CSV_HEADER}\n");
    for r in records {
        let c = &r.cell;
        let _ = match (&r.outcome, &r.error) {
            (Some(o), _) => writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{},ok",
                c.series,
                c.features,
                c.family,
                c.preset.population,
                c.preset.generations,
                o.individual(),
                o.lags,
                o.fitness,
                o.rmse,
                o.evaluations,
                o.cache_hits
            ),
            (None, e) => writeln!(
                out,
                "{},{},{},{},{},,,,,,,\"error: {}\"",
                c.series,
                c.features,
                c.family,
                c.preset.population,
                c.preset.generations,
                e.as_deref().unwrap_or("unknown").replace('"', "'")
            ),
        };
    }
    out
}

fn optimize_markdown(records: &[OptimizeRecord]) -> String {
    let mut groups: BTreeMap<(String, ModelFamily), Vec<&OptimizeRecord>> = BTreeMap::new();
    for r in records {
        groups.entry((r.cell.series.clone(), r.cell.family)).or_default().push(r);
    }
    let mut out = String::new();
    for ((series, family), rows) in groups {
        let _ = writeln!(out, "### Best individuals: {} / {}\n", series, family.kind().title());
        out.push_str("| Features | Population | Generations | Individual | Lags | Time (s) | Fitness |\n|---|---:|---:|---|---:|---:|---:|\n");
        for r in rows {
            let c = &r.cell;
            match &r.outcome {
                Some(o) => {
                    let _ = writeln!(
                        out,
                        "| {} | {} | {} | {} | {} | {:.2} | {:.2} |",
                        c.features,
                        c.preset.population,
                        c.preset.generations,
                        o.individual(),
                        o.lags,
                        r.wall_time_secs,
                        o.fitness
                    );
                }
                None => {
                    let _ = writeln!(
                        out,
                        "| {} | {} | {} | error: {} | | {:.2} | |",
                        c.features,
                        c.preset.population,
                        c.preset.generations,
                        r.error.as_deref().unwrap_or("unknown"),
                        r.wall_time_secs
                    );
                }
            }
        }
        out.push('\n');
    }
    out
}

// ---------------------------------------------------------------- forecast

/// Which trained models `forecast` produces.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ForecastSelection {
    /// Restrict to these series; all when empty.
    pub series: Vec<String>,
    /// Use these settings instead of the optimized genomes.
    pub spec: Option<ModelSpec>,
}

/// Reads a model spec from a `BestModel` or bare `ModelSpec` JSON file.
pub fn load_spec(path: &Path) -> Result<ModelSpec> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    if let Ok(best) = serde_json::from_str::<BestModel>(&text) {
        return Ok(best.outcome.spec);
    }
    serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: not a model spec: {e}", path.display())))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ForecastOutcome {
    pub series: String,
    pub features: FeatureConfig,
    pub family: ModelFamily,
    pub result: std::result::Result<(ForecastRun, MetricReport), String>,
}

/// Forecast run, its metrics, the trained model, test months and training targets.
type SingleForecast = (ForecastRun, MetricReport, TrainedModel, Vec<String>, Vec<f64>);

fn forecast_one(
    cfg: &ExperimentConfig,
    dataset: &CanonicalDataset,
    series: &str,
    features: FeatureConfig,
    spec: &ModelSpec,
) -> Result<SingleForecast> {
    let table = dataset.table(series, features)?;
    let f = holdout_forecast(&table, spec, cfg.horizon)?;
    let run = ForecastRun::new(spec.family().kind(), features, f.predictions, f.actuals)?;
    let report = evaluate_run(&run)?;
    let n = table.len();
    let months = table.months()[n - cfg.horizon..].iter().map(|m| m.to_string()).collect();
    let history = table.target()[..n - cfg.horizon].to_vec();
    Ok((run, report, f.model, months, history))
}

pub fn cmd_forecast(
    cfg: &ExperimentConfig,
    layout: &RunLayout,
    selection: &ForecastSelection,
) -> Result<Vec<ForecastOutcome>> {
    let dataset = CanonicalDataset::load(layout)?;
    let mut jobs: Vec<(String, FeatureConfig, ModelFamily, Result<ModelSpec>)> = Vec::new();
    for t in &dataset.targets {
        if !selection.series.is_empty() && !selection.series.iter().any(|s| s == t.name()) {
            continue;
        }
        for &features in &cfg.arms {
            match &selection.spec {
                Some(spec) => jobs.push((t.name().to_string(), features, spec.family(), Ok(spec.clone()))),
                None => {
                    for &family in &cfg.families {
                        let path = best_model_path(layout, t.name(), features, family);
                        let spec = if path.exists() {
                            read_json::<BestModel>(&path).map(|b| b.outcome.spec)
                        } else {
                            Err(Error::Config(format!(
                                "{} not found; run `optimize` first or pass --spec",
                                path.display()
                            )))
                        };
                        jobs.push((t.name().to_string(), features, family, spec));
                    }
                }
            }
        }
    }
    if let Some(missing) = selection
        .series
        .iter()
        .find(|s| !dataset.targets.iter().any(|t| t.name() == s.as_str()))
    {
        return Err(Error::Config(format!("dataset has no series `{missing}`")));
    }
    let dir = layout.dir("forecast");
    let results: Vec<_> = jobs
        .par_iter()
        .map(|(series, features, family, spec)| {
            let r = spec
                .as_ref()
                .map_err(|e| Error::Config(e.to_string()))
                .and_then(|spec| forecast_one(cfg, &dataset, series, *features, spec));
            (series.clone(), *features, *family, r)
        })
        .collect();

    let mut art = Artifacts::default();
    let mut outcomes = Vec::new();
    let mut failures = Vec::new();
    let mut metrics_csv = String::from("series,model,features,mape_percent,rmse,mse\n");
    let mut md = String::new();
    for (series, features, family, r) in results {
        let key = format!("{series}_{features}_{family}");
        match r {
            Ok((run, report, model, months, history)) => {
                let mut csv = String::from("month,actual,predicted\n");
                for ((m, a), p) in months.iter().zip(&run.actuals).zip(&run.predictions) {
                    let _ = writeln!(csv, "{m},{a},{p}");
                }
                art.text(dir.join(format!("{key}.csv")), csv)?;
                let title = format!(
                    "{} forecast, {} ({}), {} steps",
                    series,
                    family.kind().title(),
                    features,
                    run.horizon
                );
                art.text(
                    dir.join(format!("{key}.svg")),
                    forecast_chart_svg(&title, &history, &run.actuals, &run.predictions),
                )?;
                art.text(dir.join("models").join(format!("{key}.json")), model.to_json()? + "\n")?;
                let _ = writeln!(
                    metrics_csv,
                    "{series},{},{features},{},{},{}",
                    run.model_kind, report.mape_percent, report.rmse, report.mse
                );
                let _ = writeln!(
                    md,
                    "| {series} | {} | {features} | {:.2} | {:.2} |",
                    family.kind().title(),
                    report.mape_percent,
                    report.rmse
                );
                outcomes.push(ForecastOutcome {
                    series,
                    features,
                    family,
                    result: Ok((run, report)),
                });
            }
            Err(e) => {
                log::error!("forecast {key}: {e}");
                failures.push(format!("{key}: {e}"));
                outcomes.push(ForecastOutcome {
                    series,
                    features,
                    family,
                    result: Err(e.to_string()),
                });
            }
        }
    }
    art.text(dir.join("metrics.csv"), metrics_csv)?;
    let md = format!(
        "| Series | Model | Features | MAPE (%) | RMSE |\n|---|---|---|---:|---:|\n{md}\n\
         Climate predictors over the forecast window use recorded values, not weather forecasts.\n"
    );
    art.text(dir.join("metrics.md"), md)?;
    record_command(layout, cfg, "forecast", art, failures)?;
    Ok(outcomes)
}

// ---------------------------------------------------------------- benchmark

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineFit {
    pub series: String,
    pub method: SmoothingMethod,
    pub params: SmoothingParams,
    pub in_sample_mse: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkReport {
    pub tables: Vec<ComparisonTable>,
    pub baselines: Vec<BaselineFit>,
}

fn baseline_runs(series: &MonthlySeries, horizon: usize) -> Result<(Vec<ForecastRun>, Vec<BaselineFit>)> {
    let values = series.values();
    if values.len() <= horizon {
        return Err(Error::invalid(format!(
            "series `{}` has {} values, not enough for a {horizon}-month holdout",
            series.name(),
            values.len()
        )));
    }
    let (train, test) = values.split_at(values.len() - horizon);
    let mut runs = Vec::new();
    let mut fits = Vec::new();
    for method in SmoothingMethod::ALL {
        let fit = fit_smoothing(train, method, DEFAULT_PERIOD)?;
        let predictions = smoothing_forecast(train, method, &fit.params, horizon)?;
        runs.push(ForecastRun::new(
            ModelKind::from(method),
            FeatureConfig::WithoutClimate,
            predictions,
            test.to_vec(),
        )?);
        fits.push(BaselineFit {
            series: series.name().to_string(),
            method,
            params: fit.params,
            in_sample_mse: fit.mse,
        });
    }
    Ok((runs, fits))
}

fn best_ml_run(
    cfg: &ExperimentConfig,
    layout: &RunLayout,
    dataset: &CanonicalDataset,
    series: &str,
    family: ModelFamily,
) -> Result<ForecastRun> {
    let mut chosen: Option<BestModel> = None;
    for &features in &cfg.arms {
        let path = best_model_path(layout, series, features, family);
        if !path.exists() {
            continue;
        }
        let b: BestModel = read_json(&path)?;
        if chosen.as_ref().is_none_or(|c| b.outcome.fitness < c.outcome.fitness) {
            chosen = Some(b);
        }
    }
    let b = chosen.ok_or_else(|| {
        Error::Config(format!(
            "no optimized {family} model for `{series}`; run `optimize` first or use --baseline-only"
        ))
    })?;
    let table = dataset.table(series, b.features)?;
    let f = holdout_forecast(&table, &b.outcome.spec, cfg.horizon)?;
    ForecastRun::new(family.kind(), b.features, f.predictions, f.actuals)
}

pub fn cmd_benchmark(cfg: &ExperimentConfig, layout: &RunLayout, baseline_only: bool) -> Result<BenchmarkReport> {
    let dataset = CanonicalDataset::load(layout)?;
    let per_series: Vec<Result<(ComparisonTable, Vec<BaselineFit>)>> = dataset
        .targets
        .par_iter()
        .map(|s| {
            let (mut runs, fits) = baseline_runs(s, cfg.horizon)?;
            if !baseline_only {
                for &family in &cfg.families {
                    runs.push(best_ml_run(cfg, layout, &dataset, s.name(), family)?);
                }
            }
            Ok((compare_models(s.name(), &runs)?, fits))
        })
        .collect();
    let mut tables = Vec::new();
    let mut baselines = Vec::new();
    let mut failures = Vec::new();
    for (s, r) in dataset.targets.iter().zip(per_series) {
        match r {
            Ok((t, f)) => {
                tables.push(t);
                baselines.extend(f);
            }
            Err(e) => {
                log::error!("benchmark {}: {e}", s.name());
                failures.push(format!("{}: {e}", s.name()));
            }
        }
    }
    let report = BenchmarkReport { tables, baselines };
    let dir = layout.dir("benchmark");
    let mut art = Artifacts::default();
    let mut csv = format!("{}\n", ComparisonTable::CSV_HEADER);
    let mut md = String::new();
    for t in &report.tables {
        for line in t.csv_lines() {
            csv.push_str(&line);
            csv.push('\n');
        }
        md.push_str(&t.to_markdown());
        md.push('\n');
    }
    art.text(dir.join("comparison.csv"), csv)?;
    art.text(dir.join("comparison.md"), md)?;
    art.json(dir.join("comparison.json"), &report)?;
    record_command(layout, cfg, "benchmark", art, failures)?;
    Ok(report)
}

/// Number of failures recorded for `command` in the run's manifest.
pub fn recorded_failures(layout: &RunLayout, command: &str) -> Result<usize> {
    let m: Manifest = read_json(&layout.manifest())?;
    Ok(m.commands.get(command).map(|c| c.failures.len()).unwrap_or(0))
}
