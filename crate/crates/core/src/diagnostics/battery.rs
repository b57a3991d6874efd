use serde::{Deserialize, Serialize};

use super::{
    acf, adf_test, cox_stuart, kpss_test, kruskal_wallis_seasonality, ljung_box, mann_kendall, pacf,
    runs_test, AdfLag, Correlogram, KpssBandwidth, TestResult,
};
use crate::data::MonthlySeries;

/// One row of the diagnostics table; failures are kept inline so the other
/// tests still report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticRow {
    pub test_name: String,
    pub outcome: std::result::Result<TestResult, String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsReport {
    pub series: String,
    pub observations: usize,
    pub alpha: f64,
    pub rows: Vec<DiagnosticRow>,
    pub acf: std::result::Result<Correlogram, String>,
    pub pacf: std::result::Result<Correlogram, String>,
}

/// Default correlogram depth: a quarter of the series, at most 20 lags.
pub fn default_correlogram_lags(n: usize) -> usize {
    (n / 4).clamp(1, 20)
}

/// Runs every test on one series.
pub fn run_battery(series: &MonthlySeries, alpha: f64) -> DiagnosticsReport {
    let x = series.values();
    let lb_lags = (x.len() / 5).clamp(1, 10);
    let tests: Vec<(&str, crate::Result<TestResult>)> = vec![
        ("Wald-Wolfowitz runs", runs_test(x, alpha)),
        ("Mann-Kendall", mann_kendall(x, alpha)),
        ("Cox-Stuart", cox_stuart(x, alpha)),
        ("Kruskal-Wallis", kruskal_wallis_seasonality(series, alpha)),
        ("Augmented Dickey-Fuller", adf_test(x, AdfLag::Auto, alpha)),
        ("KPSS", kpss_test(x, KpssBandwidth::Auto, alpha)),
        ("Ljung-Box", ljung_box(x, lb_lags, alpha)),
    ];
    let lags = default_correlogram_lags(x.len());
    DiagnosticsReport {
        series: series.name().to_string(),
        observations: x.len(),
        alpha,
        rows: tests
            .into_iter()
            .map(|(name, r)| DiagnosticRow {
                test_name: name.to_string(),
                outcome: r.map_err(|e| e.to_string()),
            })
            .collect(),
        acf: acf(x, lags).map_err(|e| e.to_string()),
        pacf: pacf(x, lags.min(x.len().saturating_sub(1) / 2))
            .map_err(|e| e.to_string()),
    }
}
