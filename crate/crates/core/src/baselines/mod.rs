//! Classical smoothing forecasters: simple exponential smoothing, Brown's
//! double exponential smoothing and additive/multiplicative Holt-Winters.
//!
//! Recursions are written in error-correction form (`l += alpha * (x - l)`)
//! so a constant series is a bit-exact fixed point.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Seasonal period of monthly data.
pub const DEFAULT_PERIOD: usize = 12;
/// Spacing of the parameter grid searched by [`fit_smoothing`].
pub const GRID_STEP: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SmoothingMethod {
    #[serde(rename = "ses")]
    Ses,
    #[serde(rename = "brown")]
    Brown,
    #[serde(rename = "hw-add")]
    HoltWintersAdditive,
    #[serde(rename = "hw-mul")]
    HoltWintersMultiplicative,
}

impl SmoothingMethod {
    pub const ALL: [SmoothingMethod; 4] = [
        SmoothingMethod::Ses,
        SmoothingMethod::Brown,
        SmoothingMethod::HoltWintersAdditive,
        SmoothingMethod::HoltWintersMultiplicative,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SmoothingMethod::Ses => "ses",
            SmoothingMethod::Brown => "brown",
            SmoothingMethod::HoltWintersAdditive => "hw-add",
            SmoothingMethod::HoltWintersMultiplicative => "hw-mul",
        }
    }

    /// Human-readable column title.
    pub fn title(self) -> &'static str {
        match self {
            SmoothingMethod::Ses => "Exponential Smoothing",
            SmoothingMethod::Brown => "Brown",
            SmoothingMethod::HoltWintersAdditive => "Holt-Winters Additive",
            SmoothingMethod::HoltWintersMultiplicative => "Holt-Winters Multiplicative",
        }
    }
}

impl fmt::Display for SmoothingMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SmoothingMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SmoothingMethod::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::invalid(format!("unknown smoothing method `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Seasonality {
    Additive,
    Multiplicative,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmoothingParams {
    pub alpha: f64,
    /// Trend smoothing (Holt-Winters only).
    pub beta: f64,
    /// Seasonal smoothing (Holt-Winters only).
    pub gamma_s: f64,
    pub period: usize,
}

impl SmoothingParams {
    pub fn new(alpha: f64, beta: f64, gamma_s: f64) -> Self {
        Self {
            alpha,
            beta,
            gamma_s,
            period: DEFAULT_PERIOD,
        }
    }

    fn validate_seasonal(&self) -> Result<()> {
        check_alpha(self.alpha)?;
        for (name, v) in [("beta", self.beta), ("gamma", self.gamma_s)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::invalid(format!("{name} {v} outside [0, 1]")));
            }
        }
        if self.period < 2 {
            return Err(Error::invalid(format!("period must be >= 2, got {}", self.period)));
        }
        Ok(())
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha <= 1.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!("alpha {alpha} outside (0, 1]")))
    }
}

fn check_series(series: &[f64], min_len: usize, what: &str) -> Result<()> {
    if series.len() < min_len {
        return Err(Error::invalid(format!(
            "{what} needs at least {min_len} observations, got {}",
            series.len()
        )));
    }
    if series.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid(format!("{what} input must be finite")));
    }
    Ok(())
}

/// Mean that is exact when all values agree.
fn mean(values: &[f64]) -> f64 {
    let first = values[0];
    first + values.iter().map(|v| v - first).sum::<f64>() / values.len() as f64
}

/// Final SES level and the sum of squared one-step errors.
fn ses_pass(series: &[f64], alpha: f64) -> (f64, f64) {
    let mut level = series[0];
    let mut sse = 0.0;
    for &x in &series[1..] {
        sse += (x - level) * (x - level);
        level += alpha * (x - level);
    }
    (level, sse)
}

pub fn ses_forecast(series: &[f64], alpha: f64, horizon: usize) -> Result<Vec<f64>> {
    check_alpha(alpha)?;
    check_series(series, 1, "exponential smoothing")?;
    let (level, _) = ses_pass(series, alpha);
    Ok(vec![level; horizon])
}

/// Brown's linear model after the last observation: `(a, b, sse)` where the
/// `h`-step forecast is `a + b h`.
fn brown_pass(series: &[f64], alpha: f64) -> (f64, f64, f64) {
    let ratio = alpha / (1.0 - alpha);
    let (mut s1, mut s2) = (series[0], series[0]);
    let mut sse = 0.0;
    for &x in &series[1..] {
        let predicted = (2.0 * s1 - s2) + ratio * (s1 - s2);
        sse += (x - predicted) * (x - predicted);
        s1 += alpha * (x - s1);
        s2 += alpha * (s1 - s2);
    }
    (2.0 * s1 - s2, ratio * (s1 - s2), sse)
}

fn check_brown_alpha(alpha: f64) -> Result<()> {
    check_alpha(alpha)?;
    if alpha >= 1.0 {
        return Err(Error::invalid("Brown smoothing needs alpha < 1"));
    }
    Ok(())
}

/// Intercept and slope of Brown's model at the end of `series`.
pub fn brown_state(series: &[f64], alpha: f64) -> Result<(f64, f64)> {
    check_brown_alpha(alpha)?;
    check_series(series, 2, "Brown smoothing")?;
    let (a, b, _) = brown_pass(series, alpha);
    Ok((a, b))
}

pub fn brown_forecast(series: &[f64], alpha: f64, horizon: usize) -> Result<Vec<f64>> {
    let (a, b) = brown_state(series, alpha)?;
    Ok((1..=horizon).map(|h| a + b * h as f64).collect())
}

struct HwState {
    level: f64,
    trend: f64,
    /// Seasonal index for each of the last `period` observations, oldest first.
    seasonal: Vec<f64>,
    sse: f64,
}

fn hw_pass(series: &[f64], p: &SmoothingParams, mode: Seasonality) -> HwState {
    let m = p.period;
    let first = mean(&series[..m]);
    let second = mean(&series[m..2 * m]);
    let mut level = first;
    let mut trend = (second - first) / m as f64;
    let mut seasonal: Vec<f64> = series[..m]
        .iter()
        .map(|&x| match mode {
            Seasonality::Additive => x - first,
            Seasonality::Multiplicative => x / first,
        })
        .collect();
    let mut sse = 0.0;
    for (t, &x) in series.iter().enumerate().skip(m) {
        let s = seasonal[t % m];
        let base = level + trend;
        let predicted = match mode {
            Seasonality::Additive => base + s,
            Seasonality::Multiplicative => base * s,
        };
        sse += (x - predicted) * (x - predicted);
        let deseasoned = match mode {
            Seasonality::Additive => x - s,
            Seasonality::Multiplicative => x / s,
        };
        let new_level = base + p.alpha * (deseasoned - base);
        trend += p.beta * ((new_level - level) - trend);
        level = new_level;
        let observed = match mode {
            Seasonality::Additive => x - level,
            Seasonality::Multiplicative => x / level,
        };
        seasonal[t % m] = s + p.gamma_s * (observed - s);
    }
    // rotate so index 0 is the season following the last observation
    let n = series.len();
    let rotated = (0..m).map(|k| seasonal[(n + k) % m]).collect();
    HwState {
        level,
        trend,
        seasonal: rotated,
        sse,
    }
}

fn check_hw(series: &[f64], params: &SmoothingParams, mode: Seasonality) -> Result<()> {
    params.validate_seasonal()?;
    check_series(series, 2 * params.period, "Holt-Winters")?;
    if mode == Seasonality::Multiplicative && series.iter().any(|&x| x <= 0.0) {
        return Err(Error::invalid(
            "multiplicative Holt-Winters needs strictly positive values",
        ));
    }
    Ok(())
}

pub fn holt_winters_forecast(
    series: &[f64],
    params: &SmoothingParams,
    mode: Seasonality,
    horizon: usize,
) -> Result<Vec<f64>> {
    check_hw(series, params, mode)?;
    let st = hw_pass(series, params, mode);
    let m = params.period;
    Ok((1..=horizon)
        .map(|h| {
            let base = st.level + st.trend * h as f64;
            let s = st.seasonal[(h - 1) % m];
            match mode {
                Seasonality::Additive => base + s,
                Seasonality::Multiplicative => base * s,
            }
        })
        .collect())
}

/// Forecast with any of the four methods.
pub fn forecast(
    series: &[f64],
    method: SmoothingMethod,
    params: &SmoothingParams,
    horizon: usize,
) -> Result<Vec<f64>> {
    match method {
        SmoothingMethod::Ses => ses_forecast(series, params.alpha, horizon),
        SmoothingMethod::Brown => brown_forecast(series, params.alpha, horizon),
        SmoothingMethod::HoltWintersAdditive => {
            holt_winters_forecast(series, params, Seasonality::Additive, horizon)
        }
        SmoothingMethod::HoltWintersMultiplicative => {
            holt_winters_forecast(series, params, Seasonality::Multiplicative, horizon)
        }
    }
}

/// In-sample one-step mean squared error of a method at fixed parameters.
pub fn one_step_mse(series: &[f64], method: SmoothingMethod, params: &SmoothingParams) -> Result<f64> {
    let (sse, count) = match method {
        SmoothingMethod::Ses => {
            check_alpha(params.alpha)?;
            check_series(series, 2, "exponential smoothing")?;
            (ses_pass(series, params.alpha).1, series.len() - 1)
        }
        SmoothingMethod::Brown => {
            check_brown_alpha(params.alpha)?;
            check_series(series, 2, "Brown smoothing")?;
            (brown_pass(series, params.alpha).2, series.len() - 1)
        }
        SmoothingMethod::HoltWintersAdditive | SmoothingMethod::HoltWintersMultiplicative => {
            let mode = if method == SmoothingMethod::HoltWintersAdditive {
                Seasonality::Additive
            } else {
                Seasonality::Multiplicative
            };
            check_hw(series, params, mode)?;
            (hw_pass(series, params, mode).sse, series.len() - params.period)
        }
    };
    Ok(sse / count as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FittedSmoothing {
    pub method: SmoothingMethod,
    pub params: SmoothingParams,
    /// In-sample one-step mean squared error at `params`.
    pub mse: f64,
}

fn grid(from: usize, to: usize) -> Vec<f64> {
    (from..=to).map(|k| k as f64 * GRID_STEP).collect()
}

/// Grid search (step 0.05 per coordinate) minimizing in-sample one-step MSE.
/// Candidates are ordered by `(alpha, beta, gamma)` and the first minimum
/// wins, so ties resolve toward smaller parameters.
pub fn fit_smoothing(series: &[f64], method: SmoothingMethod, period: usize) -> Result<FittedSmoothing> {
    let steps = (1.0 / GRID_STEP).round() as usize;
    let alphas = match method {
        SmoothingMethod::Brown => grid(1, steps - 1),
        _ => grid(1, steps),
    };
    let seasonal = matches!(
        method,
        SmoothingMethod::HoltWintersAdditive | SmoothingMethod::HoltWintersMultiplicative
    );
    let others = if seasonal { grid(0, steps) } else { vec![0.0] };
    let mut candidates = Vec::new();
    for &a in &alphas {
        for &b in &others {
            for &g in &others {
                candidates.push(SmoothingParams {
                    alpha: a,
                    beta: b,
                    gamma_s: g,
                    period,
                });
            }
        }
    }
    // surface precondition errors once instead of per cell
    one_step_mse(series, method, &candidates[0])?;
    let scores: Vec<f64> = candidates
        .par_iter()
        .map(|p| one_step_mse(series, method, p).unwrap_or(f64::INFINITY))
        .collect();
    let mut best = 0;
    for (i, &s) in scores.iter().enumerate() {
        if s < scores[best] {
            best = i;
        }
    }
    Ok(FittedSmoothing {
        method,
        params: candidates[best],
        mse: scores[best],
    })
}
