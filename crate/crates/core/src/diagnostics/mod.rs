//! Trend, seasonality, randomness and stationarity diagnostics.
//!
//! Every test returns a [`TestResult`] whose conclusion follows mechanically
//! from its p-value (or, for the unit-root tests, from the statistic against a
//! tabulated critical value) at the configured significance level.

mod battery;
mod correlogram;
mod seasonality;
mod trend;
mod unit_root;

use std::fmt;

use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

pub use battery::{run_battery, DiagnosticRow, DiagnosticsReport};
pub use correlogram::{acf, ljung_box, pacf, Correlogram};
pub use seasonality::{kruskal_wallis, kruskal_wallis_seasonality};
pub use trend::{cox_stuart, mann_kendall, runs_test};
pub use unit_root::{
    adf_critical_values, adf_test, adf_test_with_lag, kpss_test, newey_west_bandwidth, schwert_lag,
    AdfLag, KpssBandwidth,
};

/// Default significance level.
pub const DEFAULT_ALPHA: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Conclusion {
    Trend,
    NoTrend,
    Seasonal,
    NoSeasonality,
    Stationary,
    NonStationary,
    Random,
    NonRandom,
}

impl fmt::Display for Conclusion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Conclusion::Trend => "trend",
            Conclusion::NoTrend => "no-trend",
            Conclusion::Seasonal => "seasonal",
            Conclusion::NoSeasonality => "no-seasonality",
            Conclusion::Stationary => "stationary",
            Conclusion::NonStationary => "non-stationary",
            Conclusion::Random => "random",
            Conclusion::NonRandom => "non-random",
        };
        f.write_str(s)
    }
}

/// How a test's rejection rule maps onto conclusions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Decision {
    /// Reject when `p < alpha`; `(rejected, retained)` conclusions.
    PValue {
        rejected: Conclusion,
        retained: Conclusion,
    },
    /// Reject when `statistic < critical`.
    LowerTail {
        rejected: Conclusion,
        retained: Conclusion,
    },
    /// Reject when `statistic > critical`.
    UpperTail {
        rejected: Conclusion,
        retained: Conclusion,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub test_name: String,
    pub statistic: f64,
    /// Absent for tests decided only by critical-value comparison.
    pub p_value: Option<f64>,
    pub alpha: f64,
    /// Critical value at `alpha` for critical-value tests.
    pub critical_value: Option<f64>,
    pub decision: Decision,
    pub conclusion: Conclusion,
}

impl TestResult {
    pub(crate) fn from_p_value(
        name: &str,
        statistic: f64,
        p_value: f64,
        alpha: f64,
        rejected: Conclusion,
        retained: Conclusion,
    ) -> Self {
        let p_value = p_value.clamp(0.0, 1.0);
        let decision = Decision::PValue { rejected, retained };
        Self {
            test_name: name.to_string(),
            statistic,
            p_value: Some(p_value),
            alpha,
            critical_value: None,
            decision,
            conclusion: decide(decision, statistic, Some(p_value), alpha, None),
        }
    }

    pub(crate) fn from_critical(
        name: &str,
        statistic: f64,
        critical: f64,
        alpha: f64,
        decision: Decision,
    ) -> Self {
        Self {
            test_name: name.to_string(),
            statistic,
            p_value: None,
            alpha,
            critical_value: Some(critical),
            decision,
            conclusion: decide(decision, statistic, None, alpha, Some(critical)),
        }
    }

    /// Recomputes the conclusion from the stored numbers.
    pub fn expected_conclusion(&self) -> Conclusion {
        decide(
            self.decision,
            self.statistic,
            self.p_value,
            self.alpha,
            self.critical_value,
        )
    }
}

fn decide(
    decision: Decision,
    statistic: f64,
    p_value: Option<f64>,
    alpha: f64,
    critical: Option<f64>,
) -> Conclusion {
    match decision {
        Decision::PValue { rejected, retained } => {
            if p_value.expect("p-value decision") < alpha {
                rejected
            } else {
                retained
            }
        }
        Decision::LowerTail { rejected, retained } => {
            if statistic < critical.expect("critical value") {
                rejected
            } else {
                retained
            }
        }
        Decision::UpperTail { rejected, retained } => {
            if statistic > critical.expect("critical value") {
                rejected
            } else {
                retained
            }
        }
    }
}

/// Two-sided standard-normal tail probability.
pub(crate) fn two_sided_normal_p(z: f64) -> f64 {
    erfc(z.abs() / std::f64::consts::SQRT_2).clamp(0.0, 1.0)
}

pub(crate) fn check_alpha(alpha: f64) -> crate::Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(crate::Error::invalid(format!("alpha {alpha} outside (0, 1)")))
    }
}
