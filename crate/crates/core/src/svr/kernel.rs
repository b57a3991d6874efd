use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::check_width;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelKind {
    Poly,
    Rbf,
    Sigmoid,
}

impl KernelKind {
    pub const ALL: [KernelKind; 3] = [KernelKind::Poly, KernelKind::Sigmoid, KernelKind::Rbf];

    pub fn as_str(self) -> &'static str {
        match self {
            KernelKind::Poly => "poly",
            KernelKind::Rbf => "rbf",
            KernelKind::Sigmoid => "sigmoid",
        }
    }
}

impl fmt::Display for KernelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for KernelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "poly" => Ok(KernelKind::Poly),
            "rbf" => Ok(KernelKind::Rbf),
            "sigmoid" => Ok(KernelKind::Sigmoid),
            other => Err(Error::invalid(format!(
                "unknown kernel `{other}` (expected poly, rbf or sigmoid)"
            ))),
        }
    }
}

/// Kernel width: a fixed value or scaled to the training data.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Gamma {
    /// `1 / (n_features * variance of the standardized training matrix)`.
    Auto,
    Value(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec {
    pub kind: KernelKind,
    /// Polynomial degree; ignored by the other kernels.
    pub degree: u32,
    pub gamma: Gamma,
    pub coef0: f64,
}

impl KernelSpec {
    pub fn new(kind: KernelKind) -> Self {
        Self {
            kind,
            degree: 3,
            gamma: Gamma::Auto,
            coef0: 0.0,
        }
    }

    pub fn rbf(gamma: f64) -> Self {
        Self {
            gamma: Gamma::Value(gamma),
            ..Self::new(KernelKind::Rbf)
        }
    }

    /// Replaces an automatic gamma with its value on `rows`.
    pub fn resolve(&self, rows: &[Vec<f64>]) -> Result<KernelSpec> {
        let gamma = match self.gamma {
            Gamma::Value(g) => g,
            Gamma::Auto => auto_gamma(rows),
        };
        let resolved = KernelSpec {
            gamma: Gamma::Value(gamma),
            ..self.clone()
        };
        resolved.gamma_value()?;
        Ok(resolved)
    }

    /// The resolved, strictly positive gamma.
    pub fn gamma_value(&self) -> Result<f64> {
        match self.gamma {
            Gamma::Value(g) if g > 0.0 && g.is_finite() => Ok(g),
            Gamma::Value(g) => Err(Error::invalid(format!("kernel gamma must be > 0, got {g}"))),
            Gamma::Auto => Err(Error::invalid("kernel gamma is unresolved")),
        }
    }

    pub(crate) fn eval_unchecked(&self, gamma: f64, a: &[f64], b: &[f64]) -> f64 {
        match self.kind {
            KernelKind::Rbf => {
                let d2: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
                (-gamma * d2).exp()
            }
            KernelKind::Poly => (gamma * dot(a, b) + self.coef0).powi(self.degree as i32),
            KernelKind::Sigmoid => (gamma * dot(a, b) + self.coef0).tanh(),
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn auto_gamma(rows: &[Vec<f64>]) -> f64 {
    let width = rows.first().map_or(0, Vec::len);
    let count = (rows.len() * width) as f64;
    if count == 0.0 {
        return 1.0;
    }
    let mean = rows.iter().flatten().sum::<f64>() / count;
    let var = rows.iter().flatten().map(|v| (v - mean) * (v - mean)).sum::<f64>() / count;
    if var > 0.0 {
        1.0 / (width as f64 * var)
    } else {
        1.0
    }
}

/// Kernel value between two rows; the gamma must already be resolved.
pub fn kernel_eval(k: &KernelSpec, a: &[f64], b: &[f64]) -> Result<f64> {
    check_width(a.len(), b.len())?;
    let gamma = k.gamma_value()?;
    Ok(k.eval_unchecked(gamma, a, b))
}
