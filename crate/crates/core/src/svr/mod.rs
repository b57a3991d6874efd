//! Epsilon-insensitive support vector regression.

mod kernel;
mod scaler;
mod smo;

use serde::{Deserialize, Serialize};

use crate::data::FeatureTable;
use crate::error::{Error, Result};
use crate::model::{check_width, Regressor};

pub use kernel::{kernel_eval, Gamma, KernelKind, KernelSpec};
pub use scaler::{standardize, Scaler};
pub use smo::{SmoSolver, StepOutcome};

/// Optimizer search range for `C`.
pub const C_RANGE: (f64, f64) = (1.0, 3000.0);
/// Optimizer search range for `epsilon`.
pub const EPSILON_RANGE: (f64, f64) = (1e-5, 1.0);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvrParams {
    pub kernel: KernelSpec,
    pub c: f64,
    pub epsilon: f64,
    /// Stop once the maximal KKT violation is at most this.
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Z-score the inputs with training statistics before fitting.
    pub standardize: bool,
}

impl Default for SvrParams {
    fn default() -> Self {
        Self {
            kernel: KernelSpec::new(KernelKind::Rbf),
            c: 1.0,
            epsilon: 0.1,
            tolerance: 1e-3,
            max_iterations: 100_000,
            standardize: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvrModel {
    /// Training rows with a non-zero coefficient, in scaled coordinates.
    pub support_vectors: Vec<Vec<f64>>,
    pub dual_coefficients: Vec<f64>,
    pub bias: f64,
    pub scaler: Scaler,
    /// Kernel with its gamma resolved.
    pub kernel: KernelSpec,
    pub feature_names: Vec<String>,
    pub converged: bool,
    pub iterations: usize,
    /// Maximal KKT violation when the solver stopped.
    pub final_violation: f64,
    pub dual_objective: f64,
}

impl SvrModel {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let model: SvrModel = serde_json::from_str(text)?;
        model.kernel.gamma_value()?;
        if model.support_vectors.len() != model.dual_coefficients.len() {
            return Err(Error::invalid("support vector and coefficient counts differ"));
        }
        if model.scaler.width() != model.feature_names.len()
            || model.support_vectors.iter().any(|v| v.len() != model.feature_names.len())
        {
            return Err(Error::invalid("inconsistent SVR model widths"));
        }
        Ok(model)
    }

    /// Decision value for an already scaled row.
    fn decision(&self, scaled: &[f64]) -> f64 {
        let gamma = self.kernel.gamma_value().expect("resolved at fit");
        self.support_vectors
            .iter()
            .zip(&self.dual_coefficients)
            .map(|(sv, c)| c * self.kernel.eval_unchecked(gamma, sv, scaled))
            .sum::<f64>()
            + self.bias
    }
}

impl Regressor for SvrModel {
    fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    fn predict_row(&self, row: &[f64]) -> f64 {
        self.decision(&self.scaler.transform_row(row))
    }
}

pub fn fit_svr(table: &FeatureTable, params: &SvrParams) -> Result<SvrModel> {
    fit_svr_rows(&table.rows(), table.target(), table.feature_names(), params)
}

/// Fits on raw rows. Hitting `max_iterations` is not an error: the model is
/// returned with `converged = false`.
pub fn fit_svr_rows(
    rows: &[Vec<f64>],
    targets: &[f64],
    feature_names: Vec<String>,
    params: &SvrParams,
) -> Result<SvrModel> {
    if rows.len() < 2 {
        return Err(Error::invalid(format!(
            "SVR needs at least 2 training rows, got {}",
            rows.len()
        )));
    }
    if rows.len() != targets.len() {
        return Err(Error::invalid(format!(
            "{} rows but {} targets",
            rows.len(),
            targets.len()
        )));
    }
    for r in rows {
        check_width(feature_names.len(), r.len())?;
    }
    let (scaler, scaled) = if params.standardize {
        standardize(rows)?
    } else {
        (Scaler::identity(feature_names.len()), rows.to_vec())
    };
    let kernel = params.kernel.resolve(&scaled)?;
    let gamma = kernel.gamma_value()?;
    let n = scaled.len();
    let mut gram = vec![0.0; n * n];
    for i in 0..n {
        for j in i..n {
            let k = kernel.eval_unchecked(gamma, &scaled[i], &scaled[j]);
            gram[i * n + j] = k;
            gram[j * n + i] = k;
        }
    }
    let mut solver = SmoSolver::new(gram, targets, params.c, params.epsilon, params.tolerance)?;
    let (iterations, converged) = solver.run(params.max_iterations);
    if !converged {
        log::debug!(
            "SVR stopped after {iterations} iterations with violation {:.3e}",
            solver.max_violation()
        );
    }
    let coefficients = solver.dual_coefficients();
    let (support_vectors, dual_coefficients) = scaled
        .into_iter()
        .zip(coefficients)
        .filter(|(_, c)| *c != 0.0)
        .unzip();
    Ok(SvrModel {
        support_vectors,
        dual_coefficients,
        bias: solver.bias(),
        scaler,
        kernel,
        feature_names,
        converged,
        iterations,
        final_violation: solver.max_violation(),
        dual_objective: solver.objective(),
    })
}

pub fn predict(model: &SvrModel, rows: &[Vec<f64>]) -> Result<Vec<f64>> {
    model.predict(rows)
}
