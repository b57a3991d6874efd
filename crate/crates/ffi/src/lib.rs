//! C ABI for the utilcast regressors, metrics, diagnostics and baselines.
//!
//! Conventions:
//! - Every fallible function returns an [`FcStatus`]; on failure a message
//!   is available from [`fc_last_error`] on the same thread.
//! - Models are opaque handles created by `*_fit` or `*_from_json` and
//!   released with the matching `*_free`.
//! - Matrices are row-major `n_rows * n_cols` arrays of `double`.
//! - Strings returned by the library are released with [`fc_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use utilcast::baselines::{self, SmoothingMethod, SmoothingParams, DEFAULT_PERIOD};
use utilcast::diagnostics::{
    self, AdfLag, Decision, KpssBandwidth, TestResult,
};
use utilcast::eval::MetricReport;
use utilcast::forest::{self, ForestModel, ForestParams};
use utilcast::svr::{self, SvrModel, SvrParams};
use utilcast::{Error, Regressor};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FcStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullPointer = 1,
    /// Arguments were rejected (sizes, ranges, widths).
    InvalidInput = 2,
    /// A string argument was not valid UTF-8.
    InvalidUtf8 = 3,
    /// JSON could not be parsed or did not describe the expected object.
    Json = 4,
    /// The data did not allow the computation (constant series, singular system).
    Numerical = 5,
    /// An internal panic was caught at the boundary.
    Panic = 6,
}

/// Statistical tests available through [`fc_diagnostic`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FcTest {
    MannKendall = 0,
    CoxStuart = 1,
    /// Seasonality: observations grouped by position modulo 12.
    KruskalWallis = 2,
    Runs = 3,
    /// Ljung-Box on the first 12 autocorrelations.
    LjungBox = 4,
    Adf = 5,
    Kpss = 6,
}

/// Smoothing methods available through [`fc_baseline_forecast`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FcSmoothing {
    Ses = 0,
    Brown = 1,
    HoltWintersAdditive = 2,
    HoltWintersMultiplicative = 3,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct FcMetrics {
    pub mape_percent: f64,
    pub rmse: f64,
    pub mse: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct FcTestResult {
    pub statistic: f64,
    /// NaN for tests decided by a critical value.
    pub p_value: f64,
    /// NaN for tests decided by a p-value.
    pub critical_value: f64,
    pub alpha: f64,
    /// Whether the null hypothesis was rejected at `alpha`.
    pub rejected: bool,
}

/// Smoothing parameters selected by the in-sample grid search.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct FcSmoothingParams {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    /// In-sample one-step mean squared error.
    pub mse: f64,
}

/// Opaque random forest handle.
pub struct FcForest(ForestModel);

/// Opaque epsilon-SVR handle.
pub struct FcSvr(SvrModel);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(err: &Error) -> FcStatus {
    match err {
        Error::Json(_) => FcStatus::Json,
        Error::Degenerate(_) | Error::SingularMatrix => FcStatus::Numerical,
        _ => FcStatus::InvalidInput,
    }
}

struct Failure(FcStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(status_of(&e), e.to_string())
    }
}

type Outcome = Result<(), Failure>;

/// Runs `f`, translating errors and panics into a status code.
fn guard(f: impl FnOnce() -> Outcome) -> FcStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            FcStatus::Ok
        }
        Ok(Err(Failure(status, message))) => {
            set_last_error(message);
            status
        }
        Err(payload) => {
            let message = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_last_error(format!("internal error: {message}"));
            FcStatus::Panic
        }
    }
}

fn non_null<T>(p: *const T, what: &str) -> Result<(), Failure> {
    if p.is_null() {
        Err(Failure(FcStatus::NullPointer, format!("{what} is null")))
    } else {
        Ok(())
    }
}

fn invalid(message: impl Into<String>) -> Failure {
    Failure(FcStatus::InvalidInput, message.into())
}

/// # Safety
/// `data` must point to `len` readable doubles when `len > 0`.
unsafe fn slice<'a>(data: *const f64, len: usize, what: &str) -> Result<&'a [f64], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    non_null(data, what)?;
    Ok(std::slice::from_raw_parts(data, len))
}

/// # Safety
/// `data` must point to `len` writable doubles when `len > 0`.
unsafe fn slice_mut<'a>(data: *mut f64, len: usize, what: &str) -> Result<&'a mut [f64], Failure> {
    if len == 0 {
        return Ok(&mut []);
    }
    non_null(data, what)?;
    Ok(std::slice::from_raw_parts_mut(data, len))
}

/// # Safety
/// `data` must point to `n_rows * n_cols` readable doubles.
unsafe fn matrix(data: *const f64, n_rows: usize, n_cols: usize) -> Result<Vec<Vec<f64>>, Failure> {
    if n_cols == 0 {
        return Err(invalid("n_cols must be positive"));
    }
    let len = n_rows
        .checked_mul(n_cols)
        .ok_or_else(|| invalid("matrix size overflows"))?;
    Ok(slice(data, len, "rows")?.chunks(n_cols).map(<[f64]>::to_vec).collect())
}

/// # Safety
/// `s` must be null or a NUL-terminated string.
unsafe fn optional_str<'a>(s: *const c_char) -> Result<Option<&'a str>, Failure> {
    if s.is_null() {
        return Ok(None);
    }
    CStr::from_ptr(s)
        .to_str()
        .map(Some)
        .map_err(|e| Failure(FcStatus::InvalidUtf8, e.to_string()))
}

fn parse_json<T: serde::de::DeserializeOwned>(text: &str) -> Result<T, Failure> {
    serde_json::from_str(text).map_err(|e| Failure(FcStatus::Json, e.to_string()))
}

fn feature_names(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("x{i}")).collect()
}

/// # Safety
/// `out` must be a valid pointer.
unsafe fn write_string(out: *mut *mut c_char, text: String) -> Outcome {
    non_null(out, "out")?;
    let c = CString::new(text).map_err(|e| invalid(e.to_string()))?;
    *out = c.into_raw();
    Ok(())
}

/// # Safety
/// `model` must be valid; `rows` must hold `n_rows * n_cols` doubles and
/// `out` room for `n_rows`.
unsafe fn predict_into(
    model: &dyn Regressor,
    rows: *const f64,
    n_rows: usize,
    n_cols: usize,
    out: *mut f64,
) -> Outcome {
    let rows = matrix(rows, n_rows, n_cols)?;
    let out = slice_mut(out, n_rows, "out")?;
    out.copy_from_slice(&model.predict(&rows)?);
    Ok(())
}

/// Message of the last failed call on this thread, or null. Owned by the
/// library and valid until the next call on this thread.
#[no_mangle]
pub extern "C" fn fc_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn fc_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must be null or a string returned by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn fc_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Fits a random forest. `params_json` is null for defaults or a JSON object
/// with any of `n_estimators`, `max_depth`, `bootstrap`, `max_features`,
/// `min_samples_split`, `seed`.
///
/// # Safety
/// `rows` must hold `n_rows * n_cols` doubles, `targets` `n_rows` doubles;
/// `params_json` null or NUL-terminated; `out` valid.
#[no_mangle]
pub unsafe extern "C" fn fc_forest_fit(
    rows: *const f64,
    n_rows: usize,
    n_cols: usize,
    targets: *const f64,
    params_json: *const c_char,
    out: *mut *mut FcForest,
) -> FcStatus {
    guard(|| {
        non_null(out, "out")?;
        let params = match optional_str(params_json)? {
            Some(text) => forest_params(text)?,
            None => ForestParams::default(),
        };
        let x = matrix(rows, n_rows, n_cols)?;
        let y = slice(targets, n_rows, "targets")?;
        let model = forest::fit_forest_rows(&x, y, feature_names(n_cols), &params)?;
        *out = Box::into_raw(Box::new(FcForest(model)));
        Ok(())
    })
}

fn forest_params(text: &str) -> Result<ForestParams, Failure> {
    // missing keys keep their defaults
    let mut value = serde_json::to_value(ForestParams::default()).expect("params serialize");
    merge(&mut value, parse_json(text)?)?;
    serde_json::from_value(value).map_err(|e| Failure(FcStatus::Json, e.to_string()))
}

fn svr_params(text: &str) -> Result<SvrParams, Failure> {
    let mut value = serde_json::to_value(SvrParams::default()).expect("params serialize");
    merge(&mut value, parse_json(text)?)?;
    serde_json::from_value(value).map_err(|e| Failure(FcStatus::Json, e.to_string()))
}

fn merge(base: &mut serde_json::Value, overrides: serde_json::Value) -> Outcome {
    let (Some(base), serde_json::Value::Object(overrides)) = (base.as_object_mut(), overrides) else {
        return Err(Failure(FcStatus::Json, "params must be a JSON object".into()));
    };
    for (k, v) in overrides {
        if !base.contains_key(&k) {
            return Err(Failure(FcStatus::Json, format!("unknown parameter `{k}`")));
        }
        base.insert(k, v);
    }
    Ok(())
}

/// Predicts `n_rows` rows into `out`.
///
/// # Safety
/// `model` must be a live handle; `rows` must hold `n_rows * n_cols`
/// doubles and `out` room for `n_rows`.
#[no_mangle]
pub unsafe extern "C" fn fc_forest_predict(
    model: *const FcForest,
    rows: *const f64,
    n_rows: usize,
    n_cols: usize,
    out: *mut f64,
) -> FcStatus {
    guard(|| {
        non_null(model, "model")?;
        predict_into(&(*model).0, rows, n_rows, n_cols, out)
    })
}

/// Serializes the model; release the string with [`fc_string_free`].
///
/// # Safety
/// `model` must be a live handle and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn fc_forest_to_json(model: *const FcForest, out: *mut *mut c_char) -> FcStatus {
    guard(|| {
        non_null(model, "model")?;
        write_string(out, (*model).0.to_json()?)
    })
}

/// # Safety
/// `json` must be NUL-terminated and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn fc_forest_from_json(json: *const c_char, out: *mut *mut FcForest) -> FcStatus {
    guard(|| {
        non_null(out, "out")?;
        let text = optional_str(json)?.ok_or_else(|| Failure(FcStatus::NullPointer, "json is null".into()))?;
        *out = Box::into_raw(Box::new(FcForest(ForestModel::from_json(text)?)));
        Ok(())
    })
}

/// Number of input features the model expects.
///
/// # Safety
/// `model` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn fc_forest_n_features(model: *const FcForest) -> usize {
    model.as_ref().map_or(0, |m| m.0.feature_names().len())
}

/// Releases a forest. Null is ignored.
///
/// # Safety
/// `model` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn fc_forest_free(model: *mut FcForest) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Fits an epsilon-SVR. `params_json` is null for defaults or a JSON object
/// with any of `kernel`, `c`, `epsilon`, `tolerance`, `max_iterations`,
/// `standardize`; `kernel` is `{"kind": "rbf"|"poly"|"sigmoid", "degree",
/// "gamma": "auto"|{"value": g}, "coef0"}`.
///
/// # Safety
/// As for [`fc_forest_fit`].
#[no_mangle]
pub unsafe extern "C" fn fc_svr_fit(
    rows: *const f64,
    n_rows: usize,
    n_cols: usize,
    targets: *const f64,
    params_json: *const c_char,
    out: *mut *mut FcSvr,
) -> FcStatus {
    guard(|| {
        non_null(out, "out")?;
        let params = match optional_str(params_json)? {
            Some(text) => svr_params(text)?,
            None => SvrParams::default(),
        };
        let x = matrix(rows, n_rows, n_cols)?;
        let y = slice(targets, n_rows, "targets")?;
        let model = svr::fit_svr_rows(&x, y, feature_names(n_cols), &params)?;
        *out = Box::into_raw(Box::new(FcSvr(model)));
        Ok(())
    })
}

/// # Safety
/// As for [`fc_forest_predict`].
#[no_mangle]
pub unsafe extern "C" fn fc_svr_predict(
    model: *const FcSvr,
    rows: *const f64,
    n_rows: usize,
    n_cols: usize,
    out: *mut f64,
) -> FcStatus {
    guard(|| {
        non_null(model, "model")?;
        predict_into(&(*model).0, rows, n_rows, n_cols, out)
    })
}

/// Whether the solver reached its tolerance before the iteration cap.
///
/// # Safety
/// `model` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn fc_svr_converged(model: *const FcSvr) -> bool {
    model.as_ref().is_some_and(|m| m.0.converged)
}

/// # Safety
/// `model` must be a live handle and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn fc_svr_to_json(model: *const FcSvr, out: *mut *mut c_char) -> FcStatus {
    guard(|| {
        non_null(model, "model")?;
        write_string(out, (*model).0.to_json()?)
    })
}

/// # Safety
/// `json` must be NUL-terminated and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn fc_svr_from_json(json: *const c_char, out: *mut *mut FcSvr) -> FcStatus {
    guard(|| {
        non_null(out, "out")?;
        let text = optional_str(json)?.ok_or_else(|| Failure(FcStatus::NullPointer, "json is null".into()))?;
        *out = Box::into_raw(Box::new(FcSvr(SvrModel::from_json(text)?)));
        Ok(())
    })
}

/// # Safety
/// `model` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn fc_svr_free(model: *mut FcSvr) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// MAPE (percent), RMSE and MSE of `predicted` against `actual`.
///
/// # Safety
/// Both arrays must hold `n` doubles; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn fc_metrics(
    actual: *const f64,
    predicted: *const f64,
    n: usize,
    out: *mut FcMetrics,
) -> FcStatus {
    guard(|| {
        non_null(out, "out")?;
        let r = MetricReport::compute(slice(actual, n, "actual")?, slice(predicted, n, "predicted")?)?;
        *out = FcMetrics { mape_percent: r.mape_percent, rmse: r.rmse, mse: r.mse };
        Ok(())
    })
}

fn null_rejected(r: &TestResult) -> bool {
    let rejected = match r.decision {
        Decision::PValue { rejected, .. }
        | Decision::LowerTail { rejected, .. }
        | Decision::UpperTail { rejected, .. } => rejected,
    };
    r.conclusion == rejected
}

fn run_test(test: FcTest, x: &[f64], alpha: f64) -> Result<TestResult, Failure> {
    Ok(match test {
        FcTest::MannKendall => diagnostics::mann_kendall(x, alpha)?,
        FcTest::CoxStuart => diagnostics::cox_stuart(x, alpha)?,
        FcTest::KruskalWallis => {
            let mut groups = vec![Vec::new(); DEFAULT_PERIOD];
            for (i, v) in x.iter().enumerate() {
                groups[i % DEFAULT_PERIOD].push(*v);
            }
            groups.retain(|g| !g.is_empty());
            diagnostics::kruskal_wallis(&groups, alpha)?
        }
        FcTest::Runs => diagnostics::runs_test(x, alpha)?,
        FcTest::LjungBox => diagnostics::ljung_box(x, DEFAULT_PERIOD, alpha)?,
        FcTest::Adf => diagnostics::adf_test(x, AdfLag::Auto, alpha)?,
        FcTest::Kpss => diagnostics::kpss_test(x, KpssBandwidth::Auto, alpha)?,
    })
}

/// Runs one statistical test on `series` at significance `alpha`.
///
/// # Safety
/// `series` must hold `n` doubles and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn fc_diagnostic(
    test: FcTest,
    series: *const f64,
    n: usize,
    alpha: f64,
    out: *mut FcTestResult,
) -> FcStatus {
    guard(|| {
        non_null(out, "out")?;
        let r = run_test(test, slice(series, n, "series")?, alpha)?;
        *out = FcTestResult {
            statistic: r.statistic,
            p_value: r.p_value.unwrap_or(f64::NAN),
            critical_value: r.critical_value.unwrap_or(f64::NAN),
            alpha: r.alpha,
            rejected: null_rejected(&r),
        };
        Ok(())
    })
}

/// Like [`fc_diagnostic`] but returns the full result, including the
/// conclusion, as JSON; release it with [`fc_string_free`].
///
/// # Safety
/// `series` must hold `n` doubles and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn fc_diagnostic_json(
    test: FcTest,
    series: *const f64,
    n: usize,
    alpha: f64,
    out: *mut *mut c_char,
) -> FcStatus {
    guard(|| {
        let r = run_test(test, slice(series, n, "series")?, alpha)?;
        write_string(out, serde_json::to_string(&r).map_err(Error::from)?)
    })
}

fn smoothing_method(m: FcSmoothing) -> SmoothingMethod {
    match m {
        FcSmoothing::Ses => SmoothingMethod::Ses,
        FcSmoothing::Brown => SmoothingMethod::Brown,
        FcSmoothing::HoltWintersAdditive => SmoothingMethod::HoltWintersAdditive,
        FcSmoothing::HoltWintersMultiplicative => SmoothingMethod::HoltWintersMultiplicative,
    }
}

/// Selects smoothing parameters on `series` by grid search and forecasts
/// `horizon` steps into `out`. `period` is the seasonal period (Holt-Winters);
/// `params_out` may be null.
///
/// # Safety
/// `series` must hold `n` doubles, `out` room for `horizon` doubles;
/// `params_out` null or valid.
#[no_mangle]
pub unsafe extern "C" fn fc_baseline_forecast(
    method: FcSmoothing,
    series: *const f64,
    n: usize,
    period: usize,
    horizon: usize,
    out: *mut f64,
    params_out: *mut FcSmoothingParams,
) -> FcStatus {
    guard(|| {
        let x = slice(series, n, "series")?;
        let out = slice_mut(out, horizon, "out")?;
        let method = smoothing_method(method);
        let fitted = baselines::fit_smoothing(x, method, period)?;
        out.copy_from_slice(&baselines::forecast(x, method, &fitted.params, horizon)?);
        if let Some(p) = params_out.as_mut() {
            *p = FcSmoothingParams {
                alpha: fitted.params.alpha,
                beta: fitted.params.beta,
                gamma: fitted.params.gamma_s,
                mse: fitted.mse,
            };
        }
        Ok(())
    })
}

/// Forecasts with caller-chosen smoothing parameters.
///
/// # Safety
/// `series` must hold `n` doubles and `out` room for `horizon` doubles.
#[no_mangle]
pub unsafe extern "C" fn fc_baseline_forecast_with(
    method: FcSmoothing,
    series: *const f64,
    n: usize,
    alpha: f64,
    beta: f64,
    gamma: f64,
    period: usize,
    horizon: usize,
    out: *mut f64,
) -> FcStatus {
    guard(|| {
        let x = slice(series, n, "series")?;
        let out = slice_mut(out, horizon, "out")?;
        let params = SmoothingParams { period, ..SmoothingParams::new(alpha, beta, gamma) };
        out.copy_from_slice(&baselines::forecast(x, smoothing_method(method), &params, horizon)?);
        Ok(())
    })
}
