#ifndef UTILCAST_FFI_H
#define UTILCAST_FFI_H

#include <stdbool.h>
#include <stddef.h>

// Result code of every fallible call.
typedef enum FcStatus {
  FC_STATUS_OK = 0,
  // A required pointer argument was null.
  FC_STATUS_NULL_POINTER = 1,
  // Arguments were rejected (sizes, ranges, widths).
  FC_STATUS_INVALID_INPUT = 2,
  // A string argument was not valid UTF-8.
  FC_STATUS_INVALID_UTF8 = 3,
  // JSON could not be parsed or did not describe the expected object.
  FC_STATUS_JSON = 4,
  // The data did not allow the computation (constant series, singular system).
  FC_STATUS_NUMERICAL = 5,
  // An internal panic was caught at the boundary.
  FC_STATUS_PANIC = 6,
} FcStatus;

// Statistical tests available through [`fc_diagnostic`].
typedef enum FcTest {
  FC_TEST_MANN_KENDALL = 0,
  FC_TEST_COX_STUART = 1,
  // Seasonality: observations grouped by position modulo 12.
  FC_TEST_KRUSKAL_WALLIS = 2,
  FC_TEST_RUNS = 3,
  // Ljung-Box on the first 12 autocorrelations.
  FC_TEST_LJUNG_BOX = 4,
  FC_TEST_ADF = 5,
  FC_TEST_KPSS = 6,
} FcTest;

// Smoothing methods available through [`fc_baseline_forecast`].
typedef enum FcSmoothing {
  FC_SMOOTHING_SES = 0,
  FC_SMOOTHING_BROWN = 1,
  FC_SMOOTHING_HOLT_WINTERS_ADDITIVE = 2,
  FC_SMOOTHING_HOLT_WINTERS_MULTIPLICATIVE = 3,
} FcSmoothing;

// Opaque random forest handle.
typedef struct FcForest FcForest;

// Opaque epsilon-SVR handle.
typedef struct FcSvr FcSvr;

typedef struct FcMetrics {
  double mape_percent;
  double rmse;
  double mse;
} FcMetrics;

typedef struct FcTestResult {
  double statistic;
  // NaN for tests decided by a critical value.
  double p_value;
  // NaN for tests decided by a p-value.
  double critical_value;
  double alpha;
  // Whether the null hypothesis was rejected at `alpha`.
  bool rejected;
} FcTestResult;

// Smoothing parameters selected by the in-sample grid search.
typedef struct FcSmoothingParams {
  double alpha;
  double beta;
  double gamma;
  // In-sample one-step mean squared error.
  double mse;
} FcSmoothingParams;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or null. Owned by the
// library and valid until the next call on this thread.
const char *fc_last_error(void);

// Library version as a static NUL-terminated string.
const char *fc_version(void);

// Releases a string returned by this library. Null is ignored.
//
// # Safety
// `s` must be null or a string returned by this library, not yet freed.
void fc_string_free(char *s);

// Fits a random forest. `params_json` is null for defaults or a JSON object
// with any of `n_estimators`, `max_depth`, `bootstrap`, `max_features`,
// `min_samples_split`, `seed`.
//
// # Safety
// `rows` must hold `n_rows * n_cols` doubles, `targets` `n_rows` doubles;
// `params_json` null or NUL-terminated; `out` valid.
enum FcStatus fc_forest_fit(const double *rows,
                            size_t n_rows,
                            size_t n_cols,
                            const double *targets,
                            const char *params_json,
                            struct FcForest **out);

// Predicts `n_rows` rows into `out`.
//
// # Safety
// `model` must be a live handle; `rows` must hold `n_rows * n_cols`
// doubles and `out` room for `n_rows`.
enum FcStatus fc_forest_predict(const struct FcForest *model,
                                const double *rows,
                                size_t n_rows,
                                size_t n_cols,
                                double *out);

// Serializes the model; release the string with [`fc_string_free`].
//
// # Safety
// `model` must be a live handle and `out` valid.
enum FcStatus fc_forest_to_json(const struct FcForest *model, char **out);

// # Safety
// `json` must be NUL-terminated and `out` valid.
enum FcStatus fc_forest_from_json(const char *json, struct FcForest **out);

// Number of input features the model expects.
//
// # Safety
// `model` must be null or a live handle.
size_t fc_forest_n_features(const struct FcForest *model);

// Releases a forest. Null is ignored.
//
// # Safety
// `model` must be null or a handle not yet freed.
void fc_forest_free(struct FcForest *model);

// Fits an epsilon-SVR. `params_json` is null for defaults or a JSON object
// with any of `kernel`, `c`, `epsilon`, `tolerance`, `max_iterations`,
// `standardize`; `kernel` is `{"kind": "rbf"|"poly"|"sigmoid", "degree",
// "gamma": "auto"|{"value": g}, "coef0"}`.
//
// # Safety
// As for [`fc_forest_fit`].
enum FcStatus fc_svr_fit(const double *rows,
                         size_t n_rows,
                         size_t n_cols,
                         const double *targets,
                         const char *params_json,
                         struct FcSvr **out);

// # Safety
// As for [`fc_forest_predict`].
enum FcStatus fc_svr_predict(const struct FcSvr *model,
                             const double *rows,
                             size_t n_rows,
                             size_t n_cols,
                             double *out);

// Whether the solver reached its tolerance before the iteration cap.
//
// # Safety
// `model` must be null or a live handle.
bool fc_svr_converged(const struct FcSvr *model);

// # Safety
// `model` must be a live handle and `out` valid.
enum FcStatus fc_svr_to_json(const struct FcSvr *model, char **out);

// # Safety
// `json` must be NUL-terminated and `out` valid.
enum FcStatus fc_svr_from_json(const char *json, struct FcSvr **out);

// # Safety
// `model` must be null or a handle not yet freed.
void fc_svr_free(struct FcSvr *model);

// MAPE (percent), RMSE and MSE of `predicted` against `actual`.
//
// # Safety
// Both arrays must hold `n` doubles; `out` must be valid.
enum FcStatus fc_metrics(const double *actual,
                         const double *predicted,
                         size_t n,
                         struct FcMetrics *out);

// Runs one statistical test on `series` at significance `alpha`.
//
// # Safety
// `series` must hold `n` doubles and `out` must be valid.
enum FcStatus fc_diagnostic(enum FcTest test,
                            const double *series,
                            size_t n,
                            double alpha,
                            struct FcTestResult *out);

// Like [`fc_diagnostic`] but returns the full result, including the
// conclusion, as JSON; release it with [`fc_string_free`].
//
// # Safety
// `series` must hold `n` doubles and `out` must be valid.
enum FcStatus fc_diagnostic_json(enum FcTest test,
                                 const double *series,
                                 size_t n,
                                 double alpha,
                                 char **out);

// Selects smoothing parameters on `series` by grid search and forecasts
// `horizon` steps into `out`. `period` is the seasonal period (Holt-Winters);
// `params_out` may be null.
//
// # Safety
// `series` must hold `n` doubles, `out` room for `horizon` doubles;
// `params_out` null or valid.
enum FcStatus fc_baseline_forecast(enum FcSmoothing method,
                                   const double *series,
                                   size_t n,
                                   size_t period,
                                   size_t horizon,
                                   double *out,
                                   struct FcSmoothingParams *params_out);

// Forecasts with caller-chosen smoothing parameters.
//
// # Safety
// `series` must hold `n` doubles and `out` room for `horizon` doubles.
enum FcStatus fc_baseline_forecast_with(enum FcSmoothing method,
                                        const double *series,
                                        size_t n,
                                        double alpha,
                                        double beta,
                                        double gamma,
                                        size_t period,
                                        size_t horizon,
                                        double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* UTILCAST_FFI_H */
