//! Monthly utility-consumption forecasting.
//!
//! The crate covers the whole experiment pipeline: CSV ingestion and
//! frequency aggregation ([`data`]), trend/seasonality/stationarity
//! diagnostics ([`diagnostics`]), random forest and epsilon-SVR regressors
//! ([`forest`], [`svr`]), classical smoothing baselines ([`baselines`]), a
//! genetic algorithm for hyperparameter search ([`ga`]), multi-step
//! forecasting and metrics ([`eval`]) and the experiment runner behind the
//! `utilcast` binary ([`experiment`]).

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod baselines;
pub mod data;
pub mod diagnostics;
pub mod error;
pub mod eval;
pub mod experiment;
pub mod forest;
pub mod ga;
pub mod model;
pub mod rng;
pub mod svr;
pub mod tuning;

pub use error::{Error, Result};
pub use model::{Regressor, TrainedModel};
