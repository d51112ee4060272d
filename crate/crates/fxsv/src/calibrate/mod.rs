//! Calibration: Nelder-Mead over transformed parameters, cost functions,
//! variance term-structure fits and full-surface calibrations.

mod cost;
mod full;
mod nelder_mead;
mod risk;
mod term_structure;
mod transform;

pub use cost::{
    cost, model_prices, rmse_report, CostKind, CostSpec, CostTarget, MarketCells, RmseReport, FELLER_PENALTY,
};
pub use full::{
    calibrate_full, default_max_iter, symmetric_factor, two_stage_calibration, CalibrationResult, FullOptions,
    Residual, TwoStageResult,
};
pub use nelder_mead::{initial_step, nelder_mead, simplex_volume, NelderMeadConfig, NmResult};
pub use risk::{calibration_risk, CalibrationRisk};
pub use term_structure::{
    calibrate_variance_ts, calibrate_vol_ts_sz, outlier_flags, recalibrate_outliers, sz_vol_curve, OutlierOutcome,
    TsFit, TsModel, OUTLIER_LOG_JUMP, TS_MAX_ITER,
};
pub use transform::{from_free, to_free, ParamMap};

use crate::pricer::PriceError;

#[derive(Debug, thiserror::Error)]
pub enum CalibError {
    #[error("objective not finite at the start point ({0})")]
    NonFiniteObjective(f64),
    #[error("invalid optimizer configuration: {0}")]
    InvalidConfig(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error(transparent)]
    Price(#[from] PriceError),
}

pub type Result<T> = std::result::Result<T, CalibError>;
