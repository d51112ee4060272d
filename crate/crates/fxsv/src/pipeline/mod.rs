//! Batch layer: per-date analysis (implied variance, historical ω/ρ,
//! term structure), starting points and calibrations, plus the file-level
//! commands used by the `fxsv` binary.

mod analysis;
mod commands;
mod report;

pub use analysis::{
    analyze_dates, calibrate_date, estimate_date, start_point, CalibSettings, DateAnalysis, EstimateRow, StartPoint,
    TenorVix,
};
pub use commands::{
    cmd_calibrate, cmd_estimate, cmd_ingest, cmd_pipeline, cmd_report, cmd_risk, cmd_surface, cmd_vix, load_surfaces,
    CalibrationRecord, Outcome, RunManifest,
};
pub use report::{round_json, round_sig, summary_stats, to_json_string, SummaryStats};

use serde::{Deserialize, Serialize};

use crate::calibrate::CalibError;
use crate::charfn::ModelKind;
use crate::estimators::EstimatorError;
use crate::market_data::MarketError;
use crate::moments::MomentsError;

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error(transparent)]
    Market(#[from] MarketError),
    #[error(transparent)]
    Moments(#[from] MomentsError),
    #[error(transparent)]
    Estimator(#[from] EstimatorError),
    #[error(transparent)]
    Calib(#[from] CalibError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error("{0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, PipelineError>;

/// Model as selected on the command line; `Bates2FFeller` is Bates2F
/// calibrated with the Feller penalty.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum ModelChoice {
    Heston,
    Sz,
    #[value(name = "bates2f")]
    #[serde(rename = "bates2f")]
    Bates2F,
    #[value(name = "bates2f-feller")]
    #[serde(rename = "bates2f-feller")]
    Bates2FFeller,
    Ouou,
}

impl ModelChoice {
    pub fn kind(self) -> ModelKind {
        match self {
            ModelChoice::Heston => ModelKind::Heston,
            ModelChoice::Sz => ModelKind::SchobelZhu,
            ModelChoice::Bates2F | ModelChoice::Bates2FFeller => ModelKind::Bates2F,
            ModelChoice::Ouou => ModelKind::Ouou,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            ModelChoice::Heston => "heston",
            ModelChoice::Sz => "sz",
            ModelChoice::Bates2F => "bates2f",
            ModelChoice::Bates2FFeller => "bates2f-feller",
            ModelChoice::Ouou => "ouou",
        }
    }

    /// Variance route (Heston, Bates) versus volatility route (SZ, OUOU).
    pub fn is_variance_route(self) -> bool {
        self.kind().is_cir()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum StartMethod {
    Icm,
    Durrleman,
    Hist,
    Twostage,
    Evp,
    Mevp,
}

impl StartMethod {
    pub fn label(self) -> &'static str {
        match self {
            StartMethod::Icm => "icm",
            StartMethod::Durrleman => "durrleman",
            StartMethod::Hist => "hist",
            StartMethod::Twostage => "twostage",
            StartMethod::Evp => "evp",
            StartMethod::Mevp => "mevp",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum EstimateMethod {
    Icm,
    Durrleman,
    Gr,
    Gs,
    Hist,
}
