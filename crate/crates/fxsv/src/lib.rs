//! Stochastic-volatility calibration for FX option surfaces.
//!
//! The crate goes from OTC strategy quotes to calibrated Heston,
//! Schöbel-Zhu, Bates two-factor and OUOU parameters:
//!
//! * [`market_data`] turns ATM/risk-reversal/butterfly quotes into smiles,
//!   rates and strikes.
//! * [`charfn`] holds the closed-form characteristic functions.
//! * [`pricer`] prices vanillas by Garman-Kohlhagen and by Fourier
//!   inversion (Attari, Gil-Pelaez, Carr-Madan).
//! * [`moments`] extracts model-free implied moments from option strips.
//! * [`estimators`] gives closed-form parameter estimates used as
//!   calibration starting points.
//! * [`calibrate`] runs Nelder-Mead calibrations and calibration risk.
//! * [`pipeline`] is the batch layer behind the `fxsv` binary.

// `!(x > 0.0)` is used on purpose so NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod calibrate;
pub mod charfn;
pub mod estimators;
pub mod market_data;
pub mod moments;
pub mod normal;
pub mod pipeline;
pub mod pricer;
pub mod synthetic;

pub use charfn::{Factor, ModelKind, ModelParams, TwoFactorParams};
pub use market_data::VolSurface;
