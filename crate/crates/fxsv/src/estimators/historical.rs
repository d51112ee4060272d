//! Time-series estimators: moving averages of implied variance and
//! EWMA-based historical vol-of-variance and correlation.

use serde::{Deserialize, Serialize};

use super::{EstimatorError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MovingAverage {
    Sma,
    Ewma,
}

/// Recursive EWMA with weight 1/n on the newest value, seeded with the first.
pub fn ewma(xs: &[f64], n: f64) -> Vec<f64> {
    let a = 1.0 / n;
    let mut out = Vec::with_capacity(xs.len());
    let mut e = match xs.first() {
        Some(&x) => x,
        None => return out,
    };
    for &x in xs {
        if !out.is_empty() {
            e = a * x + (1.0 - a) * e;
        }
        out.push(e);
    }
    out
}

/// (ν0, θ) from a daily implied-vol series (decimal): ν0 is the latest
/// squared level, θ the moving average of squared levels over 252·T days.
pub fn guillaume_schoutens(vols: &[f64], window_years: f64, mode: MovingAverage) -> Result<(f64, f64)> {
    let last = *vols.last().ok_or(EstimatorError::ShortSeries(0))?;
    let n = (252.0 * window_years).round().max(1.0);
    let sq: Vec<f64> = vols.iter().map(|v| v * v).collect();
    let theta = match mode {
        MovingAverage::Sma => {
            let tail = &sq[sq.len().saturating_sub(n as usize)..];
            tail.iter().sum::<f64>() / tail.len() as f64
        }
        MovingAverage::Ewma => *ewma(&sq, n).last().unwrap(),
    };
    Ok((last * last, theta))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HistoricalModel {
    Heston,
    SchobelZhu,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HistoricalEstimate {
    pub omega: f64,
    pub rho: f64,
    /// True while the EWMA is still warming up and the fallbacks apply.
    pub fallback: bool,
}

/// Window of the 3M estimators in trading days.
pub const HIST_WINDOW: usize = 63;
/// Leading days without a usable estimate.
pub const WARM_UP: usize = 62;
pub const RHO_FALLBACK: f64 = -0.1;

/// Daily ω, ρ from the 1M implied vol and spot series. Heston works on
/// changes of implied variance, annualized ω = √(252·EWMA(Δv²))/VIX;
/// Schöbel-Zhu on changes of implied vol, ω = √(252·EWMA(ΔVIX²)).
pub fn historical_omega_rho(vix: &[f64], spot: &[f64], model: HistoricalModel) -> Result<Vec<HistoricalEstimate>> {
    if vix.len() != spot.len() {
        return Err(EstimatorError::Misaligned(vix.len(), spot.len()));
    }
    let level = |v: f64| match model {
        HistoricalModel::Heston => v * v,
        HistoricalModel::SchobelZhu => v,
    };
    let dv: Vec<f64> = vix.windows(2).map(|w| level(w[1]) - level(w[0])).collect();
    let dl: Vec<f64> = spot.windows(2).map(|w| (w[1] / w[0]).ln()).collect();
    let n = HIST_WINDOW as f64;
    let e_vv = ewma(&dv.iter().map(|x| x * x).collect::<Vec<_>>(), n);
    let e_ll = ewma(&dl.iter().map(|x| x * x).collect::<Vec<_>>(), n);
    let e_lv = ewma(&dl.iter().zip(&dv).map(|(a, b)| a * b).collect::<Vec<_>>(), n);
    Ok(vix
        .iter()
        .enumerate()
        .map(|(t, &v)| {
            if t < WARM_UP {
                let omega = match model {
                    HistoricalModel::Heston => v,
                    HistoricalModel::SchobelZhu => 0.5 * v,
                };
                return HistoricalEstimate { omega, rho: RHO_FALLBACK, fallback: true };
            }
            let k = t - 1;
            let sd = (252.0 * e_vv[k]).sqrt();
            let omega = match model {
                HistoricalModel::Heston => sd / v,
                HistoricalModel::SchobelZhu => sd,
            };
            let den = (e_ll[k] * e_vv[k]).sqrt();
            let rho = if den > 0.0 { e_lv[k] / den } else { RHO_FALLBACK };
            HistoricalEstimate { omega, rho, fallback: false }
        })
        .collect())
}
