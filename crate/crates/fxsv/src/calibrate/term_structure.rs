//! Three-parameter fits of (ν0, θ, κ) to an implied term structure.

use serde::{Deserialize, Serialize};

use super::{nelder_mead, CalibError, NelderMeadConfig, Result};
use crate::moments::heston_total_variance;

pub const TS_MAX_ITER: usize = 8000;
/// Log-jump above the running maximum that marks a fitted value as an outlier.
pub const OUTLIER_LOG_JUMP: f64 = 0.4;

const HESTON_KAPPA_START: f64 = 2.0;
const SZ_KAPPA_START: f64 = 0.95;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TsModel {
    /// Targets are variances Ṽ²; the curve is √(expected integrated variance).
    HestonVariance,
    /// Targets are expected vols; the curve is the OU mean-vol curve.
    SzVol,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TsFit {
    pub model: TsModel,
    pub v0: f64,
    pub theta: f64,
    pub kappa: f64,
    pub start: [f64; 3],
    pub cost: f64,
    pub iterations: usize,
    pub converged: bool,
    /// ν0 ≈ θ, so κ does not move the curve.
    pub kappa_unidentified: bool,
}

/// θ + (ν0 − θ)(1 − e^{−κτ})/(κτ).
pub fn sz_vol_curve(v0: f64, theta: f64, kappa: f64, tau: f64) -> f64 {
    heston_total_variance(v0, theta, kappa, tau)
}

/// Squared vol errors at the 1e-6 level are 1e-12, so the default
/// tolerances would stop on the first plateau; the term-structure fits
/// use tighter ones within the larger iteration budget.
pub fn ts_config() -> NelderMeadConfig {
    NelderMeadConfig { eps_f: 1e-18, eps_vol: 1e-15, ..NelderMeadConfig::default().with_max_iter(TS_MAX_ITER) }
}

fn curve(model: TsModel, p: [f64; 3], tau: f64) -> f64 {
    match model {
        TsModel::HestonVariance => heston_total_variance(p[0], p[1], p[2], tau).sqrt(),
        TsModel::SzVol => sz_vol_curve(p[0], p[1], p[2], tau),
    }
}

fn fit(model: TsModel, taus: &[f64], targets: &[f64], start: [f64; 3]) -> Result<TsFit> {
    if taus.len() != targets.len() || taus.len() < 3 {
        return Err(CalibError::InvalidInput(format!("{} tenors for {} targets", taus.len(), targets.len())));
    }
    if taus.windows(2).any(|w| !(w[0] < w[1])) || targets.iter().any(|v| !(*v > 0.0)) {
        return Err(CalibError::InvalidInput("tenors must increase and targets be positive".into()));
    }
    if start.iter().any(|v| !(*v > 0.0)) {
        return Err(CalibError::InvalidInput(format!("start {start:?} not positive")));
    }
    let goal: Vec<f64> = match model {
        TsModel::HestonVariance => targets.iter().map(|v| v.sqrt()).collect(),
        TsModel::SzVol => targets.to_vec(),
    };
    // The shortest tenor is excluded from the objective.
    let obj = |z: &[f64]| {
        let p = [z[0].exp(), z[1].exp(), z[2].exp()];
        taus.iter().zip(&goal).skip(1).map(|(&t, &g)| (curve(model, p, t) - g).powi(2)).sum::<f64>()
    };
    let z0: Vec<f64> = start.iter().map(|v| v.ln()).collect();
    let nm = nelder_mead(obj, &z0, &ts_config())?;
    let (v0, theta, kappa) = (nm.x[0].exp(), nm.x[1].exp(), nm.x[2].exp());
    Ok(TsFit {
        model,
        v0,
        theta,
        kappa,
        start,
        cost: nm.f,
        iterations: nm.iterations,
        converged: nm.converged,
        kappa_unidentified: (v0 - theta).abs() <= 1e-4 * theta,
    })
}

/// Fits √(Heston expected variance) to √Ṽ². `start` overrides
/// (ν0, θ, κ) = (Ṽ²(τ_min), Ṽ²(τ_max), 2).
pub fn calibrate_variance_ts(taus: &[f64], variances: &[f64], start: Option<[f64; 3]>) -> Result<TsFit> {
    let s = start.unwrap_or_else(|| {
        [variances.first().copied().unwrap_or(0.0), variances.last().copied().unwrap_or(0.0), HESTON_KAPPA_START]
    });
    fit(TsModel::HestonVariance, taus, variances, s)
}

/// Fits the OU mean-vol curve to expected vols; default κ start 0.95.
pub fn calibrate_vol_ts_sz(taus: &[f64], vols: &[f64], start: Option<[f64; 3]>) -> Result<TsFit> {
    let s = start
        .unwrap_or_else(|| [vols.first().copied().unwrap_or(0.0), vols.last().copied().unwrap_or(0.0), SZ_KAPPA_START]);
    fit(TsModel::SzVol, taus, vols, s)
}

/// Day t is an outlier when ln p_t exceeds the maximum of all earlier
/// ln p by more than [`OUTLIER_LOG_JUMP`]. Non-positive values are skipped.
pub fn outlier_flags(series: &[f64]) -> Vec<bool> {
    let mut peak: Option<f64> = None;
    series
        .iter()
        .map(|&p| {
            if !(p > 0.0) {
                return false;
            }
            let l = p.ln();
            let flag = peak.is_some_and(|m| l - m > OUTLIER_LOG_JUMP);
            let peak = peak.get_or_insert(l);
            *peak = peak.max(l);
            flag
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutlierOutcome {
    pub index: usize,
    /// "v0" or "theta".
    pub param: String,
    pub original: TsFit,
    pub refit: Option<TsFit>,
}

/// Refits every outlier day once, doubling the start value of the
/// offending parameter. With `feller_kappa`, θ outliers also start from
/// 100κ. Days with both parameters flagged are refit for each.
pub fn recalibrate_outliers(
    taus: &[Vec<f64>],
    targets: &[Vec<f64>],
    fits: &[TsFit],
    feller_kappa: bool,
) -> Vec<OutlierOutcome> {
    let v0s: Vec<f64> = fits.iter().map(|f| f.v0).collect();
    let thetas: Vec<f64> = fits.iter().map(|f| f.theta).collect();
    let mut out = Vec::new();
    for (slot, name, flags) in [(0usize, "v0", outlier_flags(&v0s)), (1, "theta", outlier_flags(&thetas))] {
        for (i, _) in flags.iter().enumerate().filter(|(_, f)| **f) {
            let orig = &fits[i];
            let mut start = orig.start;
            start[slot] *= 2.0;
            if feller_kappa && slot == 1 {
                start[2] *= 100.0;
            }
            let refit = fit(orig.model, &taus[i], &targets[i], start).ok();
            out.push(OutlierOutcome { index: i, param: name.to_string(), original: orig.clone(), refit });
        }
    }
    out.sort_by_key(|o| o.index);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const TAUS: [f64; 6] = [1.0 / 12.0, 0.25, 0.5, 0.75, 1.0, 2.0];

    #[test]
    fn heston_self_consistency() {
        let (v0, th, k) = (0.01, 0.02, 2.0);
        let var: Vec<f64> = TAUS.iter().map(|&t| heston_total_variance(v0, th, k, t)).collect();
        let f = calibrate_variance_ts(&TAUS, &var, None).unwrap();
        assert!(f.converged, "{f:?}");
        for &t in &TAUS[1..] {
            let r =
                heston_total_variance(f.v0, f.theta, f.kappa, t).sqrt() - heston_total_variance(v0, th, k, t).sqrt();
            assert!(r.abs() < 1e-6, "{t} {r}");
        }
        assert!((f.theta - th).abs() < 1e-3 && (f.kappa - k).abs() < 0.2, "{f:?}");
        assert!(!f.kappa_unidentified);
    }

    #[test]
    fn flat_term_structure() {
        let var = [0.01; 6];
        let f = calibrate_variance_ts(&TAUS, &var, None).unwrap();
        assert!(f.converged);
        assert!(f.cost < 1e-12);
        assert!((f.v0 - 0.01).abs() < 1e-5 && (f.theta - 0.01).abs() < 1e-5, "{f:?}");
        assert!(f.kappa_unidentified);
    }

    #[test]
    fn sz_self_consistency() {
        let (v0, th, k) = (0.08, 0.11, 0.9);
        let vols: Vec<f64> = TAUS.iter().map(|&t| sz_vol_curve(v0, th, k, t)).collect();
        let f = calibrate_vol_ts_sz(&TAUS, &vols, None).unwrap();
        for &t in &TAUS[1..] {
            assert!((sz_vol_curve(f.v0, f.theta, f.kappa, t) - sz_vol_curve(v0, th, k, t)).abs() < 1e-6);
        }
        let flat = calibrate_vol_ts_sz(&TAUS, &[0.1; 6], None).unwrap();
        assert!(flat.cost < 1e-12 && flat.kappa_unidentified);
    }

    #[test]
    fn bad_inputs() {
        assert!(calibrate_variance_ts(&TAUS[..2], &[0.01, 0.01], None).is_err());
        assert!(calibrate_variance_ts(&TAUS, &[0.01, 0.01, -1.0, 0.01, 0.01, 0.01], None).is_err());
    }

    #[test]
    fn outliers() {
        assert!(outlier_flags(&[0.01, 0.011, 0.012, 0.0125]).iter().all(|f| !f));
        assert_eq!(outlier_flags(&[0.01, 0.01, 0.02, 0.01]), vec![false, false, true, false]);
        assert_eq!(outlier_flags(&[0.01, 0.01, 0.014, 0.01]), vec![false; 4]);
    }

    #[test]
    fn recalibration_stores_both() {
        let days: Vec<Vec<f64>> = [0.01, 0.01, 0.03]
            .iter()
            .map(|&v0| TAUS.iter().map(|&t| heston_total_variance(v0, 0.02, 2.0, t)).collect())
            .collect();
        let taus = vec![TAUS.to_vec(); 3];
        let fits: Vec<TsFit> = days.iter().map(|d| calibrate_variance_ts(&TAUS, d, None).unwrap()).collect();
        let out = recalibrate_outliers(&taus, &days, &fits, false);
        assert!(!out.is_empty());
        assert!(out.iter().all(|o| o.index == 2 && o.refit.is_some()));
        let o = out.iter().find(|o| o.param == "v0").unwrap();
        assert_eq!(o.refit.as_ref().unwrap().start[0], 2.0 * o.original.start[0]);
    }
}
