use chrono::NaiveDate;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{EstimateMethod, ModelChoice, PipelineError, Result, StartMethod};
use crate::calibrate::{
    calibrate_full, calibrate_variance_ts, calibrate_vol_ts_sz, recalibrate_outliers, symmetric_factor,
    two_stage_calibration, CalibrationResult, CostKind, FullOptions, NelderMeadConfig, OutlierOutcome, TsFit,
};
use crate::charfn::{Factor, ModelKind, ModelParams, TwoFactorParams};
use crate::estimators::{
    durrleman, evp_split, gauthier_rivaille, historical_omega_rho, icm_heston, icm_sz_with, mevp_split, sz_from_heston,
    HistoricalEstimate, HistoricalModel, IcmDenominator, MevpTarget, SzIcmForm, TenorEstimate, TermStructure,
    OMEGA_FLOOR,
};
use crate::market_data::{Tenor, VolSurface};
use crate::moments::{
    corrected_variance, implied_moment_set, implied_variance_vix, sz_expected_vol, ImpliedMomentSet, Strip,
};
use crate::pricer::{gk_price, IntegrationGrid, OptionSpec, Side};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TenorVix {
    pub tenor: Tenor,
    pub tau: f64,
    /// Model-free implied variance V².
    pub v2: f64,
    /// Convexity-corrected Ṽ².
    pub corrected: f64,
    /// Expected-vol target for the SZ term structure.
    pub sz_vol: f64,
    pub skew: f64,
    pub kurt: f64,
}

/// Everything computed for one date before a calibration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DateAnalysis {
    pub surface: VolSurface,
    pub moments: Vec<ImpliedMomentSet>,
    pub vix: Vec<TenorVix>,
    pub hist_heston: HistoricalEstimate,
    pub hist_sz: HistoricalEstimate,
    pub ts_heston: TsFit,
    pub ts_sz: TsFit,
    /// Term-structure outlier refits for this date; the refit replaces the
    /// fit above when it exists.
    pub outliers: Vec<OutlierOutcome>,
}

impl DateAnalysis {
    pub fn date(&self) -> NaiveDate {
        self.surface.date
    }

    pub fn term_structure(&self, variance_route: bool) -> TermStructure {
        let f = if variance_route { &self.ts_heston } else { &self.ts_sz };
        TermStructure { v0: f.v0, theta: f.theta, kappa: f.kappa }
    }
}

fn implied_moments(surface: &VolSurface) -> Result<(Vec<ImpliedMomentSet>, Vec<f64>)> {
    let mut sets = Vec::new();
    let mut v2 = Vec::new();
    for s in &surface.tenors {
        let strip = Strip::from_slice(surface.spot, s);
        v2.push(implied_variance_vix(&strip)?);
        sets.push(implied_moment_set(&strip)?);
    }
    Ok((sets, v2))
}

struct Partial {
    surface: VolSurface,
    moments: Vec<ImpliedMomentSet>,
    v2: Vec<f64>,
    hist: Option<(HistoricalEstimate, HistoricalEstimate)>,
    vix: Vec<TenorVix>,
    ts: Option<(TsFit, TsFit)>,
}

fn fit_term_structures(p: &mut Partial) -> Result<()> {
    let (hh, _) = p.hist.expect("historical estimates precede term-structure fits");
    let taus: Vec<f64> = p.surface.tenors.iter().map(|s| s.tau).collect();
    let corrected: Vec<f64> =
        p.v2.iter().zip(&taus).map(|(&v, &t)| corrected_variance(v, hh.rho, hh.omega, t)).collect();
    let heston = calibrate_variance_ts(&taus, &corrected, None)?;
    let sz_targets = corrected
        .iter()
        .zip(&taus)
        .map(|(&v, &t)| sz_expected_vol(v, heston.v0, heston.theta, heston.kappa, hh.omega, t))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    let sz = calibrate_vol_ts_sz(&taus, &sz_targets, None)?;
    p.vix = p
        .surface
        .tenors
        .iter()
        .enumerate()
        .map(|(i, s)| TenorVix {
            tenor: s.tenor,
            tau: s.tau,
            v2: p.v2[i],
            corrected: corrected[i],
            sz_vol: sz_targets[i],
            skew: p.moments[i].skew,
            kurt: p.moments[i].kurt,
        })
        .collect();
    p.ts = Some((heston, sz));
    Ok(())
}

/// Runs implied variance, historical ω/ρ, convexity correction and both
/// term-structure fits for every date, in chronological order. Historical
/// series skip dates whose implied variance failed.
pub fn analyze_dates(surfaces: &[VolSurface]) -> Vec<Result<DateAnalysis>> {
    let mut parts: Vec<Result<Partial>> = surfaces
        .par_iter()
        .map(|s| {
            let (moments, v2) = implied_moments(s)?;
            if !v2.iter().all(|v| *v > 0.0) {
                return Err(PipelineError::Invalid(format!("{}: non-positive implied variance", s.date)));
            }
            Ok(Partial { surface: s.clone(), moments, v2, hist: None, vix: Vec::new(), ts: None })
        })
        .collect();

    let ok: Vec<usize> = (0..parts.len()).filter(|&i| parts[i].is_ok()).collect();
    let get = |i: usize| parts[i].as_ref().expect("filtered");
    let vix1m: Vec<f64> = ok.iter().map(|&i| get(i).v2[0].sqrt()).collect();
    let spot: Vec<f64> = ok.iter().map(|&i| get(i).surface.spot).collect();
    let hh = historical_omega_rho(&vix1m, &spot, HistoricalModel::Heston);
    let hs = historical_omega_rho(&vix1m, &spot, HistoricalModel::SchobelZhu);
    if let (Ok(hh), Ok(hs)) = (hh, hs) {
        for (k, &i) in ok.iter().enumerate() {
            if let Ok(p) = parts[i].as_mut() {
                p.hist = Some((hh[k], hs[k]));
            }
        }
    }

    parts.par_iter_mut().for_each(|r| {
        if let Ok(p) = r {
            if let Err(e) = fit_term_structures(p) {
                *r = Err(e);
            }
        }
    });

    // Outlier refits run over the chronological series of successful fits.
    let ok: Vec<usize> = (0..parts.len()).filter(|&i| parts[i].is_ok()).collect();
    let mut outcomes: Vec<Vec<OutlierOutcome>> = vec![Vec::new(); parts.len()];
    for variance_route in [true, false] {
        let mut taus = Vec::new();
        let mut targets = Vec::new();
        let mut fits = Vec::new();
        for &i in &ok {
            let p = parts[i].as_ref().expect("filtered");
            let (h, s) = p.ts.as_ref().expect("fitted");
            taus.push(p.vix.iter().map(|v| v.tau).collect::<Vec<_>>());
            if variance_route {
                targets.push(p.vix.iter().map(|v| v.corrected).collect::<Vec<_>>());
                fits.push(h.clone());
            } else {
                targets.push(p.vix.iter().map(|v| v.sz_vol).collect::<Vec<_>>());
                fits.push(s.clone());
            }
        }
        for o in recalibrate_outliers(&taus, &targets, &fits, false) {
            let i = ok[o.index];
            if let (Some(refit), Ok(p)) = (&o.refit, parts[i].as_mut()) {
                let ts = p.ts.as_mut().expect("fitted");
                if variance_route {
                    ts.0 = refit.clone();
                } else {
                    ts.1 = refit.clone();
                }
            }
            outcomes[i].push(o);
        }
    }

    parts
        .into_iter()
        .zip(outcomes)
        .map(|(r, outliers)| {
            let p = r?;
            let (hist_heston, hist_sz) =
                p.hist.ok_or_else(|| PipelineError::Invalid(format!("{}: no historical estimate", p.surface.date)))?;
            let (ts_heston, ts_sz) = p.ts.expect("fitted");
            Ok(DateAnalysis {
                surface: p.surface,
                moments: p.moments,
                vix: p.vix,
                hist_heston,
                hist_sz,
                ts_heston,
                ts_sz,
                outliers,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StartPoint {
    pub params: ModelParams,
    pub pinned_rho: bool,
    /// One-factor parameters behind a two-stage start.
    pub one_factor: Option<Factor>,
    pub flags: Vec<String>,
}

fn push_flags<T: Serialize>(flags: &mut Vec<String>, src: &[T]) {
    for f in src {
        if let Ok(serde_json::Value::String(s)) = serde_json::to_value(f) {
            flags.push(s);
        }
    }
}

/// One-factor (ω, ρ) for the variance or volatility route.
fn omega_rho(
    a: &DateAnalysis,
    variance_route: bool,
    method: StartMethod,
    sz_form: SzIcmForm,
    flags: &mut Vec<String>,
) -> Result<(f64, f64)> {
    let (omega, rho) = match method {
        StartMethod::Hist => {
            let h = if variance_route { a.hist_heston } else { a.hist_sz };
            if h.fallback {
                flags.push("historical_warm_up".into());
            }
            (h.omega, h.rho)
        }
        StartMethod::Durrleman => {
            let e = durrleman(&a.surface, a.vix[0].corrected, Some(a.ts_heston.theta))?;
            push_flags(flags, &e.flags);
            if variance_route {
                (e.omega, e.rho)
            } else {
                sz_from_heston(e.omega, e.rho)
            }
        }
        _ => {
            let e = if variance_route {
                icm_heston(&a.moments, IcmDenominator::Limit)?
            } else {
                icm_sz_with(&a.moments, a.ts_sz.v0, sz_form)?
            };
            push_flags(flags, &e.flags);
            (e.omega, e.rho)
        }
    };
    if !(omega >= OMEGA_FLOOR) {
        flags.push("omega_floored".into());
        return Ok((OMEGA_FLOOR, rho));
    }
    Ok((omega, rho))
}

/// Starting point for `model` by `method`. For two-factor models `icm`,
/// `durrleman` and `hist` select the (ω, ρ) source and use the default
/// split: EVP for Bates2F, MEVP for Bates2F-Feller and OUOU.
pub fn start_point(
    a: &DateAnalysis,
    model: ModelChoice,
    method: StartMethod,
    sz_form: SzIcmForm,
) -> Result<StartPoint> {
    let vr = model.is_variance_route();
    let mut flags = Vec::new();
    let (omega, rho) = omega_rho(a, vr, method, sz_form, &mut flags)?;
    let ts = a.term_structure(vr);
    let one = Factor::new(ts.v0, ts.theta, ts.kappa, omega, rho);
    let kind = model.kind();
    if kind.factor_count() == 1 {
        if matches!(method, StartMethod::Twostage | StartMethod::Evp | StartMethod::Mevp) {
            return Err(PipelineError::Invalid(format!("start {} needs a two-factor model", method.label())));
        }
        let params = if vr { ModelParams::Heston(one) } else { ModelParams::SchobelZhu(one) };
        return Ok(StartPoint { params, pinned_rho: false, one_factor: None, flags });
    }
    let split = match method {
        StartMethod::Evp | StartMethod::Mevp | StartMethod::Twostage => method,
        _ if model == ModelChoice::Bates2F => StartMethod::Evp,
        _ => StartMethod::Mevp,
    };
    match split {
        StartMethod::Twostage => {
            let f = symmetric_factor(kind, &one);
            let params = match kind {
                ModelKind::Ouou => ModelParams::Ouou(TwoFactorParams::ouou(f, f)),
                _ => ModelParams::Bates2F(TwoFactorParams::bates(f, f)),
            };
            Ok(StartPoint { params, pinned_rho: false, one_factor: Some(one), flags })
        }
        StartMethod::Evp => {
            let params = if kind == ModelKind::Ouou {
                let f = symmetric_factor(kind, &one);
                ModelParams::Ouou(TwoFactorParams::ouou(f, f))
            } else {
                ModelParams::Bates2F(evp_split(omega, rho, &ts).params)
            };
            Ok(StartPoint { params, pinned_rho: false, one_factor: None, flags })
        }
        _ => {
            let target = if kind == ModelKind::Ouou { MevpTarget::Ouou } else { MevpTarget::BatesFeller };
            let s = mevp_split(omega, rho, &ts, target);
            push_flags(&mut flags, &s.flags);
            let params =
                if kind == ModelKind::Ouou { ModelParams::Ouou(s.params) } else { ModelParams::Bates2F(s.params) };
            Ok(StartPoint { params, pinned_rho: s.pinned_rho, one_factor: None, flags })
        }
    }
}

/// Choices behind one calibration of one date.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CalibSettings {
    pub model: ModelChoice,
    pub start: StartMethod,
    pub cost: CostKind,
    pub feller: bool,
    pub max_iter: Option<usize>,
    pub nm: NelderMeadConfig,
    pub grid: IntegrationGrid,
    pub sz_icm: SzIcmForm,
}

impl CalibSettings {
    pub fn new(model: ModelChoice, start: StartMethod) -> Self {
        CalibSettings {
            model,
            start,
            cost: CostKind::Mse,
            feller: false,
            max_iter: None,
            nm: NelderMeadConfig::calibration(),
            grid: IntegrationGrid::default(),
            sz_icm: SzIcmForm::Kernel,
        }
    }

    /// Feller mode is implied by the Bates2F-Feller model choice.
    pub fn feller_mode(&self) -> bool {
        self.feller || self.model == ModelChoice::Bates2FFeller
    }

    pub fn full_options(&self) -> FullOptions {
        let mut opts = FullOptions::for_kind(self.model.kind());
        opts.grid = self.grid;
        opts.cost.kind = self.cost;
        opts.cost.feller = self.feller_mode();
        opts.nm = NelderMeadConfig { max_iter: self.max_iter.unwrap_or(opts.nm.max_iter), ..self.nm };
        opts
    }
}

/// Full calibration of one date. Returns the start, the result and, for
/// two-stage starts, the symmetric-stage result.
pub fn calibrate_date(
    a: &DateAnalysis,
    cs: &CalibSettings,
) -> Result<(StartPoint, CalibrationResult, Option<CalibrationResult>)> {
    let start = start_point(a, cs.model, cs.start, cs.sz_icm)?;
    let mut opts = cs.full_options();
    opts.pinned_rho = start.pinned_rho;
    if let Some(one) = start.one_factor {
        let r = two_stage_calibration(cs.model.kind(), &a.surface, &one, &opts)?;
        return Ok((start, r.stage2, Some(r.stage1)));
    }
    let r = calibrate_full(&a.surface, &start.params, &opts)?;
    Ok((start, r, None))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateRow {
    pub date: NaiveDate,
    pub method: EstimateMethod,
    pub model: ModelChoice,
    pub omega: Option<f64>,
    pub rho: Option<f64>,
    pub nu0: Option<f64>,
    pub theta: Option<f64>,
    pub per_tenor: Vec<TenorEstimate>,
    pub flags: Vec<String>,
}

/// Closed-form estimate for one date. Guillaume-Schoutens needs the 1M
/// implied-vol history up to this date, passed in `vix_history`.
pub fn estimate_date(
    a: &DateAnalysis,
    method: EstimateMethod,
    model: ModelChoice,
    sz_form: SzIcmForm,
    vix_history: &[f64],
) -> Result<EstimateRow> {
    let vr = model.is_variance_route();
    let mut row = EstimateRow {
        date: a.date(),
        method,
        model,
        omega: None,
        rho: None,
        nu0: None,
        theta: None,
        per_tenor: Vec::new(),
        flags: Vec::new(),
    };
    match method {
        EstimateMethod::Icm => {
            let e = if vr {
                icm_heston(&a.moments, IcmDenominator::Limit)?
            } else {
                icm_sz_with(&a.moments, a.ts_sz.v0, sz_form)?
            };
            push_flags(&mut row.flags, &e.flags);
            (row.omega, row.rho, row.per_tenor) = (Some(e.omega), Some(e.rho), e.per_tenor);
        }
        EstimateMethod::Durrleman | EstimateMethod::Hist => {
            let m = if method == EstimateMethod::Hist { StartMethod::Hist } else { StartMethod::Durrleman };
            let (w, r) = omega_rho(a, vr, m, sz_form, &mut row.flags)?;
            (row.omega, row.rho) = (Some(w), Some(r));
        }
        EstimateMethod::Gr => {
            row.flags.push("experimental".into());
            let s = &a.surface.tenors[0];
            let put = |i: usize| {
                let spec =
                    OptionSpec::call(a.surface.spot, s.nodes[i].strike, s.tau, s.r_d, s.r_f).with_side(Side::Put);
                (spec, gk_price(&spec, s.nodes[i].vol))
            };
            let (w, r) = gauthier_rivaille([put(0), put(1)], &a.term_structure(true))?;
            (row.omega, row.rho) = (Some(w), Some(r));
        }
        EstimateMethod::Gs => {
            let (nu0, theta) =
                crate::estimators::guillaume_schoutens(vix_history, 1.0, crate::estimators::MovingAverage::Ewma)?;
            (row.nu0, row.theta) = (Some(nu0), Some(theta));
        }
    }
    if row.nu0.is_none() && method != EstimateMethod::Gs {
        let ts = a.term_structure(vr);
        (row.nu0, row.theta) = (Some(ts.v0), Some(ts.theta));
    }
    Ok(row)
}
