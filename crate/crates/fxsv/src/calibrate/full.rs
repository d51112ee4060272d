//! Full-surface calibration for one- and two-factor models.

use serde::{Deserialize, Serialize};

use super::cost::{cost, model_prices, rmse_report, CostSpec, MarketCells, RmseReport};
use super::{nelder_mead, CalibError, NelderMeadConfig, ParamMap, Result};
use crate::charfn::{Factor, ModelKind, ModelParams, TwoFactorParams};
use crate::market_data::{Pillar, Tenor, VolSurface};
use crate::pricer::{implied_vol, IntegrationGrid, OptionSpec};

/// Iteration cap: 1600 for five parameters, 800 for ten.
pub fn default_max_iter(kind: ModelKind) -> usize {
    match kind.factor_count() {
        1 => 1600,
        _ => 800,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FullOptions {
    pub cost: CostSpec,
    pub nm: NelderMeadConfig,
    pub grid: IntegrationGrid,
    /// Hold every ρ at its start value.
    pub pinned_rho: bool,
}

impl FullOptions {
    pub fn for_kind(kind: ModelKind) -> Self {
        FullOptions {
            cost: CostSpec::default(),
            nm: NelderMeadConfig::calibration().with_max_iter(default_max_iter(kind)),
            grid: IntegrationGrid::default(),
            pinned_rho: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Residual {
    pub tenor: Tenor,
    pub pillar: Pillar,
    pub strike: f64,
    pub market_vol: f64,
    pub model_vol: Option<f64>,
    /// (C_model − C_market)/vega.
    pub vega_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationResult {
    pub model: ModelKind,
    pub params: ModelParams,
    pub start: ModelParams,
    pub cost: f64,
    pub start_cost: f64,
    pub iterations: usize,
    pub converged: bool,
    pub feller_satisfied: bool,
    pub rmse: RmseReport,
    pub residuals: Vec<Residual>,
    pub flags: Vec<String>,
}

fn admissible(p: &ModelParams) -> bool {
    p.factors().iter().all(|f| {
        f.v0 > 0.0
            && f.theta > 0.0
            && f.kappa > 0.0
            && f.omega > 0.0
            && f.rho.abs() < 1.0
            && f.to_array().iter().all(|v| v.is_finite())
    })
}

/// ω̃ = min(ω, √(1.99θκ)) on every CIR factor.
fn feller_truncate(p: &ModelParams) -> ModelParams {
    if !p.kind().is_cir() {
        return *p;
    }
    let mut x = p.to_vec();
    for f in x.chunks_mut(5) {
        f[3] = f[3].min((1.99 * f[1] * f[2]).sqrt());
    }
    ModelParams::from_vec(p.kind(), &x)
}

fn residuals(model: &ModelParams, cells: &MarketCells, grid: &IntegrationGrid) -> Result<Vec<Residual>> {
    let prices = model_prices(model, cells, grid)?;
    let mut out = Vec::with_capacity(prices.len());
    for (ti, t) in cells.tenors.iter().enumerate() {
        for i in 0..5 {
            let c = prices[ti * 5 + i];
            let spec = OptionSpec::call(cells.spot, t.strikes[i], t.tau, t.r_d, t.r_f);
            out.push(Residual {
                tenor: t.tenor,
                pillar: t.pillars[i],
                strike: t.strikes[i],
                market_vol: t.vols[i],
                model_vol: implied_vol(&spec, c).ok(),
                vega_error: (c - t.prices[i]) / t.vegas[i],
            });
        }
    }
    Ok(out)
}

fn run(
    map: ParamMap,
    cells: &MarketCells,
    opts: &FullOptions,
    start: ModelParams,
    mut flags: Vec<String>,
) -> Result<CalibrationResult> {
    let eval = |m: &ModelParams| cost(m, cells, &opts.cost, &opts.grid);
    let start_cost = eval(&start)?;
    let obj = |z: &[f64]| eval(&map.model(z)).unwrap_or(f64::INFINITY);
    let nm = nelder_mead(obj, &map.start(), &opts.nm)?;
    let params = map.model(&nm.x);
    if !nm.converged {
        flags.push("iteration_cap".into());
    }
    Ok(CalibrationResult {
        model: params.kind(),
        params,
        start,
        cost: nm.f,
        start_cost,
        iterations: nm.iterations,
        converged: nm.converged,
        feller_satisfied: params.feller(),
        rmse: rmse_report(&params, cells, &opts.grid)?,
        residuals: residuals(&params, cells, &opts.grid)?,
        flags,
    })
}

/// Nelder-Mead over exp/tanh-transformed parameters. In Feller mode a
/// start that violates the condition has ω truncated to √(1.99θκ) first.
pub fn calibrate_full(surface: &VolSurface, start: &ModelParams, opts: &FullOptions) -> Result<CalibrationResult> {
    if !admissible(start) {
        return Err(CalibError::InvalidInput(format!("start {start:?} outside the admissible set")));
    }
    let mut flags = Vec::new();
    let mut s = *start;
    if opts.cost.feller && !s.feller() {
        s = feller_truncate(&s);
        flags.push("start_feller_truncated".into());
    }
    let map = if opts.pinned_rho { ParamMap::pinned_rho(&s) } else { ParamMap::full(&s) };
    run(map, &MarketCells::new(surface), opts, s, flags)
}

/// One factor of the symmetric two-factor model matching a one-factor
/// fit: halved ν0, θ for Bates; ν0, θ, ω scaled by 1/√2 for OUOU.
pub fn symmetric_factor(kind: ModelKind, one: &Factor) -> Factor {
    match kind {
        ModelKind::Ouou => {
            let s = std::f64::consts::FRAC_1_SQRT_2;
            Factor::new(one.v0 * s, one.theta * s, one.kappa, one.omega * s, one.rho)
        }
        _ => Factor::new(one.v0 / 2.0, one.theta / 2.0, one.kappa, one.omega, one.rho),
    }
}

fn duplicated(kind: ModelKind, f: Factor) -> ModelParams {
    match kind {
        ModelKind::Ouou => ModelParams::Ouou(TwoFactorParams::ouou(f, f)),
        _ => ModelParams::Bates2F(TwoFactorParams::bates(f, f)),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwoStageResult {
    pub stage1: CalibrationResult,
    pub stage2: CalibrationResult,
}

/// Symmetric five-parameter calibration followed by the unconstrained
/// ten-parameter one. `one_factor` is a Heston (Bates) or Schöbel-Zhu
/// (OUOU) parameter set. With Feller mode on, Bates stage 1 is a Heston
/// calibration with the Feller condition, split and truncated.
pub fn two_stage_calibration(
    kind: ModelKind,
    surface: &VolSurface,
    one_factor: &Factor,
    opts: &FullOptions,
) -> Result<TwoStageResult> {
    if kind.factor_count() != 2 {
        return Err(CalibError::InvalidInput(format!("{kind:?} is not a two-factor model")));
    }
    let cells = MarketCells::new(surface);
    let stage1_opts = FullOptions { nm: opts.nm.with_max_iter(default_max_iter(ModelKind::Heston)), ..*opts };
    let stage2_opts = FullOptions { pinned_rho: false, ..*opts };
    if kind.is_cir() && opts.cost.feller {
        let h = calibrate_full(surface, &ModelParams::Heston(*one_factor), &stage1_opts)?;
        let f = symmetric_factor(kind, &h.params.factors()[0]);
        let split = duplicated(kind, f);
        let start = feller_truncate(&split);
        let mut flags = Vec::new();
        if start != split {
            flags.push("omega_truncated".into());
        }
        let stage2 = run(ParamMap::full(&start), &cells, &stage2_opts, start, flags)?;
        return Ok(TwoStageResult { stage1: h, stage2 });
    }
    let sym = duplicated(kind, symmetric_factor(kind, one_factor));
    if !admissible(&sym) {
        return Err(CalibError::InvalidInput(format!("start {sym:?} outside the admissible set")));
    }
    let stage1 = run(ParamMap::symmetric(&sym), &cells, &stage1_opts, sym, Vec::new())?;
    let stage2 = run(ParamMap::full(&stage1.params), &cells, &stage2_opts, stage1.params, Vec::new())?;
    Ok(TwoStageResult { stage1, stage2 })
}
