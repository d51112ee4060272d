//! Cost functions over the 30-cell surface.
//!
//! Market prices and vegas are computed once per surface; a cost
//! evaluation only reprices the model, one tenor at a time.

use serde::{Deserialize, Serialize};

use super::{CalibError, Result};
use crate::charfn::ModelParams;
use crate::market_data::{Pillar, Tenor, VolSurface};
use crate::pricer::{attari_strip, bs_vega, gk_price, implied_vol, IntegrationGrid, OptionSpec};

/// Cost returned when Feller mode is on and a CIR factor violates 2κθ > ω².
pub const FELLER_PENALTY: f64 = 999.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum CostKind {
    Mse,
    Mae,
    Mape,
    Mspe,
}

impl CostKind {
    fn term(self, model: f64, market: f64) -> f64 {
        let e = model - market;
        match self {
            CostKind::Mse => e * e,
            CostKind::Mae => e.abs(),
            CostKind::Mape => (e / market).abs(),
            CostKind::Mspe => (e / market) * (e / market),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CostTarget {
    /// v = C / vega with the market vega.
    VegaWeightedPrice,
    /// v = Black-Scholes implied vol of the model price.
    ImpliedVol,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostSpec {
    pub kind: CostKind,
    pub target: CostTarget,
    pub vega_floor: f64,
    pub feller: bool,
}

impl Default for CostSpec {
    fn default() -> Self {
        CostSpec { kind: CostKind::Mse, target: CostTarget::VegaWeightedPrice, vega_floor: 1e-8, feller: false }
    }
}

impl CostSpec {
    pub fn new(kind: CostKind) -> Self {
        CostSpec { kind, ..Self::default() }
    }

    pub fn with_feller(self, feller: bool) -> Self {
        CostSpec { feller, ..self }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TenorCells {
    pub tenor: Tenor,
    pub tau: f64,
    pub r_d: f64,
    pub r_f: f64,
    pub pillars: [Pillar; 5],
    pub strikes: [f64; 5],
    pub vols: [f64; 5],
    pub prices: [f64; 5],
    pub vegas: [f64; 5],
}

/// Market side of the cost: call prices and vegas per cell.
#[derive(Debug, Clone, PartialEq)]
pub struct MarketCells {
    pub spot: f64,
    pub tenors: Vec<TenorCells>,
}

impl MarketCells {
    pub fn new(surface: &VolSurface) -> Self {
        let tenors = surface
            .tenors
            .iter()
            .map(|s| {
                let spec = |i: usize| OptionSpec::call(surface.spot, s.nodes[i].strike, s.tau, s.r_d, s.r_f);
                let vols = s.nodes.map(|n| n.vol);
                TenorCells {
                    tenor: s.tenor,
                    tau: s.tau,
                    r_d: s.r_d,
                    r_f: s.r_f,
                    pillars: s.nodes.map(|n| n.pillar),
                    strikes: s.strikes(),
                    vols,
                    prices: std::array::from_fn(|i| gk_price(&spec(i), vols[i])),
                    vegas: std::array::from_fn(|i| bs_vega(&spec(i), vols[i])),
                }
            })
            .collect();
        MarketCells { spot: surface.spot, tenors }
    }

    pub fn len(&self) -> usize {
        self.tenors.len() * 5
    }

    pub fn is_empty(&self) -> bool {
        self.tenors.is_empty()
    }

    fn spec(&self, t: &TenorCells, i: usize) -> OptionSpec {
        OptionSpec::call(self.spot, t.strikes[i], t.tau, t.r_d, t.r_f)
    }
}

/// Model call prices in surface order, priced sequentially.
pub fn model_prices(model: &ModelParams, cells: &MarketCells, grid: &IntegrationGrid) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(cells.len());
    for t in &cells.tenors {
        out.extend(attari_strip(model, cells.spot, t.tau, t.r_d, t.r_f, &t.strikes, grid)?);
    }
    Ok(out)
}

/// Sum of the chosen error form over all cells, or [`FELLER_PENALTY`].
pub fn cost(model: &ModelParams, cells: &MarketCells, spec: &CostSpec, grid: &IntegrationGrid) -> Result<f64> {
    if !(spec.vega_floor > 0.0) {
        return Err(CalibError::InvalidInput(format!("vega floor {} must be positive", spec.vega_floor)));
    }
    if spec.feller && !model.feller() {
        return Ok(FELLER_PENALTY);
    }
    let prices = model_prices(model, cells, grid)?;
    let mut total = 0.0;
    for (ti, t) in cells.tenors.iter().enumerate() {
        for i in 0..5 {
            let c = prices[ti * 5 + i];
            total += match spec.target {
                CostTarget::VegaWeightedPrice => {
                    let vega = t.vegas[i].max(spec.vega_floor);
                    spec.kind.term(c / vega, t.prices[i] / vega)
                }
                CostTarget::ImpliedVol => spec.kind.term(implied_vol(&cells.spec(t, i), c)?, t.vols[i]),
            };
        }
    }
    Ok(total)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RmseReport {
    /// Implied-vol RMSE; `None` when some model price has no implied vol.
    pub vol: Option<f64>,
    /// RMSE of (C_model − C_market)/vega.
    pub vega: f64,
}

/// Both RMSE flavours over every cell.
pub fn rmse_report(model: &ModelParams, cells: &MarketCells, grid: &IntegrationGrid) -> Result<RmseReport> {
    let prices = model_prices(model, cells, grid)?;
    let n = cells.len() as f64;
    let mut sv = Some(0.0);
    let mut sp = 0.0;
    for (ti, t) in cells.tenors.iter().enumerate() {
        for i in 0..5 {
            let c = prices[ti * 5 + i];
            let e = (c - t.prices[i]) / t.vegas[i];
            sp += e * e;
            sv = match (sv, implied_vol(&cells.spec(t, i), c)) {
                (Some(s), Ok(v)) => Some(s + (v - t.vols[i]).powi(2)),
                _ => None,
            };
        }
    }
    Ok(RmseReport { vol: sv.map(|s| (s / n).sqrt()), vega: (sp / n).sqrt() })
}
