//! Model-generated quote sets. Each pillar vol solves σ = IV_model(K(σ, δ)),
//! so the resulting surface is exactly attainable by the generating model
//! under the production pricer.

use chrono::NaiveDate;

use crate::charfn::ModelParams;
use crate::market_data::{self, Pillar, QuoteRow, Rates, SmileNodes, Tenor, VolSurface};
use crate::pricer::{self, IntegrationGrid, OptionSpec};

#[derive(Debug, thiserror::Error)]
pub enum SyntheticError {
    #[error(transparent)]
    Price(#[from] pricer::PriceError),
    #[error(transparent)]
    Market(#[from] market_data::MarketError),
    #[error("pillar vol fixed point did not converge for {tenor} {pillar}")]
    NoConvergence { tenor: Tenor, pillar: Pillar },
}

/// Flat market context shared by all tenors of a synthetic date.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarketContext {
    pub date: NaiveDate,
    pub spot: f64,
    /// Foreign simple OIS rate.
    pub ois: f64,
    /// r_d − r_f, continuously compounded.
    pub carry: f64,
}

impl Default for MarketContext {
    fn default() -> Self {
        MarketContext { date: NaiveDate::from_ymd_opt(2014, 6, 2).unwrap(), spot: 1.3650, ois: 0.0015, carry: -0.0012 }
    }
}

impl MarketContext {
    pub fn rates(&self, tenor: Tenor) -> (f64, Rates) {
        let tau = tenor.year_fraction(self.date);
        let forward = self.spot * (self.carry * tau).exp();
        let rates = market_data::rates_from_forward(self.ois, forward, self.spot, tau).expect("valid context");
        (tau, rates)
    }
}

/// Model smile at the five delta pillars of one tenor.
pub fn model_smile(
    model: &ModelParams,
    spot: f64,
    tau: f64,
    rates: &Rates,
    grid: &IntegrationGrid,
) -> Result<[f64; 5], (Pillar, SyntheticError)> {
    let mut vols = [0.0; 5];
    let mut guess = 0.1;
    for (i, p) in [Pillar::Atm, Pillar::C25, Pillar::C10, Pillar::P25, Pillar::P10].into_iter().enumerate() {
        if i == 3 {
            guess = vols[2];
        }
        let slot = Pillar::ALL.iter().position(|&q| q == p).unwrap();
        let mut sigma = guess;
        let mut done = false;
        for _ in 0..200 {
            let k = market_data::strike_from_delta(spot, rates.r_d, rates.r_f, tau, sigma, p.delta())
                .map_err(|e| (p, e.into()))?;
            let c =
                pricer::attari_strip(model, spot, tau, rates.r_d, rates.r_f, &[k], grid).map_err(|e| (p, e.into()))?[0];
            let next = pricer::implied_vol(&OptionSpec::call(spot, k, tau, rates.r_d, rates.r_f), c)
                .map_err(|e| (p, e.into()))?;
            let step = next - sigma;
            sigma = next;
            if step.abs() < 1e-13 {
                done = true;
                break;
            }
        }
        if !done {
            return Err((p, SyntheticError::NoConvergence { tenor: Tenor::M1, pillar: p }));
        }
        vols[slot] = sigma;
        guess = sigma;
    }
    Ok(vols)
}

/// Quote rows for every tenor in `tenors`, generated by `model`.
pub fn quotes_from_model(
    model: &ModelParams,
    ctx: &MarketContext,
    tenors: &[Tenor],
    grid: &IntegrationGrid,
) -> Result<Vec<QuoteRow>, SyntheticError> {
    tenors
        .iter()
        .map(|&tenor| {
            let (tau, rates) = ctx.rates(tenor);
            let vols = model_smile(model, ctx.spot, tau, &rates, grid).map_err(|(pillar, e)| match e {
                SyntheticError::NoConvergence { .. } => SyntheticError::NoConvergence { tenor, pillar },
                other => other,
            })?;
            Ok(quote_row(ctx, tenor, tau, &rates, &SmileNodes { vols }))
        })
        .collect()
}

pub fn quote_row(ctx: &MarketContext, tenor: Tenor, tau: f64, rates: &Rates, smile: &SmileNodes) -> QuoteRow {
    let [atm, rr25, fly25, rr10, fly10] = smile.to_strategies();
    QuoteRow {
        date: ctx.date,
        tenor,
        tau,
        spot: ctx.spot,
        ois: ctx.ois,
        fwd_points: rates.forward - ctx.spot,
        forward: Some(rates.forward),
        atm,
        rr25,
        fly25,
        rr10,
        fly10,
    }
}

/// Surface on all six tenors generated by `model`.
pub fn surface_from_model(
    model: &ModelParams,
    ctx: &MarketContext,
    grid: &IntegrationGrid,
) -> Result<VolSurface, SyntheticError> {
    let rows = quotes_from_model(model, ctx, &Tenor::ALL, grid)?;
    Ok(market_data::build_surface(&rows)?)
}

/// Surface with given smile vols per tenor (no model involved).
pub fn surface_from_vols(ctx: &MarketContext, vols: &[(Tenor, [f64; 5])]) -> Result<VolSurface, SyntheticError> {
    let rows: Vec<QuoteRow> = vols
        .iter()
        .map(|&(tenor, v)| {
            let (tau, rates) = ctx.rates(tenor);
            quote_row(ctx, tenor, tau, &rates, &SmileNodes { vols: v })
        })
        .collect();
    Ok(market_data::build_surface(&rows)?)
}

/// Flat smile at `sigma` on all six tenors.
pub fn flat_surface(ctx: &MarketContext, sigma: f64) -> VolSurface {
    let vols: Vec<_> = Tenor::ALL.iter().map(|&t| (t, [sigma; 5])).collect();
    surface_from_vols(ctx, &vols).expect("flat surface is valid")
}
