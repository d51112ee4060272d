//! European vanilla pricing: Garman-Kohlhagen in closed form, and three
//! Fourier inversions of a model characteristic function.
//!
//! All three inversions integrate over u = e^w with the trapezoid rule on
//! a uniform w grid. Attari is the production method; Gil-Pelaez and
//! Carr-Madan exist to cross-check it and default to a finer grid.

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::charfn::{CfError, ModelParams, J};
use crate::market_data::{Pillar, Tenor, VolSurface};
use crate::normal;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PriceError {
    #[error(transparent)]
    Cf(#[from] CfError),
    #[error("price {price} outside the attainable range [{lo}, {hi}] for vols in [1e-6, 5]")]
    OutOfBounds { price: f64, lo: f64, hi: f64 },
    #[error("damping alpha {0} must be positive with a finite moment")]
    AlphaInvalid(f64),
    #[error("invalid integration grid: {0}")]
    InvalidGrid(String),
}

pub type Result<T> = std::result::Result<T, PriceError>;

const I: C64 = C64::new(0.0, 1.0);

/// Uniform grid in w = ln u.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegrationGrid {
    pub w_min: f64,
    pub w_max: f64,
    pub dw: f64,
}

impl Default for IntegrationGrid {
    /// [-17, 5] with step 0.4: 56 nodes.
    fn default() -> Self {
        IntegrationGrid { w_min: -17.0, w_max: 5.0, dw: 0.4 }
    }
}

impl IntegrationGrid {
    /// Finer grid used by the cross-check pricers.
    pub fn fine() -> Self {
        IntegrationGrid { w_min: -20.0, w_max: 7.0, dw: 0.01 }
    }

    pub fn new(w_min: f64, w_max: f64, dw: f64) -> Result<Self> {
        let g = IntegrationGrid { w_min, w_max, dw };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.w_min < self.w_max) || !(self.dw > 0.0) || !self.w_min.is_finite() || !self.w_max.is_finite() {
            return Err(PriceError::InvalidGrid(format!("{self:?}")));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        ((self.w_max - self.w_min) / self.dw + 1e-9).floor() as usize + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Nodes u_i = e^{w_i} and trapezoid weights for ∫ f(u) du = ∫ f(e^w) e^w dw.
    pub fn nodes(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        let n = self.len();
        (0..n).map(move |i| {
            let w = self.w_min + i as f64 * self.dw;
            let u = w.exp();
            let end = if i == 0 || i + 1 == n { 0.5 } else { 1.0 };
            (u, end * self.dw * u)
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Call,
    Put,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptionSpec {
    pub spot: f64,
    pub strike: f64,
    pub tau: f64,
    pub r_d: f64,
    pub r_f: f64,
    pub side: Side,
}

impl OptionSpec {
    pub fn call(spot: f64, strike: f64, tau: f64, r_d: f64, r_f: f64) -> Self {
        OptionSpec { spot, strike, tau, r_d, r_f, side: Side::Call }
    }

    pub fn with_side(self, side: Side) -> Self {
        OptionSpec { side, ..self }
    }

    pub fn forward(&self) -> f64 {
        self.spot * ((self.r_d - self.r_f) * self.tau).exp()
    }

    pub fn df_d(&self) -> f64 {
        (-self.r_d * self.tau).exp()
    }

    /// e^{-r_d τ}(F − K), the call-minus-put value.
    pub fn parity(&self) -> f64 {
        self.df_d() * (self.forward() - self.strike)
    }

    fn price_from_call(&self, call: f64) -> f64 {
        match self.side {
            Side::Call => call,
            Side::Put => call - self.parity(),
        }
    }
}

pub fn gk_price(spec: &OptionSpec, sigma: f64) -> f64 {
    let sd = sigma * spec.tau.sqrt();
    let d1 = ((spec.spot / spec.strike).ln() + (spec.r_d - spec.r_f) * spec.tau) / sd + 0.5 * sd;
    let d2 = d1 - sd;
    let fwd_leg = spec.spot * (-spec.r_f * spec.tau).exp();
    let k_leg = spec.strike * spec.df_d();
    match spec.side {
        Side::Call => fwd_leg * normal::cdf(d1) - k_leg * normal::cdf(d2),
        Side::Put => k_leg * normal::cdf(-d2) - fwd_leg * normal::cdf(-d1),
    }
}

/// K e^{-r_d τ} √τ φ(d₂); identical for calls and puts.
pub fn bs_vega(spec: &OptionSpec, sigma: f64) -> f64 {
    let sd = sigma * spec.tau.sqrt();
    let d2 = ((spec.spot / spec.strike).ln() + (spec.r_d - spec.r_f) * spec.tau) / sd - 0.5 * sd;
    spec.strike * spec.df_d() * spec.tau.sqrt() * normal::pdf(d2)
}

const VOL_LO: f64 = 1e-6;
const VOL_HI: f64 = 5.0;

/// Bisection on [1e-6, 5].
pub fn implied_vol(spec: &OptionSpec, price: f64) -> Result<f64> {
    let lo_p = gk_price(spec, VOL_LO);
    let hi_p = gk_price(spec, VOL_HI);
    let tol = 1e-12 * spec.spot;
    if !(price >= lo_p - tol && price <= hi_p + tol) {
        return Err(PriceError::OutOfBounds { price, lo: lo_p, hi: hi_p });
    }
    let (mut lo, mut hi) = (VOL_LO, VOL_HI);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let p = gk_price(spec, mid);
        if (p - price).abs() <= 1e-15 * spec.spot || hi - lo < 1e-15 {
            return Ok(mid);
        }
        if p < price {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// φ₂ evaluated at the grid nodes for one (model, tenor); reused across strikes.
struct CfSamples {
    nodes: Vec<(f64, f64, C64)>,
}

impl CfSamples {
    fn normalized(model: &ModelParams, tau: f64, r_d: f64, r_f: f64, grid: &IntegrationGrid) -> Result<Self> {
        // Characteristic function of ln(S_T/S_0) − (r_d − r_f)τ.
        let mu = r_d - r_f;
        let nodes = grid
            .nodes()
            .map(|(u, wt)| {
                let uc = C64::new(u, 0.0);
                let phi = model.cf(uc, 0.0, tau, r_d, r_f, J::Two)? * (-I * u * mu * tau).exp();
                Ok((u, wt, phi))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(CfSamples { nodes })
    }
}

/// Attari single-integral call prices (put via parity) for several
/// strikes sharing one tenor.
pub fn attari_strip(
    model: &ModelParams,
    spot: f64,
    tau: f64,
    r_d: f64,
    r_f: f64,
    strikes: &[f64],
    grid: &IntegrationGrid,
) -> Result<Vec<f64>> {
    let cf = CfSamples::normalized(model, tau, r_d, r_f, grid)?;
    let kernel: Vec<(f64, C64)> =
        cf.nodes.iter().map(|&(u, wt, phi)| (u, (1.0 - I / u) / (1.0 + u * u) * phi * wt)).collect();
    let fwd_leg = spot * (-r_f * tau).exp();
    let df = (-r_d * tau).exp();
    Ok(strikes
        .iter()
        .map(|&k| {
            let l = (k / spot).ln() - (r_d - r_f) * tau;
            let s: f64 = kernel.iter().map(|&(u, z)| ((-I * u * l).exp() * z).re).sum();
            fwd_leg - k * df * (0.5 + s / PI)
        })
        .collect())
}

pub fn attari_price(model: &ModelParams, spec: &OptionSpec, grid: &IntegrationGrid) -> Result<f64> {
    let c = attari_strip(model, spec.spot, spec.tau, spec.r_d, spec.r_f, &[spec.strike], grid)?[0];
    Ok(spec.price_from_call(c))
}

/// Attari price for an arbitrary φ₂ of ln S_T (with x0 = ln S).
pub fn attari_price_cf<F>(cf: F, spec: &OptionSpec, grid: &IntegrationGrid) -> Result<f64>
where
    F: Fn(C64) -> std::result::Result<C64, CfError>,
{
    let x0 = spec.spot.ln();
    let mu = spec.r_d - spec.r_f;
    let l = (spec.strike / spec.spot).ln() - mu * spec.tau;
    let mut s = 0.0;
    for (u, wt) in grid.nodes() {
        let phi = cf(C64::new(u, 0.0))? * (-I * u * (x0 + mu * spec.tau)).exp();
        s += ((-I * u * l).exp() * (1.0 - I / u) / (1.0 + u * u) * phi).re * wt;
    }
    let c = spec.spot * (-spec.r_f * spec.tau).exp() - spec.strike * spec.df_d() * (0.5 + s / PI);
    Ok(spec.price_from_call(c))
}

/// Gil-Pelaez probabilities (P₁, P₂); P₁ uses φ₂(u − i)/φ₂(−i).
pub fn gil_pelaez_probabilities(model: &ModelParams, spec: &OptionSpec, grid: &IntegrationGrid) -> Result<(f64, f64)> {
    let (x0, t, rd, rf) = (spec.spot.ln(), spec.tau, spec.r_d, spec.r_f);
    let k = spec.strike.ln();
    let norm = model.cf(C64::new(0.0, -1.0), x0, t, rd, rf, J::Two)?;
    let (mut i1, mut i2) = (0.0, 0.0);
    for (u, wt) in grid.nodes() {
        let uc = C64::new(u, 0.0);
        let ek = (-I * u * k).exp() / (I * u);
        let phi1 = model.cf(uc - I, x0, t, rd, rf, J::Two)? / norm;
        let phi2 = model.cf(uc, x0, t, rd, rf, J::Two)?;
        i1 += (ek * phi1).re * wt;
        i2 += (ek * phi2).re * wt;
    }
    Ok((0.5 + i1 / PI, 0.5 + i2 / PI))
}

pub fn heston_two_integral_price(model: &ModelParams, spec: &OptionSpec, grid: &IntegrationGrid) -> Result<f64> {
    let (p1, p2) = gil_pelaez_probabilities(model, spec, grid)?;
    let c = spec.spot * (-spec.r_f * spec.tau).exp() * p1 - spec.strike * spec.df_d() * p2;
    Ok(spec.price_from_call(c))
}

pub const DEFAULT_ALPHA: f64 = 1.5;

pub fn carr_madan_price(model: &ModelParams, spec: &OptionSpec, alpha: f64, grid: &IntegrationGrid) -> Result<f64> {
    if !(alpha > 0.0) {
        return Err(PriceError::AlphaInvalid(alpha));
    }
    let (x0, t, rd, rf) = (spec.spot.ln(), spec.tau, spec.r_d, spec.r_f);
    let shift = model.cf(C64::new(0.0, -(alpha + 1.0)), x0, t, rd, rf, J::Two)?;
    if !(shift.re.is_finite() && shift.norm() > 0.0) {
        return Err(PriceError::AlphaInvalid(alpha));
    }
    let k = spec.strike.ln();
    let df = spec.df_d();
    let mut s = 0.0;
    for (v, wt) in grid.nodes() {
        let vc = C64::new(v, 0.0);
        let phi = model.cf(vc - (alpha + 1.0) * I, x0, t, rd, rf, J::Two)?;
        let den = C64::new(alpha * alpha + alpha - v * v, (2.0 * alpha + 1.0) * v);
        s += ((-I * v * k).exp() * df * phi / den).re * wt;
    }
    let c = (-alpha * k).exp() / PI * s;
    Ok(spec.price_from_call(c))
}

/// One priced surface cell.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CellPrice {
    pub tenor: Tenor,
    pub pillar: Pillar,
    pub strike: f64,
    pub market_vol: f64,
    pub market_price: f64,
    pub vega: f64,
    pub model_price: f64,
    pub model_vol: Option<f64>,
}

/// Market and model call prices for every cell, with market vega.
/// `with_vols` also inverts model implied vols (slower).
pub fn surface_prices(
    model: &ModelParams,
    surface: &VolSurface,
    grid: &IntegrationGrid,
    with_vols: bool,
) -> Result<Vec<CellPrice>> {
    let rows: Result<Vec<Vec<CellPrice>>> = surface
        .tenors
        .par_iter()
        .map(|s| {
            let strikes = s.strikes();
            let model_prices = attari_strip(model, surface.spot, s.tau, s.r_d, s.r_f, &strikes, grid)?;
            s.nodes
                .iter()
                .zip(model_prices)
                .map(|(n, mp)| {
                    let spec = OptionSpec::call(surface.spot, n.strike, s.tau, s.r_d, s.r_f);
                    let model_vol = if with_vols { implied_vol(&spec, mp).ok() } else { None };
                    Ok(CellPrice {
                        tenor: s.tenor,
                        pillar: n.pillar,
                        strike: n.strike,
                        market_vol: n.vol,
                        market_price: gk_price(&spec, n.vol),
                        vega: bs_vega(&spec, n.vol),
                        model_price: mp,
                        model_vol,
                    })
                })
                .collect()
        })
        .collect();
    Ok(rows?.into_iter().flatten().collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::charfn::Factor;

    fn spec() -> OptionSpec {
        OptionSpec::call(100.0, 100.0, 1.0, 0.0, 0.0)
    }

    #[test]
    fn grid_has_56_nodes() {
        assert_eq!(IntegrationGrid::default().len(), 56);
        let last = IntegrationGrid::default().nodes().last().unwrap().0;
        assert!((last - 5f64.exp()).abs() < 1e-9);
    }

    #[test]
    fn gk_reference_value() {
        // 100 (2Φ(0.1) − 1) with Φ(0.1) = 0.539827837277029 (erf table)
        let c = gk_price(&spec(), 0.2);
        assert!((c - 100.0 * (2.0 * 0.539_827_837_277_029 - 1.0)).abs() < 1e-10, "{c}");
        assert!((c - 7.9656).abs() < 1e-4);
    }

    #[test]
    fn gk_limits() {
        let s = OptionSpec::call(100.0, 90.0, 0.5, 0.03, 0.01);
        assert!((gk_price(&s, 1e-9) - s.parity()).abs() < 1e-10);
        let s0 = OptionSpec::call(100.0, 1e-12, 0.5, 0.03, 0.01);
        assert!((gk_price(&s0, 0.2) - 100.0 * (-0.005f64).exp()).abs() < 1e-9);
        let p = s.with_side(Side::Put);
        assert!((gk_price(&s, 0.13) - gk_price(&p, 0.13) - s.parity()).abs() < 1e-12);
    }

    #[test]
    fn implied_vol_round_trip_and_bounds() {
        let s = OptionSpec::call(1.3, 1.35, 0.25, 0.01, 0.003);
        let p = gk_price(&s, 0.1234);
        assert!((implied_vol(&s, p).unwrap() - 0.1234).abs() < 1e-8);
        let itm = OptionSpec::call(1.3, 1.1, 0.25, 0.01, 0.003);
        assert!(matches!(implied_vol(&itm, 0.5 * itm.parity()), Err(PriceError::OutOfBounds { .. })));
        // Brenner-Subrahmanyam: C ≈ 0.4 S σ √τ.
        let atm = OptionSpec::call(100.0, 100.0, 0.5, 0.0, 0.0);
        let v = implied_vol(&atm, 0.4 * 100.0 * 0.15 * 0.5f64.sqrt()).unwrap();
        assert!((v / 0.15 - 1.0).abs() < 0.01, "{v}");
    }

    #[test]
    fn vega_properties() {
        let s = OptionSpec::call(1.3, 1.32, 0.5, 0.012, 0.004);
        let h = 1e-5;
        let fd = (gk_price(&s, 0.11 + h) - gk_price(&s, 0.11 - h)) / (2.0 * h);
        assert!((fd - bs_vega(&s, 0.11)).abs() < 1e-8);
        assert_eq!(bs_vega(&s, 0.11), bs_vega(&s.with_side(Side::Put), 0.11));
        let atm = OptionSpec { strike: s.forward(), ..s };
        for k in [1.2, 1.25, 1.28, 1.35, 1.4] {
            assert!(bs_vega(&OptionSpec { strike: k, ..s }, 0.11) < bs_vega(&atm, 0.11) * 1.0001);
        }
        assert!(bs_vega(&OptionSpec { tau: 1e-12, ..s }, 0.11) < 1e-5);
    }

    #[test]
    fn attari_black_scholes_limit() {
        let sig = 0.1f64;
        let m = ModelParams::Heston(Factor::new(sig * sig, sig * sig, 1.5, 1e-6, -0.3));
        for tau in [1.0 / 12.0, 0.5, 2.0] {
            for k in [1.2, 1.3, 1.4] {
                let s = OptionSpec::call(1.3, k, tau, 0.01, 0.004);
                let a = attari_price(&m, &s, &IntegrationGrid::default()).unwrap();
                assert!((a - gk_price(&s, sig)).abs() < 1e-5, "tau {tau} k {k}: {a} vs {}", gk_price(&s, sig));
            }
        }
    }
}
