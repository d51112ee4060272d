//! Calibration risk: spread of (ν0, θ, κ) across cost functions with ω and
//! ρ held fixed.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::cost::{cost, CostKind, CostSpec, MarketCells};
use super::{nelder_mead, CalibError, NelderMeadConfig, ParamMap, Result};
use crate::charfn::ModelParams;
use crate::market_data::VolSurface;
use crate::pricer::IntegrationGrid;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationRisk {
    pub v0: f64,
    pub theta: f64,
    pub kappa: f64,
    /// One calibrated parameter set per cost kind, in input order.
    pub fits: Vec<(CostKind, ModelParams)>,
}

/// Max pairwise absolute difference of the free parameters over
/// calibrations with each cost in `kinds` (MSE, MAE, MAPE by default).
pub fn calibration_risk(
    surface: &VolSurface,
    base: &ModelParams,
    kinds: &[CostKind],
    nm: &NelderMeadConfig,
    grid: &IntegrationGrid,
) -> Result<CalibrationRisk> {
    if base.kind().factor_count() != 1 {
        return Err(CalibError::InvalidInput("calibration risk is defined for one-factor models".into()));
    }
    let cells = MarketCells::new(surface);
    let map = ParamMap::subset(base, &[0, 1, 2]);
    let fits = kinds
        .par_iter()
        .map(|&kind| {
            let spec = CostSpec::new(kind);
            let obj = |z: &[f64]| cost(&map.model(z), &cells, &spec, grid).unwrap_or(f64::INFINITY);
            let r = nelder_mead(obj, &map.start(), nm)?;
            Ok((kind, map.model(&r.x)))
        })
        .collect::<Result<Vec<_>>>()?;
    let spread = |i: usize| {
        let mut m = 0.0f64;
        for a in &fits {
            for b in &fits {
                m = m.max((a.1.to_vec()[i] - b.1.to_vec()[i]).abs());
            }
        }
        m
    };
    Ok(CalibrationRisk { v0: spread(0), theta: spread(1), kappa: spread(2), fits })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::charfn::Factor;
    use crate::synthetic::{surface_from_model, MarketContext};

    #[test]
    fn identical_costs_give_zero() {
        let p = ModelParams::Heston(Factor::new(0.0082, 0.0143, 2.07, 0.3, -0.38));
        let s = surface_from_model(&p, &MarketContext::default(), &IntegrationGrid::default()).unwrap();
        let start = ModelParams::Heston(Factor::new(0.01, 0.012, 1.5, 0.3, -0.38));
        let nm = NelderMeadConfig::default().with_max_iter(200);
        let r = calibration_risk(&s, &start, &[CostKind::Mae; 3], &nm, &IntegrationGrid::default()).unwrap();
        assert_eq!((r.v0, r.theta, r.kappa), (0.0, 0.0, 0.0));
    }
}
