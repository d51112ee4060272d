//! Dispersion of (ν0, θ, κ) across cost functions, on an attainable and
//! on a perturbed surface.

use fxsv::calibrate::{calibration_risk, CostKind, NelderMeadConfig};
use fxsv::market_data::VolSurface;
use fxsv::pricer::IntegrationGrid;
use fxsv::synthetic::{surface_from_model, surface_from_vols, MarketContext};
use fxsv::{Factor, ModelParams};

/// Same market, smile vols moved by up to 20bp and strikes rebuilt.
fn bump(surface: &VolSurface) -> VolSurface {
    let vols: Vec<_> = surface
        .tenors
        .iter()
        .enumerate()
        .map(|(i, t)| (t.tenor, std::array::from_fn(|j| t.nodes[j].vol + 0.002 * ((3 * i + j) as f64).sin())))
        .collect();
    surface_from_vols(&MarketContext::default(), &vols).expect("bumped smile stays valid")
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let grid = IntegrationGrid::default();
    let truth = ModelParams::Heston(Factor::new(0.0082, 0.0143, 2.07, 0.3, -0.38));
    let surface = surface_from_model(&truth, &MarketContext::default(), &grid)?;
    let kinds = [CostKind::Mse, CostKind::Mae, CostKind::Mape];
    let nm = NelderMeadConfig::calibration();
    for (label, s) in [("attainable", surface.clone()), ("perturbed", bump(&surface))] {
        let r = calibration_risk(&s, &truth, &kinds, &nm, &grid)?;
        println!("{label:<10} risk v0={:.2e} theta={:.2e} kappa={:.2e}", r.v0, r.theta, r.kappa);
    }
    Ok(())
}
