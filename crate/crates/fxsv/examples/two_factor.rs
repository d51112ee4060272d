//! Two-factor round trips: Bates2F from EVP and two-stage starts, OUOU
//! from the MEVP start.

use fxsv::pipeline::{analyze_dates, calibrate_date, CalibSettings, ModelChoice, StartMethod};
use fxsv::pricer::IntegrationGrid;
use fxsv::synthetic::{surface_from_model, MarketContext};
use fxsv::{Factor, ModelParams, TwoFactorParams};

fn round_trip(truth: &ModelParams, model: ModelChoice, start: StartMethod) -> Result<(), Box<dyn std::error::Error>> {
    let surface = surface_from_model(truth, &MarketContext::default(), &IntegrationGrid::default())?;
    let a = analyze_dates(&[surface]).pop().unwrap()?;
    let (_, r, stage1) = calibrate_date(&a, &CalibSettings::new(model, start))?;
    print!(
        "{} from {}: rmse_vol={:.2e} iterations={}",
        model.label(),
        start.label(),
        r.rmse.vol.unwrap_or(f64::NAN),
        r.iterations
    );
    if let Some(s) = stage1 {
        print!(" (symmetric stage: rmse_vol={:.2e})", s.rmse.vol.unwrap_or(f64::NAN));
    }
    println!();
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let bates = ModelParams::Bates2F(TwoFactorParams::bates(
        Factor::new(0.005, 0.006, 2.0, 0.25, -0.6),
        Factor::new(0.003, 0.009, 1.0, 0.12, 0.2),
    ));
    round_trip(&bates, ModelChoice::Bates2F, StartMethod::Evp)?;
    round_trip(&bates, ModelChoice::Bates2F, StartMethod::Twostage)?;

    // The MEVP start pins ρ₁, ρ₂ at ±0.99, so the truth lies in that family.
    let ouou = ModelParams::Ouou(TwoFactorParams::ouou(
        Factor::new(0.07, 0.075, 2.0, 0.1, 0.99),
        Factor::new(0.065, 0.07, 2.0, 0.16, -0.99),
    ));
    round_trip(&ouou, ModelChoice::Ouou, StartMethod::Mevp)?;
    Ok(())
}
