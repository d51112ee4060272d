//! Full Heston calibration from the ICM start, with and without the
//! Feller condition.

use fxsv::pipeline::{analyze_dates, calibrate_date, CalibSettings, ModelChoice, StartMethod};
use fxsv::pricer::IntegrationGrid;
use fxsv::synthetic::{surface_from_model, MarketContext};
use fxsv::{Factor, ModelParams};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let truth = ModelParams::Heston(Factor::new(0.0082, 0.0143, 2.07, 0.3, -0.38));
    let surface = surface_from_model(&truth, &MarketContext::default(), &IntegrationGrid::default())?;
    let a = analyze_dates(&[surface]).pop().unwrap()?;
    for feller in [false, true] {
        let settings = CalibSettings { feller, ..CalibSettings::new(ModelChoice::Heston, StartMethod::Icm) };
        let (start, r, _) = calibrate_date(&a, &settings)?;
        println!("feller={feller}");
        println!("  start  {:.5?}", start.params.to_vec());
        println!("  result {:.5?}", r.params.to_vec());
        println!(
            "  rmse_vol={:.2e} iterations={} feller_satisfied={}",
            r.rmse.vol.unwrap_or(f64::NAN),
            r.iterations,
            r.feller_satisfied
        );
    }
    Ok(())
}
