//! Closed-form ω, ρ estimates on a synthetic Heston surface.

use fxsv::estimators::SzIcmForm;
use fxsv::pipeline::{analyze_dates, estimate_date, EstimateMethod, ModelChoice};
use fxsv::pricer::IntegrationGrid;
use fxsv::synthetic::{surface_from_model, MarketContext};
use fxsv::{Factor, ModelParams};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let truth = Factor::new(0.0082, 0.0143, 2.07, 0.3, -0.38);
    let surface =
        surface_from_model(&ModelParams::Heston(truth), &MarketContext::default(), &IntegrationGrid::default())?;
    let a = analyze_dates(&[surface]).pop().unwrap()?;
    let ts = &a.ts_heston;
    println!("variance term structure: v0={:.5} theta={:.5} kappa={:.3}", ts.v0, ts.theta, ts.kappa);
    println!("truth: omega={:.3} rho={:.3}", truth.omega, truth.rho);
    for method in [EstimateMethod::Icm, EstimateMethod::Durrleman, EstimateMethod::Gr, EstimateMethod::Hist] {
        let e = estimate_date(&a, method, ModelChoice::Heston, SzIcmForm::Kernel, &[])?;
        println!(
            "{method:?}: omega={:.3} rho={:.3} flags={:?}",
            e.omega.unwrap_or(f64::NAN),
            e.rho.unwrap_or(f64::NAN),
            e.flags
        );
    }
    Ok(())
}
