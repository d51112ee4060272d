//! Fitting (ν0, θ, κ) to an implied-variance term structure.

use fxsv::calibrate::calibrate_variance_ts;
use fxsv::moments::heston_total_variance;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let taus = [1.0 / 12.0, 2.0 / 12.0, 0.25, 0.5, 1.0, 2.0];
    let (v0, theta, kappa) = (0.0082, 0.0143, 2.07);
    let target: Vec<f64> = taus.iter().map(|&t| heston_total_variance(v0, theta, kappa, t)).collect();
    let fit = calibrate_variance_ts(&taus, &target, None)?;
    println!("truth v0={v0} theta={theta} kappa={kappa}");
    println!(
        "fit   v0={:.6} theta={:.6} kappa={:.4} after {} iterations, cost {:.2e}",
        fit.v0, fit.theta, fit.kappa, fit.iterations, fit.cost
    );
    Ok(())
}
