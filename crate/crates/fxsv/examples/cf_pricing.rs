//! Characteristic functions and the three Fourier pricers side by side.

use fxsv::charfn::J;
use fxsv::pricer::{
    attari_price, carr_madan_price, gk_price, heston_two_integral_price, implied_vol, IntegrationGrid, OptionSpec,
};
use fxsv::{Factor, ModelParams, TwoFactorParams};
use num_complex::Complex64;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let (spot, tau, r_d, r_f): (f64, f64, f64, f64) = (1.365, 0.5, 0.003, 0.0015);
    let h = Factor::new(0.0082, 0.0143, 2.07, 0.3, -0.38);
    let models = [
        ("heston", ModelParams::Heston(h)),
        ("sz", ModelParams::SchobelZhu(Factor::new(0.09, 0.12, 2.0, 0.15, -0.38))),
        (
            "bates2f",
            ModelParams::Bates2F(TwoFactorParams::bates(
                Factor::new(0.0041, 0.007, 1.5, 0.2, -0.5),
                Factor::new(0.0041, 0.008, 3.0, 0.25, -0.2),
            )),
        ),
        (
            "ouou",
            ModelParams::Ouou(TwoFactorParams::ouou(
                Factor::new(0.065, 0.08, 1.5, 0.1, -0.4),
                Factor::new(0.065, 0.085, 2.5, 0.12, 0.1),
            )),
        ),
    ];

    let forward = spot * ((r_d - r_f) * tau).exp();
    let fine = IntegrationGrid::fine();
    println!("{:<8} {:>12} {:>10} {:>10} {:>10} {:>8}", "model", "|phi(-i)-F|", "attari", "gil-pel", "carr-mad", "iv");
    for (name, m) in &models {
        let at_minus_i = m.cf(Complex64::new(0.0, -1.0), spot.ln(), tau, r_d, r_f, J::Two)?;
        let spec = OptionSpec::call(spot, 1.38, tau, r_d, r_f);
        let a = attari_price(m, &spec, &IntegrationGrid::default())?;
        let g = heston_two_integral_price(m, &spec, &fine)?;
        let c = carr_madan_price(m, &spec, 1.5, &fine)?;
        println!(
            "{name:<8} {:>12.2e} {a:>10.7} {g:>10.7} {c:>10.7} {:>8.4}",
            (at_minus_i - forward).norm(),
            implied_vol(&spec, a)?
        );
    }

    // Vanishing vol-of-vol collapses Heston to Garman-Kohlhagen.
    let flat = ModelParams::Heston(Factor::new(0.01, 0.01, 2.0, 1e-6, 0.0));
    let spec = OptionSpec::call(spot, 1.38, tau, r_d, r_f);
    println!(
        "degenerate heston {:.8} vs gk {:.8}",
        attari_price(&flat, &spec, &IntegrationGrid::default())?,
        gk_price(&spec, 0.1)
    );
    Ok(())
}
