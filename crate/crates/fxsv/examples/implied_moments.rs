//! Model-free implied variance and central moments of a five-pillar strip.

use fxsv::moments::{implied_moment_set, implied_variance_vix, Strip};
use fxsv::pricer::IntegrationGrid;
use fxsv::synthetic::{surface_from_model, MarketContext};
use fxsv::{Factor, ModelParams};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let model = ModelParams::Heston(Factor::new(0.0082, 0.0143, 2.07, 0.3, -0.38));
    let surface = surface_from_model(&model, &MarketContext::default(), &IntegrationGrid::default())?;
    println!("tenor      V2    sqrt(V2)     skew     kurt");
    for s in &surface.tenors {
        let strip = Strip::from_slice(surface.spot, s);
        let v2 = implied_variance_vix(&strip)?;
        let m = implied_moment_set(&strip)?;
        println!("{:>5} {:.6} {:>10.4} {:>8.4} {:>8.4}", s.tenor.to_string(), v2, v2.sqrt(), m.skew, m.kurt);
    }
    Ok(())
}
