//! From strategy quotes to a delta-pillar smile with strikes.

use chrono::NaiveDate;
use fxsv::market_data::{rates_from_quotes, smile_from_strategies, Tenor, VolSurface};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let date = NaiveDate::from_ymd_opt(2014, 6, 2).unwrap();
    let spot = 1.3650;
    let tenor = Tenor::M3;
    let tau = tenor.year_fraction(date);

    // ATM, RR25, FLY25, RR10, FLY10 in decimal vols.
    let smile = smile_from_strategies(0.0612, -0.0085, 0.0021, -0.0152, 0.0071)?;
    let rates = rates_from_quotes(0.0015, -0.00041, spot, tau)?;
    let slice = VolSurface::make_slice(spot, tenor, tau, rates, &smile)?;

    println!("{} tau={tau:.4} r_d={:.5} r_f={:.5} F={:.5}", tenor.label(), slice.r_d, slice.r_f, slice.forward);
    for n in &slice.nodes {
        println!("{:>4} vol={:.4} strike={:.5}", n.pillar.to_string(), n.vol, n.strike);
    }
    Ok(())
}
