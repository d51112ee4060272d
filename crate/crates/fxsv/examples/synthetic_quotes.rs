//! Writes a quote CSV generated by a Heston model whose parameters drift
//! slowly from day to day.
//!
//! cargo run --release --example synthetic_quotes -- <days> <out.csv>

use chrono::Days;
use fxsv::market_data::{write_csv, Tenor};
use fxsv::pricer::IntegrationGrid;
use fxsv::synthetic::{quotes_from_model, MarketContext};
use fxsv::{Factor, ModelParams};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().collect();
    let days: u64 = args.get(1).map(|s| s.parse()).transpose()?.unwrap_or(5);
    let path = args.get(2).cloned().unwrap_or_else(|| "quotes.csv".into());

    let base = MarketContext::default();
    let mut rows = Vec::new();
    for d in 0..days {
        let x = d as f64;
        let ctx = MarketContext {
            date: base.date.checked_add_days(Days::new(d)).unwrap(),
            spot: base.spot * (1.0 + 0.002 * (0.7 * x).sin()),
            ..base
        };
        let v0 = 0.0082 * (1.0 + 0.15 * (0.5 * x).sin());
        let model = ModelParams::Heston(Factor::new(v0, 0.0143, 2.07, 0.3, -0.38 + 0.02 * (0.3 * x).cos()));
        rows.extend(quotes_from_model(&model, &ctx, &Tenor::ALL, &IntegrationGrid::default())?);
    }
    write_csv(&rows, std::fs::File::create(&path)?, false)?;
    println!("wrote {} rows to {path}", rows.len());
    Ok(())
}
