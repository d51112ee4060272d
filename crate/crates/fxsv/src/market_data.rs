//! OTC quote ingestion: strategy quotes to smile nodes, OIS and forward
//! points to rates, delta pillars to strikes.

use chrono::{Months, NaiveDate};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;
use std::io::Read;
use std::path::Path;
use std::str::FromStr;

use crate::normal;

#[derive(Debug, thiserror::Error)]
pub enum MarketError {
    #[error("pillar {pillar} has non-positive vol {vol}")]
    NonPositivePillarVol { pillar: Pillar, vol: f64 },
    #[error("forward {0} is not positive")]
    InvalidForward(f64),
    #[error("delta {delta} gives N^-1 argument {arg} outside (0, 1)")]
    DeltaOutOfRange { delta: f64, arg: f64 },
    #[error("parse error at row {row}, column `{column}`: {message}")]
    Parse { row: usize, column: String, message: String },
    #[error("invariant violated: {0}")]
    InvariantViolation(String),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, MarketError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Tenor {
    #[serde(rename = "1M")]
    M1,
    #[serde(rename = "2M")]
    M2,
    #[serde(rename = "3M")]
    M3,
    #[serde(rename = "6M")]
    M6,
    #[serde(rename = "1Y")]
    Y1,
    #[serde(rename = "2Y")]
    Y2,
}

impl Tenor {
    pub const ALL: [Tenor; 6] = [Tenor::M1, Tenor::M2, Tenor::M3, Tenor::M6, Tenor::Y1, Tenor::Y2];

    pub fn months(self) -> u32 {
        match self {
            Tenor::M1 => 1,
            Tenor::M2 => 2,
            Tenor::M3 => 3,
            Tenor::M6 => 6,
            Tenor::Y1 => 12,
            Tenor::Y2 => 24,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Tenor::M1 => "1M",
            Tenor::M2 => "2M",
            Tenor::M3 => "3M",
            Tenor::M6 => "6M",
            Tenor::Y1 => "1Y",
            Tenor::Y2 => "2Y",
        }
    }

    /// ACT/365 year fraction from `date` to the same day `months()` later
    /// (clamped to month end). No business-day roll is applied.
    pub fn year_fraction(self, date: NaiveDate) -> f64 {
        let expiry = date.checked_add_months(Months::new(self.months())).expect("tenor expiry within calendar range");
        (expiry - date).num_days() as f64 / 365.0
    }
}

impl fmt::Display for Tenor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Tenor {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Tenor::ALL
            .into_iter()
            .find(|t| t.label().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| format!("unknown tenor `{s}`"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Pillar {
    #[serde(rename = "10P")]
    P10,
    #[serde(rename = "25P")]
    P25,
    #[serde(rename = "ATM")]
    Atm,
    #[serde(rename = "25C")]
    C25,
    #[serde(rename = "10C")]
    C10,
}

impl Pillar {
    /// Pillars in increasing strike order.
    pub const ALL: [Pillar; 5] = [Pillar::P10, Pillar::P25, Pillar::Atm, Pillar::C25, Pillar::C10];

    /// Signed pillar delta; the ATM pillar is quoted as a 0.5 call delta.
    pub fn delta(self) -> f64 {
        match self {
            Pillar::P10 => -0.1,
            Pillar::P25 => -0.25,
            Pillar::Atm => 0.5,
            Pillar::C25 => 0.25,
            Pillar::C10 => 0.1,
        }
    }
}

impl fmt::Display for Pillar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Pillar::P10 => "10P",
            Pillar::P25 => "25P",
            Pillar::Atm => "ATM",
            Pillar::C25 => "25C",
            Pillar::C10 => "10C",
        };
        f.write_str(s)
    }
}

/// One mid quote row for a (date, tenor) pair. Vols are decimals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuoteRow {
    pub date: NaiveDate,
    pub tenor: Tenor,
    pub tau: f64,
    pub spot: f64,
    pub ois: f64,
    pub fwd_points: f64,
    /// Explicit outright forward; overrides `spot + fwd_points` when present.
    pub forward: Option<f64>,
    pub atm: f64,
    pub rr25: f64,
    pub fly25: f64,
    pub rr10: f64,
    pub fly10: f64,
}

/// Smile vols in [`Pillar::ALL`] order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmileNodes {
    pub vols: [f64; 5],
}

impl SmileNodes {
    pub fn vol(&self, p: Pillar) -> f64 {
        self.vols[Pillar::ALL.iter().position(|&q| q == p).unwrap()]
    }

    /// Recovers (atm, rr25, fly25, rr10, fly10) from the five vols.
    pub fn to_strategies(&self) -> [f64; 5] {
        let [p10, p25, atm, c25, c10] = self.vols;
        [atm, c25 - p25, 0.5 * (c25 + p25) - atm, c10 - p10, 0.5 * (c10 + p10) - atm]
    }
}

pub fn smile_from_strategies(atm: f64, rr25: f64, fly25: f64, rr10: f64, fly10: f64) -> Result<SmileNodes> {
    let vols =
        [atm + fly10 - 0.5 * rr10, atm + fly25 - 0.5 * rr25, atm, atm + fly25 + 0.5 * rr25, atm + fly10 + 0.5 * rr10];
    for (p, &v) in Pillar::ALL.iter().zip(&vols) {
        if !(v > 0.0) {
            return Err(MarketError::NonPositivePillarVol { pillar: *p, vol: v });
        }
    }
    Ok(SmileNodes { vols })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rates {
    pub r_d: f64,
    pub r_f: f64,
    pub forward: f64,
}

/// Foreign rate from the simple OIS quote, forward from forward points,
/// domestic rate from covered interest parity.
pub fn rates_from_quotes(ois: f64, fwd_points: f64, spot: f64, tau: f64) -> Result<Rates> {
    rates_from_forward(ois, spot + fwd_points, spot, tau)
}

pub fn rates_from_forward(ois: f64, forward: f64, spot: f64, tau: f64) -> Result<Rates> {
    if !(forward > 0.0) {
        return Err(MarketError::InvalidForward(forward));
    }
    if !(spot > 0.0 && tau > 0.0 && 1.0 + ois * tau > 0.0) {
        return Err(MarketError::InvariantViolation(format!(
            "rates need spot > 0, tau > 0 and 1 + ois*tau > 0 (spot {spot}, tau {tau}, ois {ois})"
        )));
    }
    let r_f = (ois * tau).ln_1p() / tau;
    let r_d = r_f + (forward / spot).ln() / tau;
    Ok(Rates { r_d, r_f, forward })
}

pub fn strike_from_delta(spot: f64, r_d: f64, r_f: f64, tau: f64, sigma: f64, delta: f64) -> Result<f64> {
    let arg = delta.abs() * (r_f * tau).exp();
    if !(arg > 0.0 && arg < 1.0) {
        return Err(MarketError::DeltaOutOfRange { delta, arg });
    }
    let sign = if delta < 0.0 { -1.0 } else { 1.0 };
    let sqt = tau.sqrt();
    let fwd = spot * ((r_d - r_f) * tau).exp();
    Ok(fwd * (0.5 * sigma * sigma * tau - sign * sigma * sqt * normal::inv_cdf(arg)).exp())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Node {
    pub pillar: Pillar,
    pub delta: f64,
    pub vol: f64,
    pub strike: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TenorSlice {
    pub tenor: Tenor,
    pub tau: f64,
    pub r_d: f64,
    pub r_f: f64,
    pub forward: f64,
    pub nodes: [Node; 5],
}

impl TenorSlice {
    pub fn smile(&self) -> SmileNodes {
        SmileNodes { vols: self.nodes.map(|n| n.vol) }
    }

    pub fn strikes(&self) -> [f64; 5] {
        self.nodes.map(|n| n.strike)
    }

    pub fn atm(&self) -> &Node {
        &self.nodes[2]
    }
}

/// Implied-vol surface for one date, tenors in increasing maturity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VolSurface {
    pub date: NaiveDate,
    pub spot: f64,
    pub tenors: Vec<TenorSlice>,
}

impl VolSurface {
    pub fn cell_count(&self) -> usize {
        self.tenors.len() * 5
    }

    pub fn slice(&self, tenor: Tenor) -> Option<&TenorSlice> {
        self.tenors.iter().find(|s| s.tenor == tenor)
    }

    /// Builds a slice from smile vols and rates, filling strikes from deltas.
    pub fn make_slice(spot: f64, tenor: Tenor, tau: f64, rates: Rates, smile: &SmileNodes) -> Result<TenorSlice> {
        let mut nodes = [Node { pillar: Pillar::Atm, delta: 0.0, vol: 0.0, strike: 0.0 }; 5];
        for (i, p) in Pillar::ALL.iter().enumerate() {
            let vol = smile.vols[i];
            let strike = strike_from_delta(spot, rates.r_d, rates.r_f, tau, vol, p.delta())?;
            nodes[i] = Node { pillar: *p, delta: p.delta(), vol, strike };
        }
        Ok(TenorSlice { tenor, tau, r_d: rates.r_d, r_f: rates.r_f, forward: rates.forward, nodes })
    }

    pub fn validate(&self) -> Result<()> {
        for s in &self.tenors {
            for w in s.nodes.windows(2) {
                if !(w[0].strike < w[1].strike) {
                    return Err(MarketError::InvariantViolation(format!(
                        "{} {}: strikes not increasing ({} {} >= {} {})",
                        self.date, s.tenor, w[0].pillar, w[0].strike, w[1].pillar, w[1].strike
                    )));
                }
            }
            let parity = self.spot * ((s.r_d - s.r_f) * s.tau).exp() - s.forward;
            if parity.abs() > 1e-12 * self.spot {
                return Err(MarketError::InvariantViolation(format!(
                    "{} {}: forward parity residual {parity:e}",
                    self.date, s.tenor
                )));
            }
        }
        for w in self.tenors.windows(2) {
            if w[0].tenor >= w[1].tenor {
                return Err(MarketError::InvariantViolation(format!("{}: tenors not sorted or duplicated", self.date)));
            }
        }
        Ok(())
    }
}

/// Builds the surface for a set of rows that share one date.
pub fn build_surface(rows: &[QuoteRow]) -> Result<VolSurface> {
    let first = rows.first().ok_or_else(|| MarketError::InvariantViolation("no rows for surface".into()))?;
    let mut sorted: Vec<&QuoteRow> = rows.iter().collect();
    sorted.sort_by_key(|r| r.tenor);
    let mut tenors = Vec::with_capacity(rows.len());
    for r in sorted {
        if r.date != first.date {
            return Err(MarketError::InvariantViolation(format!("mixed dates {} and {}", first.date, r.date)));
        }
        if (r.spot - first.spot).abs() > 1e-12 * first.spot {
            return Err(MarketError::InvariantViolation(format!("{}: spot differs across tenors", r.date)));
        }
        if tenors.iter().any(|s: &TenorSlice| s.tenor == r.tenor) {
            return Err(MarketError::InvariantViolation(format!("duplicate ({}, {})", r.date, r.tenor)));
        }
        if !(r.tau > 0.0) || !(r.atm > 0.0) {
            return Err(MarketError::InvariantViolation(format!("{} {}: need tau > 0 and atm > 0", r.date, r.tenor)));
        }
        let smile = smile_from_strategies(r.atm, r.rr25, r.fly25, r.rr10, r.fly10)?;
        let fwd = r.forward.unwrap_or(r.spot + r.fwd_points);
        let rates = rates_from_forward(r.ois, fwd, r.spot, r.tau)?;
        tenors.push(VolSurface::make_slice(r.spot, r.tenor, r.tau, rates, &smile)?);
    }
    let surface = VolSurface { date: first.date, spot: first.spot, tenors };
    surface.validate()?;
    Ok(surface)
}

/// Groups rows by date and builds one surface per date, in date order.
pub fn build_surfaces(rows: &[QuoteRow]) -> Result<Vec<VolSurface>> {
    let mut by_date: BTreeMap<NaiveDate, Vec<QuoteRow>> = BTreeMap::new();
    for r in rows {
        by_date.entry(r.date).or_default().push(r.clone());
    }
    by_date.values().map(|v| build_surface(v)).collect()
}

pub const CSV_COLUMNS: [&str; 10] =
    ["date", "tenor", "spot", "ois", "fwd_points", "atm", "rr25", "fly25", "rr10", "fly10"];

#[derive(Debug, Clone, Default)]
pub struct Ingested {
    pub rows: Vec<QuoteRow>,
    pub warnings: Vec<String>,
}

pub fn ingest_csv(path: &Path, vols_decimal: bool) -> Result<Ingested> {
    let f = std::fs::File::open(path)?;
    parse_csv(f, vols_decimal)
}

/// Parses the quote CSV. Vols are percentage points unless `vols_decimal`.
/// An optional `forward` column may replace `fwd_points`.
pub fn parse_csv<R: Read>(input: R, vols_decimal: bool) -> Result<Ingested> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let headers = rdr.headers()?.clone();
    if headers.is_empty() {
        return Ok(Ingested::default());
    }
    let col = |name: &str| headers.iter().position(|h| h.eq_ignore_ascii_case(name));
    let forward_col = col("forward");
    let mut idx = [0usize; 10];
    for (i, name) in CSV_COLUMNS.iter().enumerate() {
        idx[i] = match col(name) {
            Some(c) => c,
            None if *name == "fwd_points" && forward_col.is_some() => usize::MAX,
            None => {
                return Err(MarketError::Parse {
                    row: 1,
                    column: (*name).into(),
                    message: "missing header column".into(),
                })
            }
        };
    }
    let scale = if vols_decimal { 1.0 } else { 0.01 };
    let mut out = Ingested::default();
    let mut seen = std::collections::HashSet::new();
    for (n, rec) in rdr.records().enumerate() {
        let row = n + 2;
        let rec = rec?;
        let field = |c: usize, name: &str| -> Result<&str> {
            rec.get(c).ok_or_else(|| MarketError::Parse { row, column: name.into(), message: "missing field".into() })
        };
        let num = |c: usize, name: &str| -> Result<f64> {
            let s = field(c, name)?;
            s.parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(|| MarketError::Parse {
                row,
                column: name.into(),
                message: format!("not a number: `{s}`"),
            })
        };
        let date_s = field(idx[0], "date")?;
        let date = NaiveDate::parse_from_str(date_s, "%Y-%m-%d").map_err(|e| MarketError::Parse {
            row,
            column: "date".into(),
            message: format!("`{date_s}`: {e}"),
        })?;
        let tenor: Tenor = field(idx[1], "tenor")?.parse().map_err(|m| MarketError::Parse {
            row,
            column: "tenor".into(),
            message: m,
        })?;
        if !seen.insert((date, tenor)) {
            return Err(MarketError::InvariantViolation(format!(
                "duplicate (date, tenor) pair ({date}, {tenor}) at row {row}"
            )));
        }
        let forward = match forward_col {
            Some(c) if !field(c, "forward")?.is_empty() => Some(num(c, "forward")?),
            _ => None,
        };
        let fwd_points = if idx[4] == usize::MAX { 0.0 } else { num(idx[4], "fwd_points")? };
        let raw_atm = num(idx[5], "atm")?;
        if vols_decimal && raw_atm > 3.0 {
            out.warnings
                .push(format!("row {row}: atm {raw_atm} looks like percentage points but --vols-decimal is set"));
        } else if !vols_decimal && raw_atm < 0.3 {
            out.warnings.push(format!("row {row}: atm {raw_atm} looks like a decimal vol; pass --vols-decimal if so"));
        }
        out.rows.push(QuoteRow {
            date,
            tenor,
            tau: tenor.year_fraction(date),
            spot: num(idx[2], "spot")?,
            ois: num(idx[3], "ois")?,
            fwd_points,
            forward,
            atm: raw_atm * scale,
            rr25: num(idx[6], "rr25")? * scale,
            fly25: num(idx[7], "fly25")? * scale,
            rr10: num(idx[8], "rr10")? * scale,
            fly10: num(idx[9], "fly10")? * scale,
        });
    }
    Ok(out)
}

/// Writes rows back in the ingest schema (vols in percentage points unless
/// `vols_decimal`). Used to emit synthetic fixtures.
pub fn write_csv<W: std::io::Write>(rows: &[QuoteRow], out: W, vols_decimal: bool) -> Result<()> {
    let scale = if vols_decimal { 1.0 } else { 100.0 };
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_COLUMNS)?;
    for r in rows {
        let pts = r.forward.map(|f| f - r.spot).unwrap_or(r.fwd_points);
        let rec = [
            r.date.to_string(),
            r.tenor.to_string(),
            format!("{}", r.spot),
            format!("{}", r.ois),
            format!("{}", pts),
            format!("{}", r.atm * scale),
            format!("{}", r.rr25 * scale),
            format!("{}", r.fly25 * scale),
            format!("{}", r.rr10 * scale),
            format!("{}", r.fly10 * scale),
        ];
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}
